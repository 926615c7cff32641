#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include <Eigen/Dense>

namespace biphoton {

using Complex = std::complex<double>;
using Vector2c = Eigen::Vector2cd;
using Vector4c = Eigen::Vector4cd;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;

// Global units: time in ps, energy in ueV.
namespace constants {
inline constexpr double kHbar = 658.2119569;  // ueV * ps
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
// FWHM = 2 sqrt(2 ln 2) sigma for a Gaussian.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;
}  // namespace constants

/// Thrown for arguments that violate an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Phase acquired in the intermediate exciton state after delay `tau_ps`.
inline double cascade_phase(double splitting_uev, double tau_ps) {
  return splitting_uev * tau_ps / constants::kHbar;
}

/// Delay needed for the exciton phase to advance by 2 pi.
double phase_period(double splitting_uev);

enum class PolarizationBasis { rectilinear, diagonal, circular };

inline constexpr std::array<PolarizationBasis, 3> kAllBases = {
    PolarizationBasis::rectilinear, PolarizationBasis::diagonal,
    PolarizationBasis::circular};

std::string_view to_string(PolarizationBasis basis);
/// Single-letter tag used in time-tag files: R, D or C.
char basis_letter(PolarizationBasis basis);
PolarizationBasis basis_from_letter(char letter);

/// (plus, minus) analyzer pair. Rectilinear is (H, V), diagonal (D, A),
/// circular (R, L) with D=(H+V)/sqrt2, A=(H-V)/sqrt2, R=(H+iV)/sqrt2,
/// L=(H-iV)/sqrt2.
std::pair<Vector2c, Vector2c> analyzer_states(PolarizationBasis basis);

/// Target Bell state (|HH> + e^{i phase}|VV>)/sqrt2.
class BellTarget {
 public:
  static BellTarget psi_plus() { return BellTarget(0.0); }
  static BellTarget psi_minus() { return BellTarget(constants::kPi); }
  static BellTarget psi_phase(double phase) { return BellTarget(phase); }

  double phase() const { return phase_; }

 private:
  explicit BellTarget(double phase) : phase_(phase) {}
  double phase_;
};

/// Normalized state vector in (HH, HV, VH, VV) order.
Vector4c bell_vector(const BellTarget& target);

/// 4x4 density matrix over (HH, HV, VH, VV). Construction validates
/// Hermiticity and unit trace.
class TwoPhotonDensityMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kTraceTolerance = 1e-12;
  static constexpr double kEigenTolerance = 1e-10;

  explicit TwoPhotonDensityMatrix(const Matrix4c& entries);

  const Matrix4c& entries() const { return entries_; }
  Complex operator()(int row, int col) const { return entries_(row, col); }

  /// <psi|rho|psi>; imaginary residue must be below 1e-12.
  double expectation(const Vector4c& psi) const;

  /// Ascending eigenvalues.
  Eigen::Vector4d eigenvalues() const;
  bool is_positive_semidefinite() const {
    return eigenvalues()(0) >= -kEigenTolerance;
  }

  /// Reduced state of the biexciton (first) photon.
  Matrix2c reduced_first() const;
  /// Reduced state of the exciton (second) photon.
  Matrix2c reduced_second() const;

 private:
  Matrix4c entries_;
};

/// Time-independent coherent fraction v = k g1.
struct ConstantCoherence {
  double v = 1.0;
};

/// Background light decaying with its own lifetime plus a fixed spin
/// scattering time:
///   k(t) = d(t) / (d(t) + beta b(t)),  d = exp(-t/tau_X), b = exp(-t/tau_B)
///   g1(t) = exp(-t/tau_ss)
struct DecayingCoherence {
  double background_ratio_beta = 0.0;
  double background_lifetime_tau_B = 1.0;
  double spin_scattering_tau_ss = 1.0;
};

using CoherenceModel = std::variant<ConstantCoherence, DecayingCoherence>;

struct SourceModel {
  double splitting_S = 0.0;             // ueV
  double exciton_lifetime_tau_X = 1.0;  // ps
  double jitter_fwhm = 0.0;             // ps, 0 disables
  CoherenceModel coherence = ConstantCoherence{};

  /// Throws InvalidArgument if any field is out of range.
  void validate() const;

  double jitter_sigma() const { return jitter_fwhm / constants::kFwhmPerSigma; }
  bool has_jitter() const { return jitter_fwhm > 0.0; }
  bool has_constant_coherence() const {
    return std::holds_alternative<ConstantCoherence>(coherence);
  }

  /// Coherent fraction v(tau) = k(tau) g1(tau) at true delay tau >= 0.
  double coherent_fraction(double tau_ps) const;
};

}  // namespace biphoton
