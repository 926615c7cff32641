#include "biphoton/domain_types.hpp"

#include <cmath>
#include <string>

namespace biphoton {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

double phase_period(double splitting_uev) {
  if (splitting_uev == 0.0) {
    throw InvalidArgument("phase period undefined for zero splitting");
  }
  return constants::kTwoPi * constants::kHbar / std::abs(splitting_uev);
}

std::string_view to_string(PolarizationBasis basis) {
  switch (basis) {
    case PolarizationBasis::rectilinear: return "rectilinear";
    case PolarizationBasis::diagonal: return "diagonal";
    case PolarizationBasis::circular: return "circular";
  }
  return "unknown";
}

char basis_letter(PolarizationBasis basis) {
  switch (basis) {
    case PolarizationBasis::rectilinear: return 'R';
    case PolarizationBasis::diagonal: return 'D';
    case PolarizationBasis::circular: return 'C';
  }
  return '?';
}

PolarizationBasis basis_from_letter(char letter) {
  switch (letter) {
    case 'R': return PolarizationBasis::rectilinear;
    case 'D': return PolarizationBasis::diagonal;
    case 'C': return PolarizationBasis::circular;
    default: break;
  }
  throw InvalidArgument(std::string("unknown basis letter '") + letter + "'");
}

std::pair<Vector2c, Vector2c> analyzer_states(PolarizationBasis basis) {
  const Complex i(0.0, 1.0);
  Vector2c plus, minus;
  switch (basis) {
    case PolarizationBasis::rectilinear:
      plus << 1.0, 0.0;
      minus << 0.0, 1.0;
      break;
    case PolarizationBasis::diagonal:
      plus << kInvSqrt2, kInvSqrt2;
      minus << kInvSqrt2, -kInvSqrt2;
      break;
    case PolarizationBasis::circular:
      plus << kInvSqrt2, i * kInvSqrt2;
      minus << kInvSqrt2, -i * kInvSqrt2;
      break;
  }
  return {plus, minus};
}

Vector4c bell_vector(const BellTarget& target) {
  Vector4c psi = Vector4c::Zero();
  psi(0) = kInvSqrt2;
  psi(3) = std::polar(kInvSqrt2, target.phase());
  return psi;
}

TwoPhotonDensityMatrix::TwoPhotonDensityMatrix(const Matrix4c& entries)
    : entries_(entries) {
  const double asym = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTolerance) {
    throw InvalidArgument("density matrix is not Hermitian (deviation " +
                          std::to_string(asym) + ")");
  }
  const Complex trace = entries_.trace();
  if (std::abs(trace - 1.0) > kTraceTolerance) {
    throw InvalidArgument("density matrix trace deviates from 1 by " +
                          std::to_string(std::abs(trace - 1.0)));
  }
}

double TwoPhotonDensityMatrix::expectation(const Vector4c& psi) const {
  const Complex value = psi.dot(entries_ * psi);  // dot conjugates psi
  if (std::abs(value.imag()) > 1e-12) {
    throw InvalidArgument("expectation value has imaginary residue " +
                          std::to_string(value.imag()));
  }
  return value.real();
}

Eigen::Vector4d TwoPhotonDensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(entries_,
                                                 Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

Matrix2c TwoPhotonDensityMatrix::reduced_first() const {
  // index = 2 * first + second
  Matrix2c out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out(a, b) = entries_(2 * a, 2 * b) + entries_(2 * a + 1, 2 * b + 1);
  return out;
}

Matrix2c TwoPhotonDensityMatrix::reduced_second() const {
  Matrix2c out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out(a, b) = entries_(a, b) + entries_(2 + a, 2 + b);
  return out;
}

void SourceModel::validate() const {
  if (!std::isfinite(splitting_S)) {
    throw InvalidArgument("splitting_S must be finite");
  }
  if (!(exciton_lifetime_tau_X > 0.0) || !std::isfinite(exciton_lifetime_tau_X)) {
    throw InvalidArgument("exciton_lifetime_tau_X must be > 0");
  }
  if (!(jitter_fwhm >= 0.0) || !std::isfinite(jitter_fwhm)) {
    throw InvalidArgument("jitter_fwhm must be >= 0");
  }
  if (const auto* c = std::get_if<ConstantCoherence>(&coherence)) {
    if (!(c->v >= 0.0 && c->v <= 1.0)) {
      throw InvalidArgument("coherence v must lie in [0, 1]");
    }
  } else {
    const auto& d = std::get<DecayingCoherence>(coherence);
    if (!(d.background_ratio_beta >= 0.0) || !std::isfinite(d.background_ratio_beta)) {
      throw InvalidArgument("background_ratio_beta must be >= 0");
    }
    if (!(d.background_lifetime_tau_B > 0.0)) {
      throw InvalidArgument("background_lifetime_tau_B must be > 0");
    }
    if (!(d.spin_scattering_tau_ss > 0.0)) {
      throw InvalidArgument("spin_scattering_tau_ss must be > 0");
    }
  }
}

double SourceModel::coherent_fraction(double tau_ps) const {
  if (const auto* c = std::get_if<ConstantCoherence>(&coherence)) return c->v;
  const auto& d = std::get<DecayingCoherence>(coherence);
  // k = 1 / (1 + beta exp(tau (1/tau_X - 1/tau_B))), written to avoid
  // underflow of both exponentials at large tau.
  const double exponent =
      tau_ps * (1.0 / exciton_lifetime_tau_X - 1.0 / d.background_lifetime_tau_B);
  const double k = d.background_ratio_beta == 0.0
                       ? 1.0
                       : 1.0 / (1.0 + d.background_ratio_beta * std::exp(exponent));
  const double g1 = std::exp(-tau_ps / d.spin_scattering_tau_ss);
  return k * g1;
}

}  // namespace biphoton
