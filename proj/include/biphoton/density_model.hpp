#pragma once

#include <array>
#include <span>
#include <vector>

#include "biphoton/domain_types.hpp"
#include "biphoton/gating.hpp"

namespace biphoton {

/// Biphoton state at emission delay tau >= 0:
///
///   rho = 1/4 | 1+v   0    0   2v e^{-i phi} |
///             |  0   1-v   0        0        |
///             |  0    0   1-v       0        |
///             | 2v e^{i phi} 0 0   1+v       |
///
/// with phi = S tau / hbar and v = v(tau) from the coherence model.
/// Throws InvalidArgument for tau < 0.
TwoPhotonDensityMatrix rho_at(double tau_ps, const SourceModel& model);

/// Same matrix family parameterised by the coherent fraction `v` and the
/// complex coherence `c` (= v e^{i phi} for a single delay, or a decay-weighted
/// average of it for a gated state).
TwoPhotonDensityMatrix cascade_density_matrix(double v, Complex c);

/// <psi|rho|psi> for the target Bell state.
double fidelity(const TwoPhotonDensityMatrix& rho, const BellTarget& target);

/// Joint click probabilities in (++, +-, -+, --) order for (XX, X) analyzers.
std::array<double, 4> joint_probabilities(const TwoPhotonDensityMatrix& rho,
                                          PolarizationBasis basis);

/// Closed form of joint_probabilities(rho_at(tau), basis) using
/// rho = (1 - v)/4 I + v |psi_phase(phi)><psi_phase(phi)|. No matrix is built.
std::array<double, 4> cascade_joint_probabilities(double v, double phase,
                                                  PolarizationBasis basis);

/// (p_co - p_cross) / (p_co + p_cross).
double correlation_degree(const TwoPhotonDensityMatrix& rho, PolarizationBasis basis);

/// (c_r + c_d - c_c + 1) / 4. Throws InvalidArgument if an input is outside
/// [-1, 1].
double fidelity_from_correlations(double c_r, double c_d, double c_c);

struct GatedStateSummary {
  TwoPhotonDensityMatrix rho_gated;
  double retained_fraction;
  double mean_phase;  // radians, argument of the averaged coherence
};

/// Coincidence-weighted average state over the gate(s). Throws
/// InvalidArgument when the gate retains no coincidences and QuadratureError
/// when integration fails.
GatedStateSummary gated_state(const GateSet& gates, const SourceModel& model);

/// Time-integrated fidelity with the phase-tracking target psi_phase(S tau/hbar).
double evolving_state_fidelity(const SourceModel& model);

struct FidelityPoint {
  double tau_g;
  double fidelity;
  double retained_fraction;
};

/// gated_state + fidelity for every gate; gates may overlap each other.
std::vector<FidelityPoint> fidelity_curve(std::span<const GateWindow> gates,
                                          const SourceModel& model,
                                          const BellTarget& target);

}  // namespace biphoton
