#include "biphoton/density_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "biphoton/quadrature.hpp"
#include "gate_moments.hpp"

namespace biphoton {

namespace {
constexpr double kCorrelationSlack = 1e-12;
}

TwoPhotonDensityMatrix cascade_density_matrix(double v, Complex c) {
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = m(3, 3) = 0.25 * (1.0 + v);
  m(1, 1) = m(2, 2) = 0.25 * (1.0 - v);
  m(0, 3) = 0.5 * std::conj(c);
  m(3, 0) = 0.5 * c;
  return TwoPhotonDensityMatrix(m);
}

TwoPhotonDensityMatrix rho_at(double tau_ps, const SourceModel& model) {
  if (!(tau_ps >= 0.0)) {
    throw InvalidArgument("emission delay must be >= 0, got " + std::to_string(tau_ps));
  }
  const double v = model.coherent_fraction(tau_ps);
  return cascade_density_matrix(v, std::polar(v, cascade_phase(model.splitting_S, tau_ps)));
}

double fidelity(const TwoPhotonDensityMatrix& rho, const BellTarget& target) {
  return rho.expectation(bell_vector(target));
}

std::array<double, 4> joint_probabilities(const TwoPhotonDensityMatrix& rho,
                                          PolarizationBasis basis) {
  const auto [plus, minus] = analyzer_states(basis);
  const std::array<const Vector2c*, 2> states = {&plus, &minus};
  std::array<double, 4> p{};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      Vector4c joint;
      joint << (*states[a])(0) * (*states[b])(0), (*states[a])(0) * (*states[b])(1),
          (*states[a])(1) * (*states[b])(0), (*states[a])(1) * (*states[b])(1);
      p[2 * a + b] = rho.expectation(joint);
    }
  }
  return p;
}

namespace {

// conj(a_H b_H) and conj(a_V b_V) for every analyzer pair (a, b) of a basis.
struct JointAmplitudes {
  std::array<Complex, 4> hh;
  std::array<Complex, 4> vv;
};

std::array<JointAmplitudes, 3> make_joint_amplitude_table() {
  std::array<JointAmplitudes, 3> table{};
  for (PolarizationBasis basis : kAllBases) {
    const auto [plus, minus] = analyzer_states(basis);
    const std::array<const Vector2c*, 2> states = {&plus, &minus};
    auto& entry = table[static_cast<std::size_t>(basis)];
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        entry.hh[2 * a + b] = std::conj((*states[a])(0) * (*states[b])(0));
        entry.vv[2 * a + b] = std::conj((*states[a])(1) * (*states[b])(1));
      }
    }
  }
  return table;
}

}  // namespace

std::array<double, 4> cascade_joint_probabilities(double v, double phase,
                                                  PolarizationBasis basis) {
  static const std::array<JointAmplitudes, 3> table = make_joint_amplitude_table();
  const auto& entry = table[static_cast<std::size_t>(basis)];
  const Complex rotor = std::polar(1.0, phase);
  std::array<double, 4> p{};
  for (std::size_t k = 0; k < 4; ++k) {
    p[k] = 0.25 * (1.0 - v) + 0.5 * v * std::norm(entry.hh[k] + rotor * entry.vv[k]);
  }
  return p;
}

double correlation_degree(const TwoPhotonDensityMatrix& rho, PolarizationBasis basis) {
  const auto p = joint_probabilities(rho, basis);
  const double co = p[0] + p[3];
  const double cross = p[1] + p[2];
  // The four projectors resolve the identity, so co + cross = Tr(rho) = 1.
  if (!(co + cross > 0.5)) {
    throw InvalidArgument("joint probabilities do not sum to the trace");
  }
  return (co - cross) / (co + cross);
}

double fidelity_from_correlations(double c_r, double c_d, double c_c) {
  for (double c : {c_r, c_d, c_c}) {
    if (!(std::abs(c) <= 1.0 + kCorrelationSlack)) {
      throw InvalidArgument("correlation degree " + std::to_string(c) +
                            " outside [-1, 1]");
    }
  }
  return (c_r + c_d - c_c + 1.0) / 4.0;
}

GatedStateSummary gated_state(const GateSet& gates, const SourceModel& model) {
  model.validate();
  detail::GateMoments total;
  for (const GateWindow& g : gates.windows()) total += detail::gate_moments(g, model);
  if (!(total.weight > 0.0)) {
    throw InvalidArgument("gate retains no coincidences");
  }
  const double v = total.coherent / total.weight;
  const Complex c = total.coherence / total.weight;
  return GatedStateSummary{cascade_density_matrix(v, c),
                           std::clamp(retained_fraction(gates, model), 0.0, 1.0),
                           std::arg(c)};
}

double evolving_state_fidelity(const SourceModel& model) {
  model.validate();
  // Against psi_phase(phi(tau)) the instantaneous fidelity is (1 + 3 v)/4.
  if (const auto* c = std::get_if<ConstantCoherence>(&model.coherence)) {
    return 0.25 * (1.0 + 3.0 * c->v);
  }
  const double tau_x = model.exciton_lifetime_tau_X;
  const double t_max = detail::truncation_delay(model);
  const double value = integrate_scalar(
      [&](double tau) {
        return std::exp(-tau / tau_x) / tau_x * 0.25 *
               (1.0 + 3.0 * model.coherent_fraction(tau));
      },
      0.0, t_max);
  // Renormalize by the retained decay mass below the truncation delay.
  return value / (1.0 - std::exp(-t_max / tau_x));
}

std::vector<FidelityPoint> fidelity_curve(std::span<const GateWindow> gates,
                                          const SourceModel& model,
                                          const BellTarget& target) {
  if (gates.empty()) throw InvalidArgument("fidelity curve needs at least one gate");
  std::vector<FidelityPoint> curve;
  curve.reserve(gates.size());
  for (const GateWindow& g : gates) {
    const GatedStateSummary s = gated_state(GateSet(g), model);
    curve.push_back({g.tau_g(), fidelity(s.rho_gated, target), s.retained_fraction});
  }
  return curve;
}

}  // namespace biphoton
