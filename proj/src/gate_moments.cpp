#include "gate_moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "biphoton/quadrature.hpp"

namespace biphoton::detail {

namespace {

// Beyond this many sigma the Gaussian acceptance is below 1e-32.
constexpr double kJitterReach = 12.0;

struct Domain {
  double lo, hi;
};

Domain true_delay_domain(const GateWindow& gate, const SourceModel& model) {
  const double t_max = truncation_delay(model);
  if (!model.has_jitter()) {
    return {std::max(0.0, gate.start()), std::min(gate.end(), t_max)};
  }
  const double reach = kJitterReach * model.jitter_sigma();
  return {std::max(0.0, gate.start() - reach), std::min(gate.end() + reach, t_max)};
}

// P(tau_meas in gate | tau_true), tau_meas = tau_true + N(0, sigma).
double acceptance(const GateWindow& gate, double sigma, double tau) {
  const double scale = 1.0 / (sigma * std::sqrt(2.0));
  return 0.5 * (std::erfc((gate.start() - tau) * scale) -
                std::erfc((gate.end() - tau) * scale));
}

}  // namespace

double truncation_delay(const SourceModel& model) {
  return model.exciton_lifetime_tau_X * std::log(1e12);
}

double gate_weight(const GateWindow& gate, const SourceModel& model) {
  const Domain d = true_delay_domain(gate, model);
  if (!(d.hi > d.lo)) return 0.0;
  const double tau_x = model.exciton_lifetime_tau_X;
  if (!model.has_jitter()) {
    // Exact, including the tail beyond the truncation delay.
    const double hi = std::isinf(gate.end()) ? gate.end() : d.hi;
    return std::exp(-d.lo / tau_x) - std::exp(-hi / tau_x);
  }
  const double sigma = model.jitter_sigma();
  return integrate_scalar(
      [&](double tau) {
        return std::exp(-tau / tau_x) / tau_x * acceptance(gate, sigma, tau);
      },
      d.lo, d.hi);
}

GateMoments gate_moments(const GateWindow& gate, const SourceModel& model) {
  GateMoments out;
  const Domain d = true_delay_domain(gate, model);
  if (!(d.hi > d.lo)) return out;
  const double tau_x = model.exciton_lifetime_tau_X;
  const bool jitter = model.has_jitter();
  const double sigma = model.jitter_sigma();
  auto integrand = [&](double tau) {
    const double p =
        std::exp(-tau / tau_x) / tau_x * (jitter ? acceptance(gate, sigma, tau) : 1.0);
    const double pv = p * model.coherent_fraction(tau);
    const double phase = cascade_phase(model.splitting_S, tau);
    return std::array<double, 4>{p, pv, pv * std::cos(phase), pv * std::sin(phase)};
  };
  const auto r = integrate_adaptive<4>(integrand, d.lo, d.hi);
  out.weight = r.value[0];
  out.coherent = r.value[1];
  out.coherence = Complex(r.value[2], r.value[3]);
  return out;
}

}  // namespace biphoton::detail
