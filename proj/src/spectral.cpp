#include "biphoton/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace biphoton {

void EnergyGrid::validate() const {
  if (!std::isfinite(e_min) || !std::isfinite(e_max) || !(e_min < e_max)) {
    throw InvalidArgument("energy grid needs finite e_min < e_max");
  }
  if (n_points < 64) throw InvalidArgument("energy grid needs at least 64 points");
}

EnergyGrid EnergyGrid::natural(double tau_x_ps) {
  const double linewidth = constants::kHbar / tau_x_ps;
  return {-20.0 * linewidth, 20.0 * linewidth, 4096};
}

Spectrum Spectrum::peak_normalized() const {
  Spectrum out = *this;
  const double peak = power.empty() ? 0.0 : *std::max_element(power.begin(), power.end());
  if (peak > 0.0) {
    for (double& p : out.power) p /= peak;
  }
  return out;
}

Spectrum truncated_decay_spectrum(double tau_x_ps, double t_cut_ps, const EnergyGrid& grid) {
  if (!(tau_x_ps > 0.0) || !std::isfinite(tau_x_ps)) {
    throw InvalidArgument("tau_X must be > 0");
  }
  if (!(t_cut_ps > 0.0)) throw InvalidArgument("t_cut must be > 0");
  grid.validate();

  const double gamma = 0.5 / tau_x_ps;
  const bool untruncated = std::isinf(t_cut_ps);
  Spectrum s;
  s.energies.resize(grid.n_points);
  s.power.resize(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double e = grid.at(i);
    const double omega = e / constants::kHbar;
    const Complex rate(gamma, -omega);
    Complex amplitude;
    if (untruncated) {
      amplitude = 1.0 / rate;
    } else {
      // (1 - exp(-rate T)) / rate; expm1 keeps precision when rate T is tiny.
      const Complex x = -rate * t_cut_ps;
      const Complex numerator =
          -Complex(std::expm1(x.real()) * std::cos(x.imag()) - 2.0 * std::pow(std::sin(0.5 * x.imag()), 2),
                   std::exp(x.real()) * std::sin(x.imag()));
      amplitude = numerator / rate;
    }
    s.energies[i] = e;
    s.power[i] = std::norm(amplitude);
  }
  return s;
}

double fwhm(const Spectrum& spectrum) {
  const auto& e = spectrum.energies;
  const auto& p = spectrum.power;
  if (e.size() != p.size() || e.size() < 3) {
    throw InvalidArgument("spectrum needs matching energy and power samples");
  }
  const std::size_t peak =
      static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  // A plateau of tied maxima counts as interior if it does not touch an edge.
  std::size_t last_peak = peak;
  while (last_peak + 1 < p.size() && p[last_peak + 1] == p[peak]) ++last_peak;
  if (peak == 0 || last_peak == p.size() - 1) {
    throw InvalidArgument("spectrum has no interior maximum");
  }
  const double half = 0.5 * p[peak];

  std::size_t i = peak;
  while (i > 0 && p[i - 1] > half) --i;
  if (i == 0) {
    throw GridTooNarrow("grid too narrow: lower half-maximum crossing below " +
                            std::to_string(e.front()) + " ueV",
                        e.front());
  }
  // Crossing between i-1 (<= half) and i (> half).
  const double left =
      e[i - 1] + (half - p[i - 1]) / (p[i] - p[i - 1]) * (e[i] - e[i - 1]);

  std::size_t j = last_peak;
  while (j + 1 < p.size() && p[j + 1] > half) ++j;
  if (j + 1 == p.size()) {
    throw GridTooNarrow("grid too narrow: upper half-maximum crossing above " +
                            std::to_string(e.back()) + " ueV",
                        e.back());
  }
  const double right = e[j] + (p[j] - half) / (p[j] - p[j + 1]) * (e[j + 1] - e[j]);
  return right - left;
}

}  // namespace biphoton
