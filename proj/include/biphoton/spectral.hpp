#pragma once

#include <stdexcept>
#include <vector>

#include "biphoton/domain_types.hpp"

namespace biphoton {

/// Uniform energy grid [e_min, e_max] with n_points samples.
struct EnergyGrid {
  double e_min;  // ueV
  double e_max;  // ueV
  std::size_t n_points;

  /// Throws InvalidArgument unless e_min < e_max and n_points >= 64.
  void validate() const;
  double step() const { return (e_max - e_min) / static_cast<double>(n_points - 1); }
  double at(std::size_t i) const { return e_min + step() * static_cast<double>(i); }

  /// +-20 natural linewidths (hbar / tau_X) around zero, 4096 points.
  static EnergyGrid natural(double tau_x_ps);
};

struct Spectrum {
  std::vector<double> energies;  // ueV, uniform and strictly increasing
  std::vector<double> power;     // >= 0

  /// Copy scaled so the maximum sample is 1.
  Spectrum peak_normalized() const;
};

/// Power spectrum of an exciton field decaying as exp(-t / (2 tau_X)) and cut
/// off at t_cut (may be +inf):
///   P(E) = |(1 - exp(-(g - i w) t_cut)) / (g - i w)|^2,  g = 1/(2 tau_X), w = E/hbar
Spectrum truncated_decay_spectrum(double tau_x_ps, double t_cut_ps, const EnergyGrid& grid);

/// Half-maximum crossing not found inside the grid.
class GridTooNarrow : public std::runtime_error {
 public:
  GridTooNarrow(const std::string& what, double bound)
      : std::runtime_error(what), bound_(bound) {}
  /// Energy of the last sample examined before leaving the grid.
  double bound() const { return bound_; }

 private:
  double bound_;
};

/// Full width at half maximum around the global peak, linear interpolation
/// between samples. Throws InvalidArgument if the peak sits on a grid edge and
/// GridTooNarrow if a half-maximum crossing lies outside the grid.
double fwhm(const Spectrum& spectrum);

}  // namespace biphoton
