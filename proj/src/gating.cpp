#include "biphoton/gating.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gate_moments.hpp"

namespace biphoton {

GateWindow::GateWindow(double tau_g, double w)
    : start_(tau_g), width_(w), end_(tau_g + w) {
  if (!(w > 0.0)) throw InvalidArgument("gate width must be > 0");
  if (std::isnan(tau_g) || tau_g == std::numeric_limits<double>::infinity()) {
    throw InvalidArgument("gate start must be a number below +inf");
  }
  if (std::isinf(tau_g)) {
    if (!std::isinf(w)) {
      throw InvalidArgument("a gate opening at -inf must have infinite width");
    }
    end_ = w;
  }
}

GateWindow GateWindow::unbounded() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return GateWindow(-inf, inf, inf);
}

GateSet::GateSet(GateWindow window) : windows_{window} {}

GateSet::GateSet(std::vector<GateWindow> windows) : windows_(std::move(windows)) {
  if (windows_.empty()) throw InvalidArgument("gate set must contain a window");
  std::sort(windows_.begin(), windows_.end(),
            [](const GateWindow& a, const GateWindow& b) { return a.start() < b.start(); });
  for (std::size_t i = 1; i < windows_.size(); ++i) {
    if (windows_[i].start() < windows_[i - 1].end()) {
      throw InvalidArgument("gate windows overlap at " +
                            std::to_string(windows_[i].start()) + " ps");
    }
  }
}

bool GateSet::contains(double tau_meas) const {
  return std::any_of(windows_.begin(), windows_.end(),
                     [&](const GateWindow& g) { return g.contains(tau_meas); });
}

GateSet periodic_gates(double tau_g, double w, double splitting_uev, int count) {
  if (count < 1) throw InvalidArgument("periodic gate count must be >= 1");
  if (splitting_uev == 0.0) {
    throw InvalidArgument("periodic gates need a nonzero splitting");
  }
  const double period = phase_period(splitting_uev);
  if (w >= period) {
    throw InvalidArgument("gate width " + std::to_string(w) +
                          " ps overlaps the phase period " + std::to_string(period) +
                          " ps");
  }
  std::vector<GateWindow> windows;
  windows.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) windows.emplace_back(tau_g + j * period, w);
  return GateSet(std::move(windows));
}

double retained_fraction(const GateWindow& gate, const SourceModel& model) {
  model.validate();
  return std::clamp(detail::gate_weight(gate, model), 0.0, 1.0);
}

double retained_fraction(const GateSet& gates, const SourceModel& model) {
  model.validate();
  double total = 0.0;
  for (const GateWindow& g : gates.windows()) total += detail::gate_weight(g, model);
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace biphoton
