#pragma once

#include <span>
#include <vector>

#include "biphoton/domain_types.hpp"

namespace biphoton {

/// Half-open acceptance window [tau_g, tau_g + w) on the measured delay.
/// The start may be negative (jitter) or -inf, the width +inf.
class GateWindow {
 public:
  /// Throws InvalidArgument unless w > 0.
  GateWindow(double tau_g, double w);

  /// (-inf, inf): accepts every event.
  static GateWindow unbounded();

  double tau_g() const { return start_; }
  double width() const { return width_; }
  double start() const { return start_; }
  double end() const { return end_; }

  bool contains(double tau_meas) const {
    return tau_meas >= start_ && tau_meas < end_;
  }

  friend bool operator==(const GateWindow&, const GateWindow&) = default;

 private:
  GateWindow(double start, double width, double end)
      : start_(start), width_(width), end_(end) {}

  double start_;
  double width_;
  double end_;
};

/// Ordered, pairwise-disjoint collection of windows; an event is accepted if
/// any window contains it.
class GateSet {
 public:
  GateSet(GateWindow window);  // NOLINT: a single window is a set
  /// Sorts by start; throws InvalidArgument on empty input or overlap.
  explicit GateSet(std::vector<GateWindow> windows);

  std::span<const GateWindow> windows() const { return windows_; }
  std::size_t size() const { return windows_.size(); }
  bool contains(double tau_meas) const;

 private:
  std::vector<GateWindow> windows_;
};

/// `count` windows of width `w` starting at tau_g + j * 2 pi hbar / |S|, so
/// every window opens at the same exciton phase.
GateSet periodic_gates(double tau_g, double w, double splitting_uev, int count);

/// Share of all coincidences whose measured delay lands in the gate(s):
/// exponential decay of the true delay convolved with the Gaussian jitter.
double retained_fraction(const GateWindow& gate, const SourceModel& model);
double retained_fraction(const GateSet& gates, const SourceModel& model);

}  // namespace biphoton
