#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "biphoton/domain_types.hpp"
#include "biphoton/gating.hpp"

namespace biphoton {

/// Joint analyzer outcome for (XX photon, X photon).
enum class Outcome : std::uint8_t { plus_plus, plus_minus, minus_plus, minus_minus };

inline bool is_co_polarized(Outcome o) {
  return o == Outcome::plus_plus || o == Outcome::minus_minus;
}

struct PairEvent {
  double tau_true;  // ps, >= 0
  double tau_meas;  // ps, tau_true plus jitter
  PolarizationBasis basis;
  Outcome outcome;

  friend bool operator==(const PairEvent&, const PairEvent&) = default;
};

/// Relative share of events measured in each basis (R, D, C). Events are
/// assigned contiguously by index: the first n_R to rectilinear, the next
/// n_D to diagonal, the rest to circular.
struct BasisPlan {
  std::array<double, 3> weights = {1.0, 1.0, 1.0};

  /// Largest-remainder split of n events; sums to n exactly.
  std::array<std::uint64_t, 3> allocate(std::uint64_t n) const;
};

struct BasisCounts {
  std::uint64_t n_co = 0;
  std::uint64_t n_cross = 0;

  std::uint64_t total() const { return n_co + n_cross; }
  friend bool operator==(const BasisCounts&, const BasisCounts&) = default;
};

struct CorrelationCounts {
  std::array<BasisCounts, 3> per_basis{};

  void add(PolarizationBasis basis, bool co_polarized) {
    auto& c = per_basis[static_cast<std::size_t>(basis)];
    (co_polarized ? c.n_co : c.n_cross) += 1;
  }
  const BasisCounts& operator[](PolarizationBasis basis) const {
    return per_basis[static_cast<std::size_t>(basis)];
  }
  std::uint64_t total() const;
  CorrelationCounts& operator+=(const CorrelationCounts& other);

  friend bool operator==(const CorrelationCounts&, const CorrelationCounts&) = default;
};

/// A basis had no events in the gate.
class InsufficientCounts : public std::runtime_error {
 public:
  explicit InsufficientCounts(PolarizationBasis basis);
  PolarizationBasis basis() const { return basis_; }

 private:
  PolarizationBasis basis_;
};

struct CorrelationEstimate {
  double value = 0.0;
  double sigma = 0.0;
};

struct FidelityEstimate {
  double value = 0.0;
  double sigma = 0.0;
};

struct Estimate {
  std::array<CorrelationEstimate, 3> correlations{};  // indexed by basis
  FidelityEstimate fidelity;

  const CorrelationEstimate& operator[](PolarizationBasis basis) const {
    return correlations[static_cast<std::size_t>(basis)];
  }
};

/// Events per shard. Shard k covers event indices [k * kShardSize, ...) and
/// draws from its own generator, so output is independent of thread count.
inline constexpr std::uint64_t kShardSize = 1u << 16;

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of shard k: splitmix64(seed + (k + 1) * 0x9E3779B97F4A7C15).
std::uint64_t shard_seed(std::uint64_t seed, std::uint64_t shard);

struct SimulationOptions {
  BasisPlan plan{};
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Draws n_pairs coincidences: tau_true ~ Exp(tau_X) by inverse CDF, jitter by
/// Box-Muller, outcome from the joint projector probabilities of
/// rho_at(tau_true) in the event's basis.
std::vector<PairEvent> simulate_pairs(const SourceModel& model, std::uint64_t n_pairs,
                                      std::uint64_t seed,
                                      const SimulationOptions& options = {});

/// Counts events whose measured delay lies in the gate(s).
CorrelationCounts tally(std::span<const PairEvent> events, const GateSet& gates);

/// Correlation degrees with binomial errors and the fidelity
/// f = (C_R + C_D - C_C + 1)/4, sigma_f = sqrt(sum sigma_C^2)/4.
/// Throws InsufficientCounts naming the first empty basis.
Estimate estimate(const CorrelationCounts& counts);

struct ScanPoint {
  GateWindow gate;
  CorrelationCounts counts;
  FidelityEstimate fidelity;
  double retained_fraction;
};

/// One pass of event generation tallied against every gate. Gates may
/// overlap. Identical to tally(simulate_pairs(...), gate) per gate.
std::vector<ScanPoint> scan(const SourceModel& model, std::span<const GateWindow> gates,
                            std::uint64_t n_pairs, std::uint64_t seed,
                            const SimulationOptions& options = {});

}  // namespace biphoton
