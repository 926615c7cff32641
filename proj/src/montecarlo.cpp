#include "biphoton/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "biphoton/density_model.hpp"

namespace biphoton {

namespace {

constexpr double kTwoToMinus53 = 1.0 / 9007199254740992.0;

// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * kTwoToMinus53;
}

std::uint64_t shard_count(std::uint64_t n_pairs) {
  return (n_pairs + kShardSize - 1) / kShardSize;
}

unsigned resolve_threads(unsigned requested, std::uint64_t shards) {
  unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(t, std::max<std::uint64_t>(shards, 1)));
}

// Runs body(shard) for every shard on a small worker pool. Each shard writes
// only to its own output slot.
template <class Body>
void for_each_shard(std::uint64_t shards, unsigned threads, Body&& body) {
  if (threads <= 1) {
    for (std::uint64_t k = 0; k < shards; ++k) body(k);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::uint64_t k = next++; k < shards; k = next++) body(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

class EventSampler {
 public:
  EventSampler(const SourceModel& model, const BasisPlan& plan, std::uint64_t n_pairs)
      : model_(model), sigma_(model.jitter_sigma()) {
    const auto alloc = plan.allocate(n_pairs);
    first_diagonal_ = alloc[0];
    first_circular_ = alloc[0] + alloc[1];
  }

  PolarizationBasis basis_of(std::uint64_t index) const {
    if (index < first_diagonal_) return PolarizationBasis::rectilinear;
    if (index < first_circular_) return PolarizationBasis::diagonal;
    return PolarizationBasis::circular;
  }

  // Four uniforms per event, in order: decay, jitter radius, jitter angle,
  // outcome. The jitter draws are consumed even when jitter is disabled.
  PairEvent draw(std::uint64_t index, std::mt19937_64& engine) const {
    const double u_decay = uniform01(engine);
    const double u_radius = uniform01(engine);
    const double u_angle = uniform01(engine);
    const double u_outcome = uniform01(engine);

    PairEvent e{};
    e.tau_true = -model_.exciton_lifetime_tau_X * std::log1p(-u_decay);
    const double gaussian = std::sqrt(-2.0 * std::log1p(-u_radius)) *
                            std::cos(constants::kTwoPi * u_angle);
    e.tau_meas = e.tau_true + sigma_ * gaussian;
    e.basis = basis_of(index);

    const auto p = cascade_joint_probabilities(model_.coherent_fraction(e.tau_true),
                                               cascade_phase(model_.splitting_S, e.tau_true),
                                               e.basis);
    double cumulative = 0.0;
    std::uint8_t k = 0;
    for (; k < 3; ++k) {
      cumulative += p[k];
      if (u_outcome < cumulative) break;
    }
    e.outcome = static_cast<Outcome>(k);
    return e;
  }

 private:
  const SourceModel& model_;
  double sigma_;
  std::uint64_t first_diagonal_ = 0;
  std::uint64_t first_circular_ = 0;
};

template <class Sink>
void generate_shard(const EventSampler& sampler, std::uint64_t seed, std::uint64_t shard,
                    std::uint64_t n_pairs, Sink&& sink) {
  std::mt19937_64 engine(shard_seed(seed, shard));
  const std::uint64_t begin = shard * kShardSize;
  const std::uint64_t end = std::min(n_pairs, begin + kShardSize);
  for (std::uint64_t i = begin; i < end; ++i) sink(sampler.draw(i, engine));
}

}  // namespace

std::array<std::uint64_t, 3> BasisPlan::allocate(std::uint64_t n) const {
  const double sum = weights[0] + weights[1] + weights[2];
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("basis weights must be >= 0");
  }
  if (!(sum > 0.0)) throw InvalidArgument("basis plan has zero total weight");
  std::array<std::uint64_t, 3> out{};
  std::array<double, 3> remainder{};
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * weights[i] / sum;
    out[i] = static_cast<std::uint64_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  // Hand out the leftovers by largest remainder, ties to the earlier basis.
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t j = 0; assigned < n; ++j, ++assigned) ++out[order[j % 3]];
  return out;
}

std::uint64_t CorrelationCounts::total() const {
  return std::accumulate(per_basis.begin(), per_basis.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const BasisCounts& c) { return acc + c.total(); });
}

CorrelationCounts& CorrelationCounts::operator+=(const CorrelationCounts& other) {
  for (std::size_t i = 0; i < 3; ++i) {
    per_basis[i].n_co += other.per_basis[i].n_co;
    per_basis[i].n_cross += other.per_basis[i].n_cross;
  }
  return *this;
}

InsufficientCounts::InsufficientCounts(PolarizationBasis basis)
    : std::runtime_error("insufficient counts in the " + std::string(to_string(basis)) +
                         " basis"),
      basis_(basis) {}

std::uint64_t splitmix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t shard_seed(std::uint64_t seed, std::uint64_t shard) {
  return splitmix64(seed + (shard + 1) * 0x9E3779B97F4A7C15ULL);
}

std::vector<PairEvent> simulate_pairs(const SourceModel& model, std::uint64_t n_pairs,
                                      std::uint64_t seed, const SimulationOptions& options) {
  model.validate();
  if (n_pairs == 0) throw InvalidArgument("n_pairs must be > 0");
  const EventSampler sampler(model, options.plan, n_pairs);
  std::vector<PairEvent> events(n_pairs);
  const std::uint64_t shards = shard_count(n_pairs);
  for_each_shard(shards, resolve_threads(options.threads, shards), [&](std::uint64_t k) {
    PairEvent* out = events.data() + k * kShardSize;
    generate_shard(sampler, seed, k, n_pairs, [&](const PairEvent& e) { *out++ = e; });
  });
  return events;
}

CorrelationCounts tally(std::span<const PairEvent> events, const GateSet& gates) {
  CorrelationCounts counts;
  for (const PairEvent& e : events) {
    if (gates.contains(e.tau_meas)) counts.add(e.basis, is_co_polarized(e.outcome));
  }
  return counts;
}

Estimate estimate(const CorrelationCounts& counts) {
  Estimate out;
  double variance = 0.0;
  for (PolarizationBasis basis : kAllBases) {
    const BasisCounts& c = counts[basis];
    if (c.total() == 0) throw InsufficientCounts(basis);
    const double n = static_cast<double>(c.total());
    const double value = (static_cast<double>(c.n_co) - static_cast<double>(c.n_cross)) / n;
    const double sigma = std::sqrt(std::max(0.0, 1.0 - value * value) / n);
    out.correlations[static_cast<std::size_t>(basis)] = {value, sigma};
    variance += sigma * sigma;
  }
  const auto& r = out[PolarizationBasis::rectilinear];
  const auto& d = out[PolarizationBasis::diagonal];
  const auto& c = out[PolarizationBasis::circular];
  out.fidelity.value = fidelity_from_correlations(r.value, d.value, c.value);
  out.fidelity.sigma = 0.25 * std::sqrt(variance);
  return out;
}

std::vector<ScanPoint> scan(const SourceModel& model, std::span<const GateWindow> gates,
                            std::uint64_t n_pairs, std::uint64_t seed,
                            const SimulationOptions& options) {
  model.validate();
  if (n_pairs == 0) throw InvalidArgument("n_pairs must be > 0");
  if (gates.empty()) throw InvalidArgument("scan needs at least one gate");
  const EventSampler sampler(model, options.plan, n_pairs);
  const std::uint64_t shards = shard_count(n_pairs);
  std::vector<std::vector<CorrelationCounts>> per_shard(
      shards, std::vector<CorrelationCounts>(gates.size()));
  for_each_shard(shards, resolve_threads(options.threads, shards), [&](std::uint64_t k) {
    auto& slot = per_shard[k];
    generate_shard(sampler, seed, k, n_pairs, [&](const PairEvent& e) {
      const bool co = is_co_polarized(e.outcome);
      for (std::size_t g = 0; g < gates.size(); ++g) {
        if (gates[g].contains(e.tau_meas)) slot[g].add(e.basis, co);
      }
    });
  });

  std::vector<ScanPoint> points;
  points.reserve(gates.size());
  for (std::size_t g = 0; g < gates.size(); ++g) {
    CorrelationCounts merged;
    for (const auto& slot : per_shard) merged += slot[g];
    const Estimate est = estimate(merged);
    points.push_back({gates[g], merged, est.fidelity,
                      static_cast<double>(merged.total()) / static_cast<double>(n_pairs)});
  }
  return points;
}

}  // namespace biphoton
