#include <doctest.h>

#include <cmath>

#include "biphoton/density_model.hpp"
#include "biphoton/montecarlo.hpp"
#include "support/oracles.hpp"

using namespace biphoton;
using oracle::constant_source;

TEST_CASE("basis plan allocation") {
  const BasisPlan thirds;
  const auto a = thirds.allocate(10);
  CHECK(a[0] + a[1] + a[2] == 10);
  CHECK(a[0] == 4);
  CHECK(a[1] == 3);
  CHECK(a[2] == 3);

  BasisPlan skewed;
  skewed.weights = {2.0, 1.0, 0.0};
  const auto b = skewed.allocate(7);
  CHECK(b[0] + b[1] + b[2] == 7);
  CHECK(b[2] == 0);

  BasisPlan empty;
  empty.weights = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(empty.allocate(3), InvalidArgument);
}

TEST_CASE("shard seeds are distinct and fixed") {
  CHECK(splitmix64(0) == 0);
  CHECK(shard_seed(1, 0) != shard_seed(1, 1));
  CHECK(shard_seed(1, 0) != shard_seed(2, 0));
  // SplitMix64 reference: the first output of the generator seeded with 0.
  CHECK(splitmix64(0x9E3779B97F4A7C15ULL) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("simulation is deterministic and independent of thread count") {
  const SourceModel m = constant_source(2.5, 0.78, 577.0);
  SimulationOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const auto a = simulate_pairs(m, 200'000, 42, one);
  const auto b = simulate_pairs(m, 200'000, 42, four);
  CHECK(a == b);
  const auto c = simulate_pairs(m, 200'000, 43, one);
  CHECK_FALSE(a == c);
  CHECK_THROWS_AS(simulate_pairs(m, 0, 42), InvalidArgument);
}

TEST_CASE("events respect the basis plan and delay invariants") {
  const SourceModel m = constant_source(2.5, 0.78, 577.0);
  const auto events = simulate_pairs(m, 30'001, 5);
  std::array<std::uint64_t, 3> per_basis{};
  bool negative_meas = false;
  for (const auto& e : events) {
    CHECK(e.tau_true >= 0.0);
    negative_meas |= e.tau_meas < 0.0;
    ++per_basis[static_cast<std::size_t>(e.basis)];
  }
  CHECK(negative_meas);
  CHECK(per_basis == BasisPlan{}.allocate(30'001));

  const auto counts = tally(events, GateSet(GateWindow::unbounded()));
  for (PolarizationBasis b : kAllBases) {
    CHECK(counts[b].total() == per_basis[static_cast<std::size_t>(b)]);
  }

  const auto clean = simulate_pairs(constant_source(2.5, 0.78), 1000, 5);
  for (const auto& e : clean) CHECK(e.tau_meas == e.tau_true);
}

TEST_CASE("perfect circular anticorrelation at S=0, v=1") {
  BasisPlan circular_only;
  circular_only.weights = {0.0, 0.0, 1.0};
  SimulationOptions opts;
  opts.plan = circular_only;
  const auto events = simulate_pairs(constant_source(0.0, 1.0), 50'000, 9, opts);
  for (const auto& e : events) {
    CHECK(e.basis == PolarizationBasis::circular);
    CHECK_FALSE(is_co_polarized(e.outcome));
  }
}

TEST_CASE("fully mixed source gives balanced counts") {
  const auto events = simulate_pairs(constant_source(2.5, 0.0), 300'000, 17);
  const auto counts = tally(events, GateSet(GateWindow::unbounded()));
  for (PolarizationBasis b : kAllBases) {
    const double n = static_cast<double>(counts[b].total());
    const double diff = static_cast<double>(counts[b].n_co) - 0.5 * n;
    CHECK(std::abs(diff) <= 3.0 * std::sqrt(0.25 * n));
  }
}

TEST_CASE("rectilinear co-fraction matches (1+v)/2") {
  BasisPlan rect;
  rect.weights = {1.0, 0.0, 0.0};
  SimulationOptions opts;
  opts.plan = rect;
  const auto events = simulate_pairs(constant_source(2.5, 0.78), 1'000'000, 3, opts);
  const auto counts = tally(events, GateSet(GateWindow::unbounded()));
  const double n = static_cast<double>(counts[PolarizationBasis::rectilinear].total());
  const double p = 0.5 * (1.0 + 0.78);
  const double observed = counts[PolarizationBasis::rectilinear].n_co / n;
  CHECK(std::abs(observed - p) <= 3.0 * std::sqrt(p * (1.0 - p) / n));
}

TEST_CASE("single-photon marginals are unpolarized") {
  const auto events = simulate_pairs(constant_source(2.5, 0.78, 577.0), 600'000, 23);
  std::array<double, 3> xx_plus{}, x_plus{}, total{};
  for (const auto& e : events) {
    const auto b = static_cast<std::size_t>(e.basis);
    total[b] += 1.0;
    xx_plus[b] += (e.outcome == Outcome::plus_plus || e.outcome == Outcome::plus_minus);
    x_plus[b] += (e.outcome == Outcome::plus_plus || e.outcome == Outcome::minus_plus);
  }
  for (std::size_t b = 0; b < 3; ++b) {
    const double sigma = std::sqrt(0.25 / total[b]);
    CHECK(std::abs(xx_plus[b] / total[b] - 0.5) <= 3.0 * sigma);
    CHECK(std::abs(x_plus[b] / total[b] - 0.5) <= 3.0 * sigma);
  }
}

TEST_CASE("tally gates on the measured delay") {
  const auto events = simulate_pairs(constant_source(2.5, 0.78), 400'000, 31);
  const double w = 2.0 * 769.0;
  const auto gated = tally(events, GateSet(GateWindow(0.0, w)));
  const double n = static_cast<double>(events.size());
  const double p = 1.0 - std::exp(-2.0);
  CHECK(std::abs(gated.total() / n - p) <= 3.0 * std::sqrt(p * (1.0 - p) / n));

  // A gate narrower than the event spacing near the tail catches nothing.
  CHECK(tally(events, GateSet(GateWindow(1e7, 1e-9))).total() == 0);

  // Disjoint partition conserves counts.
  CorrelationCounts sum;
  sum += tally(events, GateSet(GateWindow(0.0, 300.0)));
  sum += tally(events, GateSet(GateWindow(300.0, 900.0)));
  sum += tally(events, GateSet(GateWindow(1200.0, INFINITY)));
  CHECK(sum == tally(events, GateSet(GateWindow::unbounded())));
}

TEST_CASE("estimate examples") {
  CorrelationCounts perfect;
  perfect.per_basis = {BasisCounts{100, 0}, BasisCounts{100, 0}, BasisCounts{0, 100}};
  const Estimate e = estimate(perfect);
  CHECK(e.fidelity.value == doctest::Approx(1.0));
  CHECK(e.fidelity.sigma == 0.0);

  CorrelationCounts mixed;
  mixed.per_basis = {BasisCounts{50, 50}, BasisCounts{50, 50}, BasisCounts{50, 50}};
  const Estimate m = estimate(mixed);
  CHECK(m.fidelity.value == doctest::Approx(0.25));
  CHECK(m.fidelity.sigma > 0.0);
  CHECK(m[PolarizationBasis::rectilinear].sigma == doctest::Approx(0.1));
  CHECK(m.fidelity.sigma == doctest::Approx(0.25 * std::sqrt(3.0 * 0.01)));

  CorrelationCounts missing;
  missing.per_basis = {BasisCounts{10, 2}, BasisCounts{0, 0}, BasisCounts{1, 5}};
  try {
    (void)estimate(missing);
    FAIL("expected InsufficientCounts");
  } catch (const InsufficientCounts& err) {
    CHECK(err.basis() == PolarizationBasis::diagonal);
    CHECK(std::string(err.what()).find("diagonal") != std::string::npos);
  }
}

TEST_CASE("scan equals per-gate tallies of the same stream") {
  const SourceModel m = constant_source(2.5, 0.78, 577.0);
  const std::vector<GateWindow> gates = {GateWindow(0.0, 537.0), GateWindow(200.0, 537.0),
                                         GateWindow(-100.0, 49.0)};
  SimulationOptions opts;
  opts.threads = 3;
  const auto points = scan(m, gates, 150'000, 77, opts);
  const auto events = simulate_pairs(m, 150'000, 77);
  REQUIRE(points.size() == gates.size());
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const auto counts = tally(events, GateSet(gates[g]));
    CHECK(points[g].counts == counts);
    CHECK(points[g].fidelity.value == estimate(counts).fidelity.value);
    CHECK(points[g].retained_fraction == counts.total() / 150'000.0);
  }
}

TEST_CASE("large-sample estimate agrees with the gated quadrature") {
  const SourceModel m = constant_source(2.5, 0.78, 577.0);
  const GateWindow gate(0.0, 537.0);
  const auto points = scan(m, std::vector<GateWindow>{gate}, 3'000'000, 2024);
  const double analytic =
      fidelity(gated_state(GateSet(gate), m).rho_gated, BellTarget::psi_plus());
  CHECK(std::abs(points[0].fidelity.value - analytic) <= 3.0 * points[0].fidelity.sigma);
}

TEST_CASE("scan without splitting is flat within errors") {
  const SourceModel m = constant_source(0.0, 0.78, 577.0);
  std::vector<GateWindow> gates;
  for (double t = 0.0; t <= 3000.0; t += 500.0) gates.emplace_back(t, 537.0);
  for (const auto& p : scan(m, gates, 1'500'000, 8)) {
    CHECK(std::abs(p.fidelity.value - 0.835) <= 3.0 * p.fidelity.sigma);
  }
}
