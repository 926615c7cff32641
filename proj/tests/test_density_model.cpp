#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "biphoton/density_model.hpp"
#include "support/oracles.hpp"

using namespace biphoton;
using oracle::constant_source;

namespace {

constexpr double kHbar = 658.2119569;

Matrix4c projector(const Vector4c& psi) { return psi * psi.adjoint(); }

// Builds the analyzer products independently of the library.
Vector4c product(const Vector2c& a, const Vector2c& b) {
  Vector4c out;
  out << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
  return out;
}

double brute_force_correlation(const Matrix4c& rho, PolarizationBasis basis) {
  const auto [p, m] = analyzer_states(basis);
  auto expect = [&](const Vector4c& s) { return s.dot(rho * s).real(); };
  const double co = expect(product(p, p)) + expect(product(m, m));
  const double cross = expect(product(p, m)) + expect(product(m, p));
  return (co - cross) / (co + cross);
}

}  // namespace

TEST_CASE("rho_at reproduces the pure Bell projectors at phase 0 and pi") {
  const SourceModel m = constant_source(2.5, 1.0);
  const auto rho0 = rho_at(0.0, m);
  CHECK((rho0.entries() - projector(bell_vector(BellTarget::psi_plus()))).cwiseAbs().maxCoeff() <
        1e-12);

  const double tau_pi = constants::kPi * kHbar / 2.5;
  const auto rho_pi = rho_at(tau_pi, m);
  CHECK((rho_pi.entries() - projector(bell_vector(BellTarget::psi_minus())))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("rho_at entries at 500 ps for S=2.5, v=0.78") {
  const SourceModel m = constant_source(2.5, 0.78);
  const auto rho = rho_at(500.0, m);
  const double phi = 2.5 * 500.0 / kHbar;
  CHECK(std::abs(rho(0, 3) - std::polar(0.39, -phi)) < 1e-12);
  CHECK(std::abs(rho(3, 0) - std::polar(0.39, phi)) < 1e-12);
  CHECK(rho(0, 0).real() == doctest::Approx(0.445));
  CHECK(rho(1, 1).real() == doctest::Approx(0.055));

  // Closed-form spectrum: (1-v)/4 three times and (1+3v)/4.
  const auto ev = rho.eigenvalues();
  CHECK(ev(0) == doctest::Approx(0.055).epsilon(1e-12));
  CHECK(ev(2) == doctest::Approx(0.055).epsilon(1e-12));
  CHECK(ev(3) == doctest::Approx(0.835).epsilon(1e-12));
  CHECK(rho.is_positive_semidefinite());
}

TEST_CASE("rho_at rejects negative delay") {
  CHECK_THROWS_AS(rho_at(-1.0, constant_source(2.5, 0.5)), InvalidArgument);
}

TEST_CASE("fidelity examples") {
  const auto rho0 = rho_at(0.0, constant_source(2.5, 1.0));
  CHECK(fidelity(rho0, BellTarget::psi_plus()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(fidelity(rho0, BellTarget::psi_minus())) < 1e-12);

  const SourceModel m = constant_source(2.5, 0.78);
  const auto rho = rho_at(300.0, m);
  const double phi = 2.5 * 300.0 / kHbar;
  const double closed_form = 0.25 * (1.0 + 0.78 + 2.0 * 0.78 * std::cos(phi));
  const Vector4c psi = bell_vector(BellTarget::psi_plus());
  const double brute = (psi.adjoint() * rho.entries() * psi)(0, 0).real();
  CHECK(fidelity(rho, BellTarget::psi_plus()) == doctest::Approx(closed_form).epsilon(1e-12));
  CHECK(brute == doctest::Approx(closed_form).epsilon(1e-12));
}

TEST_CASE("correlation degrees per basis") {
  const auto rho0 = rho_at(0.0, constant_source(0.0, 1.0));
  CHECK(correlation_degree(rho0, PolarizationBasis::circular) ==
        doctest::Approx(-1.0).epsilon(1e-12));

  const SourceModel m = constant_source(2.5, 0.78);
  for (double tau : {0.0, 1000.0}) {
    CAPTURE(tau);
    const auto rho = rho_at(tau, m);
    const double phi = 2.5 * tau / kHbar;
    CHECK(correlation_degree(rho, PolarizationBasis::rectilinear) ==
          doctest::Approx(0.78).epsilon(1e-12));
    CHECK(correlation_degree(rho, PolarizationBasis::diagonal) ==
          doctest::Approx(0.78 * std::cos(phi)).epsilon(1e-12));
    CHECK(correlation_degree(rho, PolarizationBasis::circular) ==
          doctest::Approx(-0.78 * std::cos(phi)).epsilon(1e-12));
    for (PolarizationBasis b : kAllBases) {
      CHECK(correlation_degree(rho, b) ==
            doctest::Approx(brute_force_correlation(rho.entries(), b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cascade_joint_probabilities matches the projector route") {
  for (const auto& c : oracle::random_cases(300, 7)) {
    const SourceModel m = constant_source(c.splitting, c.v);
    const auto rho = rho_at(c.tau, m);
    for (PolarizationBasis b : kAllBases) {
      const auto slow = joint_probabilities(rho, b);
      const auto fast = cascade_joint_probabilities(c.v, cascade_phase(c.splitting, c.tau), b);
      for (int k = 0; k < 4; ++k) CHECK(std::abs(slow[k] - fast[k]) < 1e-12);
    }
  }
}

TEST_CASE("fidelity_from_correlations") {
  CHECK(fidelity_from_correlations(1, 1, -1) == doctest::Approx(1.0));
  CHECK(fidelity_from_correlations(0, 0, 0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(fidelity_from_correlations(1.5, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(fidelity_from_correlations(0, -1.01, 0), InvalidArgument);

  const double v = 0.78;
  for (double tau = 0.0; tau <= 4000.0; tau += 250.0) {
    const double phi = 2.5 * tau / kHbar;
    const double f = fidelity_from_correlations(v, v * std::cos(phi), -v * std::cos(phi));
    CHECK(f == doctest::Approx(fidelity(rho_at(tau, constant_source(2.5, v)),
                                        BellTarget::psi_plus()))
                   .epsilon(1e-12));
  }
}

TEST_CASE("state identities hold on random parameters") {
  for (const auto& c : oracle::random_cases(200, 11)) {
    const auto rho = rho_at(c.tau, constant_source(c.splitting, c.v));
    const double fp = fidelity(rho, BellTarget::psi_plus());
    const double fm = fidelity(rho, BellTarget::psi_minus());
    CHECK(std::abs(fp + fm - 0.5 * (1.0 + c.v)) < 1e-12);
    CHECK((rho.reduced_first() - 0.5 * Matrix2c::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rho.reduced_second() - 0.5 * Matrix2c::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    const double tomo = fidelity_from_correlations(
        correlation_degree(rho, PolarizationBasis::rectilinear),
        correlation_degree(rho, PolarizationBasis::diagonal),
        correlation_degree(rho, PolarizationBasis::circular));
    CHECK(std::abs(tomo - fp) < 1e-10);
  }
}

TEST_CASE("ungated state averages the coherence over the decay") {
  const SourceModel m = constant_source(2.5, 0.78);
  const auto s = gated_state(GateSet(GateWindow(0.0, INFINITY)), m);
  const double x = 2.5 * 769.0 / kHbar;
  // <exp(i S tau / hbar)> = 1 / (1 - i x): real part 1/(1+x^2), modulus 1/sqrt(1+x^2).
  CHECK(s.rho_gated(3, 0).real() == doctest::Approx(0.5 * 0.78 / (1.0 + x * x)).epsilon(1e-8));
  CHECK(std::abs(s.rho_gated(3, 0)) ==
        doctest::Approx(0.5 * 0.78 / std::sqrt(1.0 + x * x)).epsilon(1e-8));
  CHECK(s.mean_phase == doctest::Approx(std::atan(x)).epsilon(1e-8));
  CHECK(s.retained_fraction == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gated state without jitter: retained fraction and S=0 invariance") {
  for (double w : {49.0, 537.0, 2000.0}) {
    CAPTURE(w);
    const auto s = gated_state(GateSet(GateWindow(0.0, w)), constant_source(2.5, 0.78));
    CHECK(s.retained_fraction == doctest::Approx(1.0 - std::exp(-w / 769.0)).epsilon(1e-12));
  }
  const SourceModel flat = constant_source(0.0, 0.78);
  for (double tau_g : {0.0, 300.0, 2000.0}) {
    const auto s = gated_state(GateSet(GateWindow(tau_g, 293.0)), flat);
    CHECK(fidelity(s.rho_gated, BellTarget::psi_plus()) ==
          doctest::Approx(0.25 * (1.0 + 3.0 * 0.78)).epsilon(1e-10));
    CHECK((s.rho_gated.entries() - rho_at(0.0, flat).entries()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("gated state agrees with an independent Riemann-sum oracle") {
  SourceModel decaying = constant_source(2.5, 0.0, 577.0);
  decaying.coherence = DecayingCoherence{0.1, 769.0, 8000.0};
  for (const SourceModel& m :
       {constant_source(2.5, 0.78, 577.0), constant_source(13.5, 0.78, 577.0), decaying}) {
    for (const GateWindow& g : {GateWindow(0.0, 49.0), GateWindow(400.0, 537.0),
                                GateWindow(-200.0, 2000.0)}) {
      CAPTURE(m.splitting_S);
      CAPTURE(g.tau_g());
      const auto s = gated_state(GateSet(g), m);
      const auto ref = oracle::riemann_moments(g, m);
      CHECK(s.retained_fraction == doctest::Approx(ref.weight).epsilon(1e-6));
      CHECK(fidelity(s.rho_gated, BellTarget::psi_plus()) ==
            doctest::Approx(oracle::psi_plus_fidelity(ref)).epsilon(1e-6));
      CHECK(s.rho_gated.is_positive_semidefinite());
    }
  }
}

TEST_CASE("gated state rejects a gate with no coincidences") {
  CHECK_THROWS_AS(gated_state(GateSet(GateWindow(-500.0, 100.0)), constant_source(2.5, 0.78)),
                  InvalidArgument);
}

TEST_CASE("evolving-state fidelity") {
  CHECK(evolving_state_fidelity(constant_source(2.5, 0.78)) == doctest::Approx(0.835));
  CHECK(evolving_state_fidelity(constant_source(2.5, 1.0)) == doctest::Approx(1.0));

  SourceModel m = constant_source(2.5, 0.0);
  m.coherence = DecayingCoherence{0.1, 769.0, 8000.0};
  // Midpoint rule over 40 lifetimes with a fine step.
  const double tau_x = 769.0;
  const std::size_t steps = 4'000'000;
  const double h = 40.0 * tau_x / steps;
  double ref = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = (i + 0.5) * h;
    ref += std::exp(-t / tau_x) / tau_x * 0.25 * (1.0 + 3.0 * m.coherent_fraction(t)) * h;
  }
  CHECK(evolving_state_fidelity(m) == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("fidelity curve: flat without splitting, 2 pi hbar / S period with it") {
  std::vector<GateWindow> gates;
  for (double t = 0.0; t <= 4000.0; t += 100.0) gates.emplace_back(t, 293.0);
  for (const auto& p : fidelity_curve(gates, constant_source(0.0, 0.78), BellTarget::psi_plus())) {
    CHECK(p.fidelity == doctest::Approx(0.835).epsilon(1e-10));
  }

  // Narrow gates, no jitter: locate successive maxima on a fine grid.
  std::vector<GateWindow> fine;
  for (double t = 0.0; t <= 4000.0; t += 2.0) fine.emplace_back(t, 1.0);
  const auto curve = fidelity_curve(fine, constant_source(2.5, 0.78), BellTarget::psi_plus());
  std::vector<double> maxima;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    if (curve[i].fidelity > curve[i - 1].fidelity && curve[i].fidelity >= curve[i + 1].fidelity) {
      // Parabolic refinement through the three samples.
      const double y0 = curve[i - 1].fidelity, y1 = curve[i].fidelity, y2 = curve[i + 1].fidelity;
      const double shift = 0.5 * (y0 - y2) / (y0 - 2.0 * y1 + y2);
      maxima.push_back(curve[i].tau_g + shift * 2.0);
    }
  }
  REQUIRE(maxima.size() >= 1);
  // First maximum sits near tau_g = 0 (outside the interior scan), so compare
  // the first interior maximum with one period.
  CHECK(maxima.front() == doctest::Approx(2.0 * constants::kPi * kHbar / 2.5).epsilon(2e-3));

  // Jitter washes out the oscillation.
  std::vector<GateWindow> coarse;
  for (double t = 0.0; t <= 3500.0; t += 50.0) coarse.emplace_back(t, 537.0);
  auto amplitude = [&](double jitter) {
    const auto c = fidelity_curve(coarse, constant_source(2.5, 0.78, jitter), BellTarget::psi_plus());
    double lo = 1.0, hi = 0.0;
    for (const auto& p : c) {
      if (p.tau_g < 800.0) continue;  // skip the leading edge
      lo = std::min(lo, p.fidelity);
      hi = std::max(hi, p.fidelity);
    }
    return hi - lo;
  };
  CHECK(amplitude(577.0) < amplitude(0.0));
}

TEST_CASE("fidelity curve needs gates") {
  CHECK_THROWS_AS(fidelity_curve({}, constant_source(2.5, 0.78), BellTarget::psi_plus()),
                  InvalidArgument);
}
