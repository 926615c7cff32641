#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace biphoton {

/// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double error_estimate)
      : std::runtime_error(what + " (attained error estimate " +
                           std::to_string(error_estimate) + ")"),
        error_estimate_(error_estimate) {}

  double error_estimate() const { return error_estimate_; }

 private:
  double error_estimate_;
};

inline constexpr double kQuadratureRelTol = 1e-8;
inline constexpr std::size_t kQuadratureMaxIntervals = 20000;

template <std::size_t N>
struct QuadratureResult {
  std::array<double, N> value{};
  double error = 0.0;  // max over components
  double l1 = 0.0;     // max over components of the integral of |f_i|
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK tables).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the Kronrod nodes with odd index (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Panel {
  double a, b;
  std::array<double, N> value;
  double error;
  double l1;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <std::size_t N, class F>
Panel<N> gauss_kronrod_panel(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, N> kronrod{}, gauss{}, absolute{};
  for (std::size_t k = 0; k < 8; ++k) {
    const double x = half * kKronrodNodes[k];
    const bool gauss_node = (k % 2 == 1);
    const double wg = gauss_node ? kGaussWeights[k / 2] : 0.0;
    auto accumulate = [&](const std::array<double, N>& fx) {
      for (std::size_t i = 0; i < N; ++i) {
        kronrod[i] += kKronrodWeights[k] * fx[i];
        gauss[i] += wg * fx[i];
        absolute[i] += kKronrodWeights[k] * std::abs(fx[i]);
      }
    };
    accumulate(f(center - x));
    if (k != 7) accumulate(f(center + x));
  }
  Panel<N> p{a, b, {}, 0.0, 0.0};
  for (std::size_t i = 0; i < N; ++i) {
    p.value[i] = half * kronrod[i];
    p.error = std::max(p.error, std::abs(half * (kronrod[i] - gauss[i])));
    p.l1 = std::max(p.l1, std::abs(half) * absolute[i]);
  }
  return p;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (G7/K15) for a vector-valued integrand
/// f: double -> std::array<double, N> over [a, b]. Stops when the summed
/// panel error falls below rel_tol times the largest component L1 norm.
/// Throws QuadratureError with the attained estimate if the panel budget
/// runs out first.
template <std::size_t N, class F>
QuadratureResult<N> integrate_adaptive(F&& f, double a, double b,
                                       double rel_tol = kQuadratureRelTol) {
  QuadratureResult<N> result;
  if (!(b > a)) return result;
  using Panel = detail::Panel<N>;
  std::priority_queue<Panel> panels;
  panels.push(detail::gauss_kronrod_panel<N>(f, a, b));
  double error = panels.top().error;
  double l1 = panels.top().l1;
  while (error > rel_tol * l1 && panels.size() < kQuadratureMaxIntervals) {
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = detail::gauss_kronrod_panel<N>(f, worst.a, mid);
    Panel right = detail::gauss_kronrod_panel<N>(f, mid, worst.b);
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    panels.push(std::move(left));
    panels.push(std::move(right));
  }
  // Re-sum from scratch; the running totals above drift.
  std::vector<Panel> all;
  all.reserve(panels.size());
  while (!panels.empty()) {
    all.push_back(panels.top());
    panels.pop();
  }
  std::sort(all.begin(), all.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const Panel& p : all) {
    for (std::size_t i = 0; i < N; ++i) result.value[i] += p.value[i];
    result.error += p.error;
    result.l1 += p.l1;
  }
  if (!(result.error <= rel_tol * result.l1)) {
    throw QuadratureError("adaptive quadrature did not converge on [" +
                              std::to_string(a) + ", " + std::to_string(b) + "]",
                          result.error);
  }
  return result;
}

/// Scalar convenience wrapper.
template <class F>
double integrate_scalar(F&& f, double a, double b,
                        double rel_tol = kQuadratureRelTol) {
  auto wrapped = [&f](double x) { return std::array<double, 1>{f(x)}; };
  return integrate_adaptive<1>(wrapped, a, b, rel_tol).value[0];
}

}  // namespace biphoton
