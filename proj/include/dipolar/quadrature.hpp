#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "dipolar/errors.hpp"

namespace dipolar {

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  int max_depth = 60;
  std::size_t max_intervals = 200000;
  /// An interval whose error estimate has failed to shrink on this many bisections while
  /// sitting below roundoff_ratio times its absolute integral is at the evaluation noise
  /// floor and is no longer refined.
  int roundoff_stalls = 3;
  double roundoff_ratio = 1e-7;

  bool operator==(const QuadratureOptions&) const = default;
};

template <std::size_t N>
struct QuadratureResult {
  std::array<double, N> value{};
  std::array<double, N> error{};
  std::size_t evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes on [-1, 1]: Kronrod abscissae, Kronrod weights, Gauss weights
// (Gauss nodes are the odd-indexed Kronrod nodes).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Interval {
  double a, b;
  int depth;
  std::array<double, N> value;
  std::array<double, N> error;
  std::array<double, N> magnitude;  // integral of |f|
  double worst;
  int stalls = 0;
  bool operator<(const Interval& o) const { return worst < o.worst; }
};

// Integrates f over one interval in the mapped variable x in [a, b] where the physical
// abscissa is s = lo + (hi - lo) * (3y^2 - 2y^3), y = (x - lo)/(hi - lo). The map has zero
// slope at both segment ends, which tames inverse-square-root endpoint behaviour.
template <std::size_t N, class F>
Interval<N> gk15(F& f, double lo, double hi, double a, double b, int depth) {
  const double width = hi - lo;
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto mapped = [&](double x) {
    const double y = (x - lo) / width;
    const double s = lo + width * y * y * (3.0 - 2.0 * y);
    const double jac = 6.0 * y * (1.0 - y);
    auto v = f(s);
    for (auto& c : v) c *= jac;
    return v;
  };

  std::array<double, N> kron{};
  std::array<double, N> gauss{};
  std::array<double, N> mag{};
  {
    const auto fc = mapped(centre);
    for (std::size_t c = 0; c < N; ++c) {
      kron[c] = kWgk[7] * fc[c];
      gauss[c] = kWg[3] * fc[c];
      mag[c] = kWgk[7] * std::abs(fc[c]);
    }
  }
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const auto f1 = mapped(centre - dx);
    const auto f2 = mapped(centre + dx);
    for (std::size_t c = 0; c < N; ++c) {
      const double sum = f1[c] + f2[c];
      kron[c] += kWgk[j] * sum;
      mag[c] += kWgk[j] * (std::abs(f1[c]) + std::abs(f2[c]));
      if (j % 2 == 1) gauss[c] += kWg[j / 2] * sum;
    }
  }
  Interval<N> out{a, b, depth, {}, {}, {}, 0.0};
  for (std::size_t c = 0; c < N; ++c) {
    out.value[c] = kron[c] * half;
    out.magnitude[c] = mag[c] * half;
    out.error[c] = std::abs((kron[c] - gauss[c]) * half);
    out.worst = std::max(out.worst, out.error[c]);
  }
  return out;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of a vector-valued integrand over [lo, hi].
///
/// f(s) must return std::array<double, N>. The tolerance applies to the largest component
/// error against the largest component magnitude. Throws QuadratureError when an interval
/// that still needs refinement is max_depth bisections deep, or the interval budget runs
/// out.
template <std::size_t N, class F>
QuadratureResult<N> integrate_adaptive(F&& f, double lo, double hi,
                                       const QuadratureOptions& options = {}) {
  QuadratureResult<N> result;
  if (!(hi > lo)) return result;

  std::priority_queue<detail::Interval<N>> queue;
  queue.push(detail::gk15<N>(f, lo, hi, lo, hi, 0));
  result.evaluations = 15;

  std::array<double, N> frozen_value{};
  std::array<double, N> frozen_error{};
  auto totals = [&](std::array<double, N>& value, std::array<double, N>& error) {
    auto copy = queue;
    value = frozen_value;
    std::fill(error.begin(), error.end(), 0.0);
    while (!copy.empty()) {
      for (std::size_t c = 0; c < N; ++c) {
        value[c] += copy.top().value[c];
        error[c] += copy.top().error[c];
      }
      copy.pop();
    }
  };

  std::array<double, N> value = queue.top().value;
  std::array<double, N> error = queue.top().error;
  std::size_t since_resum = 0;
  for (;;) {
    double scale = 0.0;
    double worst = 0.0;
    for (std::size_t c = 0; c < N; ++c) {
      scale = std::max(scale, std::abs(value[c]));
      worst = std::max(worst, error[c]);
    }
    const double tol = std::max(options.abs_tol, options.rel_tol * scale);
    if (worst <= tol || queue.empty()) break;

    const auto top = queue.top();
    if (top.depth >= options.max_depth || queue.size() >= options.max_intervals) {
      std::ostringstream msg;
      msg << "adaptive quadrature on [" << lo << ", " << hi << "] did not converge ("
          << (top.depth >= options.max_depth ? "refinement depth" : "interval budget")
          << " exhausted near s = " << 0.5 * (top.a + top.b) << ")";
      double partial = 0.0;
      for (std::size_t c = 0; c < N; ++c) partial = std::max(partial, std::abs(value[c]));
      throw QuadratureError(msg.str(), partial, worst);
    }
    queue.pop();
    const double mid = 0.5 * (top.a + top.b);
    auto left = detail::gk15<N>(f, lo, hi, top.a, mid, top.depth + 1);
    auto right = detail::gk15<N>(f, lo, hi, mid, top.b, top.depth + 1);
    result.evaluations += 30;
    for (std::size_t c = 0; c < N; ++c) {
      value[c] += left.value[c] + right.value[c] - top.value[c];
      error[c] += left.error[c] + right.error[c] - top.error[c];
    }
    const bool improved = left.worst + right.worst < 0.7 * top.worst;
    for (auto* child : {&left, &right}) {
      bool at_noise_floor = true;
      for (std::size_t c = 0; c < N; ++c) {
        if (child->error[c] > options.roundoff_ratio * child->magnitude[c]) at_noise_floor = false;
      }
      child->stalls = improved ? top.stalls : top.stalls + 1;
      // Abscissae closer than a few ulps cannot be resolved further.
      const double ulps = (child->b - child->a) /
                          (std::numeric_limits<double>::epsilon() * std::max(std::abs(child->a), std::abs(child->b)));
      if ((at_noise_floor && child->stalls >= options.roundoff_stalls) || ulps < 64.0) {
        for (std::size_t c = 0; c < N; ++c) {
          frozen_value[c] += child->value[c];
          frozen_error[c] += child->error[c];
          error[c] -= child->error[c];
        }
      } else {
        queue.push(std::move(*child));
      }
    }
    // Running sums drift; rebuild them from the queue now and then.
    if (++since_resum == 256) {
      totals(value, error);
      since_resum = 0;
    }
  }
  totals(result.value, result.error);
  for (std::size_t c = 0; c < N; ++c) result.error[c] += frozen_error[c];
  return result;
}

}  // namespace dipolar
