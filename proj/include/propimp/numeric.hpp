#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace propimp {

namespace detail {

template <class F>
double simpson_refine(F& f, double a, double m, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_refine(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_refine(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`,
// with bounded recursion depth.
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-10, int max_depth = 60) {
  if (!(a <= b)) throw std::invalid_argument("integrate: interval endpoints out of order");
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_refine(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

struct BracketInterval {
  double lo = 0.0;
  double hi = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
};

// Bisection on a sign-changing interval, to absolute tolerance on the argument.
template <class F>
double bisect(F&& f, double lo, double hi, double f_lo, double f_hi, double abs_tol = 1e-12) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (!(f_lo * f_hi < 0.0)) throw std::invalid_argument("bisect: endpoints do not bracket a root");
  while (hi - lo > abs_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at floating-point resolution
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
      f_hi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

// All sign-change brackets of f on a log-spaced grid over [lo, hi], lo > 0.
// Non-finite evaluations break the scan locally rather than failing it.
template <class F>
std::vector<BracketInterval> scan_sign_changes(F&& f, double lo, double hi, int points = 256) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("scan_sign_changes: need 0 < lo < hi");
  if (points < 2) points = 2;
  std::vector<BracketInterval> out;
  const double step = std::log(hi / lo) / (points - 1);
  double prev_x = 0.0;
  double prev_f = 0.0;
  bool have_prev = false;
  for (int i = 0; i < points; ++i) {
    const double x = (i == points - 1) ? hi : lo * std::exp(step * i);
    const double fx = f(x);
    if (!std::isfinite(fx)) {
      have_prev = false;
      continue;
    }
    if (have_prev && (prev_f < 0.0) != (fx < 0.0)) out.push_back({prev_x, x, prev_f, fx});
    prev_x = x;
    prev_f = fx;
    have_prev = true;
  }
  return out;
}

// First root of f in [lo, hi]: use the endpoint bracket when it exists,
// otherwise scan a log grid for a sign change; optionally widen the interval
// geometrically as a last resort.
template <class F>
std::optional<double> find_root(F&& f, double lo, double hi, double abs_tol = 1e-12,
                                int scan_points = 256, int max_expansions = 0) {
  for (int round = 0; round <= max_expansions; ++round) {
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (std::isfinite(f_lo) && std::isfinite(f_hi) && (f_lo < 0.0) != (f_hi < 0.0))
      return bisect(f, lo, hi, f_lo, f_hi, abs_tol);
    auto brackets = scan_sign_changes(f, lo, hi, scan_points);
    if (!brackets.empty()) {
      const auto& b = brackets.front();
      return bisect(f, b.lo, b.hi, b.f_lo, b.f_hi, abs_tol);
    }
    lo *= 1e-2;
    hi *= 1e2;
  }
  return std::nullopt;
}

}  // namespace propimp
