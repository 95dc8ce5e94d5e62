#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "propimp/distribution.hpp"
#include "propimp/errors.hpp"
#include "propimp/numeric.hpp"

namespace propimp {

// One duration on test: a real failure (event = true) or a censoring time
// (event = false).
struct CensoredSample {
  double duration = 0.0;
  bool event = false;
};

struct WeibullParams {
  double shape = 0.0;
  double scale = 0.0;
};

namespace detail {

// 1/expm1(u) - 1/u, stable through u = 0 (limit -1/2).
inline double inv_expm1_minus_inv(double u) {
  if (std::abs(u) < 1e-5) return -0.5 + u / 12.0 - u * u * u / 720.0;
  return 1.0 / std::expm1(u) - 1.0 / u;
}

inline void check_positive_below(std::span<const double> samples, double t0, const char* who) {
  if (samples.empty()) throw std::invalid_argument(std::string(who) + ": empty sample");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw std::invalid_argument(std::string(who) + ": t0 must be positive");
  for (double x : samples)
    if (!std::isfinite(x) || !(x > 0.0) || !(x < t0))
      throw std::invalid_argument(std::string(who) + ": samples must lie in (0, t0)");
}

// Log-likelihood of a Weibull sample observed conditionally on being below t0.
// Used to pick among profile-equation roots; tests keep their own copy.
inline double truncated_weibull_loglik(std::span<const double> samples, double t0, double shape,
                                       double scale) {
  const double z0 = std::pow(t0 / scale, shape);
  const double log_f0 = std::log(-std::expm1(-z0));
  double ll = 0.0;
  for (double x : samples)
    ll += std::log(shape / scale) + (shape - 1.0) * std::log(x / scale) - std::pow(x / scale, shape);
  return ll - static_cast<double>(samples.size()) * log_f0;
}

}  // namespace detail

// Rate MLE for exponential data observed only below t0. The score
//   1/r - t0/(e^{r t0} - 1) - mean(x)
// is strictly decreasing with limit t0/2 - mean at r -> 0, so a positive root
// exists iff mean(x) < t0/2.
inline double fit_truncated_exponential(std::span<const double> samples, double t0) {
  detail::check_positive_below(samples, t0, "fit_truncated_exponential");
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / static_cast<double>(samples.size());
  if (!(mean < 0.5 * t0))
    throw NoRootError(
        "fit_truncated_exponential: sample mean >= t0/2, score equation has no positive root");
  auto score = [&](double r) { return 1.0 / r - t0 / std::expm1(t0 * r) - mean; };
  auto root = find_root(score, 1e-8, 1e4);
  if (!root) throw NoRootError("fit_truncated_exponential: no root located in [1e-8, 1e4]");
  return *root;
}

// Closed-form rate MLE under right censoring: events / total time on test.
inline double fit_censored_exponential(std::span<const CensoredSample> samples) {
  if (samples.empty()) throw std::invalid_argument("fit_censored_exponential: empty sample");
  std::size_t events = 0;
  double total = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.duration) || s.duration < 0.0)
      throw std::invalid_argument("fit_censored_exponential: durations must be finite and nonnegative");
    events += s.event ? 1 : 0;
    total += s.duration;
  }
  if (events == 0) throw NoEventsError("fit_censored_exponential: no observed events");
  if (!(total > 0.0)) throw std::invalid_argument("fit_censored_exponential: total time on test is zero");
  return static_cast<double>(events) / total;
}

// Weibull MLE for data observed only below t0, via the one-dimensional
// profile equation in the shape over y = x/t0. With
//   A(b) = n/b + sum(log y),  B(b) = sum(y^b log y),  u = A/B,
// the profile root must satisfy u > 0 (equivalently b > -n/sum(log y)), and
// the scale follows as t0 * (B/A)^(1/b). The search is confined to
// [0.05, 50]; no sign change there means the MLE does not exist.
inline WeibullParams fit_truncated_weibull(std::span<const double> samples, double t0) {
  detail::check_positive_below(samples, t0, "fit_truncated_weibull");
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("fit_truncated_weibull: need at least 2 samples");
  std::vector<double> log_y(n);
  double log_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    log_y[i] = std::log(samples[i] / t0);
    log_sum += log_y[i];
  }
  if (std::ranges::count(samples, samples[0]) == static_cast<std::ptrdiff_t>(n))
    throw std::invalid_argument("fit_truncated_weibull: need at least 2 distinct samples");

  const double nn = static_cast<double>(n);
  auto sums = [&](double b) {
    double s1 = 0.0, s2 = 0.0;
    for (double ly : log_y) {
      const double w = std::exp(b * ly);
      s1 += w;
      s2 += w * ly;
    }
    return std::pair{s1, s2};
  };
  auto profile = [&](double b) {
    const auto [s1, s2] = sums(b);
    const double u = (nn / b + log_sum) / s2;
    return s1 / nn + detail::inv_expm1_minus_inv(u);
  };

  const double shape_floor = -nn / log_sum;  // below this the profiled scale is undefined
  const double lo = std::max(0.05, shape_floor * (1.0 + 1e-9));
  const double hi = 50.0;
  if (!(lo < hi))
    throw NoRootError("fit_truncated_weibull: no admissible shape in [0.05, 50]");

  const auto brackets = scan_sign_changes(profile, lo, hi, 400);
  if (brackets.empty())
    throw NoRootError("fit_truncated_weibull: profile equation has no root in [0.05, 50]");

  WeibullParams best{};
  double best_ll = -std::numeric_limits<double>::infinity();
  for (const auto& br : brackets) {
    const double b = bisect(profile, br.lo, br.hi, br.f_lo, br.f_hi);
    const auto [s1, s2] = sums(b);
    const double ratio = s2 / (nn / b + log_sum);
    if (!(ratio > 0.0)) continue;
    const double scale = t0 * std::pow(ratio, 1.0 / b);
    if (!(scale > 0.0) || !std::isfinite(scale)) continue;
    const double ll = detail::truncated_weibull_loglik(samples, t0, b, scale);
    if (ll > best_ll) {
      best_ll = ll;
      best = {b, scale};
    }
  }
  if (!(best.shape > 0.0))
    throw NoRootError("fit_truncated_weibull: profile roots gave no admissible estimate");
  return best;
}

// Weibull MLE under right censoring. Shape solves
//   1/b + mean(log t | events) - sum(t^b log t)/sum(t^b) = 0
// (sums over all durations, events and censorings alike); the scale is then
// (sum(t^b)/events)^(1/b). Powers are computed relative to the largest
// duration so large shapes cannot overflow.
inline WeibullParams fit_censored_weibull(std::span<const CensoredSample> samples) {
  if (samples.empty()) throw std::invalid_argument("fit_censored_weibull: empty sample");
  std::size_t events = 0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.duration) || !(s.duration > 0.0))
      throw std::invalid_argument("fit_censored_weibull: durations must be positive");
    events += s.event ? 1 : 0;
  }
  if (events == 0) throw NoEventsError("fit_censored_weibull: no observed events");

  const std::size_t n = samples.size();
  std::vector<double> log_t(n);
  double log_max = -std::numeric_limits<double>::infinity();
  double event_log_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    log_t[i] = std::log(samples[i].duration);
    log_max = std::max(log_max, log_t[i]);
    if (samples[i].event) event_log_sum += log_t[i];
  }
  const double event_log_mean = event_log_sum / static_cast<double>(events);

  auto score = [&](double b) {
    double sw = 0.0, swl = 0.0;
    for (double lt : log_t) {
      const double w = std::exp(b * (lt - log_max));
      sw += w;
      swl += w * lt;
    }
    return 1.0 / b + event_log_mean - swl / sw;
  };
  auto root = find_root(score, 1e-8, 1e4);
  if (!root)
    throw NoRootError("fit_censored_weibull: shape equation has no root in [1e-8, 1e4]");
  const double b = *root;
  double sw = 0.0;
  for (double lt : log_t) sw += std::exp(b * (lt - log_max));
  const double scale = std::exp(log_max) * std::pow(sw / static_cast<double>(events), 1.0 / b);
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw NoRootError("fit_censored_weibull: scale estimate is not finite");
  return {b, scale};
}

// Family dispatchers used by the iterative estimator.

inline Distribution fit_truncated(Family family, std::span<const double> samples, double t0) {
  if (family == Family::exponential)
    return Distribution::exponential(fit_truncated_exponential(samples, t0));
  const auto p = fit_truncated_weibull(samples, t0);
  return Distribution::weibull(p.shape, p.scale);
}

inline Distribution fit_censored(Family family, std::span<const CensoredSample> samples) {
  if (family == Family::exponential)
    return Distribution::exponential(fit_censored_exponential(samples));
  const auto p = fit_censored_weibull(samples);
  return Distribution::weibull(p.shape, p.scale);
}

}  // namespace propimp
