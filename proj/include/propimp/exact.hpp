#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "propimp/dataset.hpp"
#include "propimp/distribution.hpp"
#include "propimp/errors.hpp"
#include "propimp/numeric.hpp"

namespace propimp {

// P(a unit is still unobserved at the horizon): never installed, or installed
// and still running. The installation integral is evaluated in probability
// coordinates (u = F_X(x)) so the integrand stays bounded even for
// installation densities that blow up at zero; adaptive Simpson, absolute
// tolerance `tol`, depth 60.
inline double unobserved_probability(const Distribution& dist_x, const Distribution& dist_t,
                                     double t0, double tol = 1e-10) {
  if (!(t0 >= 0.0)) throw std::invalid_argument("unobserved_probability: t0 must be nonnegative");
  // cap u strictly below 1 so the quantile stays finite, and clamp it to the
  // horizon against roundoff overshoot; both trims are far below `tol`
  const double upper = std::min(dist_x.cdf(t0), std::nextafter(1.0, 0.0));
  const double surviving = integrate(
      [&](double u) { return dist_t.survival(t0 - std::min(dist_x.quantile(u), t0)); }, 0.0,
      upper, tol);
  return dist_x.survival(t0) + surviving;
}

// Full-batch log-likelihood: observed units contribute their joint density,
// each of the N - C unobserved units contributes the unobserved probability.
inline double exact_loglik(const Distribution& dist_x, const Distribution& dist_t,
                           const BatchDataset& ds, double tol = 1e-10) {
  double ll = 0.0;
  for (const auto& u : ds.observed()) ll += dist_x.log_pdf(u.x) + dist_t.log_pdf(u.t);
  const int unobserved = ds.n_total() - static_cast<int>(ds.num_observed());
  if (unobserved > 0)
    ll += unobserved * std::log(unobserved_probability(dist_x, dist_t, ds.horizon(), tol));
  return ll;
}

// Log-likelihood once an imputed set of installation times stands in for the
// installed-but-surviving units: the two censored margins multiply, so this
// equals the installation-margin and failure-margin censored log-likelihoods
// added together.
inline double imputed_loglik(const Distribution& dist_x, const Distribution& dist_t,
                             const BatchDataset& ds, std::span<const double> imputed_x) {
  const double t0 = ds.horizon();
  double ll = 0.0;
  for (const auto& u : ds.observed()) ll += dist_x.log_pdf(u.x) + dist_t.log_pdf(u.t);
  for (double x : imputed_x) ll += dist_x.log_pdf(x) + dist_t.log_survival(t0 - x);
  const long rest = static_cast<long>(ds.n_total()) - static_cast<long>(ds.num_observed()) -
                    static_cast<long>(imputed_x.size());
  if (rest > 0) ll += static_cast<double>(rest) * dist_x.log_survival(t0);
  return ll;
}

struct ExactExponentialMle {
  double rate = 0.0;
  double asymptotic_sd = 0.0;
};

namespace detail {

inline double iid_exponential_loglik(double rate, double duration_sum, int n_observed,
                                     int n_unobserved, double t0) {
  // unobserved-probability bracket is analytic here: e^{-r t0} (1 + r t0)
  return 2.0 * n_observed * std::log(rate) - rate * duration_sum +
         n_unobserved * (std::log1p(rate * t0) - rate * t0);
}

}  // namespace detail

// Exact MLE when installation and failure times share one exponential rate.
// The score has a unique positive root; the standard deviation comes from the
// observed information, i.e. the central-difference second derivative of the
// log-likelihood at the estimate (step rate * 1e-4).
inline ExactExponentialMle exact_mle_iid_exponential(const BatchDataset& ds) {
  const int c = static_cast<int>(ds.num_observed());
  if (c == 0) throw NoEventsError("exact_mle_iid_exponential: no observed units");
  const int rest = ds.n_total() - c;
  const double t0 = ds.horizon();
  double duration_sum = 0.0;
  for (const auto& u : ds.observed()) duration_sum += u.x + u.t;

  auto score = [&](double r) {
    return 2.0 * c / r + t0 * rest / (1.0 + r * t0) - duration_sum - rest * t0;
  };
  // the score scales with n * t0, so bisect down to floating-point resolution
  // to keep its residual below 1e-10
  auto root = find_root(score, 1e-8, 1e4, 0.0, 256, 2);
  if (!root) throw NoRootError("exact_mle_iid_exponential: score equation has no root");
  const double rate = *root;

  const double h = rate * 1e-4;
  auto ll = [&](double r) { return detail::iid_exponential_loglik(r, duration_sum, c, rest, t0); };
  const double second = (ll(rate + h) - 2.0 * ll(rate) + ll(rate - h)) / (h * h);
  return {rate, std::sqrt(-1.0 / second)};
}

enum class MarginSide { installation, failure };

// One free parameter swept over explicit grid values.
struct AxisSpec {
  MarginSide margin = MarginSide::installation;
  std::size_t param_index = 0;
  std::vector<double> values;
};

struct SurfaceGrid {
  std::vector<double> axis1;                 // rows
  std::vector<double> axis2;                 // columns
  std::vector<std::vector<double>> loglik;   // loglik[i][j]; -inf marks an empty cell
};

// Log-likelihood over a 2-D parameter slice. Parameters not on an axis stay
// at their values in base_x / base_t. When `imputed_x` is nonempty the
// imputed-factorization log-likelihood is evaluated instead of the exact one.
inline SurfaceGrid loglik_surface(const Distribution& base_x, const Distribution& base_t,
                                  const BatchDataset& ds, const AxisSpec& axis1,
                                  const AxisSpec& axis2, std::span<const double> imputed_x = {},
                                  double tol = 1e-10) {
  for (const auto* axis : {&axis1, &axis2}) {
    if (axis->values.empty()) throw std::invalid_argument("loglik_surface: empty axis");
    const auto& base = axis->margin == MarginSide::installation ? base_x : base_t;
    if (axis->param_index >= base.n_params())
      throw std::invalid_argument("loglik_surface: axis parameter index out of range");
    for (double v : axis->values)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("loglik_surface: grid values must be positive");
  }
  SurfaceGrid grid{axis1.values, axis2.values, {}};
  grid.loglik.assign(axis1.values.size(), std::vector<double>(axis2.values.size(), 0.0));
  for (std::size_t i = 0; i < axis1.values.size(); ++i) {
    for (std::size_t j = 0; j < axis2.values.size(); ++j) {
      Distribution dx = base_x;
      Distribution dt = base_t;
      auto apply = [&](const AxisSpec& axis, double v) {
        if (axis.margin == MarginSide::installation)
          dx = dx.with_param(axis.param_index, v);
        else
          dt = dt.with_param(axis.param_index, v);
      };
      apply(axis1, axis1.values[i]);
      apply(axis2, axis2.values[j]);
      grid.loglik[i][j] = imputed_x.empty() ? exact_loglik(dx, dt, ds, tol)
                                            : imputed_loglik(dx, dt, ds, imputed_x);
    }
  }
  return grid;
}

}  // namespace propimp
