#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "propimp/dataset.hpp"
#include "propimp/distribution.hpp"
#include "propimp/fitters.hpp"
#include "propimp/imputation.hpp"
#include "propimp/random.hpp"

namespace propimp {

struct EstimatorConfig {
  int iterations = 1000;
  int burn_in = 100;   // leading iterations excluded from the reported statistics
  int lag = 5;         // lookback for the relative-change convergence diagnostic
  double epsilon = 5e-4;
  std::uint64_t seed = 1;

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("EstimatorConfig: iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations)
      throw std::invalid_argument("EstimatorConfig: burn_in must lie in [0, iterations)");
    if (lag < 1) throw std::invalid_argument("EstimatorConfig: lag must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("EstimatorConfig: epsilon must be positive");
  }
};

struct ParamStats {
  double mean = 0.0;
  double sd = 0.0;
};

// Post-burn-in summary of one fitted margin.
struct MarginEstimate {
  Family family = Family::exponential;
  std::vector<ParamStats> params;  // family parameter order

  Distribution to_distribution() const {
    if (family == Family::exponential) return Distribution::exponential(params.at(0).mean);
    return Distribution::weibull(params.at(0).mean, params.at(1).mean);
  }
};

// One imputation round. A margin whose re-fit failed keeps its previous
// parameters and is flagged; `message` carries the diagnostics.
struct IterationOutcome {
  Distribution dist_x;
  Distribution dist_t;
  int n_imputed = 0;
  bool x_refit_ok = true;
  bool t_refit_ok = true;
  std::string message;
};

struct FitResult {
  Distribution initial_x;  // crude truncated fits used to start the chain
  Distribution initial_t;
  std::vector<std::vector<double>> trajectory_x;  // [iteration][param]
  std::vector<std::vector<double>> trajectory_t;
  std::vector<int> imputations;  // imputed-sample count per iteration
  MarginEstimate estimate_x;
  MarginEstimate estimate_t;
  std::optional<int> convergence_iteration;  // relative-change diagnostic; nullopt if never met
  double average_imputations = 0.0;          // post-burn-in mean
  int failed_iterations = 0;
};

// First index i + lag with |series[i+lag] - series[i]| / |series[i+lag]| < epsilon.
// A zero denominator leaves the criterion unmet at that index.
inline std::optional<int> first_convergence(std::span<const double> series, int lag,
                                            double epsilon) {
  if (lag < 1) throw std::invalid_argument("first_convergence: lag must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("first_convergence: epsilon must be positive");
  for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < series.size(); ++i) {
    const double later = series[i + lag];
    if (later == 0.0) continue;
    if (std::abs((later - series[i]) / later) < epsilon) return static_cast<int>(i + lag);
  }
  return std::nullopt;
}

// Every parameter must settle; the reported iteration is the slowest one.
inline std::optional<int> check_convergence(std::span<const std::vector<double>> per_parameter,
                                            int lag, double epsilon) {
  std::optional<int> worst;
  for (const auto& series : per_parameter) {
    const auto idx = first_convergence(series, lag, epsilon);
    if (!idx) return std::nullopt;
    if (!worst || *idx > *worst) worst = idx;
  }
  return worst;
}

namespace detail {

// Crude starting values: fit the margin as if its samples came from the
// distribution conditioned below t0. If that fit does not exist, fall back to
// the plain uncensored MLE; any positive starting point serves.
inline Distribution initial_margin(Family family, std::span<const double> samples, double t0,
                                   const char* margin) {
  try {
    return fit_truncated(family, samples, t0);
  } catch (const EstimationError&) {
  }
  try {
    if (family == Family::exponential) {
      double sum = 0.0;
      for (double v : samples) sum += v;
      return Distribution::exponential(static_cast<double>(samples.size()) / sum);
    }
    std::vector<CensoredSample> events;
    events.reserve(samples.size());
    for (double v : samples) events.push_back({v, true});
    return fit_censored(family, events);
  } catch (const EstimationError& e) {
    throw EstimationError(std::string("initial estimate failed for ") + margin + ": " + e.what());
  }
}

// Working copy of the dataset with each margin divided by its own time scale.
struct ScaledData {
  int n_total = 0;
  std::vector<double> xs;  // installation times / x_scale
  std::vector<double> ts;  // failure durations / t_scale
  double t0_x = 0.0;       // horizon in installation units
  double t0_t = 0.0;       // horizon in failure units
  double x_to_t = 1.0;     // converts installation-unit durations to failure units
  double t_to_x = 1.0;
};

inline ScaledData make_scaled(const BatchDataset& ds, const ScaleFactors& s) {
  if (!(s.x_scale > 0.0) || !(s.t_scale > 0.0) || !std::isfinite(s.x_scale) ||
      !std::isfinite(s.t_scale))
    throw std::invalid_argument("fit: scale factors must be positive and finite");
  ScaledData d;
  d.n_total = ds.n_total();
  d.xs.reserve(ds.num_observed());
  d.ts.reserve(ds.num_observed());
  for (const auto& u : ds.observed()) {
    d.xs.push_back(u.x / s.x_scale);
    d.ts.push_back(u.t / s.t_scale);
  }
  d.t0_x = ds.horizon() / s.x_scale;
  d.t0_t = ds.horizon() / s.t_scale;
  d.x_to_t = s.x_scale / s.t_scale;
  d.t_to_x = s.t_scale / s.x_scale;
  return d;
}

inline IterationOutcome iterate_scaled(const ScaledData& d, const Distribution& cur_x,
                                       const Distribution& cur_t, RngStream& rng) {
  IterationOutcome out{cur_x, cur_t, 0, true, true, {}};
  std::vector<double> imputed;
  try {
    const Distribution t_in_x_units = cur_t.scaled_by(d.t_to_x);
    const ImputationPlan plan = build_plan(d.n_total, d.t0_x, d.xs, cur_x, t_in_x_units);
    const auto counts = draw_counts(plan, rng);
    imputed = impute_installations(plan, counts, cur_x, rng);
  } catch (const EstimationError& e) {
    out.x_refit_ok = out.t_refit_ok = false;
    out.message = std::string("imputation failed: ") + e.what();
    return out;
  }
  out.n_imputed = static_cast<int>(imputed.size());

  // Installation margin: observed and imputed installations are events; the
  // rest of the batch is censored at the horizon.
  {
    std::vector<CensoredSample> cs;
    const long censored =
        std::max(0L, static_cast<long>(d.n_total) - static_cast<long>(d.xs.size()) -
                         static_cast<long>(imputed.size()));
    cs.reserve(d.xs.size() + imputed.size() + static_cast<std::size_t>(censored));
    for (double x : d.xs) cs.push_back({x, true});
    for (double x : imputed) cs.push_back({x, true});
    for (long i = 0; i < censored; ++i) cs.push_back({d.t0_x, false});
    try {
      out.dist_x = fit_censored(cur_x.family(), cs);
    } catch (const EstimationError& e) {
      out.x_refit_ok = false;
      out.message += std::string("installation re-fit failed (") + e.what() + ", " +
                     std::to_string(imputed.size()) + " imputed); ";
    }
  }

  // Failure margin: observed failures are events; each imputed installation
  // censors the failure time at horizon minus installation. A censoring time
  // of exactly zero carries no information and is dropped.
  {
    std::vector<CensoredSample> cs;
    cs.reserve(d.ts.size() + imputed.size());
    for (double t : d.ts) cs.push_back({t, true});
    for (double x : imputed) {
      const double c = (d.t0_x - x) * d.x_to_t;
      if (c > 0.0) cs.push_back({c, false});
    }
    try {
      out.dist_t = fit_censored(cur_t.family(), cs);
    } catch (const EstimationError& e) {
      out.t_refit_ok = false;
      out.message += std::string("failure re-fit failed (") + e.what() + ", " +
                     std::to_string(imputed.size()) + " imputed); ";
    }
  }
  return out;
}

inline std::vector<double> params_of(const Distribution& dist) {
  std::vector<double> v(dist.n_params());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = dist.param(i);
  return v;
}

inline MarginEstimate summarize(Family family, const std::vector<std::vector<double>>& traj,
                                int burn_in) {
  MarginEstimate est;
  est.family = family;
  const std::size_t n_params = traj.empty() ? 0 : traj.front().size();
  const std::size_t n = traj.size() - static_cast<std::size_t>(burn_in);
  est.params.resize(n_params);
  for (std::size_t p = 0; p < n_params; ++p) {
    double sum = 0.0;
    for (std::size_t i = burn_in; i < traj.size(); ++i) sum += traj[i][p];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = burn_in; i < traj.size(); ++i) {
      const double dev = traj[i][p] - mean;
      ss += dev * dev;
    }
    est.params[p] = {mean, n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0};
  }
  return est;
}

}  // namespace detail

// Step-0 estimates: each margin fitted as a truncated sample below the
// horizon (with the uncensored-MLE fallback documented above).
inline std::pair<Distribution, Distribution> initial_estimates(const BatchDataset& ds,
                                                               Family family_x, Family family_t) {
  if (ds.num_observed() < 2)
    throw std::invalid_argument("initial_estimates: need at least 2 observed units");
  const auto xs = ds.installation_times();
  const auto ts = ds.failure_durations();
  return {detail::initial_margin(family_x, xs, ds.horizon(), "installation margin"),
          detail::initial_margin(family_t, ts, ds.horizon(), "failure margin")};
}

// One round of plan -> impute -> censored re-fits, at the current parameters.
inline IterationOutcome iterate_once(const BatchDataset& ds, const Distribution& dist_x,
                                     const Distribution& dist_t, RngStream& rng) {
  const auto d = detail::make_scaled(ds, ScaleFactors{});
  return detail::iterate_scaled(d, dist_x, dist_t, rng);
}

// The full iterative procedure: truncated starting fits, a fixed number of
// imputation rounds, post-burn-in means and standard deviations, and the
// relative-change convergence diagnostic. Deterministic given (dataset,
// config). With non-unit scale factors the chain runs on the rescaled data
// and every recorded value is transformed back to the original scale.
inline FitResult fit(const BatchDataset& ds, Family family_x, Family family_t,
                     const EstimatorConfig& config, const ScaleFactors& scales = {}) {
  config.validate();
  if (ds.num_observed() < 2) throw std::invalid_argument("fit: need at least 2 observed units");

  const auto d = detail::make_scaled(ds, scales);
  Distribution cur_x = detail::initial_margin(family_x, d.xs, d.t0_x, "installation margin");
  Distribution cur_t = detail::initial_margin(family_t, d.ts, d.t0_t, "failure margin");
  const Distribution initial_x = cur_x.scaled_by(scales.x_scale);
  const Distribution initial_t = cur_t.scaled_by(scales.t_scale);

  RngStream rng(config.seed);
  std::vector<std::vector<double>> traj_x, traj_t;
  traj_x.reserve(config.iterations);
  traj_t.reserve(config.iterations);
  std::vector<int> imputations;
  imputations.reserve(config.iterations);
  int failures = 0;

  for (int it = 0; it < config.iterations; ++it) {
    const auto outcome = detail::iterate_scaled(d, cur_x, cur_t, rng);
    cur_x = outcome.dist_x;
    cur_t = outcome.dist_t;
    if (!outcome.x_refit_ok || !outcome.t_refit_ok) {
      ++failures;
      if (5 * failures > config.iterations)
        throw EstimationError("fit: more than 20% of iterations failed to re-fit; last: " +
                              outcome.message);
    }
    traj_x.push_back(detail::params_of(cur_x.scaled_by(scales.x_scale)));
    traj_t.push_back(detail::params_of(cur_t.scaled_by(scales.t_scale)));
    imputations.push_back(outcome.n_imputed);
  }

  const MarginEstimate est_x = detail::summarize(family_x, traj_x, config.burn_in);
  const MarginEstimate est_t = detail::summarize(family_t, traj_t, config.burn_in);

  std::vector<std::vector<double>> all_series;
  for (std::size_t p = 0; p < est_x.params.size(); ++p) {
    std::vector<double> s(traj_x.size());
    for (std::size_t i = 0; i < traj_x.size(); ++i) s[i] = traj_x[i][p];
    all_series.push_back(std::move(s));
  }
  for (std::size_t p = 0; p < est_t.params.size(); ++p) {
    std::vector<double> s(traj_t.size());
    for (std::size_t i = 0; i < traj_t.size(); ++i) s[i] = traj_t[i][p];
    all_series.push_back(std::move(s));
  }
  const auto convergence = check_convergence(all_series, config.lag, config.epsilon);

  double imp_sum = 0.0;
  for (std::size_t i = config.burn_in; i < imputations.size(); ++i) imp_sum += imputations[i];
  const double avg_imp = imp_sum / static_cast<double>(config.iterations - config.burn_in);

  return FitResult{initial_x,
                   initial_t,
                   std::move(traj_x),
                   std::move(traj_t),
                   std::move(imputations),
                   est_x,
                   est_t,
                   convergence,
                   avg_imp,
                   failures};
}

}  // namespace propimp
