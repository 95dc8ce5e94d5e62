#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "propimp/dataset.hpp"
#include "propimp/distribution.hpp"
#include "propimp/estimator.hpp"
#include "propimp/exact.hpp"

namespace propimp {

// Expected cumulative failure counts over calendar time; nonnegative,
// nondecreasing, bounded by the batch size.
struct ForecastCurve {
  std::vector<double> times;
  std::vector<double> expected;
  std::string label;
};

// N * P(a unit has installed and failed by t), one value per requested time.
// Each point is the complement of the unobserved probability at that horizon;
// microscopic quadrature wiggle is clamped so the curve stays monotone.
inline ForecastCurve expected_failures(const Distribution& dist_x, const Distribution& dist_t,
                                       int n_total, std::span<const double> times,
                                       std::string label = {}, double tol = 1e-10) {
  if (n_total < 1) throw std::invalid_argument("expected_failures: n_total must be >= 1");
  ForecastCurve curve;
  curve.label = std::move(label);
  double prev = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (!(t >= 0.0) || (i > 0 && !(t >= times[i - 1])))
      throw std::invalid_argument("expected_failures: times must be sorted and nonnegative");
    double value = n_total * (1.0 - unobserved_probability(dist_x, dist_t, t, tol));
    value = std::min(std::max(value, prev), static_cast<double>(n_total));
    curve.times.push_back(t);
    curve.expected.push_back(value);
    prev = value;
  }
  return curve;
}

// Observed pairs with each margin divided by its own sample standard
// deviation. The two margins carry different units afterwards, so the scaled
// data keeps a horizon per margin; fit() threads the factors through the
// iteration and reports back-transformed parameters.
struct RescaledDataset {
  std::vector<double> x;  // installation times / factors.x_scale
  std::vector<double> t;  // failure durations / factors.t_scale
  int n_total = 0;
  double t0_x = 0.0;
  double t0_t = 0.0;
  ScaleFactors factors;
};

namespace detail {

inline double sample_sd(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace detail

inline RescaledDataset rescale_dataset(const BatchDataset& ds) {
  if (ds.num_observed() < 2)
    throw std::invalid_argument("rescale_dataset: need at least 2 observed units");
  const auto xs = ds.installation_times();
  const auto ts = ds.failure_durations();
  const ScaleFactors factors{detail::sample_sd(xs), detail::sample_sd(ts)};
  if (!(factors.x_scale > 0.0) || !(factors.t_scale > 0.0))
    throw std::invalid_argument("rescale_dataset: zero standard deviation in a margin");
  RescaledDataset out;
  out.n_total = ds.n_total();
  out.t0_x = ds.horizon() / factors.x_scale;
  out.t0_t = ds.horizon() / factors.t_scale;
  out.factors = factors;
  out.x.reserve(xs.size());
  out.t.reserve(ts.size());
  for (double v : xs) out.x.push_back(v / factors.x_scale);
  for (double v : ts) out.t.push_back(v / factors.t_scale);
  return out;
}

// Parameters fitted on data divided by `scale`, mapped back to the original
// time units: an exponential rate divides by the scale, a Weibull scale
// multiplies by it, the shape is untouched.
inline Distribution back_transform(const Distribution& fitted, double scale) {
  return fitted.scaled_by(scale);
}

// Convenience wrapper: run the full iterative fit on standard-deviation
// rescaled data and report everything in original units.
inline FitResult fit_rescaled(const BatchDataset& ds, Family family_x, Family family_t,
                              const EstimatorConfig& config) {
  return fit(ds, family_x, family_t, config, rescale_dataset(ds).factors);
}

// One horizon of the rolling re-estimation: the models refit on the data
// available at that time, and their expected-failure curves over the full
// horizon grid. A horizon with fewer than two observed failures is skipped.
struct HorizonForecast {
  double horizon = 0.0;
  int n_observed = 0;
  bool skipped = false;
  std::string warning;
  std::optional<Distribution> imputed_x, imputed_t;      // iterative fit
  std::optional<Distribution> truncated_x, truncated_t;  // step-0 baseline
  ForecastCurve imputed_curve;
  ForecastCurve truncated_curve;
};

struct RollingForecast {
  std::vector<double> horizons;
  std::vector<int> realized;  // observed cumulative failures at each horizon
  std::vector<HorizonForecast> records;
};

// Re-estimate at each horizon using only the failures known by then, with the
// iterative fit and with the truncated-only baseline, and forecast the
// expected cumulative failures across the whole horizon grid. Horizon j fits
// with seed derive_seed(config.seed, j).
inline RollingForecast rolling_refit_forecast(const BatchDataset& full,
                                              std::span<const double> horizons, Family family_x,
                                              Family family_t, const EstimatorConfig& config) {
  config.validate();
  for (std::size_t i = 0; i < horizons.size(); ++i)
    if (!(horizons[i] > 0.0) || (i > 0 && !(horizons[i] > horizons[i - 1])))
      throw std::invalid_argument("rolling_refit_forecast: horizons must be positive and increasing");

  RollingForecast out;
  out.horizons.assign(horizons.begin(), horizons.end());
  for (double h : horizons) out.realized.push_back(full.observed_count_at(h));

  for (std::size_t j = 0; j < horizons.size(); ++j) {
    HorizonForecast rec;
    rec.horizon = horizons[j];
    const BatchDataset at_horizon = full.truncated_to(horizons[j]);
    rec.n_observed = static_cast<int>(at_horizon.num_observed());
    if (rec.n_observed < 2) {
      rec.skipped = true;
      rec.warning = "fewer than 2 observed failures at horizon " + std::to_string(horizons[j]);
      out.records.push_back(std::move(rec));
      continue;
    }
    try {
      EstimatorConfig cfg = config;
      cfg.seed = derive_seed(config.seed, j);
      const FitResult fitted = fit(at_horizon, family_x, family_t, cfg);
      rec.imputed_x = fitted.estimate_x.to_distribution();
      rec.imputed_t = fitted.estimate_t.to_distribution();
      const auto [trunc_x, trunc_t] = initial_estimates(at_horizon, family_x, family_t);
      rec.truncated_x = trunc_x;
      rec.truncated_t = trunc_t;
      rec.imputed_curve =
          expected_failures(*rec.imputed_x, *rec.imputed_t, full.n_total(), horizons, "imputed");
      rec.truncated_curve =
          expected_failures(trunc_x, trunc_t, full.n_total(), horizons, "truncated");
    } catch (const EstimationError& e) {
      rec.skipped = true;
      rec.warning = e.what();
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

// Evenly spaced horizons up to t0; half-unit spacing by default.
inline std::vector<double> default_horizons(double t0, double spacing = 0.5) {
  if (!(t0 > 0.0) || !(spacing > 0.0))
    throw std::invalid_argument("default_horizons: t0 and spacing must be positive");
  std::vector<double> out;
  for (double h = spacing; h < t0 + 0.5 * spacing; h += spacing) out.push_back(std::min(h, t0));
  return out;
}

}  // namespace propimp
