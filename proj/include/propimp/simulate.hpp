#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "propimp/dataset.hpp"
#include "propimp/distribution.hpp"
#include "propimp/estimator.hpp"
#include "propimp/exact.hpp"
#include "propimp/random.hpp"

namespace propimp {

// Latent outcome of one unit, known only to the simulator.
struct UnitOutcome {
  double x = 0.0;
  double t = 0.0;
};

struct SimulatedBatch {
  BatchDataset dataset;
  std::vector<UnitOutcome> truth;  // all n_total latent pairs, in draw order
  int n_observed = 0;              // failed inside the horizon
  int n_installed_surviving = 0;   // installed, still running at the horizon
  int n_not_installed = 0;         // never installed
};

// Draw a full batch and keep the latent truth for accounting. Each unit
// consumes exactly two uniforms (installation, then failure), so one seed
// pins the whole batch.
inline SimulatedBatch simulate_batch(const Distribution& dist_x, const Distribution& dist_t,
                                     int n_total, double t0, std::uint64_t seed) {
  if (n_total < 1) throw std::invalid_argument("simulate_batch: n_total must be >= 1");
  if (!(t0 > 0.0)) throw std::invalid_argument("simulate_batch: t0 must be positive");
  RngStream rng(seed);
  std::vector<UnitOutcome> truth;
  truth.reserve(n_total);
  std::vector<ObservedPair> observed;
  int n_surviving = 0;
  int n_uninstalled = 0;
  for (int i = 0; i < n_total; ++i) {
    const double x = dist_x.sample(rng);
    const double t = dist_t.sample(rng);
    truth.push_back({x, t});
    if (x > t0)
      ++n_uninstalled;
    else if (x + t <= t0)
      observed.push_back({x, t});
    else
      ++n_surviving;
  }
  const int n_observed = static_cast<int>(observed.size());
  return {BatchDataset(n_total, t0, std::move(observed)), std::move(truth), n_observed,
          n_surviving, n_uninstalled};
}

struct ExperimentSpec {
  Distribution dist_x;  // ground truth
  Distribution dist_t;
  int n_total = 200;
  double t0 = 6.0;
  int replications = 20;
  std::uint64_t base_seed = 1;
  EstimatorConfig config;  // per-replication seeds are derived from base_seed
};

struct ReplicationResult {
  int n_observed = 0;
  int n_installed_surviving = 0;
  int n_not_installed = 0;
  std::vector<double> initial_x;  // step-0 parameter values
  std::vector<double> initial_t;
  MarginEstimate estimate_x;
  MarginEstimate estimate_t;
  double average_imputations = 0.0;
  std::optional<int> convergence_iteration;
  double wall_seconds = 0.0;  // informational only, never asserted
  std::optional<ExactExponentialMle> exact;  // present for an i.i.d. exponential truth
};

struct ExperimentReport {
  std::vector<ReplicationResult> replications;
  // Across-replication mean/sd of the per-replication point estimates and of
  // the step-0 values, in family parameter order.
  std::vector<ParamStats> fitted_x;
  std::vector<ParamStats> fitted_t;
  std::vector<ParamStats> initial_x;
  std::vector<ParamStats> initial_t;
  double mean_average_imputations = 0.0;
};

namespace detail {

inline std::vector<ParamStats> across(const std::vector<std::vector<double>>& rows) {
  std::vector<ParamStats> out;
  if (rows.empty()) return out;
  const std::size_t n_params = rows.front().size();
  const double n = static_cast<double>(rows.size());
  out.resize(n_params);
  for (std::size_t p = 0; p < n_params; ++p) {
    double sum = 0.0;
    for (const auto& r : rows) sum += r[p];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r[p] - mean) * (r[p] - mean);
    out[p] = {mean, rows.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
  }
  return out;
}

}  // namespace detail

// Replicated synthetic study: simulate, fit, and (for an i.i.d. exponential
// truth) solve the exact-likelihood baseline on each replication.
// Replication r simulates with derive_seed(base_seed, 2r) and fits with
// derive_seed(base_seed, 2r + 1).
inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
  if (spec.n_total < 1) throw std::invalid_argument("run_experiment: n_total must be >= 1");
  if (spec.replications < 1)
    throw std::invalid_argument("run_experiment: replications must be >= 1");
  spec.config.validate();
  const bool iid_exponential = spec.dist_x.family() == Family::exponential &&
                               spec.dist_t.family() == Family::exponential &&
                               spec.dist_x.rate() == spec.dist_t.rate();

  ExperimentReport report;
  std::vector<std::vector<double>> fitted_x_rows, fitted_t_rows, init_x_rows, init_t_rows;
  double imp_sum = 0.0;
  for (int r = 0; r < spec.replications; ++r) {
    try {
      const auto batch = simulate_batch(spec.dist_x, spec.dist_t, spec.n_total, spec.t0,
                                        derive_seed(spec.base_seed, 2 * r));
      EstimatorConfig cfg = spec.config;
      cfg.seed = derive_seed(spec.base_seed, 2 * r + 1);
      const auto start = std::chrono::steady_clock::now();
      const FitResult fit_result = fit(batch.dataset, spec.dist_x.family(), spec.dist_t.family(), cfg);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

      ReplicationResult row;
      row.n_observed = batch.n_observed;
      row.n_installed_surviving = batch.n_installed_surviving;
      row.n_not_installed = batch.n_not_installed;
      row.initial_x = detail::params_of(fit_result.initial_x);
      row.initial_t = detail::params_of(fit_result.initial_t);
      row.estimate_x = fit_result.estimate_x;
      row.estimate_t = fit_result.estimate_t;
      row.average_imputations = fit_result.average_imputations;
      row.convergence_iteration = fit_result.convergence_iteration;
      row.wall_seconds = elapsed.count();
      if (iid_exponential) row.exact = exact_mle_iid_exponential(batch.dataset);

      std::vector<double> fx, ft;
      for (const auto& p : row.estimate_x.params) fx.push_back(p.mean);
      for (const auto& p : row.estimate_t.params) ft.push_back(p.mean);
      fitted_x_rows.push_back(std::move(fx));
      fitted_t_rows.push_back(std::move(ft));
      init_x_rows.push_back(row.initial_x);
      init_t_rows.push_back(row.initial_t);
      imp_sum += row.average_imputations;
      report.replications.push_back(std::move(row));
    } catch (const std::exception& e) {
      throw EstimationError("replication " + std::to_string(r) + ": " + e.what());
    }
  }
  report.fitted_x = detail::across(fitted_x_rows);
  report.fitted_t = detail::across(fitted_t_rows);
  report.initial_x = detail::across(init_x_rows);
  report.initial_t = detail::across(init_t_rows);
  report.mean_average_imputations = imp_sum / static_cast<double>(spec.replications);
  return report;
}

}  // namespace propimp
