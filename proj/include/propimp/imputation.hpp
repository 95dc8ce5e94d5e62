#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "propimp/dataset.hpp"
#include "propimp/distribution.hpp"
#include "propimp/random.hpp"

namespace propimp {

// Interval partition of [0, t0] induced by the observed installation times,
// with one trapezoid mass and one expected unobserved-installation count per
// interval. dist_t must be expressed in the same time units as the
// installation axis.
struct ImputationPlan {
  std::vector<double> boundaries;       // 0 = b[0] < ... < b[K] = t0
  std::vector<double> masses;           // per-interval joint mass, size K
  std::vector<double> expected_counts;  // proportional allocation, size K
  double target_total = 0.0;            // max(0, N * F_X(t0) - C)

  std::size_t num_intervals() const { return masses.size(); }
};

// Sorted distinct installation times with 0 and t0 appended. Duplicate
// installation times collapse to a single boundary.
inline std::vector<double> build_partition(double t0, std::span<const double> installation_times) {
  std::vector<double> b;
  b.reserve(installation_times.size() + 2);
  b.push_back(0.0);
  b.insert(b.end(), installation_times.begin(), installation_times.end());
  std::sort(b.begin() + 1, b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (!b.empty() && b.back() >= t0) b.pop_back();  // a time at t0 would duplicate the endpoint
  b.push_back(t0);
  return b;
}

inline std::vector<double> build_partition(const BatchDataset& ds) {
  const auto xs = ds.installation_times();
  return build_partition(ds.horizon(), xs);
}

// Probability that a unit installs inside [a, b] and survives past t0,
// trapezoid approximation: mean of the survival at the endpoints times the
// installation mass of the interval.
inline double interval_mass(const Distribution& dist_x, const Distribution& dist_t, double t0,
                            double a, double b) {
  if (!(0.0 <= a) || !(a <= b) || !(b <= t0))
    throw std::invalid_argument("interval_mass: need 0 <= a <= b <= t0");
  const double mass_x = std::max(0.0, dist_x.cdf(b) - dist_x.cdf(a));
  return 0.5 * (dist_t.survival(t0 - a) + dist_t.survival(t0 - b)) * mass_x;
}

// Closed form of the summed trapezoid masses over a full partition: interior
// terms telescope, leaving one weighted difference per interior boundary plus
// the boundary term at t0.
inline double telescoped_total_mass(const Distribution& dist_x, const Distribution& dist_t,
                                    double t0, std::span<const double> boundaries) {
  if (boundaries.size() < 2 || boundaries.front() != 0.0 || boundaries.back() != t0)
    throw std::invalid_argument("telescoped_total_mass: boundaries must run from 0 to t0");
  const std::size_t last = boundaries.size() - 1;
  double total = 0.0;
  for (std::size_t j = 1; j < last; ++j)
    total += 0.5 * dist_x.cdf(boundaries[j]) *
             (dist_t.survival(t0 - boundaries[j - 1]) - dist_t.survival(t0 - boundaries[j + 1]));
  total += 0.5 * dist_x.cdf(t0) * (1.0 + dist_t.survival(t0 - boundaries[last - 1]));
  return total;
}

// Expected unobserved installations per interval: the shortfall
// N * F_X(t0) - C (clamped at zero) split across intervals in proportion to
// their masses. A nonpositive shortfall means nothing is imputed this round.
inline ImputationPlan build_plan(int n_total, double t0,
                                 std::span<const double> installation_times,
                                 const Distribution& dist_x, const Distribution& dist_t) {
  ImputationPlan plan;
  plan.boundaries = build_partition(t0, installation_times);
  const std::size_t k = plan.boundaries.size() - 1;
  plan.masses.resize(k);
  double mass_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    plan.masses[i] = interval_mass(dist_x, dist_t, t0, plan.boundaries[i], plan.boundaries[i + 1]);
    mass_sum += plan.masses[i];
  }
  const double raw = n_total * dist_x.cdf(t0) - static_cast<double>(installation_times.size());
  plan.target_total = std::max(0.0, raw);
  plan.expected_counts.assign(k, 0.0);
  if (plan.target_total > 0.0 && mass_sum > 0.0)
    for (std::size_t i = 0; i < k; ++i)
      plan.expected_counts[i] = plan.target_total * (plan.masses[i] / mass_sum);
  return plan;
}

inline ImputationPlan build_plan(const BatchDataset& ds, const Distribution& dist_x,
                                 const Distribution& dist_t) {
  const auto xs = ds.installation_times();
  return build_plan(ds.n_total(), ds.horizon(), xs, dist_x, dist_t);
}

// Realized integer count per interval: integer part of the expected count
// plus a Bernoulli draw on its fractional part. Consumes one uniform per
// interval, so the draw sequence is reproducible from the plan shape alone.
inline std::vector<int> draw_counts(const ImputationPlan& plan, RngStream& rng) {
  std::vector<int> counts(plan.num_intervals(), 0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double a = plan.expected_counts[i];
    const double whole = std::floor(a);
    counts[i] = static_cast<int>(whole) + (rng.bernoulli(a - whole) ? 1 : 0);
  }
  return counts;
}

// Imputed installation times: counts[i] draws from dist_x conditioned to the
// i-th interval.
inline std::vector<double> impute_installations(const ImputationPlan& plan,
                                                std::span<const int> counts,
                                                const Distribution& dist_x, RngStream& rng) {
  if (counts.size() != plan.num_intervals())
    throw std::invalid_argument("impute_installations: counts do not match plan intervals");
  std::vector<double> out;
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (int j = 0; j < counts[i]; ++j)
      out.push_back(dist_x.sample_in_interval(plan.boundaries[i], plan.boundaries[i + 1], rng));
  return out;
}

}  // namespace propimp
