#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace propimp {

// One fully observed unit: installation time x and failure duration t,
// both measured from batch origin and installation respectively.
struct ObservedPair {
  double x = 0.0;
  double t = 0.0;
};

// Per-margin time-unit divisors used by the rescaled fitting path.
struct ScaleFactors {
  double x_scale = 1.0;
  double t_scale = 1.0;
};

// A batch of n_total units followed until the study horizon. Only units whose
// installation plus failure duration fits inside the horizon are observed;
// nothing is known about the rest.
class BatchDataset {
 public:
  BatchDataset(int n_total, double horizon, std::vector<ObservedPair> observed)
      : n_total_(n_total), horizon_(horizon), observed_(std::move(observed)) {
    if (n_total_ < 1) throw std::invalid_argument("BatchDataset: n_total must be >= 1");
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
      throw std::invalid_argument("BatchDataset: horizon must be positive and finite");
    if (observed_.size() > static_cast<std::size_t>(n_total_))
      throw std::invalid_argument("BatchDataset: more observed units than batch size");
    for (std::size_t i = 0; i < observed_.size(); ++i) {
      const auto& u = observed_[i];
      if (!std::isfinite(u.x) || !std::isfinite(u.t) || !(u.x > 0.0) || !(u.t > 0.0) ||
          u.x + u.t > horizon_)
        throw std::invalid_argument("BatchDataset: unit " + std::to_string(i + 1) +
                                    " violates 0 < x, 0 < t, x + t <= horizon");
    }
  }

  int n_total() const { return n_total_; }
  double horizon() const { return horizon_; }
  const std::vector<ObservedPair>& observed() const { return observed_; }
  std::size_t num_observed() const { return observed_.size(); }

  std::vector<double> installation_times() const {
    std::vector<double> v;
    v.reserve(observed_.size());
    for (const auto& u : observed_) v.push_back(u.x);
    return v;
  }

  std::vector<double> failure_durations() const {
    std::vector<double> v;
    v.reserve(observed_.size());
    for (const auto& u : observed_) v.push_back(u.t);
    return v;
  }

  // The dataset as it looked at an earlier horizon: same batch, only the
  // units that had already failed by then.
  BatchDataset truncated_to(double new_horizon) const {
    std::vector<ObservedPair> kept;
    for (const auto& u : observed_)
      if (u.x + u.t <= new_horizon) kept.push_back(u);
    return BatchDataset(n_total_, new_horizon, std::move(kept));
  }

  // Observed failure count at calendar time `when` (cumulative).
  int observed_count_at(double when) const {
    int c = 0;
    for (const auto& u : observed_)
      if (u.x + u.t <= when) ++c;
    return c;
  }

 private:
  int n_total_;
  double horizon_;
  std::vector<ObservedPair> observed_;
};

}  // namespace propimp
