#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "propimp/errors.hpp"
#include "propimp/random.hpp"

namespace propimp {

enum class Family { exponential, weibull };

inline const char* family_name(Family f) {
  return f == Family::exponential ? "exponential" : "weibull";
}

struct Eval {
  double pdf = 0.0;
  double cdf = 0.0;
  double survival = 0.0;
};

// A lifetime distribution on [0, inf): exponential (rate) or Weibull
// (shape, scale). Parameters are strictly positive and finite.
//
// survival() is the primary tail evaluation; cdf() is defined through expm1 so
// cdf + survival == 1 holds to machine precision everywhere.
class Distribution {
 public:
  static Distribution exponential(double rate) {
    check_param("rate", rate);
    return Distribution(Family::exponential, rate, 0.0);
  }

  static Distribution weibull(double shape, double scale) {
    check_param("shape", shape);
    check_param("scale", scale);
    return Distribution(Family::weibull, shape, scale);
  }

  Family family() const { return family_; }

  double rate() const {
    require(Family::exponential);
    return p0_;
  }
  double shape() const {
    require(Family::weibull);
    return p0_;
  }
  double scale() const {
    require(Family::weibull);
    return p1_;
  }

  std::size_t n_params() const { return family_ == Family::exponential ? 1 : 2; }

  double param(std::size_t i) const {
    check_index(i);
    return i == 0 ? p0_ : p1_;
  }

  // "rate" for exponential; "shape", "scale" for Weibull.
  const char* param_name(std::size_t i) const {
    check_index(i);
    if (family_ == Family::exponential) return "rate";
    return i == 0 ? "shape" : "scale";
  }

  Distribution with_param(std::size_t i, double v) const {
    check_index(i);
    check_param(param_name(i), v);
    Distribution d = *this;
    (i == 0 ? d.p0_ : d.p1_) = v;
    return d;
  }

  double survival(double t) const {
    if (family_ == Family::exponential) return std::exp(-p0_ * t);
    return std::exp(-pow_ratio(t));
  }

  double cdf(double t) const {
    if (family_ == Family::exponential) return -std::expm1(-p0_ * t);
    return -std::expm1(-pow_ratio(t));
  }

  double log_survival(double t) const {
    if (family_ == Family::exponential) return -p0_ * t;
    return -pow_ratio(t);
  }

  double pdf(double t) const {
    if (family_ == Family::exponential) return p0_ * std::exp(-p0_ * t);
    if (t == 0.0) {
      if (p0_ > 1.0) return 0.0;
      if (p0_ == 1.0) return 1.0 / p1_;
      return std::numeric_limits<double>::infinity();
    }
    const double z = pow_ratio(t);
    return p0_ / p1_ * std::pow(t / p1_, p0_ - 1.0) * std::exp(-z);
  }

  double log_pdf(double t) const {
    if (family_ == Family::exponential) return std::log(p0_) - p0_ * t;
    if (t == 0.0) {
      if (p0_ > 1.0) return -std::numeric_limits<double>::infinity();
      if (p0_ == 1.0) return -std::log(p1_);
      return std::numeric_limits<double>::infinity();
    }
    return std::log(p0_ / p1_) + (p0_ - 1.0) * std::log(t / p1_) - pow_ratio(t);
  }

  // Inverse CDF. p in [0, 1); closed form for both families.
  double quantile(double p) const {
    if (!(p >= 0.0) || !(p < 1.0)) throw std::invalid_argument("quantile: p must lie in [0, 1)");
    const double h = -std::log1p(-p);  // cumulative hazard
    if (family_ == Family::exponential) return h / p0_;
    return p1_ * std::pow(h, 1.0 / p0_);
  }

  // Density, CDF and survival at t >= 0.
  Eval eval(double t) const {
    if (!(t >= 0.0)) throw std::invalid_argument("eval: t must be nonnegative");
    return {pdf(t), cdf(t), survival(t)};
  }

  // Unconditional draw via inverse transform; consumes one uniform.
  double sample(RngStream& rng) const { return quantile(rng.uniform()); }

  // Draw conditioned on the interval [a, b]: inverse CDF applied to a uniform
  // point between cdf(a) and cdf(b). a == b returns a; an interval of zero
  // probability with a < b is an error. Consumes one uniform.
  double sample_in_interval(double a, double b, RngStream& rng) const {
    if (!(a >= 0.0) || !(b >= a)) throw std::invalid_argument("sample_in_interval: need 0 <= a <= b");
    if (a == b) return a;
    const double fa = cdf(a);
    const double mass = cdf(b) - fa;
    if (!(mass > 0.0))
      throw DegenerateIntervalError("sample_in_interval: interval has zero probability mass");
    const double x = quantile(fa + rng.uniform() * mass);
    return std::min(std::max(x, a), b);
  }

  // Distribution of c * Y for Y distributed as *this (time-unit change).
  Distribution scaled_by(double c) const {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("scaled_by: factor must be positive");
    if (family_ == Family::exponential) return exponential(p0_ / c);
    return weibull(p0_, p1_ * c);
  }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  Distribution(Family f, double a, double b) : family_(f), p0_(a), p1_(b) {}

  double pow_ratio(double t) const { return std::pow(t / p1_, p0_); }

  void require(Family f) const {
    if (family_ != f) throw std::logic_error("parameter not defined for this family");
  }

  void check_index(std::size_t i) const {
    if (i >= n_params()) throw std::invalid_argument("parameter index out of range");
  }

  static void check_param(const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be positive and finite");
  }

  Family family_;
  double p0_;
  double p1_;
};

}  // namespace propimp
