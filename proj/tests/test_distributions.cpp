#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "propimp/distribution.hpp"
#include "propimp/fitters.hpp"
#include "propimp/random.hpp"

using namespace propimp;

TEST_SUITE_BEGIN("distributions");

TEST_CASE("eval matches the closed forms") {
  const auto exp02 = Distribution::exponential(0.2);
  CHECK(exp02.eval(0.0).survival == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(exp02.eval(5.0).survival == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  const auto wei = Distribution::weibull(2.0, 5.0);
  CHECK(wei.eval(5.0).survival == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  CHECK_THROWS_AS(exp02.eval(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::exponential(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::weibull(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("cdf + survival is one to machine precision on a log grid") {
  const std::vector<Distribution> dists = {
      Distribution::exponential(0.2), Distribution::exponential(1.7),
      Distribution::weibull(0.8, 3.0), Distribution::weibull(2.0, 5.0),
      Distribution::weibull(1.0, 0.4)};
  for (const auto& d : dists)
    for (double t = 1e-6; t <= 1e3; t *= 1.9)
      CHECK(std::abs(d.cdf(t) + d.survival(t) - 1.0) < 1e-14);
}

TEST_CASE("quantile inverts cdf") {
  const std::vector<Distribution> dists = {
      Distribution::exponential(0.2), Distribution::exponential(1.4),
      Distribution::weibull(0.7, 2.0), Distribution::weibull(3.0, 8.0)};
  for (const auto& d : dists) {
    // beyond cdf ~ 1 - 1e-7 the probability itself cannot carry 1e-10 relative
    // information about t in double precision, so stop there
    const double t_hi = std::min(50.0, d.quantile(1.0 - 1e-7));
    for (double t = 1e-3; t < t_hi; t *= 1.7) {
      CHECK(d.quantile(d.cdf(t)) == doctest::Approx(t).epsilon(1e-10));
    }
  }
}

TEST_CASE("sample_in_interval basics") {
  RngStream rng(11);
  const auto d = Distribution::exponential(1.0);
  CHECK(d.sample_in_interval(3.0, 3.0, rng) == 3.0);
  CHECK_THROWS_AS(d.sample_in_interval(2.0, 1.0, rng), std::invalid_argument);
  // an interval so deep in the tail that its mass underflows
  CHECK_THROWS_AS(d.sample_in_interval(900.0, 1000.0, rng), DegenerateIntervalError);
}

TEST_CASE("sample_in_interval over nearly the whole support matches the exponential law") {
  const auto d = Distribution::exponential(1.0);
  RngStream rng(42);
  std::vector<double> draws;
  draws.reserve(100000);
  for (int i = 0; i < 100000; ++i) draws.push_back(d.sample_in_interval(0.0, 50.0, rng));
  const double ks = oracle::ks_distance(
      std::move(draws), [&](double x) { return d.cdf(x) / d.cdf(50.0); });
  CHECK(ks < 0.01);
}

TEST_CASE("weibull with unit shape draws identically to the matching exponential") {
  const auto wei = Distribution::weibull(1.0, 2.0);
  const auto exp = Distribution::exponential(0.5);
  RngStream rng_a(7), rng_b(7);
  for (int i = 0; i < 1000; ++i) {
    const double a = wei.sample_in_interval(0.0, 1.0, rng_a);
    const double b = exp.sample_in_interval(0.0, 1.0, rng_b);
    CHECK(a == doctest::Approx(b).epsilon(1e-14));
  }
}

TEST_CASE("conditional sampling passes a KS check on random intervals") {
  RngStream meta(2024);
  int configs = 0;
  while (configs < 10) {
    const bool use_weibull = meta.bernoulli(0.5);
    const Distribution d = use_weibull
                               ? Distribution::weibull(0.5 + 3.0 * meta.uniform(),
                                                       0.5 + 6.0 * meta.uniform())
                               : Distribution::exponential(0.1 + 1.5 * meta.uniform());
    double a = 6.0 * meta.uniform();
    double b = a + 0.2 + 6.0 * meta.uniform();
    const double mass = d.cdf(b) - d.cdf(a);
    if (mass < 1e-4) continue;
    ++configs;
    RngStream rng(meta.next_u64());
    std::vector<double> draws;
    draws.reserve(10000);
    for (int i = 0; i < 10000; ++i) draws.push_back(d.sample_in_interval(a, b, rng));
    const double fa = d.cdf(a);
    const double ks = oracle::ks_distance(std::move(draws),
                                          [&](double x) { return (d.cdf(x) - fa) / mass; });
    CHECK(ks < 0.02);
  }
}

TEST_CASE("fit_truncated_exponential agrees with a bisection oracle") {
  const std::vector<double> xs = {0.5, 1.0, 1.5};
  const double t0 = 6.0;
  const double fitted = fit_truncated_exponential(xs, t0);
  const double mean = oracle::mean(xs);
  const double root = oracle::bisection_root(
      [&](double r) { return 1.0 / r - t0 * std::exp(-t0 * r) / (1.0 - std::exp(-t0 * r)) - mean; },
      1e-8, 1e4);
  CHECK(fitted == doctest::Approx(root).epsilon(1e-8));
  // residual restated
  CHECK(std::abs(1.0 / fitted - t0 / std::expm1(t0 * fitted) - mean) < 1e-10);
}

TEST_CASE("fit_truncated_exponential recovers the rate from a large conditioned sample") {
  const auto d = Distribution::exponential(0.5);
  RngStream rng(5);
  std::vector<double> xs;
  xs.reserve(100000);
  for (int i = 0; i < 100000; ++i) xs.push_back(d.sample_in_interval(0.0, 6.0, rng));
  const double fitted = fit_truncated_exponential(xs, 6.0);
  CHECK(fitted > 0.48);
  CHECK(fitted < 0.52);
}

TEST_CASE("fit_truncated_exponential rejects degenerate input") {
  CHECK_THROWS_AS(fit_truncated_exponential(std::vector<double>{}, 6.0), std::invalid_argument);
  // mean 3.0 == t0/2: no positive root
  CHECK_THROWS_AS(fit_truncated_exponential(std::vector<double>{2.0, 3.0, 4.0}, 6.0), NoRootError);
}

TEST_CASE("fit_censored_exponential closed forms") {
  CHECK(fit_censored_exponential(std::vector<CensoredSample>{{2.0, true}}) == doctest::Approx(0.5));
  CHECK(fit_censored_exponential(std::vector<CensoredSample>{{1.0, true}, {3.0, false}}) ==
        doctest::Approx(0.25));
  CHECK_THROWS_AS(fit_censored_exponential(std::vector<CensoredSample>{{1.0, false}}),
                  NoEventsError);
}

TEST_CASE("fit_censored_exponential maximizes the censored likelihood") {
  RngStream rng(99);
  const auto d = Distribution::exponential(0.4);
  std::vector<CensoredSample> samples;
  for (int i = 0; i < 200; ++i) {
    const double t = d.sample(rng);
    const double censor = 0.5 + 7.0 * rng.uniform();
    samples.push_back(t <= censor ? CensoredSample{t, true} : CensoredSample{censor, false});
  }
  const double fitted = fit_censored_exponential(samples);
  // extended-precision evaluation keeps the flat top of the likelihood from
  // drowning the comparison in rounding noise
  auto loglik = [&](double r) {
    long double ll = 0.0L;
    for (const auto& s : samples) {
      if (s.event) ll += std::log(static_cast<long double>(r));
      ll -= static_cast<long double>(r) * s.duration;
    }
    return ll;
  };
  const double argmax = oracle::golden_section_max(loglik, 1e-4, 50.0);
  CHECK(fitted == doctest::Approx(argmax).epsilon(1e-8));
}

TEST_CASE("fit_truncated_weibull maximizes the truncated likelihood") {
  const auto d = Distribution::weibull(1.5, 4.0);
  RngStream rng(8);
  std::vector<double> xs;
  for (int i = 0; i < 400; ++i) xs.push_back(d.sample_in_interval(0.0, 6.0, rng));
  const auto fitted = fit_truncated_weibull(xs, 6.0);

  // profile residual, plain form
  const double n = static_cast<double>(xs.size());
  double s1 = 0.0, s2 = 0.0, lsum = 0.0;
  for (double x : xs) {
    const double y = x / 6.0;
    s1 += std::pow(y, fitted.shape);
    s2 += std::pow(y, fitted.shape) * std::log(y);
    lsum += std::log(y);
  }
  const double a = n / fitted.shape + lsum;
  const double residual = s1 / n - s2 / a + 1.0 / (std::exp(a / s2) - 1.0);
  CHECK(std::abs(residual) < 1e-8);

  // no point of a 200 x 200 grid around the estimate does better
  const double ll_fit = oracle::trunc_weibull_loglik(xs, 6.0, fitted.shape, fitted.scale);
  double grid_best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 200; ++j) {
      const double b = fitted.shape * (0.8 + 0.4 * i / 199.0);
      const double th = fitted.scale * (0.8 + 0.4 * j / 199.0);
      grid_best = std::max(grid_best, oracle::trunc_weibull_loglik(xs, 6.0, b, th));
    }
  CHECK(ll_fit >= grid_best - 1e-9);
}

TEST_CASE("fit_truncated_weibull recovers the shape from a large conditioned sample") {
  const auto d = Distribution::weibull(1.5, 4.0);
  RngStream rng(3);
  std::vector<double> xs;
  xs.reserve(100000);
  for (int i = 0; i < 100000; ++i) xs.push_back(d.sample_in_interval(0.0, 6.0, rng));
  const auto fitted = fit_truncated_weibull(xs, 6.0);
  CHECK(fitted.shape > 1.45);
  CHECK(fitted.shape < 1.55);
}

TEST_CASE("fit_truncated_weibull rejects unusable input") {
  CHECK_THROWS_AS(fit_truncated_weibull(std::vector<double>{1.0}, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(fit_truncated_weibull(std::vector<double>{2.0, 2.0, 2.0}, 6.0),
                  std::invalid_argument);
}

TEST_CASE("fit_censored_weibull matches a direct 2-D maximization on uncensored data") {
  const auto d = Distribution::weibull(2.0, 5.0);
  RngStream rng(17);
  std::vector<CensoredSample> samples;
  samples.reserve(10000);
  for (int i = 0; i < 10000; ++i) samples.push_back({d.sample(rng), true});
  const auto fitted = fit_censored_weibull(samples);
  const auto [ob, oth] = oracle::grid_refine_max_2d(
      [&](double b, double th) { return oracle::censored_weibull_loglik(samples, b, th); }, 0.2,
      8.0, 0.5, 20.0, 4, 32);
  CHECK(fitted.shape == doctest::Approx(ob).epsilon(1e-4));
  CHECK(fitted.scale == doctest::Approx(oth).epsilon(1e-4));

  // shape-equation residual, plain form
  double sw = 0.0, swl = 0.0, el = 0.0;
  for (const auto& s : samples) {
    sw += std::pow(s.duration, fitted.shape);
    swl += std::pow(s.duration, fitted.shape) * std::log(s.duration);
    if (s.event) el += std::log(s.duration);
  }
  CHECK(std::abs(1.0 / fitted.shape + el / samples.size() - swl / sw) < 1e-8);
}

TEST_CASE("fit_censored_weibull reduces to the exponential at unit shape") {
  const auto d = Distribution::exponential(0.3);
  RngStream rng(23);
  std::vector<CensoredSample> samples;
  samples.reserve(10000);
  for (int i = 0; i < 10000; ++i) {
    const double t = d.sample(rng);
    const double censor = 1.0 + 9.0 * rng.uniform();
    samples.push_back(t <= censor ? CensoredSample{t, true} : CensoredSample{censor, false});
  }
  const auto wei = fit_censored_weibull(samples);
  const double rate = fit_censored_exponential(samples);
  CHECK(wei.shape == doctest::Approx(1.0).epsilon(0.05));
  CHECK(wei.scale == doctest::Approx(1.0 / rate).epsilon(0.02));
}

TEST_CASE("fit_censored_weibull error paths") {
  CHECK_THROWS_AS(fit_censored_weibull(std::vector<CensoredSample>{{1.0, false}, {2.0, false}}),
                  NoEventsError);
  CHECK_THROWS_AS(fit_censored_weibull(std::vector<CensoredSample>{{0.0, true}, {2.0, true}}),
                  std::invalid_argument);
  // identical durations: the shape equation has no root
  CHECK_THROWS_AS(fit_censored_weibull(std::vector<CensoredSample>{{2.0, true}, {2.0, true}}),
                  NoRootError);
}

// Brute-force oracle equivalence on small random datasets, all four fitters.
TEST_CASE("fitters agree with brute-force likelihood maximization on small samples") {
  RngStream meta(314);
  const double t0 = 6.0;

  int done = 0;
  while (done < 20) {  // truncated exponential
    const Distribution d = Distribution::exponential(0.4 + 1.2 * meta.uniform());
    const int n = 5 + static_cast<int>(meta.uniform() * 45);
    RngStream rng(meta.next_u64());
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(d.sample_in_interval(0.0, t0, rng));
    if (!(oracle::mean(xs) < 0.5 * t0)) continue;
    ++done;
    const double fitted = fit_truncated_exponential(xs, t0);
    const double argmax = oracle::grid_refine_max_1d(
        [&](double r) { return oracle::trunc_exp_loglik(xs, t0, r); }, 1e-3, 20.0);
    CHECK(fitted == doctest::Approx(argmax).epsilon(1e-4));
  }

  for (int k = 0; k < 20; ++k) {  // censored exponential
    const Distribution d = Distribution::exponential(0.2 + 1.0 * meta.uniform());
    const int n = 5 + static_cast<int>(meta.uniform() * 45);
    RngStream rng(meta.next_u64());
    std::vector<CensoredSample> samples;
    bool any_event = false;
    for (int i = 0; i < n; ++i) {
      const double t = d.sample(rng);
      const double censor = 0.5 + 8.0 * rng.uniform();
      const bool event = t <= censor;
      any_event = any_event || event;
      samples.push_back({event ? t : censor, event});
    }
    if (!any_event) continue;
    const double fitted = fit_censored_exponential(samples);
    const double argmax = oracle::grid_refine_max_1d(
        [&](double r) { return oracle::censored_exp_loglik(samples, r); }, 1e-3, 30.0);
    CHECK(fitted == doctest::Approx(argmax).epsilon(1e-4));
  }

  done = 0;
  while (done < 20) {  // truncated Weibull
    const Distribution d =
        Distribution::weibull(0.8 + 2.0 * meta.uniform(), 1.0 + 5.0 * meta.uniform());
    const int n = 10 + static_cast<int>(meta.uniform() * 40);
    RngStream rng(meta.next_u64());
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(d.sample_in_interval(0.0, t0, rng));
    WeibullParams fitted{};
    try {
      fitted = fit_truncated_weibull(xs, t0);
    } catch (const NoRootError&) {
      continue;  // the MLE genuinely may not exist on tiny truncated samples
    }
    // a scale estimate far beyond the horizon sits on the flat ridge where the
    // argmax is ill-conditioned for any brute-force search; not a usable
    // comparison point
    if (fitted.scale > 10.0 * t0) continue;
    ++done;
    const auto [ob, oth] = oracle::grid_refine_max_2d(
        [&](double b, double th) { return oracle::trunc_weibull_loglik(xs, t0, b, th); }, 0.05,
        std::max(20.0, 2.0 * fitted.shape), 0.05, std::max(60.0, 3.0 * fitted.scale));
    CHECK(fitted.shape == doctest::Approx(ob).epsilon(1e-4));
    CHECK(fitted.scale == doctest::Approx(oth).epsilon(1e-4));
  }

  done = 0;
  while (done < 20) {  // censored Weibull
    const Distribution d =
        Distribution::weibull(0.7 + 2.3 * meta.uniform(), 1.0 + 6.0 * meta.uniform());
    const int n = 8 + static_cast<int>(meta.uniform() * 42);
    RngStream rng(meta.next_u64());
    std::vector<CensoredSample> samples;
    int events = 0;
    for (int i = 0; i < n; ++i) {
      const double t = d.sample(rng);
      const double censor = 0.5 + 9.0 * rng.uniform();
      const bool event = t <= censor;
      events += event ? 1 : 0;
      samples.push_back({event ? t : censor, event});
    }
    if (events < 2) continue;
    ++done;
    const auto fitted = fit_censored_weibull(samples);
    const auto [ob, oth] = oracle::grid_refine_max_2d(
        [&](double b, double th) { return oracle::censored_weibull_loglik(samples, b, th); }, 0.05,
        20.0, 0.05, 60.0);
    CHECK(fitted.shape == doctest::Approx(ob).epsilon(1e-4));
    CHECK(fitted.scale == doctest::Approx(oth).epsilon(1e-4));
  }
}

TEST_SUITE_END();
