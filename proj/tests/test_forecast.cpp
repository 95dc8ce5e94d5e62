#include <doctest.h>

#include <cmath>
#include <vector>

#include "propimp/forecast.hpp"
#include "propimp/numeric.hpp"
#include "propimp/simulate.hpp"

using namespace propimp;

TEST_SUITE_BEGIN("forecast");

TEST_CASE("expected failures match the two-stage exponential closed form") {
  const auto d = Distribution::exponential(0.2);
  std::vector<double> times;
  for (int t = 0; t <= 10; ++t) times.push_back(t);
  const auto curve = expected_failures(d, d, 200, times);
  CHECK(curve.expected.front() == 0.0);
  for (int t = 1; t <= 10; ++t) {
    const double analytic = 200.0 * (1.0 - std::exp(-0.2 * t) * (1.0 + 0.2 * t));
    CHECK(std::abs(curve.expected[t] - analytic) < 1e-8);
  }
}

TEST_CASE("expected failures approach the batch size at long horizons") {
  const auto dx = Distribution::exponential(0.8);
  const auto dt = Distribution::weibull(1.5, 2.0);
  const std::vector<double> times{200.0};
  const auto curve = expected_failures(dx, dt, 150, times);
  CHECK(curve.expected[0] == doctest::Approx(150.0).epsilon(1e-6));
}

TEST_CASE("forecast curves are monotone and bounded on a dense grid") {
  const std::vector<std::pair<Distribution, Distribution>> models = {
      {Distribution::exponential(0.3), Distribution::exponential(0.5)},
      {Distribution::exponential(0.6), Distribution::weibull(0.8, 10.0)},
      {Distribution::weibull(2.0, 3.0), Distribution::exponential(0.2)},
      {Distribution::weibull(0.7, 4.0), Distribution::weibull(1.4, 6.0)},
  };
  std::vector<double> times;
  for (int i = 0; i < 100; ++i) times.push_back(0.25 * i);
  for (const auto& [dx, dt] : models) {
    const auto curve = expected_failures(dx, dt, 400, times);
    double prev = -1.0;
    for (double v : curve.expected) {
      CHECK(v >= prev);
      CHECK(v <= 400.0);
      prev = v;
    }
  }
}

TEST_CASE("forecast value at the horizon is the complement of the unobserved probability") {
  const auto dx = Distribution::exponential(0.57);
  const auto dt = Distribution::weibull(1.2, 8.0);
  const double t0 = 7.0;
  const std::vector<double> times{t0};
  const auto curve = expected_failures(dx, dt, 400, times);
  // independent evaluation through the density-form integral
  const double bracket =
      dx.survival(t0) +
      integrate([&](double x) { return dt.survival(t0 - x) * dx.pdf(x); }, 0.0, t0, 1e-12);
  CHECK(std::abs(curve.expected[0] - 400.0 * (1.0 - bracket)) < 1e-9);
}

TEST_CASE("expected_failures rejects unsorted times") {
  const auto d = Distribution::exponential(0.2);
  const std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(expected_failures(d, d, 10, bad), std::invalid_argument);
}

TEST_CASE("rescale_dataset divides each margin by its sample standard deviation") {
  const BatchDataset ds(10, 10.0, {{1.0, 1.0}, {2.0, 3.0}, {3.0, 5.0}});
  const auto scaled = rescale_dataset(ds);
  CHECK(scaled.factors.x_scale == doctest::Approx(1.0));
  CHECK(scaled.factors.t_scale == doctest::Approx(2.0));
  CHECK(scaled.x[1] == doctest::Approx(2.0));
  CHECK(scaled.t[2] == doctest::Approx(2.5));
  CHECK(scaled.t0_x == doctest::Approx(10.0));
  CHECK(scaled.t0_t == doctest::Approx(5.0));

  const BatchDataset flat(10, 10.0, {{2.0, 1.0}, {2.0, 3.0}});
  CHECK_THROWS_AS(rescale_dataset(flat), std::invalid_argument);
  const BatchDataset tiny(10, 10.0, {{2.0, 1.0}});
  CHECK_THROWS_AS(rescale_dataset(tiny), std::invalid_argument);
}

TEST_CASE("back_transform undoes the margin scaling") {
  CHECK(back_transform(Distribution::exponential(0.8), 2.0).rate() == doctest::Approx(0.4));
  const auto w = back_transform(Distribution::weibull(1.7, 3.0), 2.5);
  CHECK(w.shape() == doctest::Approx(1.7));
  CHECK(w.scale() == doctest::Approx(7.5));
}

TEST_CASE("fitting on rescaled data reproduces the original-scale estimates") {
  EstimatorConfig cfg;
  cfg.iterations = 400;
  cfg.burn_in = 100;
  cfg.seed = 21;

  SUBCASE("exponential margins") {
    const auto batch = simulate_batch(Distribution::exponential(0.2),
                                      Distribution::exponential(0.2), 200, 6.0, 606);
    const auto raw = fit(batch.dataset, Family::exponential, Family::exponential, cfg);
    const auto scaled = fit_rescaled(batch.dataset, Family::exponential, Family::exponential, cfg);
    CHECK(scaled.estimate_x.params[0].mean ==
          doctest::Approx(raw.estimate_x.params[0].mean).epsilon(1e-6));
    CHECK(scaled.estimate_t.params[0].mean ==
          doctest::Approx(raw.estimate_t.params[0].mean).epsilon(1e-6));
  }
  SUBCASE("weibull failure margin") {
    const auto batch = simulate_batch(Distribution::exponential(0.7),
                                      Distribution::weibull(2.0, 5.0), 200, 6.0, 607);
    const auto raw = fit(batch.dataset, Family::exponential, Family::weibull, cfg);
    const auto scaled = fit_rescaled(batch.dataset, Family::exponential, Family::weibull, cfg);
    CHECK(scaled.estimate_t.params[0].mean ==
          doctest::Approx(raw.estimate_t.params[0].mean).epsilon(1e-6));
    CHECK(scaled.estimate_t.params[1].mean ==
          doctest::Approx(raw.estimate_t.params[1].mean).epsilon(1e-6));
  }
}

TEST_CASE("rolling refits account for every horizon") {
  const auto batch = simulate_batch(Distribution::exponential(0.5),
                                    Distribution::exponential(0.3), 150, 6.0, 808);
  EstimatorConfig cfg;
  cfg.iterations = 200;
  cfg.burn_in = 50;
  cfg.seed = 3;
  const std::vector<double> horizons{0.2, 2.0, 4.0, 6.0};
  const auto rolling = rolling_refit_forecast(batch.dataset, horizons, Family::exponential,
                                              Family::exponential, cfg);
  REQUIRE(rolling.records.size() == 4);
  CHECK(rolling.realized.back() == static_cast<int>(batch.dataset.num_observed()));
  for (std::size_t j = 1; j < rolling.realized.size(); ++j)
    CHECK(rolling.realized[j] >= rolling.realized[j - 1]);
  // the first horizon has almost no failures yet
  if (rolling.records[0].skipped) CHECK_FALSE(rolling.records[0].warning.empty());
  for (const auto& rec : rolling.records) {
    if (rec.skipped) continue;
    REQUIRE(rec.imputed_curve.expected.size() == horizons.size());
    REQUIRE(rec.truncated_curve.expected.size() == horizons.size());
    CHECK(rec.imputed_x.has_value());
    CHECK(rec.truncated_x.has_value());
  }
}

TEST_CASE("rolling refits skip every horizon of an empty stream") {
  const BatchDataset ds(50, 6.0, {});
  EstimatorConfig cfg;
  cfg.iterations = 50;
  cfg.burn_in = 10;
  const std::vector<double> horizons{1.0, 2.0};
  const auto rolling =
      rolling_refit_forecast(ds, horizons, Family::exponential, Family::exponential, cfg);
  for (const auto& rec : rolling.records) {
    CHECK(rec.skipped);
    CHECK_FALSE(rec.warning.empty());
  }
}

TEST_CASE("default horizons run on half-unit spacing up to the horizon") {
  const auto h = default_horizons(7.0);
  REQUIRE(h.size() == 14);
  CHECK(h.front() == 0.5);
  CHECK(h.back() == 7.0);
}

TEST_SUITE_END();
