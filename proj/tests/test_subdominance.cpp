#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "superfair/subdominance.hpp"

using namespace superfair;

TEST_SUITE("subdominance") {
  TEST_CASE("subdom_feature") {
    CHECK(subdom_feature(0.3, 0.3, 7.0) == 1.0);
    CHECK(subdom_feature(0.9, 0.1, 0.0) == 1.0);
    CHECK(subdom_feature(0.2, 0.5, 2.0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(subdom_feature(0.1, 0.9, 2.5) == 0.0);
  }

  TEST_CASE("subdom_total") {
    const std::vector<Metric> ids{Metric::kError, Metric::kDP};
    const MetricProfile hat{ids, {0.2, 0.1}};
    const std::vector<MetricProfile> demos{{ids, {0.5, 0.1}}, {ids, {0.3, 0.3}}};
    CHECK(subdom_total(hat, demos, AlphaVector{{0.0, 0.0}}) == 2.0);
    CHECK(subdom_total(hat, std::vector<MetricProfile>{hat}, AlphaVector{{3.0, 9.0}}) == 2.0);
    CHECK(subdom_total(hat, demos, AlphaVector{{2.0, 5.0}}) == doctest::Approx(1.1).epsilon(1e-12));
    CHECK_THROWS_AS(subdom_total(hat, {}, AlphaVector{{0.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(subdom_total(hat, demos, AlphaVector{{0.0}}), std::invalid_argument);
  }

  TEST_CASE("optimize_alpha examples") {
    const auto dominated = optimize_alpha(0.9, std::vector<double>{0.1, 0.5, 0.8}, 0.01);
    CHECK(dominated.alpha == 0.0);
    CHECK(dominated.gamma == 1.0);

    const auto single = optimize_alpha(0.1, std::vector<double>{0.5}, 0.0);
    CHECK(single.alpha == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(single.gamma == doctest::Approx(0.0).epsilon(1e-12));
    const auto grid = oracle::grid_minimize(0.1, {0.5}, 0.0, 1e-3, 100.0);
    CHECK(std::abs(single.gamma - grid.gamma) < 1e-3);

    const std::vector<double> three{0.2, 0.4, 0.6};
    const auto s = optimize_alpha(0.1, three, 0.01);
    const auto g = oracle::grid_minimize(0.1, {0.2, 0.4, 0.6}, 0.01);
    CHECK(std::abs(s.gamma - g.gamma) < 1e-3);
    CHECK(s.gamma == doctest::Approx(oracle::gamma_at(0.1, {0.2, 0.4, 0.6}, 0.01, s.alpha)).epsilon(1e-12));

    CHECK_THROWS_AS(optimize_alpha(0.1, std::vector<double>{}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(optimize_alpha(0.1, std::vector<double>{0.2}, -1.0), std::invalid_argument);
  }

  TEST_CASE("corner test uses lambda scaled by N / m") {
    // f_hat = 0, demos {0.1, 1}, lambda = 0.08. Testing f_hat + lambda against
    // the mean of the m smallest picks alpha = 10 (value 0.8); the minimum is
    // alpha = 1 with value 0.53.
    const std::vector<double> demo{0.1, 1.0};
    const auto s = optimize_alpha(0.0, demo, 0.08);
    const auto g = oracle::grid_minimize(0.0, {0.1, 1.0}, 0.08, 1e-4, 50.0);
    CHECK(s.alpha == doctest::Approx(1.0));
    CHECK(s.gamma == doctest::Approx(0.53));
    CHECK(std::abs(s.gamma - g.gamma) < 1e-3);
    CHECK(oracle::gamma_at(0.0, {0.1, 1.0}, 0.08, 10.0) > g.gamma + 0.2);
  }

  TEST_CASE("an exact tie in the corner test keeps the smaller support") {
    // f_hat + lambda N / 1 = 0.05 + 0.1 equals the smallest value 0.15, which
    // rounds to 0.15000000000000002 > 0.15.
    const std::vector<double> demo{0.35, 0.35, 0.25, 0.2, 0.15, 0.45, 0.35, 0.3, 0.3, 0.2};
    const auto s = optimize_alpha(0.05, demo, 0.01);
    CHECK(s.support_count == 1);
    CHECK(s.alpha == doctest::Approx(10.0));
    CHECK(support_vectors(0.05, demo, s.alpha) == std::vector<std::size_t>{4});
    CHECK(s.gamma == doctest::Approx(oracle::breakpoint_minimize(0.05, demo, 0.01).gamma).epsilon(1e-12));
  }

  TEST_CASE("support_vectors") {
    CHECK(support_vectors(0.5, std::vector<double>{0.1, 0.9}, 0.0) == std::vector<std::size_t>{0, 1});
    CHECK(support_vectors(0.1, std::vector<double>{0.5}, 2.5) == std::vector<std::size_t>{0});
    CHECK(support_vectors(0.1, std::vector<double>{0.9}, 2.5).empty());
  }

  TEST_CASE("generalization_gamma") {
    CHECK(generalization_gamma(0, 50) == 1.0);
    CHECK(generalization_gamma(50, 50) == 0.0);
    CHECK(generalization_gamma(10, 50) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK_THROWS_AS(generalization_gamma(51, 50), std::invalid_argument);
    CHECK_THROWS_AS(generalization_gamma(0, 0), std::invalid_argument);
  }

  TEST_CASE("property: closed form matches a dense grid") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> n_dist(1, 20);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lambdas[] = {0.0, 0.01, 0.1};
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<double> demo(static_cast<std::size_t>(n_dist(rng)));
      for (auto& v : demo) v = u(rng);
      const double f_hat = u(rng) * 0.8;
      const double lambda = lambdas[trial % 3];
      const auto s = optimize_alpha(f_hat, demo, lambda);
      const auto g = oracle::grid_minimize(f_hat, demo, lambda, 1e-3, 200.0);
      CHECK(s.gamma <= g.gamma + 1e-9);
      CHECK(std::abs(s.gamma - g.gamma) < 1e-3);
      CHECK(s.gamma == doctest::Approx(oracle::gamma_at(f_hat, demo, lambda, s.alpha)).epsilon(1e-12));
    }
  }

  TEST_CASE("property: convexity in alpha, monotonicity in f_hat, zero-alpha value") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> a(0.0, 50.0);
    for (int trial = 0; trial < 500; ++trial) {
      const double f = u(rng);
      const double v = u(rng);
      const double a1 = a(rng);
      const double a2 = a(rng);
      const double mid = subdom_feature(f, v, 0.5 * (a1 + a2));
      CHECK(mid <= 0.5 * (subdom_feature(f, v, a1) + subdom_feature(f, v, a2)) + 1e-12);
      const double lower = f * u(rng);
      CHECK(subdom_feature(lower, v, a1) <= subdom_feature(f, v, a1) + 1e-12);
      CHECK(subdom_feature(f, v, 0.0) == 1.0);
    }
  }

  TEST_CASE("property: dominance with margin zeroes every hinge") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<Metric> ids{Metric::kError, Metric::kDP, Metric::kEqOdds};
    for (int trial = 0; trial < 100; ++trial) {
      AlphaVector alpha{{1.0 + 9.0 * u(rng), 1.0 + 9.0 * u(rng), 1.0 + 9.0 * u(rng)}};
      MetricProfile hat{ids, {u(rng) * 0.2, u(rng) * 0.2, u(rng) * 0.2}};
      std::vector<MetricProfile> demos;
      for (int j = 0; j < 5; ++j) {
        MetricProfile d{ids, {}};
        for (std::size_t k = 0; k < 3; ++k) d.values.push_back(hat.values[k] + 1.0 / alpha.alphas[k] + u(rng));
        demos.push_back(d);
      }
      CHECK(subdom_total(hat, demos, alpha) == 0.0);
    }
  }

  TEST_CASE("property: support set at the optimum is the active demos plus the boundary one") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> demo(1 + trial % 15);
      for (auto& v : demo) v = u(rng);
      const double f_hat = 0.3 * u(rng);
      const auto s = optimize_alpha(f_hat, demo, 0.01);
      const auto sv = support_vectors(f_hat, demo, s.alpha);
      if (s.alpha == 0.0) {
        CHECK(sv.size() == demo.size());
        continue;
      }
      // Exactly the support_count smallest values (ties aside).
      CHECK(sv.size() >= s.support_count);
      std::size_t strictly_active = 0;
      for (const auto j : sv) strictly_active += s.alpha * (f_hat - demo[j]) + 1.0 > 1e-12;
      CHECK(strictly_active + 1 >= s.support_count);
      CHECK(strictly_active < s.support_count);
    }
  }
}
