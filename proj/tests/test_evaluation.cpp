#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "superfair/evaluation.hpp"

using namespace superfair;

namespace {

const std::vector<Metric> kTwo{Metric::kError, Metric::kDP};

MetricProfile p2(double a, double b) { return MetricProfile{kTwo, {a, b}}; }

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("superfair_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

EvaluationReport small_report() {
  const std::vector<Metric> metrics = default_metrics();
  EvaluationReport r;
  r.metric_ids = metrics;
  r.method_ids = {kSubdominanceMethod, "post_processing_dp"};
  r.method_profiles[kSubdominanceMethod] = MetricProfile{metrics, {0.1, 0.05, 0.2, 0.0}};
  r.method_profiles["post_processing_dp"] = MetricProfile{metrics, {0.15, 0.01, 0.1, 0.25}};
  r.gamma[kSubdominanceMethod] = 0.5;
  r.gamma["post_processing_dp"] = 0.0;
  r.gamma_train[kSubdominanceMethod] = 1.0;
  r.demo_profiles = {MetricProfile{metrics, {0.2, 0.1, 0.3, 0.1}}, MetricProfile{metrics, {0.05, 0.1, 0.3, 0.1}}};
  r.alpha = AlphaVector{{4.0, 0.0, 2.0, 10.0}};
  r.bound_gamma = 0.75;
  r.unavailable_methods = {"mfopt"};
  return r;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("pareto_dominates") {
    CHECK(pareto_dominates(p2(0.1, 0.2), p2(0.1, 0.2)));
    CHECK_FALSE(pareto_dominates(p2(0.1, 0.2), p2(0.2, 0.1)));
    CHECK_FALSE(pareto_dominates(p2(0.2, 0.1), p2(0.1, 0.2)));
    CHECK(pareto_dominates(p2(0.1, 0.1), p2(0.2, 0.1)));
    CHECK_THROWS_AS(pareto_dominates(p2(0.1, 0.1), MetricProfile{{Metric::kError}, {0.1}}), std::invalid_argument);
  }

  TEST_CASE("gamma_superhuman") {
    const std::vector<MetricProfile> demos{p2(0.2, 0.2), p2(0.3, 0.1), p2(0.1, 0.3)};
    CHECK(gamma_superhuman(p2(0.5, 0.5), demos) == 0.0);
    CHECK(gamma_superhuman(p2(0.1, 0.1), demos) == 1.0);
    CHECK(gamma_superhuman(p2(0.15, 0.1), demos) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(gamma_superhuman(p2(0.1, 0.1), {}), std::invalid_argument);
    const auto per = gamma_per_metric(p2(0.2, 0.2), demos);
    CHECK(per[0] == doctest::Approx(2.0 / 3.0));
    CHECK(per[1] == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("evaluate_on_test") {
    std::mt19937_64 rng(1);
    const auto y = oracle::random_bits(40, rng);
    const auto a = oracle::random_bits(40, rng);
    const Dataset test = oracle::make_dataset(y, a, 3, rng);
    DemonstrationSet demos;
    demos.profiles = {MetricProfile{default_metrics(), {0.0, 0.0, 0.0, 0.0}}};

    // theta = 0 decides 1 everywhere: err is the negative rate, every gap is 0
    // except prp's conditional on D = 0 (empty in both groups).
    const auto e = evaluate_on_test(init_policy(3), test, demos, default_metrics());
    double negatives = 0;
    for (const int v : y) negatives += v == 0;
    CHECK(e.profile.values[0] == doctest::Approx(negatives / 40.0));
    CHECK(e.profile.values[1] == 0.0);
    CHECK(e.profile.values[2] == 0.0);

    // The model never beats a perfect demo unless it is perfect too.
    CHECK(e.gamma == (e.profile.values == std::vector<double>(4, 0.0) ? 1.0 : 0.0));
    demos.profiles = {MetricProfile{default_metrics(), {1.0, 1.0, 1.0, 1.0}}};
    CHECK(evaluate_on_test(init_policy(3), test, demos, default_metrics()).gamma == 1.0);

    CHECK_THROWS_AS(evaluate_on_test(init_policy(2), test, demos, default_metrics()), std::invalid_argument);
    const PolicyModel m{Vector{{0.4, -1.0, 0.2}}};
    CHECK(evaluate_on_test(m, test, demos, default_metrics()).profile.values ==
          evaluate_on_test(m, test, demos, default_metrics()).profile.values);
  }

  TEST_CASE("format_number") {
    CHECK(format_number(0.25) == "0.25");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(4.0) == "4");
  }

  TEST_CASE("export_results writes the table, gamma and scatter files") {
    const auto dir = scratch_dir("export");
    export_results(small_report(), dir);
    CHECK(slurp(dir / "table_comparison.csv") ==
          "method,err,d_dp,d_eqodds,d_prp\n"
          "minsub_fair,0.1,0.05,0.2,0\n"
          "post_processing_dp,0.15,0.01,0.1,0.25\n"
          "mfopt,NA,NA,NA,NA\n"
          "alpha,4,0,2,10\n"
          "gamma,0.5,1,1,1\n");
    CHECK(slurp(dir / "gamma_by_method.csv") ==
          "method,gamma_test,gamma_train\n"
          "minsub_fair,0.5,1\n"
          "post_processing_dp,0,NA\n"
          "bound_gamma,0.75,NA\n");
    CHECK(slurp(dir / "scatter_err_d_dp.csv") ==
          "kind,label,err,d_dp\n"
          "demo,0,0.2,0.1\n"
          "demo,1,0.05,0.1\n"
          "method,minsub_fair,0.1,0.05\n"
          "method,post_processing_dp,0.15,0.01\n"
          "margin,minsub_fair,0.25,inf\n");
    std::size_t scatter = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      scatter += entry.path().filename().string().rfind("scatter_", 0) == 0;
    }
    CHECK(scatter == 6);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("validate rejects broken reports") {
    auto r = small_report();
    r.demo_profiles.clear();
    CHECK_THROWS_AS(export_results(r, scratch_dir("bad")), std::invalid_argument);
    r = small_report();
    r.gamma["post_processing_dp"] = 1.5;
    CHECK_THROWS_AS(validate(r), std::invalid_argument);
    r = small_report();
    r.method_ids.push_back("missing");
    CHECK_THROWS_AS(validate(r), std::invalid_argument);
    r = small_report();
    r.alpha.alphas.pop_back();
    CHECK_THROWS_AS(validate(r), std::invalid_argument);
  }

  TEST_CASE("export_gamma_curve") {
    const auto dir = scratch_dir("curve");
    std::vector<EpsilonRun> runs{{0.0, small_report()}, {0.1, small_report()}};
    runs[1].report.gamma[kSubdominanceMethod] = 0.25;
    export_gamma_curve(runs, dir);
    CHECK(slurp(dir / "gamma_vs_epsilon.csv") ==
          "epsilon,minsub_fair,post_processing_dp,bound_gamma\n"
          "0,0.5,0,0.75\n"
          "0.1,0.25,0,0.75\n");
    CHECK_THROWS_AS(export_gamma_curve(std::vector<EpsilonRun>{}, dir), std::invalid_argument);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("property: dominance is a partial order and gamma is monotone") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<Metric> metrics = default_metrics();
    auto random_profile = [&] {
      MetricProfile p{metrics, {}};
      for (std::size_t k = 0; k < metrics.size(); ++k) p.values.push_back(std::round(u(rng) * 4) / 4);
      return p;
    };
    for (int trial = 0; trial < 300; ++trial) {
      const auto a = random_profile();
      const auto b = random_profile();
      const auto c = random_profile();
      CHECK(pareto_dominates(a, a));
      if (pareto_dominates(a, b) && pareto_dominates(b, a)) CHECK(a.values == b.values);
      if (pareto_dominates(a, b) && pareto_dominates(b, c)) CHECK(pareto_dominates(a, c));

      std::vector<MetricProfile> demos;
      for (int j = 0; j < 8; ++j) demos.push_back(random_profile());
      // Lowering any value never lowers gamma.
      auto better = a;
      better.values[trial % metrics.size()] *= u(rng);
      CHECK(gamma_superhuman(better, demos) >= gamma_superhuman(a, demos));
      // Dominating every demo gives 1; being dominated strictly by all gives 0.
      MetricProfile zero{metrics, std::vector<double>(metrics.size(), 0.0)};
      CHECK(gamma_superhuman(zero, demos) == 1.0);
      MetricProfile top{metrics, std::vector<double>(metrics.size(), 2.0)};
      CHECK(gamma_superhuman(top, demos) == 0.0);
    }
  }
}
