#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "superfair/dataset.hpp"
#include "superfair/demogen.hpp"
#include "superfair/metrics.hpp"
#include "superfair/policy.hpp"
#include "superfair/subdominance.hpp"

namespace superfair {

// a[k] <= b[k] for every k. Throws on mismatched metric ids.
bool pareto_dominates(const MetricProfile& a, const MetricProfile& b);

// Fraction of demo profiles weakly dominated by the model profile.
double gamma_superhuman(const MetricProfile& model, std::span<const MetricProfile> demos);

// Per metric: fraction of demos whose value is at least the model's.
std::vector<double> gamma_per_metric(const MetricProfile& model, std::span<const MetricProfile> demos);

struct MethodEvaluation {
  MetricProfile profile;
  double gamma = 0.0;
};

// Hard decisions of the model on every test item, scored against the
// evaluation demos' profiles.
MethodEvaluation evaluate_on_test(const PolicyModel& model, const Dataset& test_sh,
                                  const DemonstrationSet& demos_for_eval,
                                  std::span<const Metric> metric_ids);

inline constexpr const char* kSubdominanceMethod = "minsub_fair";

struct EvaluationReport {
  std::vector<Metric> metric_ids;
  std::vector<std::string> method_ids;  // row order of the comparison table
  std::map<std::string, MetricProfile> method_profiles;
  std::map<std::string, double> gamma;        // against test-time demos
  std::map<std::string, double> gamma_train;  // against training demos
  std::vector<MetricProfile> demo_profiles;   // test-time demos
  AlphaVector alpha;                          // of the subdominance method
  double bound_gamma = 0.0;
  // Listed in the table with every cell marked NA.
  std::vector<std::string> unavailable_methods;
};

// Throws std::invalid_argument when an invariant fails.
void validate(const EvaluationReport& report);

// table_comparison.csv, gamma_by_method.csv and one scatter_<A>_<B>.csv per
// unordered metric pair.
void export_results(const EvaluationReport& report, const std::filesystem::path& out_dir);

struct EpsilonRun {
  double epsilon = 0.0;
  EvaluationReport report;
};

// gamma_vs_epsilon.csv: one row per run, in the given order.
void export_gamma_curve(std::span<const EpsilonRun> runs, const std::filesystem::path& out_dir);

// Shortest round-trip decimal text of a double; "inf" for +infinity.
std::string format_number(double v);

}  // namespace superfair
