#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "superfair/dataset.hpp"
#include "superfair/metrics.hpp"
#include "superfair/policy.hpp"

namespace superfair {

enum class Constraint { kDP, kEqOdds };

std::string_view constraint_name(Constraint c);
Constraint parse_constraint(std::string_view name);

// Decides 1 when score > threshold; at score == threshold decides 1 with
// probability tie_probability.
struct ThresholdRule {
  double threshold = 0.0;
  double tie_probability = 0.0;
  double weight = 1.0;
};

// Mixture of threshold rules; weights sum to at most 1 and the remaining mass
// decides 0. A demographic-parity rule is a single component; equalized odds
// mixes hull vertices with a constant rate.
struct GroupRule {
  std::vector<ThresholdRule> components;

  double probability(double score) const;
};

struct GroupThresholds {
  std::array<GroupRule, 2> group;

  // Convenience for the single-threshold case.
  static GroupThresholds single(double t0, double r0, double t1, double r1);
};

struct DemoProvenance {
  std::size_t n = 0;
  double epsilon = 0.0;
  Constraint constraint = Constraint::kDP;
  std::uint64_t base_seed = 0;
  std::vector<Metric> metric_ids;
};

struct DemonstrationSet {
  std::vector<DecisionVector> demos;
  std::vector<MetricProfile> profiles;  // against clean labels and groups
  DemoProvenance provenance;

  std::size_t size() const { return demos.size(); }
};

struct ScorerOptions {
  std::size_t max_epochs = 500;
  double gradient_tolerance = 1e-5;
};

// Logistic regression by full-batch gradient descent on mean log loss. A
// single-class training set yields the constant all-zero model.
PolicyModel fit_base_scorer(const Dataset& train, ScorerOptions options = {});

// Error-minimizing group-specific randomized rule meeting the constraint in
// expectation: equal positive rates (dp) or equal TPR and FPR (eqodds).
GroupThresholds postprocess(std::span<const double> scores, std::span<const std::uint8_t> groups,
                            std::span<const std::uint8_t> labels, Constraint constraint);

std::vector<double> decision_probabilities(const GroupThresholds& th, std::span<const double> scores,
                                           std::span<const std::uint8_t> groups);

Decisions apply_thresholds(const GroupThresholds& th, std::span<const double> scores,
                           std::span<const std::uint8_t> groups, std::uint64_t seed);

// The fitted "human": base scorer plus post-processing rule.
struct FairBaseline {
  PolicyModel scorer;
  GroupThresholds thresholds;

  Decisions decide(const Dataset& ds, std::uint64_t seed) const;
};

FairBaseline fit_baseline(const Dataset& train, Constraint constraint);

// Demo i (seed + i): noise-corrupt train_sh, split it in halves, fit the
// baseline on the noisy first half, decide the second half; the profile uses
// the clean labels and groups of train_sh.
DemonstrationSet synthesize_demos(const Dataset& train_sh, std::size_t n, double epsilon,
                                  Constraint constraint, std::uint64_t seed,
                                  std::span<const Metric> metric_ids);

// Demo i reuses the decision-maker of training demo i (same noisy copy of
// train_sh, same fit half) and decides every item of its own noisy copy of
// test_sh. Profiles are computed against the clean test_sh.
DemonstrationSet synthesize_heldout_demos(const Dataset& train_sh, const Dataset& test_sh,
                                          std::size_t n, double epsilon, Constraint constraint,
                                          std::uint64_t seed, std::span<const Metric> metric_ids);

}  // namespace superfair
