#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "superfair/dataset.hpp"
#include "superfair/demogen.hpp"
#include "superfair/metrics.hpp"
#include "superfair/policy.hpp"
#include "superfair/subdominance.hpp"

namespace superfair {

enum class InitMode {
  kZero,       // theta = 0
  kLogistic,   // logistic regression on the ground-truth labels of train_sh
  kImitation,  // logistic regression on the pooled demonstrated decisions
};

std::string_view init_mode_name(InitMode m);
InitMode parse_init_mode(std::string_view name);

// Starting point of training.
PolicyModel initial_policy(const DemonstrationSet& demos, const Dataset& train_sh, InitMode mode);

struct TrainConfig {
  double eta = 0.01;
  double lambda = 0.01;
  std::size_t max_iters = 300;
  std::size_t patience = 30;  // 0 disables early stopping
  std::size_t samples_per_demo = 1;
  std::uint64_t seed = 0;
  std::vector<Metric> metric_ids = default_metrics();
  InitMode init = InitMode::kImitation;
  // Overrides init when set, e.g. to resume from a saved model.
  std::optional<PolicyModel> initial;
  // Subtract the leave-one-out mean of Sum_k Gamma_k over the iteration's draws.
  bool baseline = false;
};

struct TrainReport {
  PolicyModel final_theta;
  std::vector<AlphaVector> alpha_history;  // mean over samples, per iteration
  std::vector<double> subdom_history;      // mean of sum_k Gamma_k, per iteration
  std::size_t iterations_run = 0;
  std::size_t best_iteration = 0;

  const AlphaVector& best_alpha() const { return alpha_history.at(best_iteration); }
};

// Demonstrations bound to the rows of the dataset they were drawn from, with
// per-feature sorted values shared by every alpha search.
class DemoContext {
 public:
  DemoContext(const DemonstrationSet& demos, const Dataset& train_sh,
              std::span<const Metric> metric_ids);

  std::size_t size() const { return items_.size(); }
  std::size_t num_metrics() const { return metrics_.size(); }
  std::span<const Metric> metrics() const { return metrics_; }
  const Matrix& items(std::size_t i) const { return items_[i]; }
  const std::vector<std::size_t>& rows(std::size_t i) const { return rows_[i]; }
  const SortedFeature& feature(std::size_t k) const { return features_[k]; }
  const std::vector<double>& feature_values(std::size_t k) const { return values_[k]; }
  const Dataset& dataset() const { return *dataset_; }

  MetricProfile profile_of(std::size_t i, const Decisions& d) const;

  struct Evaluation {
    double total = 0.0;  // sum_k Gamma_k
    std::vector<double> alphas;
  };
  Evaluation evaluate(const MetricProfile& p, double lambda) const;

 private:
  const Dataset* dataset_;
  std::vector<Metric> metrics_;
  std::vector<std::vector<std::size_t>> rows_;
  std::vector<Matrix> items_;
  std::vector<std::vector<double>> values_;  // [k][demo]
  std::vector<SortedFeature> features_;
};

struct GradientEstimate {
  Vector gradient;                // mean over draws of (sum_k Gamma_k) * grad log P
  double objective = 0.0;         // mean over draws of sum_k Gamma_k
  std::vector<double> mean_alpha;
};

// One iteration's score-function estimate: samples_per_demo draws per demo,
// each scored against every demonstration with its own alpha.
GradientEstimate estimate_gradient(const DemoContext& ctx, const PolicyModel& model, const TrainConfig& config,
                                   std::size_t iter);

// Subdominance policy-gradient descent from config.initial, or from
// initial_policy(config.init) when unset. The returned model is
// the iterate with the lowest recorded mean subdominance.
TrainReport train(const DemonstrationSet& demos, const Dataset& train_sh, const TrainConfig& config);

// Monte-Carlo estimate of the training objective: one sample per demo item
// set, mean over demos of sum_k Gamma_k.
double mean_subdominance(const PolicyModel& model, const DemonstrationSet& demos,
                         const Dataset& train_sh, double lambda, std::span<const Metric> metric_ids,
                         std::uint64_t seed);

// Union of per-feature support vectors of the model's hard decisions on every
// demo item set, each against all demo profiles with its optimal alpha.
std::vector<std::size_t> support_vector_union(const PolicyModel& model, const DemonstrationSet& demos,
                                              const Dataset& train_sh, double lambda,
                                              std::span<const Metric> metric_ids);

}  // namespace superfair
