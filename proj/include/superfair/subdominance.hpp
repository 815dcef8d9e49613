#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "superfair/metrics.hpp"

namespace superfair {

// Hinge slopes, one per metric; the per-feature margin is 1 / alpha.
struct AlphaVector {
  std::vector<double> alphas;
};

struct AlphaSolution {
  double alpha = 0.0;
  // Minimized per-feature objective: mean hinge over demos plus lambda * alpha.
  double gamma = 1.0;
  // Number of smallest demo values still active at the chosen corner.
  std::size_t support_count = 0;
};

// [alpha * (f_hat - f_demo) + 1]_+
double subdom_feature(double f_hat, double f_demo, double alpha);

// Mean over demos of the summed per-feature hinges.
double subdom_total(const MetricProfile& hat, std::span<const MetricProfile> demos,
                    const AlphaVector& alphas);

// Demo values of one feature in ascending order with prefix sums, so the
// corner search for many sampled f_hat values shares one sort.
class SortedFeature {
 public:
  explicit SortedFeature(std::span<const double> demo_values);

  std::size_t size() const { return sorted_.size(); }
  std::span<const double> sorted() const { return sorted_; }

  // Minimizes (1/N) sum_j [alpha (f_hat - v_j) + 1]_+ + lambda alpha over alpha >= 0.
  AlphaSolution optimize(double f_hat, double lambda) const;

 private:
  std::vector<double> sorted_;
  std::vector<double> prefix_;  // prefix_[m] = sum of the m smallest values
};

// Walks demos in ascending order of value. With the m smallest demos active
// the objective has slope lambda + (1/N) sum_{j<=m} (f_hat - v_(j)); the optimum
// is the corner alpha = 1 / (v_(m) - f_hat) for the smallest m at which that
// slope is nonpositive, i.e. f_hat + lambda N / m <= mean of the m smallest.
// Falls back to alpha = 0 (gamma = 1) when no corner qualifies. The test
// allows kCornerSlack of rounding, e.g. 0.05 + 0.1 against 0.15.
inline constexpr double kCornerSlack = 1e-12;
AlphaSolution optimize_alpha(double f_hat, std::span<const double> demo_values, double lambda);

// Indices j with alpha (f_hat - v_j) + 1 >= 0.
std::vector<std::size_t> support_vectors(double f_hat, std::span<const double> demo_values,
                                         double alpha);

// 1 - |support union| / N.
double generalization_gamma(std::size_t support_union_size, std::size_t n_demos);

}  // namespace superfair
