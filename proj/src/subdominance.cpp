#include "superfair/subdominance.hpp"

#include <algorithm>
#include <stdexcept>

namespace superfair {

double subdom_feature(double f_hat, double f_demo, double alpha) {
  return std::max(alpha * (f_hat - f_demo) + 1.0, 0.0);
}

double subdom_total(const MetricProfile& hat, std::span<const MetricProfile> demos,
                    const AlphaVector& alphas) {
  if (demos.empty()) throw std::invalid_argument("subdominance needs at least one demonstration");
  if (alphas.alphas.size() != hat.size()) {
    throw std::invalid_argument("alpha vector length does not match the profile");
  }
  double total = 0.0;
  for (const auto& demo : demos) {
    if (demo.metric_ids != hat.metric_ids) {
      throw std::invalid_argument("demonstration profile has different metric ids");
    }
    for (std::size_t k = 0; k < hat.size(); ++k) {
      total += subdom_feature(hat.values[k], demo.values[k], alphas.alphas[k]);
    }
  }
  return total / static_cast<double>(demos.size());
}

SortedFeature::SortedFeature(std::span<const double> demo_values)
    : sorted_(demo_values.begin(), demo_values.end()) {
  if (sorted_.empty()) throw std::invalid_argument("alpha selection needs demo values");
  std::stable_sort(sorted_.begin(), sorted_.end());
  prefix_.resize(sorted_.size() + 1, 0.0);
  for (std::size_t j = 0; j < sorted_.size(); ++j) prefix_[j + 1] = prefix_[j] + sorted_[j];
}

AlphaSolution SortedFeature::optimize(double f_hat, double lambda) const {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  const auto n = static_cast<double>(sorted_.size());
  for (std::size_t m = 1; m <= sorted_.size(); ++m) {
    const double v = sorted_[m - 1];
    if (v <= f_hat) continue;  // no positive corner for this demo
    const auto md = static_cast<double>(m);
    // Slack so that an exact tie (a flat segment) keeps the smaller m.
    if (f_hat * md + lambda * n > prefix_[m] + kCornerSlack) continue;
    AlphaSolution s;
    s.alpha = 1.0 / (v - f_hat);
    s.support_count = m;
    double hinge = 0.0;
    for (const double u : sorted_) hinge += subdom_feature(f_hat, u, s.alpha);
    s.gamma = hinge / n + lambda * s.alpha;
    return s;
  }
  return AlphaSolution{0.0, 1.0, 0};
}

AlphaSolution optimize_alpha(double f_hat, std::span<const double> demo_values, double lambda) {
  return SortedFeature(demo_values).optimize(f_hat, lambda);
}

std::vector<std::size_t> support_vectors(double f_hat, std::span<const double> demo_values,
                                         double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < demo_values.size(); ++j) {
    if (alpha * (f_hat - demo_values[j]) + 1.0 >= 0.0) out.push_back(j);
  }
  return out;
}

double generalization_gamma(std::size_t support_union_size, std::size_t n_demos) {
  if (n_demos == 0 || support_union_size > n_demos) {
    throw std::invalid_argument("support union size must lie in [0, N] with N >= 1");
  }
  return 1.0 - static_cast<double>(support_union_size) / static_cast<double>(n_demos);
}

}  // namespace superfair
