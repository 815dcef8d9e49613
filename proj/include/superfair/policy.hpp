#pragma once

#include <cstddef>
#include <cstdint>

#include "superfair/dataset.hpp"
#include "superfair/metrics.hpp"

namespace superfair {

// Per-item independent logistic decision model: P(y_i = 1 | x_i) = sigmoid(theta . x_i).
struct PolicyModel {
  Vector theta;

  std::size_t dim() const { return static_cast<std::size_t>(theta.size()); }
};

double sigmoid(double z);

PolicyModel init_policy(std::size_t l);

Vector predict_proba(const PolicyModel& model, const Matrix& items);

// One Bernoulli draw per item from the model probabilities.
Decisions sample_decisions(const PolicyModel& model, const Matrix& items, std::uint64_t seed);
Decisions sample_from_proba(const Vector& proba, std::uint64_t seed);

// Most probable label per item; p = 0.5 decides 1.
Decisions hard_decisions(const PolicyModel& model, const Matrix& items);

// log P(d | X) with probabilities clamped to [1e-12, 1 - 1e-12].
double log_prob(const PolicyModel& model, const Matrix& items, const Decisions& d);

// sum_i (d_i - p_i) x_i
Vector log_prob_gradient(const PolicyModel& model, const Matrix& items, const Decisions& d);
Vector score_from_proba(const Vector& proba, const Matrix& items, const Decisions& d);

}  // namespace superfair
