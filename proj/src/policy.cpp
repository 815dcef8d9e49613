#include "superfair/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "superfair/random.hpp"

namespace superfair {

namespace {

constexpr double kProbClamp = 1e-12;

void check_dims(const PolicyModel& model, const Matrix& items) {
  if (static_cast<std::size_t>(items.cols()) != model.dim()) {
    throw std::invalid_argument("item feature length " + std::to_string(items.cols()) +
                                " does not match model length " + std::to_string(model.dim()));
  }
}

void check_decisions(const Matrix& items, const Decisions& d) {
  if (static_cast<std::size_t>(items.rows()) != d.size()) {
    throw std::invalid_argument("decision vector is not aligned with items");
  }
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

PolicyModel init_policy(std::size_t l) {
  if (l == 0) throw std::invalid_argument("policy needs at least one weight");
  return PolicyModel{Vector::Zero(static_cast<Eigen::Index>(l))};
}

Vector predict_proba(const PolicyModel& model, const Matrix& items) {
  check_dims(model, items);
  Vector logits = items * model.theta;
  return logits.unaryExpr([](double z) { return sigmoid(z); });
}

Decisions sample_from_proba(const Vector& proba, std::uint64_t seed) {
  Rng rng(seed);
  Decisions d(static_cast<std::size_t>(proba.size()));
  for (Eigen::Index i = 0; i < proba.size(); ++i) d[static_cast<std::size_t>(i)] = rng.bernoulli(proba[i]);
  return d;
}

Decisions sample_decisions(const PolicyModel& model, const Matrix& items, std::uint64_t seed) {
  return sample_from_proba(predict_proba(model, items), seed);
}

Decisions hard_decisions(const PolicyModel& model, const Matrix& items) {
  const Vector p = predict_proba(model, items);
  Decisions d(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) d[static_cast<std::size_t>(i)] = p[i] >= 0.5 ? 1 : 0;
  return d;
}

double log_prob(const PolicyModel& model, const Matrix& items, const Decisions& d) {
  check_decisions(items, d);
  const Vector p = predict_proba(model, items);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kProbClamp, 1.0 - kProbClamp);
    total += d[static_cast<std::size_t>(i)] ? std::log(q) : std::log(1.0 - q);
  }
  return total;
}

Vector score_from_proba(const Vector& proba, const Matrix& items, const Decisions& d) {
  check_decisions(items, d);
  Vector residual(proba.size());
  for (Eigen::Index i = 0; i < proba.size(); ++i) {
    residual[i] = static_cast<double>(d[static_cast<std::size_t>(i)]) - proba[i];
  }
  return items.transpose() * residual;
}

Vector log_prob_gradient(const PolicyModel& model, const Matrix& items, const Decisions& d) {
  return score_from_proba(predict_proba(model, items), items, d);
}

}  // namespace superfair
