#include "superfair/trainer.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

#include "superfair/random.hpp"

namespace superfair {

DemoContext::DemoContext(const DemonstrationSet& demos, const Dataset& train_sh,
                         std::span<const Metric> metric_ids)
    : dataset_(&train_sh), metrics_(metric_ids.begin(), metric_ids.end()) {
  if (demos.size() == 0) throw std::invalid_argument("training needs at least one demonstration");
  if (demos.profiles.size() != demos.size()) {
    throw std::invalid_argument("demonstration set has mismatched profiles");
  }
  if (demos.provenance.metric_ids != metrics_) {
    throw std::invalid_argument("metric ids of config and demonstration set differ");
  }
  rows_.reserve(demos.size());
  items_.reserve(demos.size());
  for (const auto& demo : demos.demos) {
    rows_.push_back(train_sh.rows_of(demo.item_ids));
    Matrix x(static_cast<Eigen::Index>(rows_.back().size()), train_sh.items().cols());
    for (std::size_t j = 0; j < rows_.back().size(); ++j) {
      x.row(static_cast<Eigen::Index>(j)) = train_sh.items().row(static_cast<Eigen::Index>(rows_.back()[j]));
    }
    items_.push_back(std::move(x));
  }
  values_.assign(metrics_.size(), std::vector<double>(demos.size()));
  for (std::size_t i = 0; i < demos.size(); ++i) {
    if (demos.profiles[i].metric_ids != metrics_) {
      throw std::invalid_argument("demonstration profile has different metric ids");
    }
    for (std::size_t k = 0; k < metrics_.size(); ++k) values_[k][i] = demos.profiles[i].values[k];
  }
  for (const auto& v : values_) features_.emplace_back(v);
}

MetricProfile DemoContext::profile_of(std::size_t i, const Decisions& d) const {
  return profile(tally_rows(d, rows_[i], *dataset_), metrics_);
}

DemoContext::Evaluation DemoContext::evaluate(const MetricProfile& p, double lambda) const {
  Evaluation e;
  e.alphas.reserve(metrics_.size());
  for (std::size_t k = 0; k < metrics_.size(); ++k) {
    const AlphaSolution s = features_[k].optimize(p.values[k], lambda);
    e.total += s.gamma;
    e.alphas.push_back(s.alpha);
  }
  return e;
}

std::string_view init_mode_name(InitMode m) {
  switch (m) {
    case InitMode::kZero: return "zero";
    case InitMode::kLogistic: return "logistic";
    case InitMode::kImitation: return "imitation";
  }
  throw std::invalid_argument("unknown init mode");
}

InitMode parse_init_mode(std::string_view name) {
  if (name == "zero") return InitMode::kZero;
  if (name == "logistic") return InitMode::kLogistic;
  if (name == "imitation") return InitMode::kImitation;
  throw std::invalid_argument("unknown init mode '" + std::string(name) + "'");
}

PolicyModel initial_policy(const DemonstrationSet& demos, const Dataset& train_sh, InitMode mode) {
  switch (mode) {
    case InitMode::kZero: return init_policy(train_sh.dim());
    case InitMode::kLogistic: return fit_base_scorer(train_sh);
    case InitMode::kImitation: break;
  }
  // Every (item, demonstrated decision) pair becomes one training example.
  std::size_t total = 0;
  for (const auto& d : demos.demos) total += d.values.size();
  Matrix items(static_cast<Eigen::Index>(total), train_sh.items().cols());
  std::vector<std::uint8_t> decisions(total);
  std::vector<std::uint8_t> groups(total, 0);
  std::vector<ItemId> ids(total);
  std::size_t r = 0;
  for (const auto& d : demos.demos) {
    for (std::size_t j = 0; j < d.values.size(); ++j, ++r) {
      items.row(static_cast<Eigen::Index>(r)) = train_sh.items().row(static_cast<Eigen::Index>(train_sh.row_of(d.item_ids[j])));
      decisions[r] = d.values[j];
      ids[r] = static_cast<ItemId>(r);
    }
  }
  return fit_base_scorer(Dataset(std::move(items), std::move(decisions), std::move(groups), std::move(ids)));
}

GradientEstimate estimate_gradient(const DemoContext& ctx, const PolicyModel& model, const TrainConfig& config,
                                   std::size_t iter) {
  const auto n = ctx.size();
  const auto k_count = ctx.num_metrics();
  const auto draws = n * config.samples_per_demo;
  std::vector<double> gammas;
  std::vector<Vector> scores;
  gammas.reserve(draws);
  scores.reserve(draws);
  GradientEstimate out;
  out.mean_alpha.assign(k_count, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector proba = predict_proba(model, ctx.items(i));
    for (std::size_t s = 0; s < config.samples_per_demo; ++s) {
      const auto seed = derive_seed(config.seed, Stream::kTrainSample, (iter * n + i) * config.samples_per_demo + s);
      const Decisions d = sample_from_proba(proba, seed);
      const auto eval = ctx.evaluate(ctx.profile_of(i, d), config.lambda);
      out.objective += eval.total;
      for (std::size_t k = 0; k < k_count; ++k) out.mean_alpha[k] += eval.alphas[k];
      gammas.push_back(eval.total);
      scores.push_back(score_from_proba(proba, ctx.items(i), d));
    }
  }
  const double total = out.objective;
  out.gradient = Vector::Zero(model.theta.size());
  for (std::size_t j = 0; j < draws; ++j) {
    double weight = gammas[j];
    if (config.baseline && draws > 1) weight -= (total - gammas[j]) / static_cast<double>(draws - 1);
    out.gradient += weight * scores[j];
  }
  const auto denom = static_cast<double>(draws);
  out.gradient /= denom;
  out.objective /= denom;
  for (auto& a : out.mean_alpha) a /= denom;
  return out;
}

TrainReport train(const DemonstrationSet& demos, const Dataset& train_sh, const TrainConfig& config) {
  if (!(config.eta > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (config.max_iters == 0) throw std::invalid_argument("max_iters must be at least 1");
  if (config.samples_per_demo == 0) throw std::invalid_argument("samples_per_demo must be at least 1");
  if (config.lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  const DemoContext ctx(demos, train_sh, config.metric_ids);

  TrainReport report;
  PolicyModel model = config.initial ? *config.initial : initial_policy(demos, train_sh, config.init);
  if (model.dim() != train_sh.dim()) throw std::invalid_argument("initial model length does not match dataset");
  double best = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    GradientEstimate est = estimate_gradient(ctx, model, config, iter);
    report.subdom_history.push_back(est.objective);
    report.alpha_history.push_back(AlphaVector{std::move(est.mean_alpha)});
    report.iterations_run = iter + 1;
    if (est.objective < best) {
      best = est.objective;
      report.best_iteration = iter;
      report.final_theta = model;
    } else if (config.patience > 0 && iter - report.best_iteration >= config.patience) {
      break;
    }
    // Descent on the expected subdominance.
    model.theta -= config.eta * est.gradient;
  }
  return report;
}

double mean_subdominance(const PolicyModel& model, const DemonstrationSet& demos,
                         const Dataset& train_sh, double lambda, std::span<const Metric> metric_ids,
                         std::uint64_t seed) {
  const DemoContext ctx(demos, train_sh, metric_ids);
  double total = 0.0;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    const Decisions d = sample_decisions(model, ctx.items(i), derive_seed(seed, Stream::kObjective, i));
    total += ctx.evaluate(ctx.profile_of(i, d), lambda).total;
  }
  return total / static_cast<double>(ctx.size());
}

std::vector<std::size_t> support_vector_union(const PolicyModel& model, const DemonstrationSet& demos,
                                              const Dataset& train_sh, double lambda,
                                              std::span<const Metric> metric_ids) {
  const DemoContext ctx(demos, train_sh, metric_ids);
  std::set<std::size_t> members;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    const MetricProfile p = ctx.profile_of(i, hard_decisions(model, ctx.items(i)));
    for (std::size_t k = 0; k < ctx.num_metrics(); ++k) {
      const AlphaSolution s = ctx.feature(k).optimize(p.values[k], lambda);
      for (const auto j : support_vectors(p.values[k], ctx.feature_values(k), s.alpha)) {
        members.insert(j);
      }
    }
  }
  return {members.begin(), members.end()};
}

}  // namespace superfair
