#include "superfair/demogen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "superfair/random.hpp"

namespace superfair {

std::string_view constraint_name(Constraint c) { return c == Constraint::kDP ? "dp" : "eqodds"; }

Constraint parse_constraint(std::string_view name) {
  if (name == "dp") return Constraint::kDP;
  if (name == "eqodds") return Constraint::kEqOdds;
  throw std::invalid_argument("unknown constraint '" + std::string(name) + "'");
}

double GroupRule::probability(double score) const {
  double p = 0.0;
  for (const auto& c : components) {
    if (score > c.threshold) {
      p += c.weight;
    } else if (score == c.threshold) {
      p += c.weight * c.tie_probability;
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

GroupThresholds GroupThresholds::single(double t0, double r0, double t1, double r1) {
  GroupThresholds th;
  th.group[0].components = {ThresholdRule{t0, r0, 1.0}};
  th.group[1].components = {ThresholdRule{t1, r1, 1.0}};
  return th;
}

PolicyModel fit_base_scorer(const Dataset& train, ScorerOptions options) {
  const auto& X = train.items();
  PolicyModel model = init_policy(train.dim());
  const auto& labels = train.labels();
  const auto positives = std::count(labels.begin(), labels.end(), std::uint8_t{1});
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) return model;

  Vector y(X.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = labels[static_cast<std::size_t>(i)];
  const double n = static_cast<double>(X.rows());
  // 1 / L for the mean log loss, whose Hessian is bounded by trace(X'X) / (4n).
  const double step = 4.0 * n / X.squaredNorm();
  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    const Vector p = predict_proba(model, X);
    const Vector grad = X.transpose() * (p - y) / n;
    if (grad.norm() < options.gradient_tolerance) break;
    model.theta -= step * grad;
  }
  return model;
}

namespace {

// Distinct score levels of one group in descending order.
struct LevelTable {
  std::vector<double> level;
  std::vector<double> count;      // items at this level
  std::vector<double> positives;  // positive labels at this level
  std::vector<double> above;      // items strictly above this level
  std::vector<double> pos_above;  // positives strictly above this level
  double n = 0.0;
  double n_pos = 0.0;

  LevelTable(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    std::vector<std::pair<double, std::uint8_t>> items;
    items.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) items.emplace_back(scores[i], labels[i]);
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [s, y] : items) {
      if (level.empty() || level.back() != s) {
        above.push_back(n);
        pos_above.push_back(n_pos);
        level.push_back(s);
        count.push_back(0.0);
        positives.push_back(0.0);
      }
      count.back() += 1.0;
      positives.back() += y;
      n += 1.0;
      n_pos += y;
    }
  }

  std::size_t level_for(double k) const {
    const auto it = std::upper_bound(above.begin(), above.end(), k);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - above.begin()) - 1));
  }

  // Rule deciding 1 for the k highest-scored items in expectation.
  ThresholdRule rule_for(double k) const {
    const auto l = level_for(k);
    const double r = std::clamp((k - above[l]) / count[l], 0.0, 1.0);
    return ThresholdRule{level[l], r, 1.0};
  }

  double expected_errors(double k) const {
    const auto l = level_for(k);
    const double r = std::clamp((k - above[l]) / count[l], 0.0, 1.0);
    const double fp = (above[l] - pos_above[l]) + r * (count[l] - positives[l]);
    const double fn = n_pos - pos_above[l] - r * positives[l];
    return fp + fn;
  }
};

struct GroupSplit {
  std::array<std::vector<double>, 2> scores;
  std::array<std::vector<std::uint8_t>, 2> labels;
};

GroupSplit by_group(std::span<const double> scores, std::span<const std::uint8_t> groups,
                    std::span<const std::uint8_t> labels) {
  if (scores.size() != groups.size() || scores.size() != labels.size()) {
    throw std::invalid_argument("post-processing inputs have mismatched lengths");
  }
  GroupSplit out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.scores[groups[i]].push_back(scores[i]);
    out.labels[groups[i]].push_back(labels[i]);
  }
  if (out.scores[0].empty() || out.scores[1].empty()) {
    throw std::invalid_argument("post-processing needs items from both groups");
  }
  return out;
}

GroupThresholds postprocess_dp(const GroupSplit& data) {
  const std::array<LevelTable, 2> tables{LevelTable(data.scores[0], data.labels[0]),
                                         LevelTable(data.scores[1], data.labels[1])};
  std::vector<double> candidates{1.0};
  for (const auto& t : tables) {
    for (const double a : t.above) candidates.push_back(a / t.n);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double best_rate = 0.0;
  double best_errors = std::numeric_limits<double>::infinity();
  for (const double q : candidates) {
    const double errors =
        tables[0].expected_errors(q * tables[0].n) + tables[1].expected_errors(q * tables[1].n);
    if (errors < best_errors) {
      best_errors = errors;
      best_rate = q;
    }
  }
  GroupThresholds th;
  for (int g = 0; g < 2; ++g) th.group[g].components = {tables[g].rule_for(best_rate * tables[g].n)};
  return th;
}

struct RocVertex {
  double fpr;
  double tpr;
  ThresholdRule rule;
};

// Upper concave hull of the group's ROC points, from (0, 0) to (1, 1).
std::vector<RocVertex> roc_hull(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const LevelTable t(scores, labels);
  const double n_neg = t.n - t.n_pos;
  if (t.n_pos == 0.0 || n_neg == 0.0) {
    throw std::invalid_argument("equalized-odds post-processing needs both labels in each group");
  }
  std::vector<RocVertex> points{{0.0, 0.0, {std::numeric_limits<double>::infinity(), 0.0, 1.0}}};
  for (std::size_t l = 0; l < t.level.size(); ++l) {
    const double pos = t.pos_above[l] + t.positives[l];
    const double neg = t.above[l] + t.count[l] - pos;
    points.push_back({neg / n_neg, pos / t.n_pos, {t.level[l], 1.0, 1.0}});
  }
  std::vector<RocVertex> hull;
  for (const auto& p : points) {
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& a = hull.back();
      const double cross = (a.fpr - o.fpr) * (p.tpr - o.tpr) - (a.tpr - o.tpr) * (p.fpr - o.fpr);
      if (cross < 0.0) break;
      hull.pop_back();
    }
    hull.push_back(p);
  }
  return hull;
}

// Point (fpr, U(fpr)) on the hull as a mix of two adjacent vertices.
struct HullPoint {
  double tpr;
  std::size_t a;
  std::size_t b;
  double weight_a;
};

HullPoint hull_at(const std::vector<RocVertex>& hull, double fpr) {
  HullPoint best{-1.0, 0, 0, 1.0};
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (hull[i].fpr == fpr && hull[i].tpr > best.tpr) best = {hull[i].tpr, i, i, 1.0};
    if (i + 1 == hull.size()) break;
    const auto& a = hull[i];
    const auto& b = hull[i + 1];
    if (a.fpr < fpr && fpr < b.fpr) {
      const double w = (b.fpr - fpr) / (b.fpr - a.fpr);
      const double tpr = w * a.tpr + (1.0 - w) * b.tpr;
      if (tpr > best.tpr) best = {tpr, i, i + 1, w};
    }
  }
  return best;
}

GroupThresholds postprocess_eqodds(const GroupSplit& data) {
  const std::array<std::vector<RocVertex>, 2> hulls{roc_hull(data.scores[0], data.labels[0]),
                                                     roc_hull(data.scores[1], data.labels[1])};
  double n_pos = 0.0;
  double n_neg = 0.0;
  for (const auto& labels : data.labels) {
    for (const auto y : labels) (y ? n_pos : n_neg) += 1.0;
  }

  std::vector<double> breaks;
  for (const auto& h : hulls) {
    for (const auto& v : h) breaks.push_back(v.fpr);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<double> candidates = breaks;
  const auto gap = [&](double f) { return hull_at(hulls[0], f).tpr - hull_at(hulls[1], f).tpr; };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    // Both hulls are linear strictly inside (b1, b2); evaluate just inside the ends.
    const double b1 = breaks[i];
    const double b2 = breaks[i + 1];
    const double d1 = gap(b1);
    const double d2 = gap(b2);
    if ((d1 < 0.0 && d2 > 0.0) || (d1 > 0.0 && d2 < 0.0)) {
      candidates.push_back(b1 + (b2 - b1) * d1 / (d1 - d2));
    }
  }
  std::sort(candidates.begin(), candidates.end());

  double best_fpr = 0.0;
  double best_tpr = 0.0;
  double best_errors = std::numeric_limits<double>::infinity();
  for (const double f : candidates) {
    const double tpr = std::min(hull_at(hulls[0], f).tpr, hull_at(hulls[1], f).tpr);
    const double errors = n_neg * f + n_pos * (1.0 - tpr);
    if (errors < best_errors) {
      best_errors = errors;
      best_fpr = f;
      best_tpr = tpr;
    }
  }

  GroupThresholds th;
  for (int g = 0; g < 2; ++g) {
    const auto& hull = hulls[g];
    const HullPoint q = hull_at(hull, best_fpr);
    const double beta = q.tpr > best_fpr ? (best_tpr - best_fpr) / (q.tpr - best_fpr) : 0.0;
    auto& comps = th.group[g].components;
    auto add = [&](ThresholdRule rule, double weight) {
      if (weight <= 0.0) return;
      rule.weight = weight;
      comps.push_back(rule);
    };
    add(hull[q.a].rule, beta * q.weight_a);
    if (q.b != q.a) add(hull[q.b].rule, beta * (1.0 - q.weight_a));
    add(ThresholdRule{-std::numeric_limits<double>::infinity(), 1.0, 1.0}, (1.0 - beta) * best_fpr);
  }
  return th;
}

}  // namespace

GroupThresholds postprocess(std::span<const double> scores, std::span<const std::uint8_t> groups,
                            std::span<const std::uint8_t> labels, Constraint constraint) {
  const GroupSplit data = by_group(scores, groups, labels);
  return constraint == Constraint::kDP ? postprocess_dp(data) : postprocess_eqodds(data);
}

std::vector<double> decision_probabilities(const GroupThresholds& th, std::span<const double> scores,
                                           std::span<const std::uint8_t> groups) {
  if (scores.size() != groups.size()) {
    throw std::invalid_argument("scores and groups have mismatched lengths");
  }
  std::vector<double> p(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) p[i] = th.group[groups[i]].probability(scores[i]);
  return p;
}

Decisions apply_thresholds(const GroupThresholds& th, std::span<const double> scores,
                           std::span<const std::uint8_t> groups, std::uint64_t seed) {
  const auto p = decision_probabilities(th, scores, groups);
  Rng rng(seed);
  Decisions d(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    // Deterministic rules never consume a draw, so they are unaffected by the seed.
    if (p[i] >= 1.0) {
      d[i] = 1;
    } else if (p[i] > 0.0) {
      d[i] = rng.bernoulli(p[i]);
    }
  }
  return d;
}

Decisions FairBaseline::decide(const Dataset& ds, std::uint64_t seed) const {
  const Vector scores = predict_proba(scorer, ds.items());
  return apply_thresholds(thresholds, std::span<const double>(scores.data(), scores.size()),
                          ds.groups(), seed);
}

FairBaseline fit_baseline(const Dataset& train, Constraint constraint) {
  FairBaseline b{fit_base_scorer(train), {}};
  const Vector scores = predict_proba(b.scorer, train.items());
  b.thresholds = postprocess(std::span<const double>(scores.data(), scores.size()), train.groups(),
                             train.labels(), constraint);
  return b;
}

namespace {

DemonstrationSet make_set(std::size_t n, double epsilon, Constraint constraint, std::uint64_t seed,
                          std::span<const Metric> metric_ids) {
  if (n == 0) throw std::invalid_argument("need at least one demonstration");
  if (metric_ids.empty()) throw std::invalid_argument("need at least one metric");
  DemonstrationSet set;
  set.provenance = DemoProvenance{n, epsilon, constraint, seed,
                                  std::vector<Metric>(metric_ids.begin(), metric_ids.end())};
  set.demos.reserve(n);
  set.profiles.reserve(n);
  return set;
}

}  // namespace

DemonstrationSet synthesize_demos(const Dataset& train_sh, std::size_t n, double epsilon,
                                  Constraint constraint, std::uint64_t seed,
                                  std::span<const Metric> metric_ids) {
  DemonstrationSet set = make_set(n, epsilon, constraint, seed, metric_ids);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t demo_seed = seed + i;
    const Dataset noisy = flip_noise(train_sh, epsilon, derive_seed(demo_seed, Stream::kNoise), true, true);
    const SplitPair halves = split(noisy, 0.5, derive_seed(demo_seed, Stream::kSplit));
    const FairBaseline human = fit_baseline(halves.first, constraint);
    DecisionVector demo{human.decide(halves.second, derive_seed(demo_seed, Stream::kApply)),
                        halves.second.ids()};
    set.profiles.push_back(profile(demo, train_sh, metric_ids));
    set.demos.push_back(std::move(demo));
  }
  return set;
}

DemonstrationSet synthesize_heldout_demos(const Dataset& train_sh, const Dataset& test_sh,
                                          std::size_t n, double epsilon, Constraint constraint,
                                          std::uint64_t seed, std::span<const Metric> metric_ids) {
  DemonstrationSet set = make_set(n, epsilon, constraint, seed, metric_ids);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t demo_seed = seed + i;
    const Dataset noisy = flip_noise(train_sh, epsilon, derive_seed(demo_seed, Stream::kNoise), true, true);
    const SplitPair halves = split(noisy, 0.5, derive_seed(demo_seed, Stream::kSplit));
    const FairBaseline human = fit_baseline(halves.first, constraint);

    const Dataset noisy_test =
        flip_noise(test_sh, epsilon, derive_seed(demo_seed, Stream::kHeldoutNoise), true, true);
    DecisionVector demo{human.decide(noisy_test, derive_seed(demo_seed, Stream::kHeldoutDemo)),
                        noisy_test.ids()};
    set.profiles.push_back(profile(demo, test_sh, metric_ids));
    set.demos.push_back(std::move(demo));
  }
  return set;
}

}  // namespace superfair
