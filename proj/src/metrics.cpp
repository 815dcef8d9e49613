#include "superfair/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace superfair {

namespace {

constexpr std::array<std::pair<Metric, std::string_view>, 6> kNames{{
    {Metric::kError, "err"},
    {Metric::kDP, "d_dp"},
    {Metric::kEqOdds, "d_eqodds"},
    {Metric::kPRP, "d_prp"},
    {Metric::kFNR, "d_fnr"},
    {Metric::kFPR, "d_fpr"},
}};

double rate(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void require_nonempty(const GroupConfusion& c) {
  if (c.total() == 0) throw std::invalid_argument("metric of an empty decision vector");
}

}  // namespace

std::string_view metric_name(Metric m) {
  for (const auto& [metric, name] : kNames) {
    if (metric == m) return name;
  }
  throw std::invalid_argument("unknown metric");
}

Metric parse_metric(std::string_view name) {
  for (const auto& [metric, n] : kNames) {
    if (n == name) return metric;
  }
  throw std::invalid_argument("unknown metric id '" + std::string(name) + "'");
}

std::vector<Metric> parse_metric_list(std::string_view csv) {
  std::vector<Metric> out;
  while (!csv.empty()) {
    const auto comma = csv.find(',');
    const auto token = csv.substr(0, comma);
    const auto m = parse_metric(token);
    if (std::find(out.begin(), out.end(), m) != out.end()) {
      throw std::invalid_argument("duplicate metric id '" + std::string(token) + "'");
    }
    out.push_back(m);
    if (comma == std::string_view::npos) break;
    csv.remove_prefix(comma + 1);
  }
  if (out.empty()) throw std::invalid_argument("metric list is empty");
  return out;
}

std::string format_metric_list(std::span<const Metric> metrics) {
  std::string out;
  for (const auto m : metrics) {
    if (!out.empty()) out += ',';
    out += metric_name(m);
  }
  return out;
}

std::vector<Metric> default_metrics() {
  return {Metric::kError, Metric::kDP, Metric::kEqOdds, Metric::kPRP};
}

GroupConfusion tally(std::span<const std::uint8_t> decisions, std::span<const std::uint8_t> labels,
                     std::span<const std::uint8_t> groups) {
  if (decisions.size() != labels.size() || decisions.size() != groups.size()) {
    throw std::invalid_argument("tally inputs have mismatched lengths");
  }
  GroupConfusion c;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    auto& g = c.group[groups[i] & 1];
    if (decisions[i]) {
      ++(labels[i] ? g.tp : g.fp);
    } else {
      ++(labels[i] ? g.fn : g.tn);
    }
  }
  return c;
}

GroupConfusion tally_rows(std::span<const std::uint8_t> decisions, std::span<const std::size_t> rows,
                          const Dataset& ds) {
  if (decisions.size() != rows.size()) {
    throw std::invalid_argument("decisions and rows have mismatched lengths");
  }
  const auto& labels = ds.labels();
  const auto& groups = ds.groups();
  GroupConfusion c;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto r = rows[i];
    auto& g = c.group[groups[r]];
    if (decisions[i]) {
      ++(labels[r] ? g.tp : g.fp);
    } else {
      ++(labels[r] ? g.fn : g.tn);
    }
  }
  return c;
}

GroupConfusion confusion_counts(const DecisionVector& d, const Dataset& ds) {
  if (d.values.size() != d.item_ids.size()) {
    throw std::invalid_argument("decision vector values and ids differ in length");
  }
  const auto rows = ds.rows_of(d.item_ids);
  return tally_rows(d.values, rows, ds);
}

double prediction_error(const GroupConfusion& c) {
  require_nonempty(c);
  const auto wrong = c.group[0].fp + c.group[0].fn + c.group[1].fp + c.group[1].fn;
  return rate(wrong, c.total());
}

double d_dp(const GroupConfusion& c) {
  require_nonempty(c);
  const auto& g1 = c.group[1];
  const auto& g0 = c.group[0];
  return std::abs(rate(g1.tp + g1.fp, g1.total()) - rate(g0.tp + g0.fp, g0.total()));
}

double d_eqodds(const GroupConfusion& c) {
  require_nonempty(c);
  const auto& g1 = c.group[1];
  const auto& g0 = c.group[0];
  const double tpr = std::abs(rate(g1.tp, g1.tp + g1.fn) - rate(g0.tp, g0.tp + g0.fn));
  const double fpr = std::abs(rate(g1.fp, g1.fp + g1.tn) - rate(g0.fp, g0.fp + g0.tn));
  return std::max(tpr, fpr);
}

double d_prp(const GroupConfusion& c) {
  require_nonempty(c);
  const auto& g1 = c.group[1];
  const auto& g0 = c.group[0];
  // P(Y=1 | Yhat=1, A) and P(Y=1 | Yhat=0, A)
  const double ppv = std::abs(rate(g1.tp, g1.tp + g1.fp) - rate(g0.tp, g0.tp + g0.fp));
  const double npv = std::abs(rate(g1.fn, g1.fn + g1.tn) - rate(g0.fn, g0.fn + g0.tn));
  return std::max(ppv, npv);
}

double d_fnr(const GroupConfusion& c) {
  require_nonempty(c);
  const auto& g1 = c.group[1];
  const auto& g0 = c.group[0];
  return std::abs(rate(g1.fn, g1.tp + g1.fn) - rate(g0.fn, g0.tp + g0.fn));
}

double d_fpr(const GroupConfusion& c) {
  require_nonempty(c);
  const auto& g1 = c.group[1];
  const auto& g0 = c.group[0];
  return std::abs(rate(g1.fp, g1.fp + g1.tn) - rate(g0.fp, g0.fp + g0.tn));
}

double metric_value(Metric m, const GroupConfusion& c) {
  switch (m) {
    case Metric::kError: return prediction_error(c);
    case Metric::kDP: return d_dp(c);
    case Metric::kEqOdds: return d_eqodds(c);
    case Metric::kPRP: return d_prp(c);
    case Metric::kFNR: return d_fnr(c);
    case Metric::kFPR: return d_fpr(c);
  }
  throw std::invalid_argument("unknown metric");
}

double prediction_error(const DecisionVector& d, const Dataset& ds) {
  return prediction_error(confusion_counts(d, ds));
}
double d_dp(const DecisionVector& d, const Dataset& ds) { return d_dp(confusion_counts(d, ds)); }
double d_eqodds(const DecisionVector& d, const Dataset& ds) {
  return d_eqodds(confusion_counts(d, ds));
}
double d_prp(const DecisionVector& d, const Dataset& ds) { return d_prp(confusion_counts(d, ds)); }
double d_fnr(const DecisionVector& d, const Dataset& ds) { return d_fnr(confusion_counts(d, ds)); }
double d_fpr(const DecisionVector& d, const Dataset& ds) { return d_fpr(confusion_counts(d, ds)); }

MetricProfile profile(const GroupConfusion& c, std::span<const Metric> metrics) {
  if (metrics.empty()) throw std::invalid_argument("profile needs at least one metric");
  MetricProfile p;
  p.metric_ids.assign(metrics.begin(), metrics.end());
  p.values.reserve(metrics.size());
  for (const auto m : metrics) p.values.push_back(metric_value(m, c));
  return p;
}

MetricProfile profile(const DecisionVector& d, const Dataset& ds, std::span<const Metric> metrics) {
  return profile(confusion_counts(d, ds), metrics);
}

}  // namespace superfair
