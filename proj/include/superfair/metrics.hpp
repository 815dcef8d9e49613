#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "superfair/dataset.hpp"

namespace superfair {

// Closed set of loss / unfairness features. Every value lies in [0, 1].
enum class Metric {
  kError,      // err
  kDP,         // d_dp
  kEqOdds,     // d_eqodds
  kPRP,        // d_prp
  kFNR,        // d_fnr
  kFPR,        // d_fpr
};

std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view name);
// Comma-separated list, e.g. "err,d_dp,d_eqodds,d_prp". Rejects duplicates.
std::vector<Metric> parse_metric_list(std::string_view csv);
std::string format_metric_list(std::span<const Metric> metrics);
std::vector<Metric> default_metrics();

using Decisions = std::vector<std::uint8_t>;

// Binary decisions over a subset of dataset items, addressed by id.
struct DecisionVector {
  Decisions values;
  std::vector<ItemId> item_ids;

  friend bool operator==(const DecisionVector&, const DecisionVector&) = default;
};

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Indexed by group value a in {0, 1}.
struct GroupConfusion {
  std::array<ConfusionCounts, 2> group;

  std::int64_t total() const { return group[0].total() + group[1].total(); }
  friend bool operator==(const GroupConfusion&, const GroupConfusion&) = default;
};

struct MetricProfile {
  std::vector<Metric> metric_ids;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const MetricProfile&, const MetricProfile&) = default;
};

// Tally of (decision, label) pairs per group over aligned vectors.
GroupConfusion tally(std::span<const std::uint8_t> decisions, std::span<const std::uint8_t> labels,
                     std::span<const std::uint8_t> groups);
// Same, with labels and groups looked up through dataset rows.
GroupConfusion tally_rows(std::span<const std::uint8_t> decisions, std::span<const std::size_t> rows,
                          const Dataset& ds);
GroupConfusion confusion_counts(const DecisionVector& d, const Dataset& ds);

// Conditional rates with an empty denominator are taken as 0. Each throws
// std::invalid_argument on an empty tally.
double prediction_error(const GroupConfusion& c);
double d_dp(const GroupConfusion& c);
double d_eqodds(const GroupConfusion& c);
double d_prp(const GroupConfusion& c);
double d_fnr(const GroupConfusion& c);
double d_fpr(const GroupConfusion& c);
double metric_value(Metric m, const GroupConfusion& c);

double prediction_error(const DecisionVector& d, const Dataset& ds);
double d_dp(const DecisionVector& d, const Dataset& ds);
double d_eqodds(const DecisionVector& d, const Dataset& ds);
double d_prp(const DecisionVector& d, const Dataset& ds);
double d_fnr(const DecisionVector& d, const Dataset& ds);
double d_fpr(const DecisionVector& d, const Dataset& ds);

MetricProfile profile(const GroupConfusion& c, std::span<const Metric> metrics);
MetricProfile profile(const DecisionVector& d, const Dataset& ds, std::span<const Metric> metrics);

}  // namespace superfair
