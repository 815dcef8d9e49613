#include "superfair/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string_view>

#include "superfair/random.hpp"

namespace superfair {

Dataset::Dataset(Matrix items, std::vector<std::uint8_t> labels, std::vector<std::uint8_t> groups,
                 std::vector<ItemId> ids, std::vector<std::string> feature_names)
    : items_(std::move(items)),
      labels_(std::move(labels)),
      groups_(std::move(groups)),
      ids_(std::move(ids)),
      feature_names_(std::move(feature_names)) {
  const auto m = labels_.size();
  if (m == 0) throw std::invalid_argument("dataset must contain at least one item");
  if (static_cast<std::size_t>(items_.rows()) != m || groups_.size() != m || ids_.size() != m) {
    throw std::invalid_argument("dataset fields have mismatched lengths");
  }
  if (!feature_names_.empty() && feature_names_.size() != dim()) {
    throw std::invalid_argument("feature name count does not match item dimension");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (labels_[i] > 1 || groups_[i] > 1) {
      throw std::invalid_argument("labels and groups must be 0 or 1");
    }
    if (!index_.emplace(ids_[i], i).second) {
      throw std::invalid_argument("duplicate item id " + std::to_string(ids_[i]));
    }
  }
}

std::optional<std::size_t> Dataset::find(ItemId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dataset::row_of(ItemId id) const {
  const auto row = find(id);
  if (!row) throw std::out_of_range("unresolved item id " + std::to_string(id));
  return *row;
}

std::vector<std::size_t> Dataset::rows_of(std::span<const ItemId> ids) const {
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto id : ids) rows.push_back(row_of(id));
  return rows;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Matrix items(rows.size(), items_.cols());
  std::vector<std::uint8_t> labels(rows.size());
  std::vector<std::uint8_t> groups(rows.size());
  std::vector<ItemId> ids(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    if (r >= size()) throw std::out_of_range("subset row out of range");
    items.row(static_cast<Eigen::Index>(i)) = items_.row(static_cast<Eigen::Index>(r));
    labels[i] = labels_[r];
    groups[i] = groups_[r];
    ids[i] = ids_[r];
  }
  return Dataset(std::move(items), std::move(labels), std::move(groups), std::move(ids),
                 feature_names_);
}

Dataset Dataset::with_labels_and_groups(std::vector<std::uint8_t> labels,
                                        std::vector<std::uint8_t> groups) const {
  return Dataset(items_, std::move(labels), std::move(groups), ids_, feature_names_);
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.items_ == b.items_ && a.labels_ == b.labels_ && a.groups_ == b.groups_ &&
         a.ids_ == b.ids_ && a.feature_names_ == b.feature_names_;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Splits one CSV line; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.emplace_back(trim(field));
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

bool is_missing(std::string_view s) { return s.empty() || s == "?" || s == "NA" || s == "N/A"; }

using Row = std::vector<std::string>;
using Columns = std::map<std::string, std::size_t, std::less<>>;

struct SchemaSpec {
  std::vector<std::string> numeric;
  std::vector<std::string> categorical;
  std::string group_column;
  std::vector<std::string> filter_columns;
  // Each returns nullopt when the row must be dropped.
  std::function<std::optional<std::uint8_t>(std::string_view)> label;
  std::function<std::optional<std::uint8_t>(std::string_view)> group;
  std::string label_column;
  std::function<bool(const Row&, const Columns&)> keep = [](const Row&, const Columns&) {
    return true;
  };
};

SchemaSpec adult_spec() {
  SchemaSpec spec;
  spec.numeric = {"age", "fnlwgt", "education-num", "capital-gain", "capital-loss",
                  "hours-per-week"};
  spec.categorical = {"workclass",    "education", "marital-status", "occupation",
                      "relationship", "race",      "native-country"};
  spec.group_column = "sex";
  spec.label_column = "income";
  spec.label = [](std::string_view v) -> std::optional<std::uint8_t> {
    if (!v.empty() && v.back() == '.') v.remove_suffix(1);
    if (v == ">50K") return 1;
    if (v == "<=50K") return 0;
    return std::nullopt;
  };
  spec.group = [](std::string_view v) -> std::optional<std::uint8_t> {
    if (v == "Male") return 1;
    if (v == "Female") return 0;
    return std::nullopt;
  };
  return spec;
}

// ProPublica two-year recidivism file with the customary screening filters.
SchemaSpec compas_spec() {
  SchemaSpec spec;
  spec.numeric = {"age", "juv_fel_count", "juv_misd_count", "juv_other_count", "priors_count"};
  spec.categorical = {"sex", "age_cat", "c_charge_degree"};
  spec.group_column = "race";
  spec.label_column = "two_year_recid";
  spec.filter_columns = {"days_b_screening_arrest", "is_recid", "score_text"};
  spec.label = [](std::string_view v) -> std::optional<std::uint8_t> {
    if (v == "1") return 1;
    if (v == "0") return 0;
    return std::nullopt;
  };
  spec.group = [](std::string_view v) -> std::optional<std::uint8_t> {
    if (v.empty()) return std::nullopt;
    return v == "African-American" ? 1 : 0;
  };
  spec.keep = [](const Row& row, const Columns& cols) {
    const auto days = parse_number(row[cols.find("days_b_screening_arrest")->second]);
    const auto recid = parse_number(row[cols.find("is_recid")->second]);
    if (!days || !recid) return false;
    return *days <= 30 && *days >= -30 && *recid != -1 &&
           row[cols.find("c_charge_degree")->second] != "O" &&
           row[cols.find("score_text")->second] != "N/A";
  };
  return spec;
}

}  // namespace

Schema parse_schema(std::string_view name) {
  if (name == "adult") return Schema::kAdult;
  if (name == "compas") return Schema::kCompas;
  throw std::invalid_argument("unknown dataset schema '" + std::string(name) + "'");
}

Dataset load_tabular(const std::filesystem::path& path, Schema schema, LoadOptions options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const SchemaSpec spec = schema == Schema::kAdult ? adult_spec() : compas_spec();

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  const Row header = split_csv_line(line);
  Columns cols;
  for (std::size_t i = 0; i < header.size(); ++i) cols.emplace(header[i], i);  // first wins

  std::vector<std::string> required = spec.numeric;
  required.insert(required.end(), spec.categorical.begin(), spec.categorical.end());
  required.insert(required.end(), spec.filter_columns.begin(), spec.filter_columns.end());
  required.push_back(spec.group_column);
  required.push_back(spec.label_column);
  for (const auto& name : required) {
    if (!cols.contains(name)) {
      throw std::runtime_error("schema mismatch: missing column '" + name + "' in " +
                               path.string());
    }
  }

  struct Parsed {
    ItemId id;
    std::vector<double> numeric;
    std::vector<std::string> categorical;
    std::uint8_t label;
    std::uint8_t group;
  };
  std::vector<Parsed> rows;
  ItemId line_index = -1;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++line_index;
    Row row = split_csv_line(line);
    if (row.size() != header.size()) continue;
    if (!spec.keep(row, cols)) continue;

    Parsed p{line_index, {}, {}, 0, 0};
    bool ok = true;
    for (const auto& name : spec.numeric) {
      const auto& v = row[cols.find(name)->second];
      const auto x = is_missing(v) ? std::nullopt : parse_number(v);
      if (!x) {
        ok = false;
        break;
      }
      p.numeric.push_back(*x);
    }
    for (const auto& name : spec.categorical) {
      if (!ok) break;
      const auto& v = row[cols.find(name)->second];
      if (is_missing(v)) ok = false;
      p.categorical.push_back(v);
    }
    const auto label = spec.label(row[cols.find(spec.label_column)->second]);
    const auto group = spec.group(row[cols.find(spec.group_column)->second]);
    if (!ok || !label || !group) continue;
    p.label = *label;
    p.group = *group;
    rows.push_back(std::move(p));
  }
  if (rows.empty()) throw std::runtime_error("no usable rows in " + path.string());

  // Category levels sorted for a deterministic column order.
  std::vector<std::vector<std::string>> levels(spec.categorical.size());
  for (std::size_t c = 0; c < spec.categorical.size(); ++c) {
    std::set<std::string> seen;
    for (const auto& r : rows) seen.insert(r.categorical[c]);
    levels[c].assign(seen.begin(), seen.end());
  }

  std::vector<std::string> names = spec.numeric;
  for (std::size_t c = 0; c < levels.size(); ++c) {
    for (const auto& level : levels[c]) names.push_back(spec.categorical[c] + "=" + level);
  }
  if (options.include_group_feature) names.push_back(spec.group_column);
  names.emplace_back("intercept");

  const auto m = rows.size();
  const auto n_numeric = spec.numeric.size();
  Matrix items = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(names.size()));
  std::vector<std::uint8_t> labels(m);
  std::vector<std::uint8_t> groups(m);
  std::vector<ItemId> ids(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    auto col = static_cast<Eigen::Index>(n_numeric);
    for (std::size_t c = 0; c < n_numeric; ++c) items(r, static_cast<Eigen::Index>(c)) = rows[i].numeric[c];
    for (std::size_t c = 0; c < levels.size(); ++c) {
      const auto& lv = levels[c];
      const auto pos = std::lower_bound(lv.begin(), lv.end(), rows[i].categorical[c]) - lv.begin();
      items(r, col + pos) = 1.0;
      col += static_cast<Eigen::Index>(lv.size());
    }
    if (options.include_group_feature) items(r, col++) = rows[i].group;
    items(r, col) = 1.0;
    labels[i] = rows[i].label;
    groups[i] = rows[i].group;
    ids[i] = rows[i].id;
  }

  for (std::size_t c = 0; c < n_numeric; ++c) {
    auto column = items.col(static_cast<Eigen::Index>(c));
    const double mean = column.mean();
    const double var = (column.array() - mean).square().mean();
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    column = (column.array() - mean) / sd;
  }

  return Dataset(std::move(items), std::move(labels), std::move(groups), std::move(ids),
                 std::move(names));
}

Dataset generate_synthetic(std::uint64_t seed, std::size_t m, std::size_t l, double group_rate,
                           double flip_rate) {
  if (m < 2 || l < 1) throw std::invalid_argument("synthetic data needs m >= 2 and l >= 1");
  if (!(group_rate >= 0.0 && group_rate <= 1.0) || !(flip_rate >= 0.0 && flip_rate <= 1.0)) {
    throw std::invalid_argument("synthetic rates must lie in [0, 1]");
  }
  Rng rng(derive_seed(seed, Stream::kSynthetic));
  const auto cols = static_cast<Eigen::Index>(l);
  Matrix items(static_cast<Eigen::Index>(m), cols);
  std::vector<std::uint8_t> labels(m);
  std::vector<std::uint8_t> groups(m);
  std::vector<ItemId> ids(m);
  std::vector<std::string> names;
  for (std::size_t j = 0; j + 1 < l; ++j) names.push_back("x" + std::to_string(j));
  names.emplace_back("intercept");

  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    groups[i] = rng.bernoulli(group_rate) ? 1 : 0;
    double score = -1.0;
    for (Eigen::Index j = 0; j + 1 < cols; ++j) {
      double x = rng.normal();
      // Group 1 is shifted along the first feature, giving unequal base rates.
      if (j == 0 && groups[i] == 1) x += 1.0;
      items(r, j) = x;
      score += x / static_cast<double>(j + 1);
    }
    items(r, cols - 1) = 1.0;
    labels[i] = score > 0.0 ? 1 : 0;
    if (rng.bernoulli(flip_rate)) labels[i] = 1 - labels[i];
    ids[i] = static_cast<ItemId>(i);
  }
  return Dataset(std::move(items), std::move(labels), std::move(groups), std::move(ids),
                 std::move(names));
}

Dataset with_group_feature(const Dataset& ds) {
  const auto l = static_cast<Eigen::Index>(ds.dim());
  Matrix items(ds.items().rows(), l + 1);
  items.leftCols(l - 1) = ds.items().leftCols(l - 1);
  for (std::size_t i = 0; i < ds.size(); ++i) items(static_cast<Eigen::Index>(i), l - 1) = ds.groups()[i];
  items.col(l) = ds.items().col(l - 1);
  std::vector<std::string> names = ds.feature_names();
  if (!names.empty()) names.insert(names.end() - 1, "group");
  return Dataset(std::move(items), ds.labels(), ds.groups(), ds.ids(), std::move(names));
}

SplitPair split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie strictly between 0 and 1");
  }
  const auto m = ds.size();
  const auto n_first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
  if (n_first == 0 || n_first == m) throw std::invalid_argument("split leaves one side empty");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(order));
  const std::span<const std::size_t> all(order);
  return SplitPair{ds.subset(all.first(n_first)), ds.subset(all.subspan(n_first)), seed};
}

namespace {

void flip_positions(std::vector<std::uint8_t>& values, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(order));
  for (std::size_t i = 0; i < count; ++i) values[order[i]] ^= 1;
}

}  // namespace

Dataset flip_noise(const Dataset& ds, double epsilon, std::uint64_t seed, bool flip_labels,
                   bool flip_groups) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("noise rate must lie in [0, 1]");
  }
  const auto count = static_cast<std::size_t>(std::llround(epsilon * static_cast<double>(ds.size())));
  auto labels = ds.labels();
  auto groups = ds.groups();
  if (flip_labels) flip_positions(labels, count, derive_seed(seed, Stream::kLabelFlip));
  if (flip_groups) flip_positions(groups, count, derive_seed(seed, Stream::kGroupFlip));
  return ds.with_labels_and_groups(std::move(labels), std::move(groups));
}

}  // namespace superfair
