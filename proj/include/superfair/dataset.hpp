#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace superfair {

using ItemId = std::int64_t;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Items (M x L), binary labels y, binary group membership a and stable ids.
// Immutable after construction.
class Dataset {
 public:
  Dataset(Matrix items, std::vector<std::uint8_t> labels, std::vector<std::uint8_t> groups,
          std::vector<ItemId> ids, std::vector<std::string> feature_names = {});

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(items_.cols()); }

  const Matrix& items() const { return items_; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }
  const std::vector<std::uint8_t>& groups() const { return groups_; }
  const std::vector<ItemId>& ids() const { return ids_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  std::optional<std::size_t> find(ItemId id) const;
  // Throws std::out_of_range for an id not in the dataset.
  std::size_t row_of(ItemId id) const;
  std::vector<std::size_t> rows_of(std::span<const ItemId> ids) const;

  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset with_labels_and_groups(std::vector<std::uint8_t> labels,
                                 std::vector<std::uint8_t> groups) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  Matrix items_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::uint8_t> groups_;
  std::vector<ItemId> ids_;
  std::vector<std::string> feature_names_;
  std::unordered_map<ItemId, std::size_t> index_;
};

struct SplitPair {
  Dataset first;
  Dataset second;
  std::uint64_t seed;
};

enum class Schema { kAdult, kCompas };

Schema parse_schema(std::string_view name);

struct LoadOptions {
  // Keep the protected attribute among the model input features.
  bool include_group_feature = false;
};

// Reads a header-prefixed CSV file, drops rows with missing or unparseable
// values, binarizes label and group, one-hot encodes categorical columns,
// standardizes numeric columns and appends a constant intercept column.
Dataset load_tabular(const std::filesystem::path& path, Schema schema, LoadOptions options = {});

// Deterministic fixture: l - 1 standard-normal features (the first shifted by
// +1 for group 1) plus a trailing intercept column. Labels are
// 1[-1 + sum_j x_j / (j + 1) > 0], then flipped with probability flip_rate.
Dataset generate_synthetic(std::uint64_t seed, std::size_t m, std::size_t l, double group_rate,
                           double flip_rate);

// Copy with the group membership inserted as a feature column just before the
// trailing intercept column.
Dataset with_group_feature(const Dataset& ds);

// |first| = round(fraction * M) under a seeded uniform permutation.
SplitPair split(const Dataset& ds, double fraction, std::uint64_t seed);

// Flips exactly round(epsilon * M) labels and, independently, round(epsilon * M)
// groups at positions drawn without replacement.
Dataset flip_noise(const Dataset& ds, double epsilon, std::uint64_t seed, bool flip_labels,
                   bool flip_groups);

}  // namespace superfair
