#pragma once

#include <filesystem>
#include <string>

#include "superfair/dataset.hpp"
#include "superfair/demogen.hpp"
#include "superfair/evaluation.hpp"
#include "superfair/policy.hpp"
#include "superfair/trainer.hpp"

namespace superfair {

inline constexpr int kSchemaVersion = 1;

// Malformed or incompatible artifact files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Where a cached dataset came from; stored in the cache header.
struct DatasetSource {
  std::string name = "unknown";  // adult | compas | synthetic
  bool include_group_feature = false;
};

// JSON Lines: a header object, then one record per item.
void write_dataset(const Dataset& ds, const std::filesystem::path& path, const DatasetSource& source = {});
Dataset read_dataset(const std::filesystem::path& path);
DatasetSource read_dataset_source(const std::filesystem::path& path);

// JSON Lines: a header object, then one record per demonstration.
void write_demos(const DemonstrationSet& demos, const std::filesystem::path& path);
DemonstrationSet read_demos(const std::filesystem::path& path);

void write_policy(const PolicyModel& model, const std::filesystem::path& path);
// expected_dim = 0 skips the length check.
PolicyModel read_policy(const std::filesystem::path& path, std::size_t expected_dim = 0);

void write_train_report(const TrainReport& report, const TrainConfig& config,
                        const std::filesystem::path& path);
TrainReport read_train_report(const std::filesystem::path& path);

struct ReportContext {
  double epsilon = 0.0;
  bool include_group_feature = false;
  std::string dataset;
  std::string constraint;
};

void write_evaluation_report(const EvaluationReport& report, const ReportContext& context,
                             const std::filesystem::path& path);
EvaluationReport read_evaluation_report(const std::filesystem::path& path);

}  // namespace superfair
