#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "superfair/dataset.hpp"
#include "superfair/demogen.hpp"
#include "superfair/evaluation.hpp"
#include "superfair/metrics.hpp"
#include "superfair/trainer.hpp"

namespace superfair {

struct SyntheticOptions {
  std::size_t m = 4000;
  std::size_t l = 8;
  double group_rate = 0.5;
  double flip_rate = 0.1;
};

struct DataConfig {
  std::string dataset = "synthetic";  // adult | compas | synthetic
  std::filesystem::path input;        // raw CSV for adult / compas
  SyntheticOptions synthetic;
  bool include_group_feature = false;
};

struct ExperimentConfig {
  DataConfig data;
  std::vector<double> epsilons{0.2};
  std::size_t n_demos = 50;
  Constraint constraint = Constraint::kDP;
  std::vector<Metric> metric_ids = default_metrics();
  TrainConfig train;
  double split_fraction = 0.5;  // share of items in train_sh
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "results";
};

// Seeds derived from the root seed.
struct RunSeeds {
  std::uint64_t data;      // synthetic generator
  std::uint64_t split;     // train_sh / test_sh partition
  std::uint64_t demos;     // base seed of both demonstration sets
  std::uint64_t train;     // policy sampling
  std::uint64_t baseline;  // noise and tie draws of the comparison methods
};

RunSeeds derive_run_seeds(std::uint64_t root);

// Loads the raw file or generates the synthetic fixture, then applies the
// group-feature toggle.
Dataset load_data(const DataConfig& config, std::uint64_t data_seed);

SplitPair shared_split(const Dataset& ds, double fraction, std::uint64_t split_seed);

inline const std::vector<std::string> kUnavailableMethods{"mfopt", "fair_logloss_dp", "fair_logloss_eqodds"};

// Scores the trained policy and the comparison methods (post-processing dp and
// eqodds, unconstrained logistic; all fit on an epsilon-noised copy of
// train_sh) on test_sh.
EvaluationReport evaluate_methods(const PolicyModel& model, const TrainReport& train_report,
                                  const Dataset& train_sh, const Dataset& test_sh,
                                  const DemonstrationSet& train_demos, const DemonstrationSet& test_demos,
                                  double lambda, std::uint64_t baseline_seed);

struct EpsilonArtifacts {
  DemonstrationSet demos;
  DemonstrationSet heldout;
  TrainReport train;
  EvaluationReport report;
};

// Full pipeline for one noise level, in memory.
EpsilonArtifacts run_epsilon(const ExperimentConfig& config, const Dataset& ds, double epsilon);

// Runs every epsilon and writes per-run artifacts under out_dir/eps_<epsilon>/
// plus out_dir/gamma_vs_epsilon.csv.
std::vector<EpsilonRun> run_experiment(const ExperimentConfig& config);

// Directory name for one noise level, e.g. "eps_0.2".
std::string epsilon_dir(double epsilon);

}  // namespace superfair
