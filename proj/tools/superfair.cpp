// Command-line driver: prepare, demos, train, eval, experiment.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "superfair/dataset.hpp"
#include "superfair/demogen.hpp"
#include "superfair/evaluation.hpp"
#include "superfair/experiment.hpp"
#include "superfair/io.hpp"
#include "superfair/metrics.hpp"
#include "superfair/trainer.hpp"

namespace fs = std::filesystem;
using namespace superfair;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

// Config keys outside any [section] belong to the subcommand being run, so
// `train --config run.toml` can hold bare `eta = 0.05` lines.
class SubcommandConfig : public CLI::ConfigTOML {
 public:
  explicit SubcommandConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    const auto subs = app_->get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty()) item.parents = {subs.front()->get_name()};
    }
    return items;
  }

 private:
  const CLI::App* app_;
};

struct DataFlags {
  std::string dataset = "synthetic";
  std::string input;
  SyntheticOptions synthetic;
  bool include_group_feature = false;
};

struct SplitFlags {
  std::uint64_t seed = 0;
  double split_fraction = 0.5;
};

struct DemoFlags {
  std::size_t n = 50;
  double epsilon = 0.2;
  std::string constraint = "dp";
  std::string metrics = "err,d_dp,d_eqodds,d_prp";
};

struct TrainFlags {
  TrainConfig config;
  std::string init = "imitation";
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--dataset", f.dataset, "adult | compas | synthetic")
      ->check(CLI::IsMember({"adult", "compas", "synthetic"}))
      ->capture_default_str();
  cmd->add_option("--input", f.input, "raw CSV file (adult, compas)");
  cmd->add_option("--m", f.synthetic.m, "synthetic: number of items")->check(CLI::Range(2, 100000000))->capture_default_str();
  cmd->add_option("--l", f.synthetic.l, "synthetic: columns including the intercept")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  cmd->add_option("--group-rate", f.synthetic.group_rate, "synthetic: P(a = 1)")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("--flip-rate", f.synthetic.flip_rate, "synthetic: label flip probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_flag("--include-group-feature", f.include_group_feature, "keep group membership as a model input")
      ->capture_default_str();
}

void add_split_flags(CLI::App* cmd, SplitFlags& f) {
  cmd->add_option("--seed", f.seed, "root seed")->capture_default_str();
  cmd->add_option("--split-fraction", f.split_fraction, "share of items in train_sh")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void add_demo_flags(CLI::App* cmd, DemoFlags& f) {
  cmd->add_option("--n", f.n, "number of demonstrations")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--constraint", f.constraint, "dp | eqodds")->check(CLI::IsMember({"dp", "eqodds"}))->capture_default_str();
  cmd->add_option("--metrics", f.metrics, "comma-separated metric ids")->capture_default_str();
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  auto& c = f.config;
  cmd->add_option("--eta", c.eta, "learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--lambda", c.lambda, "alpha regularization")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--max-iters", c.max_iters, "gradient iterations")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--patience", c.patience, "stop after this many iterations without improvement (0 = never)")
      ->capture_default_str();
  cmd->add_option("--samples-per-demo", c.samples_per_demo, "policy samples per demo per iteration")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--init", f.init, "zero | logistic | imitation")
      ->check(CLI::IsMember({"zero", "logistic", "imitation"}))
      ->capture_default_str();
  cmd->add_flag("--baseline", c.baseline, "subtract a leave-one-out baseline from the sample weights")
      ->capture_default_str();
}

DataConfig to_data_config(const DataFlags& f) {
  DataConfig d;
  d.dataset = f.dataset;
  d.input = f.input;
  d.synthetic = f.synthetic;
  d.include_group_feature = f.include_group_feature;
  return d;
}

TrainConfig to_train_config(const TrainFlags& f, std::span<const Metric> metrics, std::uint64_t train_seed) {
  TrainConfig c = f.config;
  c.init = parse_init_mode(f.init);
  c.metric_ids.assign(metrics.begin(), metrics.end());
  c.seed = train_seed;
  return c;
}

void print_profile(const std::string& label, const MetricProfile& p) {
  fmt::print("{}:", label);
  for (std::size_t k = 0; k < p.size(); ++k) {
    fmt::print(" {}={}", metric_name(p.metric_ids[k]), format_number(p.values[k]));
  }
  fmt::print("\n");
}

MetricProfile mean_profile(const DemonstrationSet& demos) {
  MetricProfile mean{demos.provenance.metric_ids, std::vector<double>(demos.provenance.metric_ids.size(), 0.0)};
  for (const auto& p : demos.profiles) {
    for (std::size_t k = 0; k < mean.size(); ++k) mean.values[k] += p.values[k];
  }
  for (auto& v : mean.values) v /= static_cast<double>(demos.size());
  return mean;
}

double rate(const std::vector<std::uint8_t>& v) {
  std::size_t ones = 0;
  for (const auto x : v) ones += x;
  return v.empty() ? 0.0 : static_cast<double>(ones) / static_cast<double>(v.size());
}

int cmd_prepare(const DataFlags& data, const SplitFlags& sf, const fs::path& out) {
  if (data.dataset != "synthetic" && data.input.empty()) {
    throw std::runtime_error("--input is required for dataset " + data.dataset);
  }
  const Dataset ds = load_data(to_data_config(data), derive_run_seeds(sf.seed).data);
  write_dataset(ds, out, DatasetSource{data.dataset, data.include_group_feature});
  fmt::print("M={} L={} group1_rate={} label1_rate={} -> {}\n", ds.size(), ds.dim(), format_number(rate(ds.groups())),
             format_number(rate(ds.labels())), out.string());
  return 0;
}

int cmd_demos(const fs::path& data_path, const SplitFlags& sf, const DemoFlags& df, const fs::path& out,
              const fs::path& heldout_out) {
  const Dataset ds = read_dataset(data_path);
  const RunSeeds seeds = derive_run_seeds(sf.seed);
  const SplitPair sh = shared_split(ds, sf.split_fraction, seeds.split);
  const auto metrics = parse_metric_list(df.metrics);
  const auto constraint = parse_constraint(df.constraint);
  const auto demos = synthesize_demos(sh.first, df.n, df.epsilon, constraint, seeds.demos, metrics);
  write_demos(demos, out);
  if (!heldout_out.empty()) {
    write_demos(synthesize_heldout_demos(sh.first, sh.second, df.n, df.epsilon, constraint, seeds.demos, metrics),
                heldout_out);
  }
  fmt::print("wrote {} demos to {}\n", demos.size(), out.string());
  print_profile("mean profile", mean_profile(demos));
  return 0;
}

int cmd_train(const fs::path& data_path, const fs::path& demos_path, const SplitFlags& sf, const TrainFlags& tf,
              const std::string& initial_model, const fs::path& model_out, const fs::path& report_out) {
  const Dataset ds = read_dataset(data_path);
  const RunSeeds seeds = derive_run_seeds(sf.seed);
  const SplitPair sh = shared_split(ds, sf.split_fraction, seeds.split);
  const auto demos = read_demos(demos_path);
  TrainConfig config = to_train_config(tf, demos.provenance.metric_ids, seeds.train);
  if (!initial_model.empty()) config.initial = read_policy(initial_model, ds.dim());
  const TrainReport report = train(demos, sh.first, config);
  write_policy(report.final_theta, model_out);
  write_train_report(report, config, report_out);
  fmt::print("iterations={} best_iteration={} best_subdominance={}\n", report.iterations_run, report.best_iteration,
             format_number(report.subdom_history.at(report.best_iteration)));
  return 0;
}

int cmd_eval(const fs::path& data_path, const fs::path& demos_path, const fs::path& heldout_path,
             const fs::path& model_path, const std::string& train_report_path, const SplitFlags& sf, double lambda,
             const fs::path& out_dir) {
  if (!fs::exists(model_path)) throw std::runtime_error("model file " + model_path.string() + " not found");
  const Dataset ds = read_dataset(data_path);
  const DatasetSource source = read_dataset_source(data_path);
  const RunSeeds seeds = derive_run_seeds(sf.seed);
  const SplitPair sh = shared_split(ds, sf.split_fraction, seeds.split);
  const PolicyModel model = read_policy(model_path, ds.dim());
  const auto demos = read_demos(demos_path);
  const auto heldout = read_demos(heldout_path);
  const TrainReport tr = train_report_path.empty() ? TrainReport{} : read_train_report(train_report_path);
  const EvaluationReport report =
      evaluate_methods(model, tr, sh.first, sh.second, demos, heldout, lambda, seeds.baseline);
  write_evaluation_report(report,
                          ReportContext{demos.provenance.epsilon, source.include_group_feature, source.name,
                                        std::string(constraint_name(demos.provenance.constraint))},
                          out_dir / "eval_report.json");
  export_results(report, out_dir);
  for (const auto& id : report.method_ids) {
    fmt::print("{}: gamma_test={} gamma_train={}\n", id, format_number(report.gamma.at(id)),
               format_number(report.gamma_train.at(id)));
  }
  fmt::print("bound_gamma={}\n", format_number(report.bound_gamma));
  return 0;
}

int cmd_experiment(const DataFlags& data, const SplitFlags& sf, const DemoFlags& df, const TrainFlags& tf,
                   const std::vector<double>& epsilons, const fs::path& out_dir) {
  if (data.dataset != "synthetic" && data.input.empty()) {
    throw std::runtime_error("--input is required for dataset " + data.dataset);
  }
  ExperimentConfig config;
  config.data = to_data_config(data);
  config.epsilons = epsilons;
  config.n_demos = df.n;
  config.constraint = parse_constraint(df.constraint);
  config.metric_ids = parse_metric_list(df.metrics);
  config.train = to_train_config(tf, config.metric_ids, 0);
  config.split_fraction = sf.split_fraction;
  config.seed = sf.seed;
  config.out_dir = out_dir;
  const auto runs = run_experiment(config);
  for (const auto& run : runs) {
    fmt::print("epsilon={} gamma_test={} bound_gamma={}\n", format_number(run.epsilon),
               format_number(run.report.gamma.at(kSubdominanceMethod)), format_number(run.report.bound_gamma));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware classifiers that outperform noisy reference decisions"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);

  DataFlags data;
  SplitFlags split_flags;
  DemoFlags demo_flags;
  TrainFlags train_flags;
  std::string data_path = "dataset.jsonl";
  std::string demos_path = "demos.jsonl";
  std::string heldout_path = "heldout_demos.jsonl";
  std::string model_path = "model.json";
  std::string train_report_path = "train_report.json";
  std::string initial_model;
  std::string eval_dir = "eval";
  std::string results_dir = "results";
  std::vector<double> epsilons{0.2};

  auto* prepare = app.add_subcommand("prepare", "load or generate a dataset and write the cache file");
  add_data_flags(prepare, data);
  add_split_flags(prepare, split_flags);
  prepare->add_option("--out", data_path, "dataset cache")->capture_default_str();

  auto* demos = app.add_subcommand("demos", "synthesize training and held-out demonstrations");
  demos->add_option("--data", data_path, "dataset cache")->capture_default_str();
  add_split_flags(demos, split_flags);
  add_demo_flags(demos, demo_flags);
  demos->add_option("--epsilon", demo_flags.epsilon, "label and group noise rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  demos->add_option("--out", demos_path, "training demonstrations")->capture_default_str();
  demos->add_option("--heldout-out", heldout_path, "held-out demonstrations on test_sh (empty to skip)")
      ->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "fit the policy by subdominance minimization");
  train_cmd->add_option("--data", data_path, "dataset cache")->capture_default_str();
  train_cmd->add_option("--demos", demos_path, "training demonstrations")->capture_default_str();
  add_split_flags(train_cmd, split_flags);
  add_train_flags(train_cmd, train_flags);
  train_cmd->add_option("--initial-model", initial_model, "start from this policy file instead of --init");
  train_cmd->add_option("--model-out", model_path, "trained policy")->capture_default_str();
  train_cmd->add_option("--report-out", train_report_path, "training history")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "score the trained policy and comparison methods on test_sh");
  eval->add_option("--data", data_path, "dataset cache")->capture_default_str();
  eval->add_option("--demos", demos_path, "training demonstrations")->capture_default_str();
  eval->add_option("--heldout", heldout_path, "held-out demonstrations")->capture_default_str();
  eval->add_option("--model", model_path, "trained policy")->capture_default_str();
  eval->add_option("--train-report", train_report_path, "training history, for the alpha row (empty to skip)")
      ->capture_default_str();
  add_split_flags(eval, split_flags);
  eval->add_option("--lambda", train_flags.config.lambda, "alpha regularization used in training")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  eval->add_option("--out-dir", eval_dir, "report directory")->capture_default_str();

  auto* experiment = app.add_subcommand("experiment", "full pipeline for each noise level");
  add_data_flags(experiment, data);
  add_split_flags(experiment, split_flags);
  add_demo_flags(experiment, demo_flags);
  experiment->add_option("--epsilons", epsilons, "comma-separated noise rates")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_train_flags(experiment, train_flags);
  experiment->add_option("--out-dir", results_dir, "output root")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (prepare->parsed()) return cmd_prepare(data, split_flags, data_path);
    if (demos->parsed()) return cmd_demos(data_path, split_flags, demo_flags, demos_path, heldout_path);
    if (train_cmd->parsed()) {
      return cmd_train(data_path, demos_path, split_flags, train_flags, initial_model, model_path,
                       train_report_path);
    }
    if (eval->parsed()) {
      return cmd_eval(data_path, demos_path, heldout_path, model_path, train_report_path, split_flags,
                      train_flags.config.lambda, eval_dir);
    }
    if (experiment->parsed()) {
      return cmd_experiment(data, split_flags, demo_flags, train_flags, epsilons, results_dir);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
