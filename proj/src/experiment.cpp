#include "superfair/experiment.hpp"

#include <stdexcept>

#include "superfair/evaluation.hpp"
#include "superfair/io.hpp"
#include "superfair/random.hpp"

namespace superfair {

namespace {

MetricProfile hard_profile(const PolicyModel& model, const Dataset& ds, std::span<const Metric> metrics) {
  return profile(DecisionVector{hard_decisions(model, ds.items()), ds.ids()}, ds, metrics);
}

struct Method {
  std::string id;
  MetricProfile test;
  MetricProfile train;
};

}  // namespace

RunSeeds derive_run_seeds(std::uint64_t root) {
  return RunSeeds{root, derive_seed(root, Stream::kSplit, 1), derive_seed(root, Stream::kNoise, 1),
                  derive_seed(root, Stream::kTrainSample, 1), derive_seed(root, Stream::kBaseline, 1)};
}

Dataset load_data(const DataConfig& config, std::uint64_t data_seed) {
  if (config.dataset == "synthetic") {
    const auto& s = config.synthetic;
    Dataset ds = generate_synthetic(data_seed, s.m, s.l, s.group_rate, s.flip_rate);
    return config.include_group_feature ? with_group_feature(ds) : ds;
  }
  if (config.input.empty()) throw std::invalid_argument("dataset '" + config.dataset + "' needs an input file");
  return load_tabular(config.input, parse_schema(config.dataset),
                      LoadOptions{config.include_group_feature});
}

SplitPair shared_split(const Dataset& ds, double fraction, std::uint64_t split_seed) {
  return split(ds, fraction, split_seed);
}

EvaluationReport evaluate_methods(const PolicyModel& model, const TrainReport& train_report,
                                  const Dataset& train_sh, const Dataset& test_sh,
                                  const DemonstrationSet& train_demos, const DemonstrationSet& test_demos,
                                  double lambda, std::uint64_t baseline_seed) {
  const auto& metrics = train_demos.provenance.metric_ids;
  if (test_demos.provenance.metric_ids != metrics) {
    throw std::invalid_argument("training and test demonstrations use different metric ids");
  }
  const double epsilon = train_demos.provenance.epsilon;

  std::vector<Method> methods;
  methods.push_back({kSubdominanceMethod, evaluate_on_test(model, test_sh, test_demos, metrics).profile,
                     hard_profile(model, train_sh, metrics)});

  // Comparison methods see the same corrupted labels and groups as the demonstrators.
  const Dataset noisy = flip_noise(train_sh, epsilon, derive_seed(baseline_seed, Stream::kNoise), true, true);
  std::uint64_t index = 0;
  for (const auto c : {Constraint::kDP, Constraint::kEqOdds}) {
    const FairBaseline b = fit_baseline(noisy, c);
    const DecisionVector test_d{b.decide(test_sh, derive_seed(baseline_seed, Stream::kApply, index++)),
                                test_sh.ids()};
    const DecisionVector train_d{b.decide(train_sh, derive_seed(baseline_seed, Stream::kApply, index++)),
                                 train_sh.ids()};
    methods.push_back({"post_proc_" + std::string(constraint_name(c)), profile(test_d, test_sh, metrics),
                       profile(train_d, train_sh, metrics)});
  }
  const PolicyModel logistic = fit_base_scorer(noisy);
  methods.push_back({"logistic", hard_profile(logistic, test_sh, metrics), hard_profile(logistic, train_sh, metrics)});

  EvaluationReport report;
  report.metric_ids = metrics;
  report.demo_profiles = test_demos.profiles;
  for (auto& m : methods) {
    report.method_ids.push_back(m.id);
    report.gamma[m.id] = gamma_superhuman(m.test, test_demos.profiles);
    report.gamma_train[m.id] = gamma_superhuman(m.train, train_demos.profiles);
    report.method_profiles[m.id] = std::move(m.test);
  }
  report.alpha = train_report.alpha_history.empty() ? AlphaVector{} : train_report.best_alpha();
  const auto support = support_vector_union(model, train_demos, train_sh, lambda, metrics);
  report.bound_gamma = generalization_gamma(support.size(), train_demos.size());
  report.unavailable_methods = kUnavailableMethods;
  return report;
}

EpsilonArtifacts run_epsilon(const ExperimentConfig& config, const Dataset& ds, double epsilon) {
  const RunSeeds seeds = derive_run_seeds(config.seed);
  const SplitPair sh = shared_split(ds, config.split_fraction, seeds.split);
  EpsilonArtifacts out;
  out.demos = synthesize_demos(sh.first, config.n_demos, epsilon, config.constraint, seeds.demos, config.metric_ids);
  out.heldout = synthesize_heldout_demos(sh.first, sh.second, config.n_demos, epsilon, config.constraint,
                                         seeds.demos, config.metric_ids);
  TrainConfig tc = config.train;
  tc.metric_ids = config.metric_ids;
  tc.seed = seeds.train;
  out.train = train(out.demos, sh.first, tc);
  out.report = evaluate_methods(out.train.final_theta, out.train, sh.first, sh.second, out.demos, out.heldout,
                                tc.lambda, seeds.baseline);
  return out;
}

std::string epsilon_dir(double epsilon) { return "eps_" + format_number(epsilon); }

std::vector<EpsilonRun> run_experiment(const ExperimentConfig& config) {
  if (config.epsilons.empty()) throw std::invalid_argument("experiment needs at least one epsilon");
  const RunSeeds seeds = derive_run_seeds(config.seed);
  const Dataset ds = load_data(config.data, seeds.data);
  std::vector<EpsilonRun> runs;
  for (const double eps : config.epsilons) {
    EpsilonArtifacts a = run_epsilon(config, ds, eps);
    const auto dir = config.out_dir / epsilon_dir(eps);
    std::filesystem::create_directories(dir);
    write_demos(a.demos, dir / "demos.jsonl");
    write_demos(a.heldout, dir / "heldout_demos.jsonl");
    TrainConfig tc = config.train;
    tc.metric_ids = config.metric_ids;
    tc.seed = seeds.train;
    write_policy(a.train.final_theta, dir / "model.json");
    write_train_report(a.train, tc, dir / "train_report.json");
    write_evaluation_report(a.report,
                            ReportContext{eps, config.data.include_group_feature, config.data.dataset,
                                          std::string(constraint_name(config.constraint))},
                            dir / "eval_report.json");
    export_results(a.report, dir);
    runs.push_back(EpsilonRun{eps, std::move(a.report)});
  }
  export_gamma_curve(runs, config.out_dir);
  return runs;
}

}  // namespace superfair
