// Acceptance suite: one PASS / FAIL / SKIP line per criterion. Exit status is
// nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "oracles.hpp"
#include "superfair/experiment.hpp"
#include "superfair/policy.hpp"
#include "superfair/subdominance.hpp"
#include "superfair/trainer.hpp"

using namespace superfair;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const std::string& id, bool pass, const std::string& detail) {
  fmt::print("[{}] {} {}\n", pass ? "PASS" : "FAIL", id, detail);
  std::fflush(stdout);
  if (!pass) ++failures;
}

void skip(const std::string& id, const std::string& detail) {
  fmt::print("[SKIP] {} {}\n", id, detail);
  std::fflush(stdout);
}

Matrix random_items(std::size_t m, std::size_t l, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = n(rng);
  }
  return x;
}

Vector random_theta(std::size_t l, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.7);
  Vector t(static_cast<Eigen::Index>(l));
  for (Eigen::Index j = 0; j < t.size(); ++j) t[j] = n(rng);
  return t;
}

void alpha_vs_grid() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> n_dist(1, 20);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lambdas[] = {0.0, 0.01, 0.1};
  double worst = 0.0;
  bool below_grid = true;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> demo(static_cast<std::size_t>(n_dist(rng)));
    // Rates on a coarse lattice part of the time, so ties and exact corners occur.
    for (auto& v : demo) v = trial % 4 == 0 ? std::round(u(rng) * 20) / 20 : u(rng);
    const double f_hat = trial % 4 == 0 ? std::round(u(rng) * 20) / 20 : u(rng);
    const double lambda = lambdas[trial % 3];
    const auto s = optimize_alpha(f_hat, demo, lambda);
    const auto g = oracle::dense_grid_minimize(f_hat, demo, lambda, 1e-4, 1000.0);
    worst = std::max(worst, std::abs(s.gamma - g.gamma));
    below_grid = below_grid && s.gamma <= g.gamma + 1e-12;
  }
  const double t = seconds_since(start);
  report("1 alpha-closed-form", worst <= 1e-3 && below_grid && t < 10.0,
         fmt::format("200 instances, max |Gamma - grid| = {:.3g}, closed form never above grid: {}, {:.2f} s", worst,
                     below_grid ? "yes" : "no", t));
}

void policy_gradient() {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<std::size_t> l_dist(1, 10);
  std::uniform_int_distribution<std::size_t> m_dist(1, 20);
  double worst_fd = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto l = l_dist(rng);
    const auto m = m_dist(rng);
    const Matrix x = random_items(m, l, rng);
    const PolicyModel model{random_theta(l, rng)};
    const Decisions d = sample_decisions(model, x, static_cast<std::uint64_t>(trial));
    const Vector g = log_prob_gradient(model, x, d);
    Vector fd(static_cast<Eigen::Index>(l));
    const double h = 1e-5;
    for (Eigen::Index j = 0; j < fd.size(); ++j) {
      PolicyModel up = model;
      PolicyModel down = model;
      up.theta[j] += h;
      down.theta[j] -= h;
      fd[j] = (log_prob(up, x, d) - log_prob(down, x, d)) / (2 * h);
    }
    worst_fd = std::max(worst_fd, (g - fd).norm() / std::max(1.0, g.norm()));
  }
  double worst_mean = 0.0;
  for (std::size_t m = 1; m <= 12; ++m) {
    const Matrix x = random_items(m, 4, rng);
    const PolicyModel model{random_theta(4, rng)};
    Vector total = Vector::Zero(4);
    for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
      Decisions d(m);
      for (std::size_t i = 0; i < m; ++i) d[i] = (mask >> i) & 1U;
      total += std::exp(log_prob(model, x, d)) * log_prob_gradient(model, x, d);
    }
    worst_mean = std::max(worst_mean, total.cwiseAbs().maxCoeff());
  }
  report("2 policy-gradient", worst_fd < 1e-4 && worst_mean <= 1e-10,
         fmt::format("max relative FD error {:.3g} over 100 instances, max |E[score]| {:.3g} for m = 1..12", worst_fd,
                     worst_mean));
}

void metric_oracle() {
  const std::vector<Metric> all{Metric::kError, Metric::kDP,  Metric::kEqOdds,
                                Metric::kPRP,   Metric::kFNR, Metric::kFPR};
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<std::size_t> size(1, 50);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto m = size(rng);
    const auto d = oracle::random_bits(m, rng);
    const auto y = oracle::random_bits(m, rng);
    const auto a = oracle::random_bits(m, rng, trial % 7 == 0 ? 0.97 : 0.5);
    const auto c = confusion_counts(oracle::decisions(d), oracle::make_dataset(y, a));
    for (const auto metric : all) mismatches += metric_value(metric, c) != oracle::metric(metric, d, y, a);
  }
  report("3 metric-oracle", mismatches == 0, fmt::format("500 instances x 6 metrics, {} mismatches", mismatches));
}

void subdominance_properties() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> a_dist(0.0, 100.0);
  std::uniform_int_distribution<int> n_dist(1, 20);
  const std::vector<Metric> ids = default_metrics();
  std::size_t bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    MetricProfile hat{ids, {}};
    for (std::size_t k = 0; k < ids.size(); ++k) hat.values.push_back(u(rng));
    std::vector<MetricProfile> demos(static_cast<std::size_t>(n_dist(rng)), MetricProfile{ids, {}});
    for (auto& d : demos) {
      for (std::size_t k = 0; k < ids.size(); ++k) d.values.push_back(u(rng));
    }
    AlphaVector a1;
    AlphaVector a2;
    AlphaVector mid;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      a1.alphas.push_back(a_dist(rng));
      a2.alphas.push_back(a_dist(rng));
      mid.alphas.push_back(0.5 * (a1.alphas[k] + a2.alphas[k]));
    }
    const double lhs = subdom_total(hat, demos, mid);
    const double rhs = 0.5 * (subdom_total(hat, demos, a1) + subdom_total(hat, demos, a2));
    bad += lhs > rhs + 1e-12;
    const double at_zero = subdom_total(hat, demos, AlphaVector{std::vector<double>(ids.size(), 0.0)});
    bad += std::abs(at_zero - static_cast<double>(ids.size())) > 1e-12;
  }
  report("4 subdominance-properties", bad == 0, fmt::format("500 instances, {} violations", bad));
}

ExperimentConfig synthetic_config() {
  ExperimentConfig c;
  c.data.dataset = "synthetic";
  c.data.synthetic.m = 4000;
  c.data.synthetic.l = 8;
  c.data.include_group_feature = true;
  c.n_demos = 20;
  c.constraint = Constraint::kDP;
  c.train.max_iters = 300;
  c.train.patience = 0;  // run every iteration
  c.seed = 0;
  return c;
}

// Independent recount: hard decisions by sign, profiles by brute force, alpha
// by breakpoint search, hinges counted directly.
std::size_t recount_support(const PolicyModel& model, const DemonstrationSet& demos, const Dataset& train_sh,
                            double lambda) {
  const auto& metrics = demos.provenance.metric_ids;
  std::set<std::size_t> members;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    std::vector<int> d;
    std::vector<int> y;
    std::vector<int> a;
    for (const auto id : demos.demos[i].item_ids) {
      const auto row = train_sh.row_of(id);
      const double z = train_sh.items().row(static_cast<Eigen::Index>(row)).dot(model.theta);
      d.push_back(z >= 0.0 ? 1 : 0);
      y.push_back(train_sh.labels()[row]);
      a.push_back(train_sh.groups()[row]);
    }
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      const double f_hat = oracle::metric(metrics[k], d, y, a);
      std::vector<double> values;
      for (const auto& p : demos.profiles) values.push_back(p.values[k]);
      const double alpha = oracle::breakpoint_minimize(f_hat, values, lambda).alpha;
      for (std::size_t j = 0; j < values.size(); ++j) {
        if (alpha * (f_hat - values[j]) + 1.0 >= 0.0) members.insert(j);
      }
    }
  }
  return members.size();
}

struct SyntheticRun {
  ExperimentConfig config;
  EpsilonArtifacts artifacts;
};

SyntheticRun end_to_end() {
  const ExperimentConfig config = synthetic_config();
  const RunSeeds seeds = derive_run_seeds(config.seed);
  const Dataset ds = load_data(config.data, seeds.data);

  const auto start = Clock::now();
  const EpsilonArtifacts run = run_epsilon(config, ds, 0.2);
  const double t = seconds_since(start);
  const double gamma = run.report.gamma.at(kSubdominanceMethod);
  report("5 synthetic-gamma", gamma >= 0.8 && t < 300.0,
         fmt::format("gamma vs held-out demos = {:.3g} (need >= 0.8), train gamma = {:.3g}, {} iterations, {:.1f} s",
                     gamma, run.report.gamma_train.at(kSubdominanceMethod), run.train.iterations_run, t));

  // Trainer example: 200 iterations, dominance over training demos.
  {
    ExperimentConfig c200 = config;
    c200.train.max_iters = 200;
    const EpsilonArtifacts r = run_epsilon(c200, ds, 0.2);
    const double g = r.report.gamma_train.at(kSubdominanceMethod);
    report("5b trainer-200-iterations", g >= 0.8,
           fmt::format("final profile dominates {:.3g} of training demos (need >= 0.8)", g));
  }

  // Noise trend over three full runs; the 0.2 run above is reused.
  {
    const auto start6 = Clock::now();
    const EpsilonArtifacts r0 = run_epsilon(config, ds, 0.0);
    const EpsilonArtifacts r1 = run_epsilon(config, ds, 0.1);
    const double t6 = seconds_since(start6) + t;
    const double g0 = r0.report.gamma.at(kSubdominanceMethod);
    const double g1 = r1.report.gamma.at(kSubdominanceMethod);
    report("6 noise-trend", gamma >= g0 - 0.05 && gamma >= 0.8 && t6 < 900.0,
           fmt::format("gamma(0) = {:.3g}, gamma(0.1) = {:.3g}, gamma(0.2) = {:.3g}, {:.1f} s", g0, g1, gamma, t6));
  }

  return {config, run};
}

// Bound diagnostic on the criterion 5 model.
void bound_gamma(const SyntheticRun& r) {
  const auto& config = r.config;
  const auto& run = r.artifacts;
  const RunSeeds seeds = derive_run_seeds(config.seed);
  const Dataset ds = load_data(config.data, seeds.data);
  const SplitPair sh = shared_split(ds, config.split_fraction, seeds.split);
  const double n = static_cast<double>(run.demos.size());
  const double lambda = config.train.lambda;

  const std::size_t union_size = recount_support(run.train.final_theta, run.demos, sh.first, lambda);
  const double recount = 1.0 - static_cast<double>(union_size) / n;
  const double reported = run.report.bound_gamma;

  // Random small instances, where unions are often partial.
  std::mt19937_64 rng(108);
  std::size_t mismatches = 0;
  std::size_t partial = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t items = 40;
    const Matrix x = random_items(items, 3, rng);
    std::vector<int> y(items);
    for (std::size_t i = 0; i < items; ++i) y[i] = x(static_cast<Eigen::Index>(i), 0) > 0.0 ? 1 : 0;
    std::vector<int> a = oracle::random_bits(items, rng);
    a[0] = 0;
    a[1] = 1;
    Dataset small(x, std::vector<std::uint8_t>(y.begin(), y.end()), std::vector<std::uint8_t>(a.begin(), a.end()),
                  oracle::make_dataset(y, a).ids());
    DemonstrationSet demos;
    demos.provenance.metric_ids = trial % 2 == 0 ? std::vector<Metric>{Metric::kError} : default_metrics();
    const std::size_t n_demos = 2 + rng() % 10;
    for (std::size_t i = 0; i < n_demos; ++i) {
      std::vector<ItemId> ids(small.ids().begin(), small.ids().end());
      std::shuffle(ids.begin(), ids.end(), rng);
      ids.resize(20);
      DecisionVector v;
      v.item_ids = ids;
      for (const auto id : ids) v.values.push_back(rng() % 3 == 0 ? 1 - small.labels()[id] : small.labels()[id]);
      demos.profiles.push_back(profile(v, small, demos.provenance.metric_ids));
      demos.demos.push_back(std::move(v));
    }
    demos.provenance.n = n_demos;
    Vector theta = random_theta(3, rng) * 0.3;
    theta[0] += 3.0;
    const PolicyModel model{theta};
    const std::size_t lib = support_vector_union(model, demos, small, lambda, demos.provenance.metric_ids).size();
    const std::size_t own = recount_support(model, demos, small, lambda);
    mismatches += lib != own;
    partial += own < n_demos;
  }

  report("8 bound-gamma", reported == recount && reported >= 0.0 && reported <= 1.0 && mismatches == 0,
         fmt::format("reported {} vs recount {} (union {} of {}); 200 random instances, {} mismatches, {} with a "
                     "partial union",
                     format_number(reported), format_number(recount), union_size, run.demos.size(), mismatches,
                     partial));
}

void compas() {
  const char* path = std::getenv("SUPERFAIR_COMPAS_CSV");
  if (path == nullptr || !fs::exists(path)) {
    skip("7 compas", "set SUPERFAIR_COMPAS_CSV to the ProPublica compas-scores-two-years.csv file");
    return;
  }
  ExperimentConfig c;
  c.data.dataset = "compas";
  c.data.input = path;
  c.n_demos = 20;
  c.constraint = Constraint::kEqOdds;
  c.train.patience = 0;
  const auto start = Clock::now();
  const Dataset ds = load_data(c.data, derive_run_seeds(c.seed).data);
  const EpsilonArtifacts run = run_epsilon(c, ds, 0.2);
  const double t = seconds_since(start);
  const double gamma = run.report.gamma.at(kSubdominanceMethod);
  const double err = run.report.method_profiles.at(kSubdominanceMethod).values[0];
  report("7 compas", gamma >= 0.7 && err <= 0.45 && t < 600.0,
         fmt::format("M = {}, gamma = {:.3g} (need >= 0.7), test err = {:.4f} (need <= 0.45), {:.1f} s", ds.size(),
                     gamma, err, t));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  const auto root = fs::temp_directory_path() / "superfair_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string args =
      " experiment --dataset synthetic --m 1000 --l 6 --n 10 --epsilons 0,0.2 --max-iters 40 --seed 5 --out-dir ";
  for (const char* run : {"a", "b"}) {
    const std::string cmd = "'" + std::string(SUPERFAIR_CLI) + "'" + args + "'" + (root / run).string() + "' > /dev/null";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      report("9 determinism", false, "experiment command failed");
      return;
    }
  }
  std::size_t files = 0;
  std::size_t differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto other = root / "b" / fs::relative(entry.path(), root / "a");
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differing;
  }
  std::size_t files_b = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "b")) files_b += entry.is_regular_file();
  report("9 determinism", files > 0 && differing == 0 && files == files_b,
         fmt::format("{} files compared, {} differ", files, differing));
  fs::remove_all(root);
}

}  // namespace

int main() {
  alpha_vs_grid();
  policy_gradient();
  metric_oracle();
  subdominance_properties();
  const SyntheticRun run = end_to_end();
  compas();
  bound_gamma(run);
  determinism();
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
