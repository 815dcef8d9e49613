#include "superfair/evaluation.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace superfair {

namespace {

void check_same_metrics(const MetricProfile& a, const MetricProfile& b) {
  if (a.metric_ids != b.metric_ids) throw std::invalid_argument("profiles have different metric ids");
  if (a.values.size() != a.metric_ids.size() || b.values.size() != b.metric_ids.size()) {
    throw std::invalid_argument("profile values do not match its metric ids");
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string margin_text(double alpha) {
  if (alpha <= 0.0) return "inf";
  return format_number(1.0 / alpha);
}

}  // namespace

std::string format_number(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool pareto_dominates(const MetricProfile& a, const MetricProfile& b) {
  check_same_metrics(a, b);
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    if (a.values[k] > b.values[k]) return false;
  }
  return true;
}

double gamma_superhuman(const MetricProfile& model, std::span<const MetricProfile> demos) {
  if (demos.empty()) throw std::invalid_argument("gamma needs at least one demonstration");
  std::size_t count = 0;
  for (const auto& d : demos) count += pareto_dominates(model, d) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(demos.size());
}

std::vector<double> gamma_per_metric(const MetricProfile& model, std::span<const MetricProfile> demos) {
  if (demos.empty()) throw std::invalid_argument("gamma needs at least one demonstration");
  std::vector<double> out(model.values.size(), 0.0);
  for (const auto& d : demos) {
    check_same_metrics(model, d);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += model.values[k] <= d.values[k] ? 1.0 : 0.0;
  }
  for (auto& v : out) v /= static_cast<double>(demos.size());
  return out;
}

MethodEvaluation evaluate_on_test(const PolicyModel& model, const Dataset& test_sh,
                                  const DemonstrationSet& demos_for_eval,
                                  std::span<const Metric> metric_ids) {
  if (model.dim() != test_sh.dim()) {
    throw std::invalid_argument("model length " + std::to_string(model.dim()) +
                                " does not match dataset feature length " + std::to_string(test_sh.dim()));
  }
  MethodEvaluation e;
  const DecisionVector d{hard_decisions(model, test_sh.items()), test_sh.ids()};
  e.profile = profile(d, test_sh, metric_ids);
  e.gamma = gamma_superhuman(e.profile, demos_for_eval.profiles);
  return e;
}

void validate(const EvaluationReport& report) {
  if (report.demo_profiles.empty()) throw std::invalid_argument("evaluation report has no demo profiles");
  const auto check_profile = [&](const MetricProfile& p) {
    if (p.metric_ids != report.metric_ids || p.values.size() != report.metric_ids.size()) {
      throw std::invalid_argument("profile metric ids differ from the report's");
    }
  };
  for (const auto& p : report.demo_profiles) check_profile(p);
  for (const auto& id : report.method_ids) {
    const auto it = report.method_profiles.find(id);
    if (it == report.method_profiles.end()) throw std::invalid_argument("method '" + id + "' has no profile");
    check_profile(it->second);
    const auto g = report.gamma.find(id);
    if (g == report.gamma.end()) throw std::invalid_argument("method '" + id + "' has no gamma");
    if (!(g->second >= 0.0 && g->second <= 1.0)) throw std::invalid_argument("gamma outside [0, 1]");
  }
  if (!(report.bound_gamma >= 0.0 && report.bound_gamma <= 1.0)) {
    throw std::invalid_argument("bound_gamma outside [0, 1]");
  }
  if (!report.alpha.alphas.empty() && report.alpha.alphas.size() != report.metric_ids.size()) {
    throw std::invalid_argument("alpha vector length differs from metric count");
  }
}

void export_results(const EvaluationReport& report, const std::filesystem::path& out_dir) {
  validate(report);
  std::filesystem::create_directories(out_dir);
  const auto& metrics = report.metric_ids;
  const auto k_count = metrics.size();

  {
    const auto path = out_dir / "table_comparison.csv";
    auto out = open_output(path);
    out << "method";
    for (const auto m : metrics) out << ',' << metric_name(m);
    out << '\n';
    for (const auto& id : report.method_ids) {
      out << id;
      for (const auto v : report.method_profiles.at(id).values) out << ',' << format_number(v);
      out << '\n';
    }
    for (const auto& id : report.unavailable_methods) {
      out << id;
      for (std::size_t k = 0; k < k_count; ++k) out << ",NA";
      out << '\n';
    }
    out << "alpha";
    for (std::size_t k = 0; k < k_count; ++k) {
      out << ',' << (report.alpha.alphas.empty() ? std::string("NA") : format_number(report.alpha.alphas[k]));
    }
    out << '\n';
    out << "gamma";
    const auto sub = report.method_profiles.find(kSubdominanceMethod);
    if (sub == report.method_profiles.end()) {
      for (std::size_t k = 0; k < k_count; ++k) out << ",NA";
    } else {
      for (const auto v : gamma_per_metric(sub->second, report.demo_profiles)) out << ',' << format_number(v);
    }
    out << '\n';
    close_output(out, path);
  }

  {
    const auto path = out_dir / "gamma_by_method.csv";
    auto out = open_output(path);
    out << "method,gamma_test,gamma_train\n";
    for (const auto& id : report.method_ids) {
      out << id << ',' << format_number(report.gamma.at(id)) << ',';
      const auto it = report.gamma_train.find(id);
      out << (it == report.gamma_train.end() ? std::string("NA") : format_number(it->second)) << '\n';
    }
    out << "bound_gamma," << format_number(report.bound_gamma) << ",NA\n";
    close_output(out, path);
  }

  for (std::size_t a = 0; a < k_count; ++a) {
    for (std::size_t b = a + 1; b < k_count; ++b) {
      const auto name_a = std::string(metric_name(metrics[a]));
      const auto name_b = std::string(metric_name(metrics[b]));
      const auto path = out_dir / ("scatter_" + name_a + "_" + name_b + ".csv");
      auto out = open_output(path);
      out << "kind,label," << name_a << ',' << name_b << '\n';
      for (std::size_t j = 0; j < report.demo_profiles.size(); ++j) {
        const auto& p = report.demo_profiles[j];
        out << "demo," << j << ',' << format_number(p.values[a]) << ',' << format_number(p.values[b]) << '\n';
      }
      for (const auto& id : report.method_ids) {
        const auto& p = report.method_profiles.at(id);
        out << "method," << id << ',' << format_number(p.values[a]) << ',' << format_number(p.values[b]) << '\n';
      }
      if (!report.alpha.alphas.empty()) {
        out << "margin," << kSubdominanceMethod << ',' << margin_text(report.alpha.alphas[a]) << ','
            << margin_text(report.alpha.alphas[b]) << '\n';
      }
      close_output(out, path);
    }
  }
}

void export_gamma_curve(std::span<const EpsilonRun> runs, const std::filesystem::path& out_dir) {
  if (runs.empty()) throw std::invalid_argument("gamma curve needs at least one run");
  std::filesystem::create_directories(out_dir);
  const auto& methods = runs.front().report.method_ids;
  for (const auto& r : runs) {
    if (r.report.method_ids != methods) throw std::invalid_argument("runs report different methods");
  }
  const auto path = out_dir / "gamma_vs_epsilon.csv";
  auto out = open_output(path);
  out << "epsilon";
  for (const auto& id : methods) out << ',' << id;
  out << ",bound_gamma\n";
  for (const auto& r : runs) {
    out << format_number(r.epsilon);
    for (const auto& id : methods) out << ',' << format_number(r.report.gamma.at(id));
    out << ',' << format_number(r.report.bound_gamma) << '\n';
  }
  close_output(out, path);
}

}  // namespace superfair
