#include "superfair/io.hpp"

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace superfair {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kDatasetFormat = "superfair.dataset";
constexpr const char* kDemosFormat = "superfair.demos";
constexpr const char* kPolicyFormat = "superfair.policy";
constexpr const char* kTrainFormat = "superfair.train_report";
constexpr const char* kEvalFormat = "superfair.evaluation";

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

Json parse_line(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
  try {
    return Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

Json parse_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void check_header(const Json& header, const char* format, const std::filesystem::path& path) {
  if (!header.is_object() || header.value("format", "") != format) {
    throw FormatError(path.string() + ": not a " + std::string(format) + " file");
  }
  if (header.value("schema_version", -1) != kSchemaVersion) {
    throw FormatError(path.string() + ": unsupported schema_version");
  }
}

Json metric_names(std::span<const Metric> metrics) {
  Json out = Json::array();
  for (const auto m : metrics) out.push_back(std::string(metric_name(m)));
  return out;
}

std::vector<Metric> parse_metric_names(const Json& j) {
  std::vector<Metric> out;
  for (const auto& name : j) out.push_back(parse_metric(name.get<std::string>()));
  return out;
}

Json profile_json(const MetricProfile& p) {
  return Json{{"metric_ids", metric_names(p.metric_ids)}, {"values", p.values}};
}

MetricProfile parse_profile(const Json& j) {
  MetricProfile p{parse_metric_names(j.at("metric_ids")), j.at("values").get<std::vector<double>>()};
  if (p.values.size() != p.metric_ids.size()) throw FormatError("profile values do not match metric ids");
  return p;
}

Json vector_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector parse_vector(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

// Rethrows JSON type and key errors as FormatError.
template <typename F>
auto guarded(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_dataset(const Dataset& ds, const std::filesystem::path& path, const DatasetSource& source) {
  auto out = open_out(path);
  Json header{{"format", kDatasetFormat},
              {"schema_version", kSchemaVersion},
              {"source", source.name},
              {"include_group_feature", source.include_group_feature},
              {"m", ds.size()},
              {"l", ds.dim()},
              {"feature_names", ds.feature_names()}};
  out << header.dump() << '\n';
  std::vector<double> row(ds.dim());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      row[j] = ds.items()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    Json rec{{"id", ds.ids()[i]}, {"x", row}, {"y", ds.labels()[i]}, {"a", ds.groups()[i]}};
    out << rec.dump() << '\n';
  }
  finish(out, path);
}

Dataset read_dataset(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  const Json header = parse_line(line, path, 1);
  check_header(header, kDatasetFormat, path);
  return guarded(path, [&] {
    const auto m = header.at("m").get<std::size_t>();
    const auto l = header.at("l").get<std::size_t>();
    auto names = header.at("feature_names").get<std::vector<std::string>>();
    Matrix items(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l));
    std::vector<std::uint8_t> labels;
    std::vector<std::uint8_t> groups;
    std::vector<ItemId> ids;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      if (ids.size() == m) throw FormatError(path.string() + ": more records than the header's m");
      const Json rec = parse_line(line, path, lineno);
      const auto x = rec.at("x").get<std::vector<double>>();
      if (x.size() != l) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": wrong feature count");
      for (std::size_t j = 0; j < l; ++j) {
        items(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(j)) = x[j];
      }
      ids.push_back(rec.at("id").get<ItemId>());
      labels.push_back(rec.at("y").get<std::uint8_t>());
      groups.push_back(rec.at("a").get<std::uint8_t>());
    }
    if (ids.size() != m) throw FormatError(path.string() + ": fewer records than the header's m");
    return Dataset(std::move(items), std::move(labels), std::move(groups), std::move(ids), std::move(names));
  });
}

DatasetSource read_dataset_source(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  const Json header = parse_line(line, path, 1);
  check_header(header, kDatasetFormat, path);
  return guarded(path, [&] {
    return DatasetSource{header.at("source").get<std::string>(), header.at("include_group_feature").get<bool>()};
  });
}

void write_demos(const DemonstrationSet& demos, const std::filesystem::path& path) {
  if (demos.profiles.size() != demos.demos.size()) {
    throw std::invalid_argument("demonstration set has mismatched profiles");
  }
  auto out = open_out(path);
  const auto& p = demos.provenance;
  Json header{{"format", kDemosFormat},
              {"schema_version", kSchemaVersion},
              {"n", demos.size()},
              {"epsilon", p.epsilon},
              {"constraint", std::string(constraint_name(p.constraint))},
              {"baseline", "post_processing"},
              {"base_seed", p.base_seed},
              {"metric_ids", metric_names(p.metric_ids)}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < demos.size(); ++i) {
    Json rec{{"item_ids", demos.demos[i].item_ids},
             {"values", demos.demos[i].values},
             {"profile", profile_json(demos.profiles[i])}};
    out << rec.dump() << '\n';
  }
  finish(out, path);
}

DemonstrationSet read_demos(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  const Json header = parse_line(line, path, 1);
  check_header(header, kDemosFormat, path);
  return guarded(path, [&] {
    DemonstrationSet set;
    set.provenance.n = header.at("n").get<std::size_t>();
    set.provenance.epsilon = header.at("epsilon").get<double>();
    set.provenance.constraint = parse_constraint(header.at("constraint").get<std::string>());
    set.provenance.base_seed = header.at("base_seed").get<std::uint64_t>();
    set.provenance.metric_ids = parse_metric_names(header.at("metric_ids"));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const Json rec = parse_line(line, path, lineno);
      DecisionVector d{rec.at("values").get<Decisions>(), rec.at("item_ids").get<std::vector<ItemId>>()};
      if (d.values.size() != d.item_ids.size()) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": values and item_ids differ in length");
      }
      for (const auto v : d.values) {
        if (v > 1) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": decision not in {0,1}");
      }
      MetricProfile prof = parse_profile(rec.at("profile"));
      if (prof.metric_ids != set.provenance.metric_ids) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": profile metric ids differ from header");
      }
      set.demos.push_back(std::move(d));
      set.profiles.push_back(std::move(prof));
    }
    if (set.demos.size() != set.provenance.n || set.demos.empty()) {
      throw FormatError(path.string() + ": demo count does not match header n");
    }
    return set;
  });
}

void write_policy(const PolicyModel& model, const std::filesystem::path& path) {
  auto out = open_out(path);
  Json j{{"format", kPolicyFormat}, {"schema_version", kSchemaVersion}, {"theta", vector_json(model.theta)}};
  out << j.dump(2) << '\n';
  finish(out, path);
}

PolicyModel read_policy(const std::filesystem::path& path, std::size_t expected_dim) {
  const Json j = parse_file(path);
  check_header(j, kPolicyFormat, path);
  PolicyModel model = guarded(path, [&] { return PolicyModel{parse_vector(j.at("theta"))}; });
  if (model.dim() == 0) throw FormatError(path.string() + ": empty theta");
  if (expected_dim != 0 && model.dim() != expected_dim) {
    throw FormatError(path.string() + ": theta has length " + std::to_string(model.dim()) +
                      " but the dataset has " + std::to_string(expected_dim) + " features");
  }
  return model;
}

void write_train_report(const TrainReport& report, const TrainConfig& config,
                        const std::filesystem::path& path) {
  Json alphas = Json::array();
  for (const auto& a : report.alpha_history) alphas.push_back(a.alphas);
  Json cfg{{"eta", config.eta},
           {"lambda", config.lambda},
           {"max_iters", config.max_iters},
           {"patience", config.patience},
           {"samples_per_demo", config.samples_per_demo},
           {"seed", config.seed},
           {"metric_ids", metric_names(config.metric_ids)},
           {"init", std::string(init_mode_name(config.init))},
           {"baseline", config.baseline}};
  Json j{{"format", kTrainFormat},
         {"schema_version", kSchemaVersion},
         {"config", cfg},
         {"theta", vector_json(report.final_theta.theta)},
         {"iterations_run", report.iterations_run},
         {"best_iteration", report.best_iteration},
         {"subdom_history", report.subdom_history},
         {"alpha_history", alphas}};
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

TrainReport read_train_report(const std::filesystem::path& path) {
  const Json j = parse_file(path);
  check_header(j, kTrainFormat, path);
  return guarded(path, [&] {
    TrainReport r;
    r.final_theta = PolicyModel{parse_vector(j.at("theta"))};
    r.iterations_run = j.at("iterations_run").get<std::size_t>();
    r.best_iteration = j.at("best_iteration").get<std::size_t>();
    r.subdom_history = j.at("subdom_history").get<std::vector<double>>();
    for (const auto& a : j.at("alpha_history")) r.alpha_history.push_back(AlphaVector{a.get<std::vector<double>>()});
    if (r.subdom_history.size() != r.iterations_run || r.alpha_history.size() != r.iterations_run ||
        r.best_iteration >= r.iterations_run) {
      throw FormatError(path.string() + ": history lengths do not match iterations_run");
    }
    return r;
  });
}

void write_evaluation_report(const EvaluationReport& report, const ReportContext& context,
                             const std::filesystem::path& path) {
  validate(report);
  Json methods = Json::array();
  for (const auto& id : report.method_ids) {
    const auto g = report.gamma_train.find(id);
    methods.push_back(Json{{"id", id},
                           {"profile", report.method_profiles.at(id).values},
                           {"gamma_test", report.gamma.at(id)},
                           {"gamma_train", g == report.gamma_train.end() ? Json(nullptr) : Json(g->second)}});
  }
  Json demos = Json::array();
  for (const auto& p : report.demo_profiles) demos.push_back(p.values);
  Json j{{"format", kEvalFormat},
         {"schema_version", kSchemaVersion},
         {"dataset", context.dataset},
         {"constraint", context.constraint},
         {"epsilon", context.epsilon},
         {"include_group_feature", context.include_group_feature},
         {"metric_ids", metric_names(report.metric_ids)},
         {"methods", methods},
         {"unavailable_methods", report.unavailable_methods},
         {"alpha", report.alpha.alphas},
         {"bound_gamma", report.bound_gamma},
         {"demo_profiles", demos}};
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

EvaluationReport read_evaluation_report(const std::filesystem::path& path) {
  const Json j = parse_file(path);
  check_header(j, kEvalFormat, path);
  return guarded(path, [&] {
    EvaluationReport r;
    r.metric_ids = parse_metric_names(j.at("metric_ids"));
    for (const auto& m : j.at("methods")) {
      const auto id = m.at("id").get<std::string>();
      r.method_ids.push_back(id);
      r.method_profiles[id] = MetricProfile{r.metric_ids, m.at("profile").get<std::vector<double>>()};
      r.gamma[id] = m.at("gamma_test").get<double>();
      if (!m.at("gamma_train").is_null()) r.gamma_train[id] = m.at("gamma_train").get<double>();
    }
    r.unavailable_methods = j.at("unavailable_methods").get<std::vector<std::string>>();
    r.alpha = AlphaVector{j.at("alpha").get<std::vector<double>>()};
    r.bound_gamma = j.at("bound_gamma").get<double>();
    for (const auto& p : j.at("demo_profiles")) {
      r.demo_profiles.push_back(MetricProfile{r.metric_ids, p.get<std::vector<double>>()});
    }
    validate(r);
    return r;
  });
}

}  // namespace superfair
