#include "experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <locale>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace gradharm {

namespace {

using nlohmann::ordered_json;

// null-safe number: nlohmann serializes NaN as null already, this keeps the
// intent explicit at the call sites.
ordered_json num_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

ordered_json vec_json(const ParamVector& v) {
  return ordered_json(v.values());
}

HarmonizeMethod method_from_config(const std::string& name, double lambda,
                                   const char* field) {
  const auto kind = method_from_name(name);
  if (!kind) {
    throw ParseError("unknown method '" + name + "' in field '" + field + "'");
  }
  return HarmonizeMethod{*kind, lambda};
}

ordered_json step_record_json(const StepRecord& r) {
  ordered_json j;
  j["iter"] = r.iter;
  j["loss_dom"] = r.loss_dom;
  j["loss_cls"] = r.loss_cls;
  j["inner_product"] = r.inner_product;
  j["tau1"] = num_or_null(r.tau1);
  j["tau2"] = num_or_null(r.tau2);
  j["conflict"] = r.conflict;
  j["angle_before"] = num_or_null(r.angle_before);
  if (r.target_accuracy) j["target_accuracy"] = *r.target_accuracy;
  if (r.mmd) j["mmd"] = *r.mmd;
  if (r.jw) j["jw"] = *r.jw;
  return j;
}

void write_report_jsonl(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (const StepRecord& r : report.records) {
    out << step_record_json(r).dump() << "\n";
  }
}

void write_trace_jsonl(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (const StepRecord& r : report.records) {
    ordered_json j;
    j["iter"] = r.iter;
    if (r.g1 && r.g2) {
      j["g1"] = vec_json(*r.g1);
      j["g2"] = vec_json(*r.g2);
    } else {
      j["ip"] = r.inner_product;
    }
    out << j.dump() << "\n";
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

// Counted fields: nlohmann would wrap a negative integer around when read
// as an unsigned type, so range-check through a signed value first.
std::size_t get_count(const nlohmann::json& j, const char* key, std::size_t fallback,
                      long long min_value) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) {
    throw ParseError(std::string("field '") + key + "' must be an integer");
  }
  const long long v = j.at(key).get<long long>();
  if (v < min_value) {
    throw ParseError(std::string("field '") + key + "' must be >= " + std::to_string(min_value));
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config root must be an object");

  RunConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(get_count(j, "seed", 1, 0));
  cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
  cfg.eta = get_or<double>(j, "eta", 0.05);
  if (!(cfg.eta > 0.0)) throw ParseError("field 'eta' must be > 0");
  cfg.iterations = get_count(j, "iterations", 500, 1);
  cfg.batch_size = get_count(j, "batch_size", 32, 1);
  cfg.eval_every = get_count(j, "eval_every", 50, 1);
  cfg.discriminator_weighted = get_or<bool>(j, "discriminator_weighted", true);
  cfg.hidden_dim = get_count(j, "hidden_dim", 6, 1);
  cfg.feature_dim = get_count(j, "feature_dim", 2, 1);
  cfg.trace_gradients = get_or<bool>(j, "trace_gradients", true);

  const std::string scope = get_or<std::string>(j, "scope", "full");
  if (scope == "full") {
    cfg.scope = GradScope::FullTheta;
  } else if (scope == "shared") {
    cfg.scope = GradScope::SharedOnly;
  } else {
    throw ParseError("field 'scope' must be 'full' or 'shared'");
  }

  const double lambda = get_or<double>(j, "lambda", 0.5);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParseError("field 'lambda' must lie in [0, 1]");

  if (!j.contains("methods") || !j["methods"].is_array() || j["methods"].empty()) {
    throw ParseError("field 'methods' must be a nonempty array of method names");
  }
  for (const auto& m : j["methods"]) {
    if (!m.is_string()) throw ParseError("field 'methods' must contain strings");
    cfg.methods.push_back(method_from_config(m.get<std::string>(), lambda, "methods"));
  }

  // The default experiment scenario is the shifted-blobs benchmark: class
  // blobs rotated a quarter turn and translated by (1, 1).
  cfg.blobs.rotation = 0.7853981633974483;
  cfg.blobs.translation = {1.0, 1.0};
  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    if (!s.is_object()) throw ParseError("field 'scenario' must be an object");
    const std::string kind = get_or<std::string>(s, "kind", "blobs");
    if (kind == "csv") {
      if (!s.contains("path") || !s["path"].is_string()) {
        throw ParseError("csv scenario needs a string field 'path'");
      }
      cfg.csv_path = s["path"].get<std::string>();
    } else if (kind == "blobs") {
      cfg.blobs.num_classes = get_count(s, "num_classes", cfg.blobs.num_classes, 1);
      cfg.blobs.per_class = get_count(s, "per_class", cfg.blobs.per_class, 1);
      cfg.blobs.input_dim = get_count(s, "input_dim", cfg.blobs.input_dim, 2);
      cfg.blobs.rotation = get_or<double>(s, "rotation", cfg.blobs.rotation);
      cfg.blobs.noise_sigma = get_or<double>(s, "noise_sigma", cfg.blobs.noise_sigma);
      cfg.blobs.phase = get_or<double>(s, "phase", cfg.blobs.phase);
      if (s.contains("translation")) {
        if (!s["translation"].is_array()) throw ParseError("field 'translation' must be an array");
        cfg.blobs.translation = s["translation"].get<std::vector<double>>();
      }
    } else {
      throw ParseError("field 'scenario.kind' must be 'blobs' or 'csv'");
    }
  }
  cfg.blobs.seed = substream_seed(cfg.seed, "data");
  return cfg;
}

nlohmann::ordered_json run_experiment(const RunConfig& cfg, bool parallel) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.output_dir + "'");

  const Dataset data = cfg.csv_path ? load_csv(*cfg.csv_path) : make_blobs(cfg.blobs);
  save_csv(data, cfg.output_dir + "/dataset.csv");

  auto run_method = [&](const HarmonizeMethod& method) {
    TrainConfig tc;
    tc.method = method;
    tc.eta = cfg.eta;
    tc.iterations = cfg.iterations;
    tc.batch_size = cfg.batch_size;
    tc.seed = cfg.seed;
    tc.scope = cfg.scope;
    tc.eval_every = cfg.eval_every;
    tc.discriminator_weighted = cfg.discriminator_weighted;
    tc.hidden_dim = cfg.hidden_dim;
    tc.feature_dim = cfg.feature_dim;
    tc.record_gradients = cfg.trace_gradients;

    TrainReport report = train(tc, data);
    const std::string name(method_name(method.kind));
    write_report_jsonl(report, cfg.output_dir + "/report_" + name + ".jsonl");
    if (cfg.trace_gradients) {
      write_trace_jsonl(report, cfg.output_dir + "/trace_" + name + ".jsonl");
    }
    ordered_json summary;
    summary["method"] = name;
    if (method.kind == MethodKind::GHppWeighted || method.kind == MethodKind::GHppRotate) {
      summary["lambda"] = method.lambda;
    }
    summary["final_accuracy"] = report.final_accuracy;
    summary["obtuse_fraction"] = report.obtuse_fraction;
    summary["iterations"] = report.records.size();
    return summary;
  };

  std::vector<ordered_json> method_summaries(cfg.methods.size());
  if (parallel && cfg.methods.size() > 1) {
    std::vector<std::future<ordered_json>> futures;
    futures.reserve(cfg.methods.size());
    for (const auto& m : cfg.methods) {
      futures.push_back(std::async(std::launch::async, run_method, m));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) method_summaries[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
      method_summaries[i] = run_method(cfg.methods[i]);
    }
  }

  ordered_json summary;
  summary["seed"] = cfg.seed;
  summary["dataset"] = {
      {"shift_kind", data.meta.shift_kind},
      {"num_classes", data.meta.num_classes},
      {"input_dim", data.meta.input_dim},
      {"source_samples", data.source_x.rows},
      {"target_samples", data.target_x.rows},
  };
  summary["runs"] = method_summaries;

  std::ofstream out(cfg.output_dir + "/summary.json");
  if (!out) throw IoError("cannot write summary.json");
  out << summary.dump(2) << "\n";
  return summary;
}

nlohmann::ordered_json harmonize_result_json(const HarmonizeResult& r) {
  ordered_json j;
  j["tilde_g1"] = vec_json(r.tilde_g1);
  j["tilde_g2"] = vec_json(r.tilde_g2);
  j["aggregate"] = vec_json(r.aggregate);
  j["tau1"] = num_or_null(r.tau1);
  j["tau2"] = num_or_null(r.tau2);
  j["conflict"] = r.conflict;
  j["angle_before"] = num_or_null(r.angle_before);
  j["angle_after"] = num_or_null(r.angle_after);
  j["angle_after_defined"] = r.angle_after_defined;
  j["deviation_sum"] = num_or_null(r.deviation_sum);
  j["degenerate"] = r.degenerate;
  return j;
}

nlohmann::ordered_json harmonize_pair_file(const std::string& path,
                                           const HarmonizeMethod& method) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid pair JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("g1") || !j.contains("g2")) {
    throw ParseError("pair file must contain arrays 'g1' and 'g2'");
  }
  std::vector<double> g1, g2;
  try {
    g1 = j["g1"].get<std::vector<double>>();
    g2 = j["g2"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError("'g1' and 'g2' must be numeric arrays");
  }
  const GradientPair pair{ParamVector(std::move(g1)), ParamVector(std::move(g2))};
  return harmonize_result_json(harmonize(method, pair));
}

nlohmann::ordered_json histogram_json(const Histogram& h) {
  ordered_json j;
  j["bin_edges"] = h.bin_edges;
  j["counts"] = h.counts;
  j["total"] = h.total;
  j["obtuse_fraction"] = h.obtuse_fraction;
  return j;
}

nlohmann::ordered_json analyze_trace_file(const std::string& path, std::size_t bins,
                                          const std::optional<HarmonizeMethod>& method) {
  const GradientTrace trace = load_trace(path);
  if (trace.entries.empty()) throw ParseError("trace '" + path + "' is empty");

  ordered_json j;
  j["histogram"] = histogram_json(histogram(trace, bins));
  if (method) {
    const GradientTrace replayed = post_harmonization_trace(trace, *method);
    ordered_json post = histogram_json(histogram(replayed, bins));
    post["method"] = method_name(method->kind);
    j["post_harmonization"] = std::move(post);
  }
  return j;
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << h.bin_edges[i] << ',' << h.bin_edges[i + 1] << ',' << h.counts[i] << "\n";
  }
  return out.str();
}

}  // namespace gradharm
