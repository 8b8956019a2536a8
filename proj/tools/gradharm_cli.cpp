// Command-line front end for the gradharm shared library. Drives everything
// through the C API in gradharm.h.
//
// Exit codes: 0 success, 2 usage/config error, 3 numerical abort.

#include <cstdio>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "gradharm.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

const std::map<std::string, gh_method_kind>& method_table() {
  static const std::map<std::string, gh_method_kind> table = {
      {"none", GH_METHOD_NONE},
      {"gh", GH_METHOD_GH},
      {"ghpp-weighted", GH_METHOD_GHPP_WEIGHTED},
      {"ghpp-rotate", GH_METHOD_GHPP_ROTATE},
      {"flip-g1", GH_METHOD_FLIP_G1},
      {"flip-g2", GH_METHOD_FLIP_G2},
  };
  return table;
}

int exit_code_for(gh_status status) {
  switch (status) {
    case GH_OK:
      return kExitOk;
    case GH_ERR_NUMERICAL:
      return kExitNumerical;
    default:
      return kExitUsage;
  }
}

int report_failure(gh_status status) {
  std::fprintf(stderr, "error (%s): %s\n", gh_status_name(status), gh_last_error());
  return exit_code_for(status);
}

int run_train(const std::string& config_path, bool parallel) {
  char* summary = nullptr;
  const gh_status s = gh_train_run_file(config_path.c_str(), parallel ? 1 : 0, &summary);
  if (s != GH_OK) return report_failure(s);
  std::printf("%s\n", summary);
  gh_string_free(summary);
  return kExitOk;
}

int run_harmonize(const std::string& pair_path, gh_method_kind kind, double lambda) {
  char* json = nullptr;
  const gh_status s = gh_harmonize_pair_file(pair_path.c_str(), kind, lambda, &json);
  if (s != GH_OK) return report_failure(s);
  std::printf("%s\n", json);
  gh_string_free(json);
  return kExitOk;
}

int run_analyze(const std::string& trace_path, std::size_t bins, bool with_method,
                gh_method_kind kind, double lambda, const std::string& csv_path) {
  char* json = nullptr;
  const gh_status s = gh_analyze_trace_file(trace_path.c_str(), bins,
                                            with_method ? static_cast<int>(kind) : -1,
                                            lambda, &json);
  if (s != GH_OK) return report_failure(s);
  std::printf("%s\n", json);
  gh_string_free(json);

  if (!csv_path.empty()) {
    char* csv = nullptr;
    const gh_status cs = gh_analyze_trace_csv(trace_path.c_str(), bins, &csv);
    if (cs != GH_OK) return report_failure(cs);
    std::FILE* f = std::fopen(csv_path.c_str(), "w");
    if (!f) {
      std::fprintf(stderr, "error: cannot write '%s'\n", csv_path.c_str());
      gh_string_free(csv);
      return kExitUsage;
    }
    std::fputs(csv, f);
    std::fclose(f);
    gh_string_free(csv);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient harmonization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  bool parallel = false;
  auto* train = app.add_subcommand("train", "run the experiment described by a JSON config");
  train->add_option("config", config_path, "path to the run config JSON")->required();
  train->add_flag("--parallel", parallel, "run independent method loops concurrently");

  std::string pair_path;
  gh_method_kind harmonize_kind = GH_METHOD_GH;
  double harmonize_lambda = 0.5;
  auto* harmonize = app.add_subcommand("harmonize", "harmonize one gradient pair from JSON");
  harmonize->add_option("pair", pair_path, "JSON file with arrays g1 and g2")->required();
  harmonize->add_option("--method", harmonize_kind, "harmonization method")
      ->transform(CLI::CheckedTransformer(method_table(), CLI::ignore_case));
  harmonize->add_option("--lambda", harmonize_lambda, "GH++ trade-off in [0, 1]");

  std::string trace_path;
  std::size_t bins = 20;
  gh_method_kind analyze_kind = GH_METHOD_GH;
  double analyze_lambda = 0.5;
  std::string csv_path;
  auto* analyze = app.add_subcommand("analyze", "histogram a gradient-trace JSONL file");
  analyze->add_option("trace", trace_path, "trace JSONL path")->required();
  analyze->add_option("--bins", bins, "number of histogram bins (>= 2)");
  auto* method_opt =
      analyze->add_option("--method", analyze_kind, "also emit the post-harmonization histogram")
          ->transform(CLI::CheckedTransformer(method_table(), CLI::ignore_case));
  analyze->add_option("--lambda", analyze_lambda, "GH++ trade-off in [0, 1]");
  analyze->add_option("--csv", csv_path, "also write the histogram as CSV to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  if (train->parsed()) return run_train(config_path, parallel);
  if (harmonize->parsed()) return run_harmonize(pair_path, harmonize_kind, harmonize_lambda);
  return run_analyze(trace_path, bins, method_opt->count() > 0, analyze_kind, analyze_lambda,
                     csv_path);
}
