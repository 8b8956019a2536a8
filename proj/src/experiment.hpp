#ifndef GRADHARM_EXPERIMENT_HPP
#define GRADHARM_EXPERIMENT_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "harmonize.hpp"
#include "scenario.hpp"
#include "trainer.hpp"

namespace gradharm {

// Everything one archivable experiment run needs: the scenario (generated or
// loaded), the training settings and the method list to run on the same data
// and seed.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir;
  std::vector<HarmonizeMethod> methods;
  double eta = 0.05;
  std::size_t iterations = 500;
  std::size_t batch_size = 32;
  std::size_t eval_every = 50;
  GradScope scope = GradScope::FullTheta;
  bool discriminator_weighted = true;
  std::size_t hidden_dim = 6;
  std::size_t feature_dim = 2;
  bool trace_gradients = true;

  std::optional<std::string> csv_path;  // when set, overrides the blobs spec
  BlobsSpec blobs;
};

RunConfig parse_run_config(const std::string& path);

// Runs every configured method on the shared dataset and writes into
// output_dir: dataset.csv, report_<method>.jsonl, trace_<method>.jsonl (when
// trace_gradients) and summary.json. Returns the summary document. With
// parallel=true the per-method loops run concurrently.
nlohmann::ordered_json run_experiment(const RunConfig& cfg, bool parallel = false);

nlohmann::ordered_json harmonize_result_json(const HarmonizeResult& r);

// Reads {"g1": [...], "g2": [...]} and harmonizes the pair.
nlohmann::ordered_json harmonize_pair_file(const std::string& path,
                                           const HarmonizeMethod& method);

nlohmann::ordered_json histogram_json(const Histogram& h);

// Histogram of a trace file; with a method given, also the histogram of the
// replayed post-harmonization inner products.
nlohmann::ordered_json analyze_trace_file(const std::string& path, std::size_t bins,
                                          const std::optional<HarmonizeMethod>& method);

// Plot-ready CSV of a histogram: one "bin_lo,bin_hi,count" row per bin.
std::string histogram_csv(const Histogram& h);

}  // namespace gradharm

#endif
