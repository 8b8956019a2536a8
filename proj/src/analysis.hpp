#ifndef GRADHARM_ANALYSIS_HPP
#define GRADHARM_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "harmonize.hpp"
#include "vec.hpp"

namespace gradharm {

// One gradient-trace entry: the inner product is always present; the full
// pair only when the producing run recorded gradients.
struct TraceEntry {
  long long iter = 0;
  double inner_product = 0.0;
  std::optional<ParamVector> g1;
  std::optional<ParamVector> g2;
};

struct GradientTrace {
  std::vector<TraceEntry> entries;

  // True when every entry carries the full gradient pair.
  bool full() const;
};

struct Histogram {
  std::vector<double> bin_edges;     // num_bins + 1 sorted edges
  std::vector<std::size_t> counts;   // rightmost bin closed
  std::size_t total = 0;
  double obtuse_fraction = 0.0;      // #entries with inner_product < 0 / total
};

// JSONL: each line {"iter": int, "ip": real} or {"iter": int, "g1": [...],
// "g2": [...]}. Full lines get ip computed via dot; iters must be strictly
// increasing. Malformed lines raise a ParseError carrying the line number.
GradientTrace load_trace(const std::string& path);

// Equal-width bins over [min, max] of the trace inner products.
Histogram histogram(const GradientTrace& trace, std::size_t num_bins);

// Replays the harmonizer on every recorded pair and emits the inner products
// of the harmonized pairs. Requires a full trace.
GradientTrace post_harmonization_trace(const GradientTrace& trace,
                                       const HarmonizeMethod& method);

}  // namespace gradharm

#endif
