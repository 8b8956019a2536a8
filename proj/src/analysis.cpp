#include "analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "error.hpp"

namespace gradharm {

namespace {

ParamVector vector_from_json(const nlohmann::json& j, const char* key, long line_no) {
  if (!j.is_array() || j.empty()) {
    throw ParseError(std::string(key) + " must be a nonempty array", line_no);
  }
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) throw ParseError(std::string(key) + " must contain numbers", line_no);
    v.push_back(e.get<double>());
  }
  return ParamVector(std::move(v));
}

}  // namespace

bool GradientTrace::full() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const TraceEntry& e) { return e.g1 && e.g2; });
}

GradientTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  GradientTrace trace;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!j.is_object() || !j.contains("iter") || !j["iter"].is_number_integer()) {
      throw ParseError("each line needs an integer 'iter'", line_no);
    }

    TraceEntry entry;
    entry.iter = j["iter"].get<long long>();
    if (j.contains("g1") || j.contains("g2")) {
      if (!j.contains("g1") || !j.contains("g2")) {
        throw ParseError("full lines need both 'g1' and 'g2'", line_no);
      }
      entry.g1 = vector_from_json(j["g1"], "g1", line_no);
      entry.g2 = vector_from_json(j["g2"], "g2", line_no);
      if (entry.g1->size() != entry.g2->size()) {
        throw ParseError("g1 and g2 lengths differ", line_no);
      }
      entry.inner_product = dot(*entry.g1, *entry.g2);
      if (j.contains("ip") && j["ip"].is_number()) {
        const double stored = j["ip"].get<double>();
        const double scale = std::max({std::abs(stored), std::abs(entry.inner_product), 1.0});
        if (std::abs(stored - entry.inner_product) > 1e-12 * scale) {
          throw ParseError("stored ip disagrees with the gradient pair", line_no);
        }
      }
    } else if (j.contains("ip") && j["ip"].is_number()) {
      entry.inner_product = j["ip"].get<double>();
    } else {
      throw ParseError("line has neither 'ip' nor a gradient pair", line_no);
    }

    if (!trace.entries.empty() && entry.iter <= trace.entries.back().iter) {
      throw ParseError("iters must be strictly increasing", line_no);
    }
    trace.entries.push_back(std::move(entry));
  }
  return trace;
}

Histogram histogram(const GradientTrace& trace, std::size_t num_bins) {
  if (num_bins < 2) throw InvalidArgumentError("num_bins must be >= 2");
  if (trace.entries.empty()) throw InvalidArgumentError("empty trace");

  double lo = trace.entries.front().inner_product;
  double hi = lo;
  std::size_t obtuse = 0;
  for (const TraceEntry& e : trace.entries) {
    lo = std::min(lo, e.inner_product);
    hi = std::max(hi, e.inner_product);
    if (e.inner_product < 0.0) ++obtuse;
  }
  // Degenerate range: widen so equal-width binning stays defined.
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }

  Histogram h;
  h.total = trace.entries.size();
  h.obtuse_fraction = static_cast<double>(obtuse) / static_cast<double>(h.total);
  h.bin_edges.resize(num_bins + 1);
  const double width = (hi - lo) / static_cast<double>(num_bins);
  for (std::size_t i = 0; i <= num_bins; ++i) {
    h.bin_edges[i] = lo + width * static_cast<double>(i);
  }
  h.bin_edges.back() = hi;

  h.counts.assign(num_bins, 0);
  for (const TraceEntry& e : trace.entries) {
    auto idx = static_cast<std::size_t>((e.inner_product - lo) / width);
    if (idx >= num_bins) idx = num_bins - 1;  // rightmost bin closed
    ++h.counts[idx];
  }
  return h;
}

GradientTrace post_harmonization_trace(const GradientTrace& trace,
                                       const HarmonizeMethod& method) {
  if (!trace.full()) {
    throw InvalidArgumentError("post-harmonization replay needs full gradient pairs");
  }
  GradientTrace out;
  out.entries.reserve(trace.entries.size());
  for (const TraceEntry& e : trace.entries) {
    const HarmonizeResult r = harmonize(method, GradientPair(*e.g1, *e.g2));
    TraceEntry h;
    h.iter = e.iter;
    h.inner_product = dot(r.tilde_g1, r.tilde_g2);
    out.entries.push_back(std::move(h));
  }
  return out;
}

}  // namespace gradharm
