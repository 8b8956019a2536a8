#include "scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace gradharm {

namespace {

constexpr double kCircleRadius = 3.0;
constexpr double kTwoPi = 2.0 * 3.141592653589793238462643383279502884;

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, long line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("invalid number '" + s + "'", line_no);
  }
  return v;
}

int parse_label(const std::string& s, long line_no) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("invalid label '" + s + "'", line_no);
  }
  return v;
}

}  // namespace

Dataset make_blobs(const BlobsSpec& spec) {
  if (spec.num_classes < 1) throw InvalidArgumentError("num_classes must be >= 1");
  if (spec.per_class < 10) throw InvalidArgumentError("per_class must be >= 10");
  if (!(spec.noise_sigma > 0.0)) throw InvalidArgumentError("noise_sigma must be > 0");
  if (spec.input_dim < 2) throw InvalidArgumentError("input_dim must be >= 2");
  std::vector<double> shift = spec.translation;
  if (shift.empty()) shift.assign(spec.input_dim, 0.0);
  if (shift.size() != spec.input_dim) {
    throw InvalidArgumentError("translation length must equal input_dim");
  }

  const std::size_t n = spec.num_classes * spec.per_class;
  Dataset ds;
  ds.source_x = Matrix(n, spec.input_dim);
  ds.target_x = Matrix(n, spec.input_dim);
  ds.source_y.resize(n);
  ds.target_y.resize(n);
  ds.meta = {spec.num_classes, spec.input_dim, "blobs", spec.seed};

  Rng rng(substream_seed(spec.seed, "blobs"));
  const double cr = std::cos(spec.rotation);
  const double sr = std::sin(spec.rotation);

  auto draw = [&](Matrix& m, std::size_t row, std::size_t cls, bool shifted) {
    const double phase = spec.phase + kTwoPi * static_cast<double>(cls) /
                                          static_cast<double>(spec.num_classes);
    auto r = m.row(row);
    r[0] = kCircleRadius * std::cos(phase) + spec.noise_sigma * rng.gaussian();
    r[1] = kCircleRadius * std::sin(phase) + spec.noise_sigma * rng.gaussian();
    for (std::size_t j = 2; j < spec.input_dim; ++j) r[j] = spec.noise_sigma * rng.gaussian();
    if (shifted) {
      const double x = r[0], y = r[1];
      r[0] = cr * x - sr * y;
      r[1] = sr * x + cr * y;
      for (std::size_t j = 0; j < spec.input_dim; ++j) r[j] += shift[j];
    }
  };

  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t k = 0; k < spec.per_class; ++k, ++row) {
      draw(ds.source_x, row, c, false);
      ds.source_y[row] = static_cast<int>(c);
    }
  }
  row = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t k = 0; k < spec.per_class; ++k, ++row) {
      draw(ds.target_x, row, c, true);
      ds.target_y[row] = static_cast<int>(c);
    }
  }
  return ds;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file: '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "domain" || header[1] != "label" || header[2] != "f0") {
    throw ParseError("missing or malformed header, expected 'domain,label,f0,...'", 1);
  }
  const std::size_t dim = header.size() - 2;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[j + 2] != "f" + std::to_string(j)) {
      throw ParseError("unexpected feature column '" + header[j + 2] + "'", 1);
    }
  }

  std::vector<double> src, tgt;
  std::vector<int> src_y, tgt_y;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != dim + 2) {
      throw ParseError("expected " + std::to_string(dim + 2) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const bool is_source = fields[0] == "source";
    if (!is_source && fields[0] != "target") {
      throw ParseError("domain must be 'source' or 'target', got '" + fields[0] + "'", line_no);
    }
    const int label = parse_label(fields[1], line_no);
    if (is_source && label < 0) {
      throw ParseError("source rows must be labeled", line_no);
    }
    auto& x = is_source ? src : tgt;
    for (std::size_t j = 0; j < dim; ++j) x.push_back(parse_double(fields[j + 2], line_no));
    (is_source ? src_y : tgt_y).push_back(label);
  }

  Dataset ds;
  ds.meta.input_dim = dim;
  ds.meta.shift_kind = "csv";
  ds.source_x = Matrix(src_y.size(), dim);
  ds.source_x.data = std::move(src);
  ds.source_y = std::move(src_y);
  ds.target_x = Matrix(tgt_y.size(), dim);
  ds.target_x.data = std::move(tgt);
  ds.target_y = std::move(tgt_y);

  int max_label = -1;
  for (int y : ds.source_y) max_label = std::max(max_label, y);
  for (int y : ds.target_y) max_label = std::max(max_label, y);
  ds.meta.num_classes = static_cast<std::size_t>(max_label + 1);
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.imbue(std::locale::classic());  // byte format independent of the host locale
  out << "domain,label";
  for (std::size_t j = 0; j < ds.meta.input_dim; ++j) out << ",f" << j;
  out << "\n";
  auto write_rows = [&](const Matrix& x, const std::vector<int>& y, const char* domain) {
    for (std::size_t r = 0; r < x.rows; ++r) {
      out << domain << ',' << y[r];
      for (std::size_t j = 0; j < x.cols; ++j) out << ',' << format_double(x.at(r, j));
      out << "\n";
    }
  };
  write_rows(ds.source_x, ds.source_y, "source");
  write_rows(ds.target_x, ds.target_y, "target");
}

}  // namespace gradharm
