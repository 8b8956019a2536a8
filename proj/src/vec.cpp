#include "vec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace gradharm {

namespace {
void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionError("dimension mismatch: " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}
}  // namespace

ParamVector::ParamVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw InvalidArgumentError("ParamVector must hold at least one value");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw InvalidArgumentError("ParamVector entries must be finite");
    }
  }
}

ParamVector ParamVector::zeros(std::size_t n) {
  return ParamVector(std::vector<double>(n, 0.0));
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

double angle(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size());
  const double na = norm_sq(a);
  const double nb = norm_sq(b);
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateInputError("angle undefined for a zero vector");
  }
  double c = dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c);
}

double dot(const ParamVector& a, const ParamVector& b) { return dot(a.span(), b.span()); }

double norm_sq(const ParamVector& a) { return norm_sq(a.span()); }

double angle(const ParamVector& a, const ParamVector& b) { return angle(a.span(), b.span()); }

ParamVector add(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a.size(), b.size());
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return ParamVector(std::move(out));
}

ParamVector sub(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a.size(), b.size());
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return ParamVector(std::move(out));
}

ParamVector scale(const ParamVector& a, double c) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return ParamVector(std::move(out));
}

}  // namespace gradharm
