#ifndef GRADHARM_VEC_HPP
#define GRADHARM_VEC_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace gradharm {

// Flat vector of model parameters or a gradient over them. Construction
// validates that the vector is non-empty and every entry is finite; after
// that the value is immutable.
class ParamVector {
 public:
  ParamVector() = default;  // empty placeholder, not a valid vector
  explicit ParamVector(std::vector<double> values);

  static ParamVector zeros(std::size_t n);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> span() const { return values_; }

  bool operator==(const ParamVector&) const = default;

 private:
  std::vector<double> values_;
};

// Checked span-level kernels; the ParamVector overloads forward to these.
double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> a);
double angle(std::span<const double> a, std::span<const double> b);

double dot(const ParamVector& a, const ParamVector& b);
double norm_sq(const ParamVector& a);

// Angle in [0, pi]; the cosine is clamped to [-1, 1] before acos so that
// rounding at theta near 0 or pi cannot produce NaN. Zero vectors are an error.
double angle(const ParamVector& a, const ParamVector& b);

ParamVector add(const ParamVector& a, const ParamVector& b);
ParamVector sub(const ParamVector& a, const ParamVector& b);
ParamVector scale(const ParamVector& a, double c);

}  // namespace gradharm

#endif
