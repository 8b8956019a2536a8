#ifndef GRADHARM_TEST_SUPPORT_HPP
#define GRADHARM_TEST_SUPPORT_HPP

// Independent oracles used by the test suites. Everything here recomputes
// expected values from first principles, with no calls into the paths under
// test.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// Plain elementwise-sum inner product in extended precision.
inline double dot_sum(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
  }
  return static_cast<double>(s);
}

// Projection of a onto the hyperplane orthogonal to b: a - (a.b / b.b) b.
inline std::vector<double> project_out(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  long double ab = 0.0L, bb = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<long double>(a[i]) * b[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  const long double c = ab / bb;
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = static_cast<double>(a[i] - c * b[i]);
  }
  return out;
}

// 2-D rotation matrix applied to v (counterclockwise by `radians`).
inline std::vector<double> rotate2d(const std::vector<double>& v, double radians) {
  const double c = std::cos(radians), s = std::sin(radians);
  return {c * v[0] - s * v[1], s * v[0] + c * v[1]};
}

// Central finite difference of f along coordinate i.
inline double finite_diff(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> theta, std::size_t i, double eps) {
  theta[i] += eps;
  const double hi = f(theta);
  theta[i] -= 2.0 * eps;
  const double lo = f(theta);
  return (hi - lo) / (2.0 * eps);
}

inline double rel_err(double actual, double expected) {
  const double denom = std::max({std::abs(actual), std::abs(expected), 1e-12});
  return std::abs(actual - expected) / denom;
}

// Deterministic test-data generators (std::mt19937_64 stream only; bounded
// uniforms derived by hand so the values are stable across toolchains).
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  std::vector<double> vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  // Random pair with a strictly negative inner product. Redraws pairs that
  // are nearly orthogonal or nearly antiparallel so the conflict is strict
  // and the pair spans a well-defined plane.
  std::pair<std::vector<double>, std::vector<double>> conflicting_pair(std::size_t n) {
    for (;;) {
      auto g1 = vector(n);
      auto g2 = vector(n);
      const double n1 = dot_sum(g1, g1);
      const double n2 = dot_sum(g2, g2);
      if (n1 < 1e-3 || n2 < 1e-3) continue;
      if (dot_sum(g1, g2) >= 0.0) {
        for (double& x : g2) x = -x;
      }
      const double cosine = dot_sum(g1, g2) / std::sqrt(n1 * n2);
      if (cosine < -1e-3 && cosine > -1.0 + 1e-6) return {g1, g2};
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace oracle

#endif
