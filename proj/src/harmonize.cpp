#include "harmonize.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace gradharm {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kHalfPi = kPi / 2.0;
// Pairs with a gradient below this squared norm are treated as
// non-conflicting; the projection denominators would blow up.
constexpr double kNormFloorSq = 1e-30;
// Cosine threshold past which a conflicting pair is considered antiparallel
// and the span{g1, g2} plane undefined.
constexpr double kAntiparallelCosTol = 1e-12;

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

void require_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidArgumentError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
}

bool is_antiparallel(const GradientPair& p) {
  const double n1 = norm_sq(p.g1);
  const double n2 = norm_sq(p.g2);
  if (n1 == 0.0 || n2 == 0.0) return false;
  const double c = dot(p.g1, p.g2) / (std::sqrt(n1) * std::sqrt(n2));
  return c <= -1.0 + kAntiparallelCosTol;
}

}  // namespace

GradientPair::GradientPair(ParamVector a, ParamVector b)
    : g1(std::move(a)), g2(std::move(b)) {
  if (g1.size() != g2.size()) {
    throw DimensionError("gradient pair dimension mismatch: " +
                         std::to_string(g1.size()) + " vs " + std::to_string(g2.size()));
  }
}

std::string_view method_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::None: return "none";
    case MethodKind::GH: return "gh";
    case MethodKind::GHppWeighted: return "ghpp-weighted";
    case MethodKind::GHppRotate: return "ghpp-rotate";
    case MethodKind::FlipG1: return "flip-g1";
    case MethodKind::FlipG2: return "flip-g2";
  }
  return "unknown";
}

std::optional<MethodKind> method_from_name(std::string_view name) {
  if (name == "none") return MethodKind::None;
  if (name == "gh") return MethodKind::GH;
  if (name == "ghpp-weighted") return MethodKind::GHppWeighted;
  if (name == "ghpp-rotate") return MethodKind::GHppRotate;
  if (name == "flip-g1") return MethodKind::FlipG1;
  if (name == "flip-g2") return MethodKind::FlipG2;
  return std::nullopt;
}

bool detect_conflict(const GradientPair& p) {
  if (norm_sq(p.g1) < kNormFloorSq || norm_sq(p.g2) < kNormFloorSq) return false;
  return dot(p.g1, p.g2) < 0.0;
}

std::pair<ParamVector, ParamVector> gh_pair(const GradientPair& p) {
  if (!detect_conflict(p)) return {p.g1, p.g2};
  const double ip = dot(p.g1, p.g2);
  const double n1 = norm_sq(p.g1);
  const double n2 = norm_sq(p.g2);
  ParamVector t1 = sub(p.g1, scale(p.g2, ip / n2));
  ParamVector t2 = sub(p.g2, scale(p.g1, ip / n1));
  return {std::move(t1), std::move(t2)};
}

ParamVector gh_aggregate(const GradientPair& p) {
  auto [t1, t2] = gh_pair(p);
  return add(t1, t2);
}

Weights gh_weights(const GradientPair& p) {
  if (!detect_conflict(p)) return {1.0, 1.0};
  const double ip = dot(p.g1, p.g2);
  return {1.0 - ip / norm_sq(p.g1), 1.0 - ip / norm_sq(p.g2)};
}

Weights ghpp_weights(const GradientPair& p, double lambda) {
  require_lambda(lambda);
  if (!detect_conflict(p)) return {1.0, 1.0};
  const double theta = angle(p.g1, p.g2);
  const double base = theta - kHalfPi;
  return {1.0 + 2.0 * std::sin(lambda * base / 2.0),
          1.0 + 2.0 * std::sin((lambda - 1.0) * base / 2.0)};
}

ParamVector ghpp_aggregate(const GradientPair& p, double lambda) {
  const Weights w = ghpp_weights(p, lambda);
  return add(scale(p.g1, w.tau1), scale(p.g2, w.tau2));
}

std::pair<ParamVector, ParamVector> ghpp_rotate(const GradientPair& p, double lambda) {
  require_lambda(lambda);
  if (!detect_conflict(p)) return {p.g1, p.g2};
  if (is_antiparallel(p)) {
    throw DegenerateInputError("rotation plane undefined for antiparallel conflicting gradients");
  }

  const std::size_t n = p.g1.size();
  const double len1 = std::sqrt(norm_sq(p.g1));
  const double len2 = std::sqrt(norm_sq(p.g2));

  // Orthonormal basis {u, v} of span{g1, g2} with u along g1 and v in g2's
  // half-plane, so g2 sits at angle theta with a positive v component.
  std::vector<double> u(n), w(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = p.g1[i] / len1;
  const double proj = dot(p.g2.span(), std::span<const double>(u));
  for (std::size_t i = 0; i < n; ++i) w[i] = p.g2[i] - proj * u[i];
  const double wlen = std::sqrt(norm_sq(std::span<const double>(w)));
  for (std::size_t i = 0; i < n; ++i) w[i] /= wlen;

  const double theta = angle(p.g1, p.g2);
  const double beta = lambda * (theta - kHalfPi);  // rotation of g1 toward g2
  // g2's target direction sits exactly a right angle past g1's target.
  const double phi = beta + kHalfPi;

  std::vector<double> t1(n), t2(n);
  const double c1 = std::cos(beta), s1 = std::sin(beta);
  const double c2 = std::cos(phi), s2 = std::sin(phi);
  for (std::size_t i = 0; i < n; ++i) {
    t1[i] = len1 * (c1 * u[i] + s1 * w[i]);
    t2[i] = len2 * (c2 * u[i] + s2 * w[i]);
  }
  return {ParamVector(std::move(t1)), ParamVector(std::move(t2))};
}

std::pair<ParamVector, ParamVector> sign_flip(const GradientPair& p, FlipTarget which) {
  if (which == FlipTarget::G1) return {scale(p.g1, -1.0), p.g2};
  return {p.g1, scale(p.g2, -1.0)};
}

DeviationReport deviation_report(const GradientPair& p, const HarmonizeMethod& method) {
  if (norm_sq(p.g1) == 0.0 || norm_sq(p.g2) == 0.0) {
    throw DegenerateInputError("deviation report requires nonzero gradients");
  }
  const HarmonizeResult r = harmonize(method, p);
  DeviationReport rep;
  rep.angle_before = r.angle_before;
  rep.angle_after = r.angle_after;
  rep.angle_after_defined = r.angle_after_defined;
  rep.deviation_sum = r.deviation_sum;
  return rep;
}

HarmonizeResult harmonize(const HarmonizeMethod& method, const GradientPair& p) {
  HarmonizeResult r;
  r.conflict = detect_conflict(p);

  switch (method.kind) {
    case MethodKind::None:
      r.tilde_g1 = p.g1;
      r.tilde_g2 = p.g2;
      r.tau1 = 1.0;
      r.tau2 = 1.0;
      break;
    case MethodKind::GH: {
      auto [t1, t2] = gh_pair(p);
      const Weights w = gh_weights(p);
      r.tilde_g1 = std::move(t1);
      r.tilde_g2 = std::move(t2);
      r.tau1 = w.tau1;
      r.tau2 = w.tau2;
      // Antiparallel conflicting pair: both projections vanish. Eq-wise this
      // is well defined, so the result is returned as-is but flagged.
      r.degenerate = r.conflict && is_antiparallel(p);
      break;
    }
    case MethodKind::GHppWeighted: {
      const Weights w = ghpp_weights(p, method.lambda);
      r.tilde_g1 = scale(p.g1, w.tau1);
      r.tilde_g2 = scale(p.g2, w.tau2);
      r.tau1 = w.tau1;
      r.tau2 = w.tau2;
      break;
    }
    case MethodKind::GHppRotate: {
      auto [t1, t2] = ghpp_rotate(p, method.lambda);
      r.tilde_g1 = std::move(t1);
      r.tilde_g2 = std::move(t2);
      if (r.conflict) {
        r.tau1 = nan();  // rotation has no per-gradient scalar weight
        r.tau2 = nan();
      }
      break;
    }
    case MethodKind::FlipG1: {
      auto [t1, t2] = sign_flip(p, FlipTarget::G1);
      r.tilde_g1 = std::move(t1);
      r.tilde_g2 = std::move(t2);
      r.tau1 = -1.0;
      r.tau2 = 1.0;
      break;
    }
    case MethodKind::FlipG2: {
      auto [t1, t2] = sign_flip(p, FlipTarget::G2);
      r.tilde_g1 = std::move(t1);
      r.tilde_g2 = std::move(t2);
      r.tau1 = 1.0;
      r.tau2 = -1.0;
      break;
    }
  }

  r.aggregate = add(r.tilde_g1, r.tilde_g2);

  const bool inputs_nonzero = norm_sq(p.g1) > 0.0 && norm_sq(p.g2) > 0.0;
  const bool outputs_nonzero = norm_sq(r.tilde_g1) > 0.0 && norm_sq(r.tilde_g2) > 0.0;
  const bool passthrough = r.tilde_g1 == p.g1 && r.tilde_g2 == p.g2;
  if (passthrough && inputs_nonzero) {
    // Untouched pair: report exact zeros instead of acos rounding noise.
    r.angle_before = angle(p.g1, p.g2);
    r.angle_after = r.angle_before;
    r.deviation_sum = 0.0;
    r.angle_after_defined = true;
  } else if (inputs_nonzero && outputs_nonzero && !r.degenerate) {
    r.angle_before = angle(p.g1, p.g2);
    r.angle_after = angle(r.tilde_g1, r.tilde_g2);
    r.deviation_sum = angle(p.g1, r.tilde_g1) + angle(p.g2, r.tilde_g2);
    r.angle_after_defined = true;
  } else {
    r.angle_before = inputs_nonzero ? angle(p.g1, p.g2) : nan();
    r.angle_after = nan();
    r.deviation_sum = nan();
    r.angle_after_defined = false;
  }
  return r;
}

bool verify_projection_qp(const ParamVector& g1, const ParamVector& g2,
                      std::size_t samples, std::uint64_t seed) {
  GradientPair p(g1, g2);
  if (!detect_conflict(p)) {
    throw InvalidArgumentError("the QP minimality check is only meaningful under conflict");
  }
  if (samples < 1000) {
    throw InvalidArgumentError("at least 1000 samples are required");
  }
  if (is_antiparallel(p)) {
    throw DegenerateInputError("feasible-cone geometry undefined for antiparallel gradients");
  }

  auto [t1, t2] = gh_pair(p);
  (void)t2;
  const std::size_t n = g1.size();
  const double best = std::sqrt(norm_sq(sub(t1, g1)));

  // Orthonormal basis {u, v} of span{g1, g2}. Inside that plane the feasible
  // set {x : x.g1 >= 0 and x.g2 >= 0} is the wedge of directions
  // phi in [theta - pi/2, pi/2]; tilde_g1 points along its lower edge. Points
  // are constructed inside the wedge directly, concentrated near tilde_g1 in
  // both angle and radius, with a free component orthogonal to the plane.
  const double len1 = std::sqrt(norm_sq(g1));
  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = g1[i] / len1;
  const double proj = dot(g2.span(), std::span<const double>(u));
  for (std::size_t i = 0; i < n; ++i) v[i] = g2[i] - proj * u[i];
  const double vlen = std::sqrt(norm_sq(std::span<const double>(v)));
  for (std::size_t i = 0; i < n; ++i) v[i] /= vlen;

  const double theta = angle(g1, g2);
  const double lo = theta - kHalfPi;
  const double width = kPi - theta;
  const double r_base = std::max(std::sqrt(norm_sq(t1)), 0.05 * len1);

  Rng rng(seed);
  std::size_t accepted = 0;
  std::vector<double> cand(n);
  while (accepted < samples) {
    const double frac = std::min(std::abs(rng.gaussian()) * 0.35, 1.0);
    const double phi = lo + frac * width;
    const double radius = r_base * std::exp(0.7 * rng.gaussian());
    const double a = radius * std::cos(phi);
    const double b = radius * std::sin(phi);
    for (std::size_t i = 0; i < n; ++i) cand[i] = a * u[i] + b * v[i];
    if (n > 2) {
      // out-of-plane offset, orthogonal to both constraints
      const double perp_scale = 0.5 * r_base * std::abs(rng.gaussian()) /
                                std::sqrt(static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) cand[i] += perp_scale * rng.gaussian();
      std::span<const double> cs(cand);
      const double cu = dot(cs, std::span<const double>(u));
      const double cv = dot(cs, std::span<const double>(v));
      for (std::size_t i = 0; i < n; ++i) {
        cand[i] += (a - cu) * u[i] + (b - cv) * v[i];
      }
    }
    std::span<const double> cs(cand);
    if (dot(cs, g1.span()) < 0.0 || dot(cs, g2.span()) < 0.0) continue;  // rounding edge
    ++accepted;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = cand[i] - g1[i];
      d += diff * diff;
    }
    if (std::sqrt(d) < best - 1e-9) return false;
  }
  return true;
}

}  // namespace gradharm
