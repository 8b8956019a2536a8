#ifndef GRADHARM_HARMONIZE_HPP
#define GRADHARM_HARMONIZE_HPP

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "vec.hpp"

namespace gradharm {

// The two task gradients over a shared parameter scope: g1 is the alignment
// gradient, g2 the classification gradient.
struct GradientPair {
  ParamVector g1;
  ParamVector g2;

  GradientPair(ParamVector a, ParamVector b);
};

enum class MethodKind { None, GH, GHppWeighted, GHppRotate, FlipG1, FlipG2 };

struct HarmonizeMethod {
  MethodKind kind = MethodKind::GH;
  double lambda = 0.5;  // used by the GH++ kinds only
};

std::string_view method_name(MethodKind kind);
std::optional<MethodKind> method_from_name(std::string_view name);

struct Weights {
  double tau1 = 1.0;
  double tau2 = 1.0;
};

struct DeviationReport {
  double angle_before = 0.0;
  double angle_after = 0.0;       // NaN when angle_after_defined is false
  bool angle_after_defined = true;
  double deviation_sum = 0.0;     // NaN when angle_after_defined is false
};

struct HarmonizeResult {
  ParamVector tilde_g1;
  ParamVector tilde_g2;
  ParamVector aggregate;          // always tilde_g1 + tilde_g2
  double tau1 = 1.0;              // NaN for GHppRotate under conflict
  double tau2 = 1.0;
  bool conflict = false;
  double angle_before = 0.0;      // NaN when an input is the zero vector
  double angle_after = 0.0;       // NaN when undefined (degenerate GH)
  bool angle_after_defined = true;
  double deviation_sum = 0.0;
  bool degenerate = false;        // GH on an antiparallel pair: projections vanished
};

// True iff g1^T g2 < 0 (strict). A zero inner product is non-conflicting, and
// pairs with a vanishing gradient (norm^2 below 1e-30) are never conflicting.
bool detect_conflict(const GradientPair& p);

// Projects each conflicting gradient onto the hyperplane orthogonal to the
// other; non-conflicting pairs pass through unchanged.
std::pair<ParamVector, ParamVector> gh_pair(const GradientPair& p);

// Sum of the gh_pair outputs.
ParamVector gh_aggregate(const GradientPair& p);

// Equivalent dynamic loss weights for GH: tau_i makes tau1*g1 + tau2*g2 equal
// gh_aggregate.
Weights gh_weights(const GradientPair& p);

// GH++ weights: tau1 = 1 + 2*delta*sin(lambda*(theta - pi/2)/2),
// tau2 = 1 + 2*delta*sin((lambda-1)*(theta - pi/2)/2).
Weights ghpp_weights(const GradientPair& p, double lambda);

ParamVector ghpp_aggregate(const GradientPair& p, double lambda);

// Geometric variant: rotates g1 by lambda*(theta - pi/2) toward g2 and g2 by
// (1-lambda)*(theta - pi/2) toward g1 inside span{g1, g2}, preserving norms,
// so the harmonized pair ends up orthogonal. Errors on a conflicting pair
// with no defined rotation plane (antiparallel gradients).
std::pair<ParamVector, ParamVector> ghpp_rotate(const GradientPair& p, double lambda);

enum class FlipTarget { G1, G2 };

// Ablation baseline: negate one of the gradients wholesale.
std::pair<ParamVector, ParamVector> sign_flip(const GradientPair& p, FlipTarget which);

// Angle of the pair before and after the method, plus the total angular
// displacement of the harmonized gradients from their originals.
DeviationReport deviation_report(const GradientPair& p, const HarmonizeMethod& method);

// Dispatcher populating every HarmonizeResult field for the given method.
HarmonizeResult harmonize(const HarmonizeMethod& method, const GradientPair& p);

// Numerical witness for the closed form of the projection: samples feasible
// points (x^T g1 >= 0 and x^T g2 >= 0) around tilde_g1 and checks that none is
// closer to g1 than tilde_g1 by more than 1e-9. Requires a conflicting pair
// and samples >= 1000.
bool verify_projection_qp(const ParamVector& g1, const ParamVector& g2,
                      std::size_t samples,
                      std::uint64_t seed = 0x5DEECE66Dull);

}  // namespace gradharm

#endif
