#ifndef GRADHARM_TOYNET_HPP
#define GRADHARM_TOYNET_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "harmonize.hpp"
#include "matrix.hpp"
#include "vec.hpp"

namespace gradharm {

struct NetDims {
  std::size_t input_dim = 2;
  std::size_t hidden_dim = 16;
  std::size_t feature_dim = 8;
  std::size_t num_classes = 2;
};

// One training mini-batch: labeled source rows plus unlabeled target rows.
struct Batch {
  Matrix source_x;
  std::vector<int> source_y;
  Matrix target_x;
};

enum class GradScope { FullTheta, SharedOnly };

// Desk-scale adversarial UDA model. Parameters are stored as one flat vector
// laid out [theta_g | theta_d | theta_c]:
//   generator  G: x -> tanh(W1 x + b1) -> W2 z + b2            (feature)
//   discriminator D: feature -> sigmoid(wd . f + bd)           (domain prob)
//   classifier C: feature -> softmax(Wc f + bc)                (class probs)
// A network value is immutable once constructed; updates return new values.
class ToyNetwork {
 public:
  // Seeded uniform init scaled by 1/sqrt(fan_in); identical seed gives a
  // bit-identical network.
  static ToyNetwork init(std::uint64_t seed, const NetDims& dims);

  // Wraps an explicit parameter vector (must match the dims layout).
  static ToyNetwork with_theta(const NetDims& dims, std::vector<double> theta);

  const NetDims& dims() const { return dims_; }

  std::size_t gen_size() const;
  std::size_t disc_size() const;
  std::size_t cls_size() const;
  std::size_t theta_size() const { return theta_.size(); }

  std::size_t gen_offset() const { return 0; }
  std::size_t disc_offset() const { return gen_size(); }
  std::size_t cls_offset() const { return gen_size() + disc_size(); }

  std::span<const double> theta() const { return theta_; }
  std::span<const double> theta_g() const { return {theta_.data(), gen_size()}; }
  std::span<const double> theta_d() const { return {theta_.data() + disc_offset(), disc_size()}; }
  std::span<const double> theta_c() const { return {theta_.data() + cls_offset(), cls_size()}; }

 private:
  ToyNetwork(NetDims dims, std::vector<double> theta)
      : dims_(dims), theta_(std::move(theta)) {}

  NetDims dims_;
  std::vector<double> theta_;
};

// Mean cross-entropy of C(G(x_s)) against the source labels.
double loss_cls(const ToyNetwork& net, const Batch& batch);

// Mean over source of log D(G(x_s)) plus mean over target of
// log(1 - D(G(x_t))); D outputs are clamped to [1e-7, 1-1e-7] before the log.
double loss_dom(const ToyNetwork& net, const Batch& batch);

// Plain gradients of the two losses over the full flat parameter vector.
// Blocks a loss does not touch are structurally zero.
ParamVector grad_loss_dom(const ToyNetwork& net, const Batch& batch);
ParamVector grad_loss_cls(const ToyNetwork& net, const Batch& batch);

// Task-gradient pair for harmonization. g1 is the alignment gradient with the
// theta_d block carrying the gradient of -L_dom (the discriminator ascends);
// g2 is the classification gradient. SharedOnly restricts both to theta_g.
GradientPair grad_pair(const ToyNetwork& net, const Batch& batch, GradScope scope);

// Applies one step: theta_g and theta_c blocks are decremented by eta*update,
// the theta_d block is incremented (minimax convention). A SharedOnly-length
// update touches only the theta_g block.
ToyNetwork sgd_step(const ToyNetwork& net, const ParamVector& update, double eta);

// Generator outputs for a matrix of inputs, one feature row per sample.
Matrix features(const ToyNetwork& net, const Matrix& x);

// Argmax class per sample (first index wins ties).
std::vector<int> predict(const ToyNetwork& net, const Matrix& x);

}  // namespace gradharm

#endif
