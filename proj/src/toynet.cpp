#include "toynet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace gradharm {

namespace {

constexpr double kProbClamp = 1e-7;

void require_dims(const NetDims& d) {
  if (d.input_dim < 1 || d.hidden_dim < 1 || d.feature_dim < 1 || d.num_classes < 1) {
    throw InvalidArgumentError("all network dimensions must be >= 1");
  }
}

double clamp_prob(double p) {
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

// Scratch space for one forward/backward pass through the generator.
struct GenActs {
  std::vector<double> z;  // tanh hidden
  std::vector<double> f;  // feature output
};

// Offsets of the weight blocks inside theta_g.
struct GenLayout {
  std::size_t w1, b1, w2, b2;
};

GenLayout gen_layout(const NetDims& d) {
  GenLayout l;
  l.w1 = 0;
  l.b1 = l.w1 + d.hidden_dim * d.input_dim;
  l.w2 = l.b1 + d.hidden_dim;
  l.b2 = l.w2 + d.feature_dim * d.hidden_dim;
  return l;
}

void gen_forward(const NetDims& d, std::span<const double> tg,
                 std::span<const double> x, GenActs& a) {
  const GenLayout l = gen_layout(d);
  a.z.resize(d.hidden_dim);
  a.f.resize(d.feature_dim);
  for (std::size_t h = 0; h < d.hidden_dim; ++h) {
    double s = tg[l.b1 + h];
    for (std::size_t i = 0; i < d.input_dim; ++i) s += tg[l.w1 + h * d.input_dim + i] * x[i];
    a.z[h] = std::tanh(s);
  }
  for (std::size_t f = 0; f < d.feature_dim; ++f) {
    double s = tg[l.b2 + f];
    for (std::size_t h = 0; h < d.hidden_dim; ++h) s += tg[l.w2 + f * d.hidden_dim + h] * a.z[h];
    a.f[f] = s;
  }
}

// Backpropagates df (gradient at the feature output) into the generator
// block gradient and does not return the input gradient (never needed).
void gen_backward(const NetDims& d, std::span<const double> tg,
                  std::span<const double> x, const GenActs& a,
                  std::span<const double> df, std::span<double> grad_g) {
  const GenLayout l = gen_layout(d);
  std::vector<double> dz(d.hidden_dim, 0.0);
  for (std::size_t f = 0; f < d.feature_dim; ++f) {
    const double g = df[f];
    grad_g[l.b2 + f] += g;
    for (std::size_t h = 0; h < d.hidden_dim; ++h) {
      grad_g[l.w2 + f * d.hidden_dim + h] += g * a.z[h];
      dz[h] += tg[l.w2 + f * d.hidden_dim + h] * g;
    }
  }
  for (std::size_t h = 0; h < d.hidden_dim; ++h) {
    const double da = dz[h] * (1.0 - a.z[h] * a.z[h]);  // tanh'
    grad_g[l.b1 + h] += da;
    for (std::size_t i = 0; i < d.input_dim; ++i) grad_g[l.w1 + h * d.input_dim + i] += da * x[i];
  }
}

double disc_score(const NetDims& d, std::span<const double> td, std::span<const double> f) {
  double s = td[d.feature_dim];  // bd
  for (std::size_t i = 0; i < d.feature_dim; ++i) s += td[i] * f[i];
  return s;
}

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

void cls_logits(const NetDims& d, std::span<const double> tc,
                std::span<const double> f, std::span<double> logits) {
  for (std::size_t k = 0; k < d.num_classes; ++k) {
    double s = tc[d.num_classes * d.feature_dim + k];  // bc
    for (std::size_t i = 0; i < d.feature_dim; ++i) s += tc[k * d.feature_dim + i] * f[i];
    logits[k] = s;
  }
}

// softmax with the max-shift; returns log sum exp of the shifted logits.
void softmax(std::span<const double> logits, std::span<double> probs) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    probs[k] = std::exp(logits[k] - m);
    sum += probs[k];
  }
  for (std::size_t k = 0; k < logits.size(); ++k) probs[k] /= sum;
}

void require_batch(const ToyNetwork& net, const Batch& b, bool need_labels) {
  const NetDims& d = net.dims();
  if (b.source_x.rows < 1 || b.target_x.rows < 1) {
    throw InvalidArgumentError("batch must contain at least one source and one target sample");
  }
  if (b.source_x.cols != d.input_dim || b.target_x.cols != d.input_dim) {
    throw DimensionError("batch feature count does not match the network input_dim");
  }
  if (need_labels) {
    if (b.source_y.size() != b.source_x.rows) {
      throw DimensionError("source label count does not match the source rows");
    }
    for (int y : b.source_y) {
      if (y < 0 || static_cast<std::size_t>(y) >= d.num_classes) {
        throw InvalidArgumentError("source label out of range: " + std::to_string(y));
      }
    }
  }
}

}  // namespace

ToyNetwork ToyNetwork::init(std::uint64_t seed, const NetDims& dims) {
  require_dims(dims);
  const std::size_t ng = dims.hidden_dim * dims.input_dim + dims.hidden_dim +
                         dims.feature_dim * dims.hidden_dim + dims.feature_dim;
  const std::size_t nd = dims.feature_dim + 1;
  const std::size_t nc = dims.num_classes * dims.feature_dim + dims.num_classes;
  std::vector<double> theta(ng + nd + nc);

  Rng rng(seed);
  auto fill = [&rng](std::span<double> block, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : block) v = rng.uniform(-bound, bound);
  };
  const GenLayout l = gen_layout(dims);
  std::span<double> all(theta);
  fill(all.subspan(l.w1, dims.hidden_dim * dims.input_dim), dims.input_dim);
  fill(all.subspan(l.b1, dims.hidden_dim), dims.input_dim);
  fill(all.subspan(l.w2, dims.feature_dim * dims.hidden_dim), dims.hidden_dim);
  fill(all.subspan(l.b2, dims.feature_dim), dims.hidden_dim);
  fill(all.subspan(ng, nd), dims.feature_dim);
  fill(all.subspan(ng + nd, nc), dims.feature_dim);
  return ToyNetwork(dims, std::move(theta));
}

ToyNetwork ToyNetwork::with_theta(const NetDims& dims, std::vector<double> theta) {
  require_dims(dims);
  const std::size_t expect = dims.hidden_dim * dims.input_dim + dims.hidden_dim +
                             dims.feature_dim * dims.hidden_dim + dims.feature_dim +
                             dims.feature_dim + 1 +
                             dims.num_classes * dims.feature_dim + dims.num_classes;
  if (theta.size() != expect) {
    throw DimensionError("theta length " + std::to_string(theta.size()) +
                         " does not match dims layout " + std::to_string(expect));
  }
  for (double v : theta) {
    if (!std::isfinite(v)) throw InvalidArgumentError("theta entries must be finite");
  }
  return ToyNetwork(dims, std::move(theta));
}

std::size_t ToyNetwork::gen_size() const {
  return dims_.hidden_dim * dims_.input_dim + dims_.hidden_dim +
         dims_.feature_dim * dims_.hidden_dim + dims_.feature_dim;
}

std::size_t ToyNetwork::disc_size() const { return dims_.feature_dim + 1; }

std::size_t ToyNetwork::cls_size() const {
  return dims_.num_classes * dims_.feature_dim + dims_.num_classes;
}

double loss_cls(const ToyNetwork& net, const Batch& batch) {
  require_batch(net, batch, true);
  const NetDims& d = net.dims();
  GenActs a;
  std::vector<double> logits(d.num_classes);
  double total = 0.0;
  for (std::size_t r = 0; r < batch.source_x.rows; ++r) {
    gen_forward(d, net.theta_g(), batch.source_x.row(r), a);
    cls_logits(d, net.theta_c(), a.f, logits);
    const double m = *std::max_element(logits.begin(), logits.end());
    double lse = 0.0;
    for (double l : logits) lse += std::exp(l - m);
    lse = m + std::log(lse);
    total += lse - logits[static_cast<std::size_t>(batch.source_y[r])];
  }
  return total / static_cast<double>(batch.source_x.rows);
}

double loss_dom(const ToyNetwork& net, const Batch& batch) {
  require_batch(net, batch, false);
  const NetDims& d = net.dims();
  GenActs a;
  double src = 0.0;
  for (std::size_t r = 0; r < batch.source_x.rows; ++r) {
    gen_forward(d, net.theta_g(), batch.source_x.row(r), a);
    src += std::log(clamp_prob(sigmoid(disc_score(d, net.theta_d(), a.f))));
  }
  double tgt = 0.0;
  for (std::size_t r = 0; r < batch.target_x.rows; ++r) {
    gen_forward(d, net.theta_g(), batch.target_x.row(r), a);
    tgt += std::log(1.0 - clamp_prob(sigmoid(disc_score(d, net.theta_d(), a.f))));
  }
  return src / static_cast<double>(batch.source_x.rows) +
         tgt / static_cast<double>(batch.target_x.rows);
}

ParamVector grad_loss_dom(const ToyNetwork& net, const Batch& batch) {
  require_batch(net, batch, false);
  const NetDims& d = net.dims();
  std::vector<double> grad(net.theta_size(), 0.0);
  std::span<double> gg(grad.data(), net.gen_size());
  std::span<double> gd(grad.data() + net.disc_offset(), net.disc_size());

  GenActs a;
  std::vector<double> df(d.feature_dim);
  auto accumulate = [&](std::span<const double> x, bool is_source, double weight) {
    gen_forward(d, net.theta_g(), x, a);
    const double s = disc_score(d, net.theta_d(), a.f);
    const double p = sigmoid(s);
    // d/ds of log(clamp(p)) is (1-p); of log(1-clamp(p)) is -p. Outside the
    // clamp range the loss is locally constant in this sample.
    double ds = 0.0;
    if (p > kProbClamp && p < 1.0 - kProbClamp) ds = is_source ? (1.0 - p) : -p;
    ds *= weight;
    gd[d.feature_dim] += ds;  // bd
    for (std::size_t i = 0; i < d.feature_dim; ++i) {
      gd[i] += ds * a.f[i];
      df[i] = ds * net.theta_d()[i];
    }
    gen_backward(d, net.theta_g(), x, a, df, gg);
  };

  const double ws = 1.0 / static_cast<double>(batch.source_x.rows);
  for (std::size_t r = 0; r < batch.source_x.rows; ++r) accumulate(batch.source_x.row(r), true, ws);
  const double wt = 1.0 / static_cast<double>(batch.target_x.rows);
  for (std::size_t r = 0; r < batch.target_x.rows; ++r) accumulate(batch.target_x.row(r), false, wt);
  return ParamVector(std::move(grad));
}

ParamVector grad_loss_cls(const ToyNetwork& net, const Batch& batch) {
  require_batch(net, batch, true);
  const NetDims& d = net.dims();
  std::vector<double> grad(net.theta_size(), 0.0);
  std::span<double> gg(grad.data(), net.gen_size());
  std::span<double> gc(grad.data() + net.cls_offset(), net.cls_size());

  GenActs a;
  std::vector<double> logits(d.num_classes), probs(d.num_classes), df(d.feature_dim);
  const double w = 1.0 / static_cast<double>(batch.source_x.rows);
  for (std::size_t r = 0; r < batch.source_x.rows; ++r) {
    gen_forward(d, net.theta_g(), batch.source_x.row(r), a);
    cls_logits(d, net.theta_c(), a.f, logits);
    softmax(logits, probs);
    std::fill(df.begin(), df.end(), 0.0);
    for (std::size_t k = 0; k < d.num_classes; ++k) {
      double dl = probs[k];
      if (k == static_cast<std::size_t>(batch.source_y[r])) dl -= 1.0;
      dl *= w;
      gc[d.num_classes * d.feature_dim + k] += dl;  // bc
      for (std::size_t i = 0; i < d.feature_dim; ++i) {
        gc[k * d.feature_dim + i] += dl * a.f[i];
        df[i] += net.theta_c()[k * d.feature_dim + i] * dl;
      }
    }
    gen_backward(d, net.theta_g(), batch.source_x.row(r), a, df, gg);
  }
  return ParamVector(std::move(grad));
}

GradientPair grad_pair(const ToyNetwork& net, const Batch& batch, GradScope scope) {
  ParamVector dom = grad_loss_dom(net, batch);
  ParamVector cls = grad_loss_cls(net, batch);

  std::vector<double> g1 = dom.values();
  // The discriminator ascends L_dom; its block carries the gradient of
  // -L_dom so the trainer's update convention stays uniform.
  for (std::size_t i = net.disc_offset(); i < net.disc_offset() + net.disc_size(); ++i) {
    g1[i] = -g1[i];
  }

  if (scope == GradScope::SharedOnly) {
    std::vector<double> s1(g1.begin(), g1.begin() + static_cast<long>(net.gen_size()));
    std::vector<double> s2(cls.values().begin(),
                           cls.values().begin() + static_cast<long>(net.gen_size()));
    return GradientPair(ParamVector(std::move(s1)), ParamVector(std::move(s2)));
  }
  return GradientPair(ParamVector(std::move(g1)), cls);
}

ToyNetwork sgd_step(const ToyNetwork& net, const ParamVector& update, double eta) {
  if (!(eta > 0.0)) throw InvalidArgumentError("eta must be positive");
  std::vector<double> theta(net.theta().begin(), net.theta().end());
  if (update.size() == net.gen_size()) {
    for (std::size_t i = 0; i < update.size(); ++i) theta[i] -= eta * update[i];
  } else if (update.size() == net.theta_size()) {
    const std::size_t d0 = net.disc_offset();
    const std::size_t d1 = d0 + net.disc_size();
    for (std::size_t i = 0; i < update.size(); ++i) {
      if (i >= d0 && i < d1) {
        theta[i] += eta * update[i];  // discriminator ascends
      } else {
        theta[i] -= eta * update[i];
      }
    }
  } else {
    throw DimensionError("update length matches neither the full nor the shared layout");
  }
  return ToyNetwork::with_theta(net.dims(), std::move(theta));
}

Matrix features(const ToyNetwork& net, const Matrix& x) {
  const NetDims& d = net.dims();
  if (x.cols != d.input_dim) throw DimensionError("input feature count mismatch");
  Matrix out(x.rows, d.feature_dim);
  GenActs a;
  for (std::size_t r = 0; r < x.rows; ++r) {
    gen_forward(d, net.theta_g(), x.row(r), a);
    std::copy(a.f.begin(), a.f.end(), out.row(r).begin());
  }
  return out;
}

std::vector<int> predict(const ToyNetwork& net, const Matrix& x) {
  const NetDims& d = net.dims();
  if (x.cols != d.input_dim) throw DimensionError("input feature count mismatch");
  std::vector<int> out(x.rows);
  GenActs a;
  std::vector<double> logits(d.num_classes);
  for (std::size_t r = 0; r < x.rows; ++r) {
    gen_forward(d, net.theta_g(), x.row(r), a);
    cls_logits(d, net.theta_c(), a.f, logits);
    out[r] = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  }
  return out;
}

}  // namespace gradharm
