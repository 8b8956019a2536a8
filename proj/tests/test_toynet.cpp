#include <doctest.h>

#include <cmath>
#include <vector>

#include "error.hpp"
#include "scenario.hpp"
#include "test_support.hpp"
#include "toynet.hpp"

using namespace gradharm;

namespace {

// Straight-line re-evaluation of both losses, independent of the production
// forward/backward code. Reads the documented flat layout
// [W1 | b1 | W2 | b2 | wd | bd | Wc | bc] directly.
struct RefNet {
  NetDims d;
  std::vector<double> theta;

  std::size_t w1() const { return 0; }
  std::size_t b1() const { return d.hidden_dim * d.input_dim; }
  std::size_t w2() const { return b1() + d.hidden_dim; }
  std::size_t b2() const { return w2() + d.feature_dim * d.hidden_dim; }
  std::size_t wd() const { return b2() + d.feature_dim; }
  std::size_t bd() const { return wd() + d.feature_dim; }
  std::size_t wc() const { return bd() + 1; }
  std::size_t bc() const { return wc() + d.num_classes * d.feature_dim; }

  std::vector<double> feature(std::span<const double> x) const {
    std::vector<double> z(d.hidden_dim), f(d.feature_dim);
    for (std::size_t h = 0; h < d.hidden_dim; ++h) {
      double s = theta[b1() + h];
      for (std::size_t i = 0; i < d.input_dim; ++i) s += theta[w1() + h * d.input_dim + i] * x[i];
      z[h] = std::tanh(s);
    }
    for (std::size_t k = 0; k < d.feature_dim; ++k) {
      double s = theta[b2() + k];
      for (std::size_t h = 0; h < d.hidden_dim; ++h) s += theta[w2() + k * d.hidden_dim + h] * z[h];
      f[k] = s;
    }
    return f;
  }

  double disc_prob(std::span<const double> x) const {
    const auto f = feature(x);
    double s = theta[bd()];
    for (std::size_t k = 0; k < d.feature_dim; ++k) s += theta[wd() + k] * f[k];
    return 1.0 / (1.0 + std::exp(-s));
  }

  double ce(std::span<const double> x, int label) const {
    const auto f = feature(x);
    std::vector<double> logits(d.num_classes);
    for (std::size_t k = 0; k < d.num_classes; ++k) {
      double s = theta[bc() + k];
      for (std::size_t j = 0; j < d.feature_dim; ++j) s += theta[wc() + k * d.feature_dim + j] * f[j];
      logits[k] = s;
    }
    double mx = logits[0];
    for (double l : logits) mx = std::max(mx, l);
    double lse = 0.0;
    for (double l : logits) lse += std::exp(l - mx);
    return mx + std::log(lse) - logits[static_cast<std::size_t>(label)];
  }
};

double ref_loss_cls(const NetDims& d, const std::vector<double>& theta, const Batch& batch) {
  RefNet ref{d, theta};
  double total = 0.0;
  for (std::size_t r = 0; r < batch.source_x.rows; ++r) {
    total += ref.ce(batch.source_x.row(r), batch.source_y[r]);
  }
  return total / static_cast<double>(batch.source_x.rows);
}

double ref_loss_dom(const NetDims& d, const std::vector<double>& theta, const Batch& batch) {
  RefNet ref{d, theta};
  auto clamp = [](double p) { return std::min(std::max(p, 1e-7), 1.0 - 1e-7); };
  double src = 0.0, tgt = 0.0;
  for (std::size_t r = 0; r < batch.source_x.rows; ++r) {
    src += std::log(clamp(ref.disc_prob(batch.source_x.row(r))));
  }
  for (std::size_t r = 0; r < batch.target_x.rows; ++r) {
    tgt += std::log(1.0 - clamp(ref.disc_prob(batch.target_x.row(r))));
  }
  return src / static_cast<double>(batch.source_x.rows) +
         tgt / static_cast<double>(batch.target_x.rows);
}

Batch small_batch(std::uint64_t seed, const NetDims& d, std::size_t ns = 6, std::size_t nt = 5) {
  oracle::Gen gen(seed);
  Batch b;
  b.source_x = Matrix(ns, d.input_dim);
  b.target_x = Matrix(nt, d.input_dim);
  b.source_y.resize(ns);
  for (std::size_t r = 0; r < ns; ++r) {
    for (std::size_t c = 0; c < d.input_dim; ++c) b.source_x.at(r, c) = gen.uniform(-2, 2);
    b.source_y[r] = static_cast<int>(r % d.num_classes);
  }
  for (std::size_t r = 0; r < nt; ++r) {
    for (std::size_t c = 0; c < d.input_dim; ++c) b.target_x.at(r, c) = gen.uniform(-2, 2);
  }
  return b;
}

}  // namespace

TEST_SUITE("toynet") {

TEST_CASE("init is seed-deterministic and dimension-checked") {
  const NetDims d{2, 8, 2, 2};
  const ToyNetwork a = ToyNetwork::init(7, d);
  const ToyNetwork b = ToyNetwork::init(7, d);
  CHECK(std::vector<double>(a.theta().begin(), a.theta().end()) ==
        std::vector<double>(b.theta().begin(), b.theta().end()));

  CHECK(a.gen_size() == 42);  // 2*8+8 + 8*2+2
  CHECK(a.disc_size() == 3);
  CHECK(a.cls_size() == 6);
  CHECK(a.theta_size() == 51);

  const ToyNetwork c = ToyNetwork::init(8, d);
  CHECK(std::vector<double>(a.theta().begin(), a.theta().end()) !=
        std::vector<double>(c.theta().begin(), c.theta().end()));

  CHECK_THROWS_AS(ToyNetwork::init(1, NetDims{0, 4, 2, 2}), InvalidArgumentError);
}

TEST_CASE("loss_cls on crafted networks") {
  const NetDims d{2, 4, 3, 2};
  const ToyNetwork base = ToyNetwork::init(3, d);
  const Batch batch = small_batch(11, d);

  SUBCASE("uniform softmax gives ln 2") {
    std::vector<double> theta(base.theta().begin(), base.theta().end());
    for (std::size_t i = base.cls_offset(); i < base.theta_size(); ++i) theta[i] = 0.0;
    const ToyNetwork net = ToyNetwork::with_theta(d, std::move(theta));
    CHECK(loss_cls(net, batch) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("confident correct predictions give ~0") {
    // zero generator -> feature = b2 = 0 -> logits = bc; all labels class 0
    std::vector<double> theta(base.theta_size(), 0.0);
    theta[base.cls_offset() + d.num_classes * d.feature_dim + 0] = 50.0;
    theta[base.cls_offset() + d.num_classes * d.feature_dim + 1] = -50.0;
    const ToyNetwork net = ToyNetwork::with_theta(d, std::move(theta));
    Batch all_zero = batch;
    std::fill(all_zero.source_y.begin(), all_zero.source_y.end(), 0);
    CHECK(loss_cls(net, all_zero) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("label out of range is rejected") {
    Batch bad = batch;
    bad.source_y[0] = 2;
    CHECK_THROWS_AS(loss_cls(base, bad), InvalidArgumentError);
    bad.source_y[0] = -1;
    CHECK_THROWS_AS(loss_cls(base, bad), InvalidArgumentError);
  }

  SUBCASE("random net matches the straight-line oracle") {
    const std::vector<double> theta(base.theta().begin(), base.theta().end());
    CHECK(loss_cls(base, batch) ==
          doctest::Approx(ref_loss_cls(d, theta, batch)).epsilon(1e-12));
  }
}

TEST_CASE("loss_dom on crafted networks") {
  const NetDims d{2, 4, 3, 2};
  const ToyNetwork base = ToyNetwork::init(5, d);
  const Batch batch = small_batch(13, d);

  SUBCASE("constant D = 0.5 gives 2 ln 0.5") {
    std::vector<double> theta(base.theta().begin(), base.theta().end());
    for (std::size_t i = base.disc_offset(); i < base.cls_offset(); ++i) theta[i] = 0.0;
    const ToyNetwork net = ToyNetwork::with_theta(d, std::move(theta));
    CHECK(loss_dom(net, batch) == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-12));
  }

  SUBCASE("a saturated discriminator is clamped before the log") {
    // zero generator -> feature = 0 -> score = bd; bd huge saturates D
    std::vector<double> theta(base.theta_size(), 0.0);
    theta[base.disc_offset() + d.feature_dim] = 100.0;
    const ToyNetwork net = ToyNetwork::with_theta(d, std::move(theta));
    const double expected = std::log(1.0 - 1e-7) + std::log(1e-7);
    CHECK(loss_dom(net, batch) == doctest::Approx(expected).epsilon(1e-9));
  }

  SUBCASE("a perfect discriminator drives the loss to 0 from below") {
    // one strong hidden unit reads x0, features pick it up, wd amplifies.
    // Sources sit at x0 = +1, targets at x0 = -1.
    std::vector<double> theta(base.theta_size(), 0.0);
    theta[0] = 10.0;                          // W1[0][0]
    theta[base.gen_offset() + d.hidden_dim * d.input_dim + d.hidden_dim] = 1.0;  // W2[0][0]
    theta[base.disc_offset()] = 100.0;        // wd[0]
    const ToyNetwork net = ToyNetwork::with_theta(d, std::move(theta));

    Batch b;
    b.source_x = Matrix(3, 2);
    b.target_x = Matrix(3, 2);
    b.source_y = {0, 1, 0};
    for (std::size_t r = 0; r < 3; ++r) {
      b.source_x.at(r, 0) = 1.0;
      b.target_x.at(r, 0) = -1.0;
    }
    const double l = loss_dom(net, b);
    CHECK(l < 0.0);
    CHECK(l > -1e-6);
  }

  SUBCASE("random net matches the straight-line oracle") {
    const std::vector<double> theta(base.theta().begin(), base.theta().end());
    CHECK(loss_dom(base, batch) ==
          doctest::Approx(ref_loss_dom(d, theta, batch)).epsilon(1e-12));
  }
}

TEST_CASE("grad_pair carries structural zeros and the minimax sign convention") {
  const NetDims d{2, 6, 4, 3};
  const ToyNetwork net = ToyNetwork::init(21, d);
  const Batch batch = small_batch(22, d);
  const GradientPair p = grad_pair(net, batch, GradScope::FullTheta);

  CHECK(p.g1.size() == net.theta_size());

  // L_cls never touches theta_d; L_dom never touches theta_c
  for (std::size_t i = net.disc_offset(); i < net.cls_offset(); ++i) CHECK(p.g2[i] == 0.0);
  for (std::size_t i = net.cls_offset(); i < net.theta_size(); ++i) CHECK(p.g1[i] == 0.0);

  // theta_d block of g1 is the gradient of -L_dom
  const ParamVector dom = grad_loss_dom(net, batch);
  for (std::size_t i = net.disc_offset(); i < net.cls_offset(); ++i) {
    CHECK(p.g1[i] == -dom[i]);
  }
  for (std::size_t i = 0; i < net.gen_size(); ++i) CHECK(p.g1[i] == dom[i]);
}

TEST_CASE("full and shared scopes agree on the inner product exactly") {
  const NetDims d{3, 5, 4, 2};
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const ToyNetwork net = ToyNetwork::init(seed, d);
    const Batch batch = small_batch(100 + seed, d);
    const GradientPair full = grad_pair(net, batch, GradScope::FullTheta);
    const GradientPair shared = grad_pair(net, batch, GradScope::SharedOnly);
    CHECK(shared.g1.size() == net.gen_size());
    CHECK(dot(full.g1, full.g2) == dot(shared.g1, shared.g2));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  const NetDims d{2, 5, 3, 2};
  const double eps = 1e-5;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ToyNetwork net = ToyNetwork::init(seed, d);
    const Batch batch = small_batch(200 + seed, d);
    const std::vector<double> theta(net.theta().begin(), net.theta().end());

    const ParamVector dom = grad_loss_dom(net, batch);
    const ParamVector cls = grad_loss_cls(net, batch);

    auto f_dom = [&](const std::vector<double>& t) {
      return loss_dom(ToyNetwork::with_theta(d, t), batch);
    };
    auto f_cls = [&](const std::vector<double>& t) {
      return loss_cls(ToyNetwork::with_theta(d, t), batch);
    };

    oracle::Gen gen(300 + seed);
    for (int k = 0; k < 20; ++k) {
      const auto i = static_cast<std::size_t>(gen.uniform(0, static_cast<double>(theta.size())));
      const double fd_dom = oracle::finite_diff(f_dom, theta, i, eps);
      const double fd_cls = oracle::finite_diff(f_cls, theta, i, eps);
      const double denom_dom = std::max({std::abs(dom[i]), std::abs(fd_dom), 1e-8});
      const double denom_cls = std::max({std::abs(cls[i]), std::abs(fd_cls), 1e-8});
      CHECK(std::abs(dom[i] - fd_dom) / denom_dom < 1e-4);
      CHECK(std::abs(cls[i] - fd_cls) / denom_cls < 1e-4);
    }
  }
}

TEST_CASE("grad_pair components match the signed finite-difference oracle") {
  const NetDims d{2, 4, 3, 2};
  const ToyNetwork net = ToyNetwork::init(9, d);
  const Batch batch = small_batch(400, d);
  const std::vector<double> theta(net.theta().begin(), net.theta().end());
  const GradientPair p = grad_pair(net, batch, GradScope::FullTheta);

  auto f_dom = [&](const std::vector<double>& t) {
    return loss_dom(ToyNetwork::with_theta(d, t), batch);
  };
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double expected = oracle::finite_diff(f_dom, theta, i, 1e-5);
    if (i >= net.disc_offset() && i < net.cls_offset()) expected = -expected;
    const double denom = std::max({std::abs(p.g1[i]), std::abs(expected), 1e-8});
    CHECK(std::abs(p.g1[i] - expected) / denom < 1e-4);
  }
}

TEST_CASE("sgd_step block conventions") {
  const NetDims d{2, 3, 2, 2};
  const ToyNetwork net = ToyNetwork::init(17, d);

  SUBCASE("zero update leaves the network unchanged") {
    const ToyNetwork out = sgd_step(net, ParamVector::zeros(net.theta_size()), 0.1);
    CHECK(std::vector<double>(out.theta().begin(), out.theta().end()) ==
          std::vector<double>(net.theta().begin(), net.theta().end()));
  }

  SUBCASE("unit basis updates move one parameter by -1 or +1") {
    // minimized block: decrement
    std::vector<double> u(net.theta_size(), 0.0);
    u[0] = 1.0;
    const ToyNetwork a = sgd_step(net, ParamVector(u), 1.0);
    CHECK(a.theta()[0] == doctest::Approx(net.theta()[0] - 1.0));

    // discriminator block: increment
    std::fill(u.begin(), u.end(), 0.0);
    u[net.disc_offset()] = 1.0;
    const ToyNetwork b = sgd_step(net, ParamVector(u), 1.0);
    CHECK(b.theta()[net.disc_offset()] == doctest::Approx(net.theta()[net.disc_offset()] + 1.0));
  }

  SUBCASE("two half steps equal one full step") {
    oracle::Gen gen(5);
    const ParamVector u(gen.vector(net.theta_size()));
    const ToyNetwork half = sgd_step(sgd_step(net, u, 0.025), u, 0.025);
    const ToyNetwork full = sgd_step(net, u, 0.05);
    for (std::size_t i = 0; i < net.theta_size(); ++i) {
      CHECK(half.theta()[i] == doctest::Approx(full.theta()[i]).epsilon(1e-12));
    }
  }

  SUBCASE("shared-scope update touches only the generator block") {
    std::vector<double> u(net.gen_size(), 1.0);
    const ToyNetwork out = sgd_step(net, ParamVector(u), 0.5);
    for (std::size_t i = 0; i < net.gen_size(); ++i) {
      CHECK(out.theta()[i] == doctest::Approx(net.theta()[i] - 0.5));
    }
    for (std::size_t i = net.gen_size(); i < net.theta_size(); ++i) {
      CHECK(out.theta()[i] == net.theta()[i]);
    }
  }

  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(sgd_step(net, ParamVector::zeros(3), 0.1), DimensionError);
  }
}

TEST_CASE("pure classification SGD descends monotonically on separable blobs") {
  BlobsSpec spec;
  spec.seed = 42;
  spec.num_classes = 2;
  spec.per_class = 40;
  spec.noise_sigma = 0.3;
  const Dataset data = make_blobs(spec);

  const NetDims d{2, 8, 4, 2};
  ToyNetwork net = ToyNetwork::init(1, d);
  Batch full;
  full.source_x = data.source_x;
  full.source_y = data.source_y;
  full.target_x = data.target_x;

  double prev = loss_cls(net, full);
  for (int step = 0; step < 50; ++step) {
    net = sgd_step(net, grad_loss_cls(net, full), 0.05);
    const double cur = loss_cls(net, full);
    CHECK(cur < prev + 1e-12);
    prev = cur;
  }
}

}  // TEST_SUITE
