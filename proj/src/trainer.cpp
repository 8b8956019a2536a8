#include "trainer.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace gradharm {

namespace {

void require_config(const TrainConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw InvalidArgumentError("eta must be > 0");
  if (cfg.iterations < 1) throw InvalidArgumentError("iterations must be >= 1");
  if (cfg.batch_size < 1) throw InvalidArgumentError("batch_size must be >= 1");
  if (cfg.eval_every < 1) throw InvalidArgumentError("eval_every must be >= 1");
}

// Source and target draws come from independent seeded streams; both sides
// use the same batch size.
Batch sample_batch(const Dataset& data, std::size_t batch_size, Rng& source_rng,
                   Rng& target_rng) {
  Batch b;
  b.source_x = Matrix(batch_size, data.meta.input_dim);
  b.source_y.resize(batch_size);
  b.target_x = Matrix(batch_size, data.meta.input_dim);
  for (std::size_t r = 0; r < batch_size; ++r) {
    const std::size_t i = source_rng.index_below(data.source_x.rows);
    std::copy(data.source_x.row(i).begin(), data.source_x.row(i).end(), b.source_x.row(r).begin());
    b.source_y[r] = data.source_y[i];
  }
  for (std::size_t r = 0; r < batch_size; ++r) {
    const std::size_t j = target_rng.index_below(data.target_x.rows);
    std::copy(data.target_x.row(j).begin(), data.target_x.row(j).end(), b.target_x.row(r).begin());
  }
  return b;
}

// Weights for the dynamically reweighted loss; GHppRotate has no scalar
// equivalent and is handled at the gradient level by the caller. The flip
// ablations negate one task gradient wholesale.
Weights method_weights(const HarmonizeMethod& m, const GradientPair& scoped) {
  switch (m.kind) {
    case MethodKind::None: return {1.0, 1.0};
    case MethodKind::GH: return gh_weights(scoped);
    case MethodKind::GHppWeighted: return ghpp_weights(scoped, m.lambda);
    case MethodKind::FlipG1: return {-1.0, 1.0};
    case MethodKind::FlipG2: return {1.0, -1.0};
    case MethodKind::GHppRotate: break;
  }
  throw InvalidArgumentError("no weight form for this method");
}

// The discriminator's ascent weight. The flip ablations reorient the task
// update only; the adversary keeps its plain objective.
double discriminator_weight(const HarmonizeMethod& m, const Weights& w, bool weighted) {
  if (!weighted) return 1.0;
  if (m.kind == MethodKind::FlipG1 || m.kind == MethodKind::FlipG2) return 1.0;
  return w.tau1;
}

}  // namespace

TrainReport train(const TrainConfig& cfg, const Dataset& data) {
  require_config(cfg);
  if (data.source_x.rows < 1 || data.target_x.rows < 1) {
    throw InvalidArgumentError("dataset must contain source and target samples");
  }

  NetDims dims{data.meta.input_dim, cfg.hidden_dim, cfg.feature_dim, data.meta.num_classes};
  ToyNetwork net = ToyNetwork::init(substream_seed(cfg.seed, "init"), dims);
  Rng source_rng(substream_seed(cfg.seed, "batch-source"));
  Rng target_rng(substream_seed(cfg.seed, "batch-target"));

  TrainReport report;
  report.records.reserve(cfg.iterations);
  if (cfg.record_theta) {
    report.theta_initial.assign(net.theta().begin(), net.theta().end());
    report.theta_trace.reserve(cfg.iterations);
  }

  const std::size_t d0 = net.disc_offset();
  const std::size_t d1 = d0 + net.disc_size();
  std::size_t conflicts = 0;

  for (std::size_t iter = 1; iter <= cfg.iterations; ++iter) {
    const Batch batch = sample_batch(data, cfg.batch_size, source_rng, target_rng);

    StepRecord rec;
    rec.iter = iter;
    rec.loss_dom = loss_dom(net, batch);
    rec.loss_cls = loss_cls(net, batch);
    if (!std::isfinite(rec.loss_dom) || !std::isfinite(rec.loss_cls)) {
      throw NumericalError("non-finite loss", static_cast<long long>(iter));
    }

    const GradientPair full = grad_pair(net, batch, GradScope::FullTheta);
    // tau and the conflict decision come from the configured scope; the
    // update itself always covers the full parameter vector. The shared
    // restriction is the theta_g prefix of the full pair.
    const GradientPair scoped =
        cfg.scope == GradScope::SharedOnly
            ? GradientPair(
                  ParamVector({full.g1.values().begin(),
                               full.g1.values().begin() + static_cast<long>(net.gen_size())}),
                  ParamVector({full.g2.values().begin(),
                               full.g2.values().begin() + static_cast<long>(net.gen_size())}))
            : full;

    rec.inner_product = dot(scoped.g1, scoped.g2);
    rec.conflict = detect_conflict(scoped);
    rec.angle_before = (norm_sq(scoped.g1) > 0.0 && norm_sq(scoped.g2) > 0.0)
                           ? angle(scoped.g1, scoped.g2)
                           : std::numeric_limits<double>::quiet_NaN();

    std::vector<double> update(net.theta_size());
    if (cfg.method.kind == MethodKind::GHppRotate) {
      // No equivalent weight form: descend the rotated aggregate directly.
      const HarmonizeResult hr = harmonize(cfg.method, full);
      for (std::size_t i = 0; i < update.size(); ++i) update[i] = hr.aggregate[i];
      // sgd_step increments the theta_d block, so flip it to keep the net
      // effect a uniform descent of the aggregate.
      for (std::size_t i = d0; i < d1; ++i) update[i] = -update[i];
      rec.tau1 = hr.tau1;
      rec.tau2 = hr.tau2;
    } else {
      const Weights w = method_weights(cfg.method, scoped);
      rec.tau1 = w.tau1;
      rec.tau2 = w.tau2;
      if (!std::isfinite(w.tau1) || !std::isfinite(w.tau2)) {
        throw NumericalError("non-finite loss weight", static_cast<long long>(iter));
      }
      for (std::size_t i = 0; i < update.size(); ++i) {
        update[i] = w.tau1 * full.g1[i] + w.tau2 * full.g2[i];
      }
      const double tau_d = discriminator_weight(cfg.method, w, cfg.discriminator_weighted);
      // g1 already carries grad(-L_dom) on the theta_d block; sgd_step
      // increments that block, so hand it the raw-gradient orientation.
      for (std::size_t i = d0; i < d1; ++i) update[i] = -tau_d * full.g1[i];
    }

    net = sgd_step(net, ParamVector(std::move(update)), cfg.eta);

    if (iter % cfg.eval_every == 0 || iter == cfg.iterations) {
      rec.target_accuracy = evaluate(net, data);
      const Matrix fs = features(net, data.source_x);
      const Matrix ft = features(net, data.target_x);
      rec.mmd = mmd_rbf(fs, ft);
      rec.jw = discriminability_jw(fs, data.source_y);
    }
    if (cfg.record_gradients) {
      rec.g1 = scoped.g1;
      rec.g2 = scoped.g2;
    }
    if (cfg.record_theta) {
      report.theta_trace.emplace_back(net.theta().begin(), net.theta().end());
    }
    if (rec.conflict) ++conflicts;
    report.records.push_back(std::move(rec));
  }

  report.final_accuracy = evaluate(net, data);
  report.obtuse_fraction =
      static_cast<double>(conflicts) / static_cast<double>(report.records.size());
  report.final_net = std::move(net);
  return report;
}

double evaluate(const ToyNetwork& net, const Dataset& data) {
  std::size_t labeled = 0, correct = 0;
  const std::vector<int> pred = predict(net, data.target_x);
  for (std::size_t r = 0; r < data.target_x.rows; ++r) {
    if (data.target_y[r] < 0) continue;
    ++labeled;
    if (pred[r] == data.target_y[r]) ++correct;
  }
  if (labeled == 0) throw InvalidArgumentError("no labeled target samples to evaluate");
  return static_cast<double>(correct) / static_cast<double>(labeled);
}

double mmd_rbf(const Matrix& a, const Matrix& b) {
  if (a.rows == 0 || b.rows == 0) throw InvalidArgumentError("mmd requires nonempty samples");
  if (a.cols != b.cols) throw DimensionError("mmd feature dimensions differ");

  const std::size_t m = a.rows, n = b.rows, total = m + n;
  auto row = [&](std::size_t i) { return i < m ? a.row(i) : b.row(i - m); };
  auto dist_sq = [&](std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = x[j] - y[j];
      s += d * d;
    }
    return s;
  };

  // Median heuristic over all pooled pairs (i < j).
  std::vector<double> dists;
  dists.reserve(total * (total - 1) / 2);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = i + 1; j < total; ++j) {
      dists.push_back(std::sqrt(dist_sq(row(i), row(j))));
    }
  }
  double sigma = 1.0;
  if (!dists.empty()) {
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<long>(mid), dists.end());
    sigma = dists[mid];
    if (sigma <= 0.0) sigma = 1.0;
  }
  const double denom = 2.0 * sigma * sigma;

  auto kernel_sum = [&](const Matrix& x, const Matrix& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      for (std::size_t j = 0; j < y.rows; ++j) {
        s += std::exp(-dist_sq(x.row(i), y.row(j)) / denom);
      }
    }
    return s;
  };

  const double saa = kernel_sum(a, a) / (static_cast<double>(m) * static_cast<double>(m));
  const double sbb = kernel_sum(b, b) / (static_cast<double>(n) * static_cast<double>(n));
  const double sab = kernel_sum(a, b) / (static_cast<double>(m) * static_cast<double>(n));
  return saa + sbb - 2.0 * sab;
}

double discriminability_jw(const Matrix& features, const std::vector<int>& labels) {
  if (features.rows != labels.size()) throw DimensionError("feature/label count mismatch");
  const std::size_t d = features.cols;

  int max_label = -1;
  for (int y : labels) max_label = std::max(max_label, y);
  if (max_label < 1) throw InvalidArgumentError("J(W) requires at least 2 classes");
  const std::size_t k = static_cast<std::size_t>(max_label) + 1;

  std::vector<std::size_t> counts(k, 0);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(static_cast<long>(k), static_cast<long>(d));
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<long>(d));
  for (std::size_t r = 0; r < features.rows; ++r) {
    const int y = labels[r];
    if (y < 0) throw InvalidArgumentError("negative label in J(W) input");
    ++counts[static_cast<std::size_t>(y)];
    for (std::size_t j = 0; j < d; ++j) {
      means(y, static_cast<long>(j)) += features.at(r, j);
      mean(static_cast<long>(j)) += features.at(r, j);
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] < 2) throw InvalidArgumentError("each class needs >= 2 samples for J(W)");
    means.row(static_cast<long>(c)) /= static_cast<double>(counts[c]);
  }
  mean /= static_cast<double>(features.rows);

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(static_cast<long>(d), static_cast<long>(d));
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(static_cast<long>(d), static_cast<long>(d));
  Eigen::VectorXd diff(static_cast<long>(d));
  for (std::size_t r = 0; r < features.rows; ++r) {
    const int y = labels[r];
    for (std::size_t j = 0; j < d; ++j) {
      diff(static_cast<long>(j)) = features.at(r, j) - means(y, static_cast<long>(j));
    }
    sw += diff * diff.transpose();
  }
  for (std::size_t c = 0; c < k; ++c) {
    diff = means.row(static_cast<long>(c)).transpose() - mean;
    sb += static_cast<double>(counts[c]) * (diff * diff.transpose());
  }
  sw += 1e-6 * Eigen::MatrixXd::Identity(static_cast<long>(d), static_cast<long>(d));

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(sb, sw);
  if (solver.info() != Eigen::Success) throw NumericalError("generalized eigensolve failed");
  const double jw = solver.eigenvalues().maxCoeff();
  return jw < 0.0 ? 0.0 : jw;  // clip tiny negative rounding
}

}  // namespace gradharm
