#ifndef GRADHARM_TRAINER_HPP
#define GRADHARM_TRAINER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "harmonize.hpp"
#include "scenario.hpp"
#include "toynet.hpp"

namespace gradharm {

struct TrainConfig {
  HarmonizeMethod method;
  double eta = 0.05;
  std::size_t iterations = 500;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  GradScope scope = GradScope::FullTheta;
  std::size_t eval_every = 50;
  bool discriminator_weighted = true;
  std::size_t hidden_dim = 6;
  std::size_t feature_dim = 2;
  // Diagnostics: keep the per-step gradient pair / parameter snapshot in the
  // report (trace export and replay checks).
  bool record_gradients = false;
  bool record_theta = false;
};

// Per-iteration trace. tau fields are NaN for GHppRotate under conflict.
struct StepRecord {
  std::size_t iter = 0;
  double loss_dom = 0.0;
  double loss_cls = 0.0;
  double inner_product = 0.0;  // g1^T g2 over the configured scope
  double tau1 = 1.0;
  double tau2 = 1.0;
  bool conflict = false;
  double angle_before = 0.0;  // NaN if a gradient vanished
  std::optional<double> target_accuracy;  // eval iterations only
  std::optional<double> mmd;
  std::optional<double> jw;
  std::optional<ParamVector> g1;  // when record_gradients
  std::optional<ParamVector> g2;
};

struct TrainReport {
  std::vector<StepRecord> records;
  double final_accuracy = 0.0;
  double obtuse_fraction = 0.0;  // #conflicting records / #records
  std::optional<ToyNetwork> final_net;
  std::vector<double> theta_initial;             // when record_theta
  std::vector<std::vector<double>> theta_trace;  // theta after each step
};

// Runs Algorithm 1: per iteration sample a seeded mini-batch, compute both
// losses and the gradient pair, derive tau from the configured method, apply
// the reweighted update (theta_d ascends tau1*L_dom, or plain L_dom when
// discriminator_weighted is false) and log a StepRecord. Aborts with a
// NumericalError naming the iteration when a loss turns non-finite.
TrainReport train(const TrainConfig& cfg, const Dataset& data);

// Fraction of labeled target samples classified correctly.
double evaluate(const ToyNetwork& net, const Dataset& data);

// Squared maximum mean discrepancy with a Gaussian kernel; bandwidth is the
// median pairwise distance over the pooled sample, biased V-statistic.
double mmd_rbf(const Matrix& a, const Matrix& b);

// LDA criterion: largest generalized eigenvalue of between-class scatter
// against within-class scatter (regularized by 1e-6 I).
double discriminability_jw(const Matrix& features, const std::vector<int>& labels);

}  // namespace gradharm

#endif
