#pragma once

// Risk functionals and the Monte Carlo replication engine.

#include "flgal/estimator.hpp"

#include <atomic>
#include <thread>

namespace flgal {

// Weighted-norm risk ||beta_hat - beta||^2_w in coefficient space.
inline double w_risk(const EstimateResult& est, const Vector& beta_true, const WeightSequence& w) {
  if (est.beta_hat.size() != beta_true.size())
    throw std::invalid_argument("w_risk: truncation mismatch");
  return weighted_norm_sq(est.beta_hat - beta_true, w);
}

// Exact mean squared prediction error <Gamma(beta_hat - beta), beta_hat - beta>
// for the diagonal spec: sum_j lambda(j) (beta_hat_j - beta_j)^2.
inline double prediction_risk(const EstimateResult& est, const Vector& beta_true,
                              const ProcessSpec& proc) {
  if (est.beta_hat.size() != beta_true.size())
    throw std::invalid_argument("prediction_risk: truncation mismatch");
  double acc = 0.0;
  for (long j = 1; j <= beta_true.size(); ++j) {
    const double diff = est.beta_hat[j - 1] - beta_true[j - 1];
    acc += proc.lambda(j) * diff * diff;
  }
  return acc;
}

enum class RiskKind { L2, Sobolev, Prediction, DerivativeL2 };

struct RiskSpec {
  RiskKind kind = RiskKind::Prediction;
  double sobolev_p = 0.0;  // only for RiskKind::Sobolev
};

struct RiskReport {
  long n = 0;
  long m = 0;
  double gamma = 0.0;
  int s = 0;
  RiskKind weight_kind = RiskKind::Prediction;
  long replications = 0;
  double mean_risk = 0.0;
  double std_error = 0.0;
  double omega_frequency = 0.0;
  std::vector<double> per_replication;  // in replication order
};

struct ExperimentParams {
  long n = 0;
  long m = 0;
  double gamma = 0.0;
  int s = 0;
  int threshold_power = 1;
  RiskSpec risk;
  long replications = 2;
  std::uint64_t master_seed = 0;
  unsigned threads = 0;  // 0 -> hardware_concurrency
};

// R independent replications of simulate -> estimate -> risk. Replication r
// uses derive_seed(master_seed, r); per-replication results are stored by
// index and reduced in index order, so the report does not depend on the
// thread count.
inline RiskReport run_experiment(const ProcessSpec& proc, const SlopeSpec& slope,
                                 const ExperimentParams& prm) {
  if (prm.replications < 2) throw std::invalid_argument("run_experiment: need R >= 2");
  if (prm.m > proc.truncation) throw std::invalid_argument("run_experiment: m exceeds truncation");
  proc.validate();
  const Vector beta = make_slope(slope, proc.truncation);
  const Vector beta_target =
      prm.risk.kind == RiskKind::DerivativeL2 ? derivative_transform(beta, prm.s) : beta;

  const WeightSequence w = prm.risk.kind == RiskKind::Sobolev
                               ? WeightSequence::sobolev(prm.risk.sobolev_p)
                               : WeightSequence::constant();

  const long R = prm.replications;
  std::vector<double> risks(static_cast<std::size_t>(R), 0.0);
  std::vector<char> held(static_cast<std::size_t>(R), 0);

  auto one = [&](long r) {
    const std::uint64_t seed = derive_seed(prm.master_seed, static_cast<std::uint64_t>(r));
    const Sample sample = simulate_sample(proc, beta, prm.n, seed);
    const EstimateResult est =
        derivative_estimate(sample, prm.m, prm.s, prm.gamma, prm.threshold_power);
    held[static_cast<std::size_t>(r)] = est.omega_held ? 1 : 0;
    double risk = 0.0;
    switch (prm.risk.kind) {
      case RiskKind::Prediction: risk = prediction_risk(est, beta_target, proc); break;
      case RiskKind::DerivativeL2:
      case RiskKind::L2: risk = w_risk(est, beta_target, WeightSequence::constant()); break;
      case RiskKind::Sobolev: risk = w_risk(est, beta_target, w); break;
    }
    risks[static_cast<std::size_t>(r)] = risk;
  };

  unsigned threads = prm.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : prm.threads;
  if (threads <= 1 || R < 4) {
    for (long r = 0; r < R; ++r) one(r);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (long r = next.fetch_add(1); r < R; r = next.fetch_add(1)) one(r);
      });
    for (auto& th : pool) th.join();
  }

  RiskReport rep;
  rep.n = prm.n;
  rep.m = prm.m;
  rep.gamma = prm.gamma;
  rep.s = prm.s;
  rep.weight_kind = prm.risk.kind;
  rep.replications = R;
  double sum = 0.0;
  long held_count = 0;
  for (long r = 0; r < R; ++r) {
    sum += risks[static_cast<std::size_t>(r)];
    held_count += held[static_cast<std::size_t>(r)];
  }
  rep.mean_risk = sum / static_cast<double>(R);
  double ss = 0.0;
  for (long r = 0; r < R; ++r) {
    const double dev = risks[static_cast<std::size_t>(r)] - rep.mean_risk;
    ss += dev * dev;
  }
  rep.std_error = std::sqrt(ss / static_cast<double>(R - 1)) / std::sqrt(static_cast<double>(R));
  rep.omega_frequency = static_cast<double>(held_count) / static_cast<double>(R);
  rep.per_replication = std::move(risks);
  return rep;
}

}  // namespace flgal
