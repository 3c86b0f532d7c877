#pragma once

// Empirical moment matrices, Galerkin solve, the spectral-norm threshold rule
// and the derivative estimator.

#include "flgal/model.hpp"

#include <limits>

namespace flgal {

struct MomentMatrices {
  Vector g_hat;      // length m
  Matrix gamma_hat;  // m x m, symmetric
  long n = 0;
};

// Relative cutoff below which gamma_hat is reported singular.
inline constexpr double singularity_rtol = 1e-14;

// [g]_l = (1/n) sum_i Y_i [X_i]_l, [Gamma]_{l,j} = (1/n) sum_i [X_i]_l [X_i]_j.
// Accumulation is chunked with a fixed chunk size and summed in index order,
// so the result does not depend on how callers parallelize replications.
inline MomentMatrices empirical_moments(const Sample& sample, long m) {
  if (m < 1) throw std::invalid_argument("empirical_moments: m must be >= 1");
  if (m > sample.truncation()) throw std::invalid_argument("empirical_moments: m exceeds truncation");
  const long n = sample.n();
  constexpr long chunk = 1024;

  MomentMatrices mom;
  mom.n = n;
  mom.g_hat = Vector::Zero(m);
  mom.gamma_hat = Matrix::Zero(m, m);
  const auto xm = sample.x.leftCols(m);
  for (long lo = 0; lo < n; lo += chunk) {
    const long len = std::min(chunk, n - lo);
    const auto block = xm.middleRows(lo, len);
    mom.g_hat.noalias() += block.transpose() * sample.y.segment(lo, len);
    mom.gamma_hat.noalias() += block.transpose() * block;
  }
  mom.g_hat /= static_cast<double>(n);
  mom.gamma_hat /= static_cast<double>(n);
  mom.gamma_hat = 0.5 * (mom.gamma_hat + mom.gamma_hat.transpose()).eval();
  return mom;
}

struct GalerkinSolution {
  Vector coeffs;          // length m; zero when singular
  bool singular = false;
  double sigma_min = 0.0;  // smallest eigenvalue of the symmetric PSD matrix
};

// Solves [Gamma]_m b = [g]_m through the symmetric eigendecomposition; the
// spectral norm of the inverse is 1/sigma_min, never a formed inverse.
inline GalerkinSolution galerkin_solve(const MomentMatrices& mom) {
  const long m = mom.g_hat.size();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(mom.gamma_hat);
  GalerkinSolution sol;
  sol.sigma_min = eig.eigenvalues()[0];
  const double sigma_max = eig.eigenvalues()[m - 1];
  if (!(sol.sigma_min > singularity_rtol * std::abs(sigma_max))) {
    sol.singular = true;
    sol.coeffs = Vector::Zero(m);
    return sol;
  }
  const Vector rotated = eig.eigenvectors().transpose() * mom.g_hat;
  sol.coeffs = eig.eigenvectors() * (rotated.array() / eig.eigenvalues().array()).matrix();
  return sol;
}

struct EstimateResult {
  Vector beta_hat;         // length J; zero beyond index m, zero everywhere off Omega
  long m = 0;
  double sigma_min = 0.0;
  bool omega_held = false;  // the threshold event Omega
  int s = 0;                // derivative order (0 for the plain estimator)
};

// Thresholded projection estimator: the Galerkin solution when gamma_hat is
// nonsingular and ||gamma_hat^{-1}||^power <= gamma, the zero function otherwise.
inline EstimateResult threshold_estimate(const Sample& sample, long m, double gamma,
                                         int threshold_power = 1) {
  if (!(gamma > 0.0)) throw std::invalid_argument("threshold_estimate: gamma must be > 0");
  if (threshold_power != 1 && threshold_power != 2)
    throw std::invalid_argument("threshold_estimate: threshold_power must be 1 or 2");
  const MomentMatrices mom = empirical_moments(sample, m);
  const GalerkinSolution sol = galerkin_solve(mom);

  EstimateResult res;
  res.m = m;
  res.sigma_min = sol.sigma_min;
  res.beta_hat = Vector::Zero(sample.truncation());
  if (!sol.singular) {
    const double inv_norm = 1.0 / sol.sigma_min;
    const double stat = threshold_power == 1 ? inv_norm : inv_norm * inv_norm;
    res.omega_held = stat <= gamma;
  }
  if (res.omega_held) res.beta_hat.head(m) = sol.coeffs;
  return res;
}

// Threshold estimate followed by the s-fold derivative transform; the
// threshold decision is unchanged (zero commutes with the transform).
inline EstimateResult derivative_estimate(const Sample& sample, long m, int s, double gamma,
                                          int threshold_power = 1) {
  EstimateResult res = threshold_estimate(sample, m, gamma, threshold_power);
  res.s = s;
  if (s > 0 && res.omega_held) res.beta_hat = derivative_transform(res.beta_hat, s);
  return res;
}

// Population Galerkin solution for a diagonal covariance operator: g_j =
// lambda_j beta_j, so the solve restores beta_j for j <= m and zeroes the tail.
inline Vector oracle_galerkin(const WeightSequence& eigenvalues, const Vector& beta_true, long m) {
  const long J = beta_true.size();
  if (m > J) throw std::invalid_argument("oracle_galerkin: m exceeds truncation");
  Vector out = Vector::Zero(J);
  for (long j = 1; j <= m; ++j) {
    const double g_j = eigenvalues(j) * beta_true[j - 1];
    out[j - 1] = g_j / eigenvalues(j);
  }
  return out;
}

}  // namespace flgal
