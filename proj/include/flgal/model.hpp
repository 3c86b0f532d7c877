#pragma once

// Data-generating process: Gaussian regressor with prescribed eigenvalue
// decay in the trig basis, slope functions in Sobolev ellipsoids, error laws,
// seeded simulation, and the Assouad worst-case slope generator.

#include "flgal/basis.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace flgal {

enum class ErrorLaw { Gaussian, ScaledStudentT };

// Regressor design: eigenbasis = trig basis, eigenvalues lambda(j) = c_j * upsilon_j
// with c_j in [1/d, d]. With link_alternate the c_j alternate between 1/d and d
// to stress the link-condition tolerance; otherwise c_j = 1.
struct ProcessSpec {
  WeightSequence decay = WeightSequence::poly_decay(1.0);  // upsilon
  double d = 1.0;
  bool link_alternate = false;
  double sigma = 1.0;
  ErrorLaw error_law = ErrorLaw::Gaussian;
  int student_df = 17;
  long truncation = 128;  // J

  double lambda(long j) const {
    const double c = link_alternate ? (j % 2 == 1 ? 1.0 / d : d) : 1.0;
    return c * decay(j);
  }

  void validate() const {
    if (d < 1.0) throw std::invalid_argument("ProcessSpec: d must be >= 1");
    if (!(sigma >= 0.0)) throw std::invalid_argument("ProcessSpec: sigma must be >= 0");
    if (truncation < 1) throw std::invalid_argument("ProcessSpec: truncation must be >= 1");
    if (error_law == ErrorLaw::ScaledStudentT && student_df < 17)
      throw std::invalid_argument("ProcessSpec: student_df must be >= 17");
    if (decay.kind() == WeightKind::Sobolev)
      throw std::invalid_argument("ProcessSpec: decay must be nonincreasing (Sobolev is increasing)");
    for (long j = 1; j <= truncation; ++j) {
      const double r = lambda(j) / decay(j);
      if (!(r >= 1.0 / d - 1e-12 && r <= d + 1e-12))
        throw std::invalid_argument("ProcessSpec: eigenvalue violates the link condition");
    }
  }
};

struct SlopeSpec {
  double p = 1.0;
  double rho = 1.0;
  std::optional<Vector> explicit_coeffs;  // empty -> smooth default profile
};

// Smooth default profile: beta_1 = c, beta_{2k} = c k^{-(p+1)}, beta_{2k+1} = 0,
// scaled so that the Sobolev(p)-norm squared equals 0.9 * rho.
inline Vector make_slope(const SlopeSpec& spec, long J) {
  if (J < 3) throw std::invalid_argument("make_slope: J must be >= 3");
  if (!(spec.rho > 0.0)) throw std::invalid_argument("make_slope: rho must be > 0");
  const WeightSequence b = WeightSequence::sobolev(spec.p);
  if (spec.explicit_coeffs) {
    const Vector& beta = *spec.explicit_coeffs;
    if (beta.size() != J) throw std::invalid_argument("make_slope: explicit coefficients must have length J");
    const double norm = weighted_norm_sq(beta, b);
    if (norm > spec.rho * (1.0 + 1e-12))
      throw std::invalid_argument("make_slope: explicit slope violates the ellipsoid constraint");
    return beta;
  }
  Vector beta = Vector::Zero(J);
  beta[0] = 1.0;
  for (long k = 1; 2 * k <= J; ++k)
    beta[2 * k - 1] = std::pow(static_cast<double>(k), -(spec.p + 1.0));
  const double c = std::sqrt(0.9 * spec.rho / weighted_norm_sq(beta, b));
  beta *= c;
  return beta;
}

struct Sample {
  Vector y;         // length n
  Matrix x;         // n x J regressor coefficients
  std::uint64_t seed = 0;
  long n() const { return y.size(); }
  long truncation() const { return x.cols(); }
};

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Replication r of a master seed; stable across runs and platforms.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replication) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(replication + 1));
}

// [X_i]_j = sqrt(lambda(j)) xi_ij, Y_i = <beta, X_i> + sigma eps_i.
// Deterministic given the seed; the draw order is fixed (all xi row-major,
// then all eps).
inline Sample simulate_sample(const ProcessSpec& proc, const Vector& beta, long n,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_sample: n must be >= 1");
  const long J = proc.truncation;
  if (beta.size() != J)
    throw std::invalid_argument("simulate_sample: slope truncation must match the process");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Vector sqrt_lambda(J);
  for (long j = 1; j <= J; ++j) sqrt_lambda[j - 1] = std::sqrt(proc.lambda(j));

  Sample s;
  s.seed = seed;
  s.x.resize(n, J);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < J; ++j) s.x(i, j) = sqrt_lambda[j] * gauss(gen);

  s.y.resize(n);
  if (proc.error_law == ErrorLaw::Gaussian) {
    for (long i = 0; i < n; ++i) s.y[i] = s.x.row(i).dot(beta) + proc.sigma * gauss(gen);
  } else {
    std::student_t_distribution<double> tdist(static_cast<double>(proc.student_df));
    const double unit = std::sqrt((proc.student_df - 2.0) / proc.student_df);
    for (long i = 0; i < n; ++i) s.y[i] = s.x.row(i).dot(beta) + proc.sigma * unit * tdist(gen);
  }
  return s;
}

// Worst-case slope beta^theta = sum_{j<=m*} theta_j u_j psi_j with
// u_j^2 = zeta / (n upsilon_j), zeta = min(sigma^2/(2d), rho/Delta).
inline Vector assouad_slope(const std::vector<int>& theta, long n, const WeightSequence& upsilon,
                            double sigma, double d, double rho, double delta_cap, long J) {
  if (!(delta_cap >= 1.0)) throw std::invalid_argument("assouad_slope: Delta must be >= 1");
  const long m = static_cast<long>(theta.size());
  if (m > J) throw std::invalid_argument("assouad_slope: sign vector longer than truncation");
  const double zeta = std::min(sigma * sigma / (2.0 * d), rho / delta_cap);
  Vector beta = Vector::Zero(J);
  for (long j = 1; j <= m; ++j) {
    if (theta[j - 1] != 1 && theta[j - 1] != -1)
      throw std::invalid_argument("assouad_slope: theta components must be +-1");
    beta[j - 1] = theta[j - 1] * std::sqrt(zeta / (static_cast<double>(n) * upsilon(j)));
  }
  return beta;
}

}  // namespace flgal
