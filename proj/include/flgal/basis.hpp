#pragma once

// Trigonometric basis on [0,1], weight-sequence algebra, weighted norms and
// the coefficient-space weak-derivative transform.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flgal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double two_pi = 6.283185307179586476925286766559;

// psi_1(t) = 1, psi_{2k}(t) = sqrt(2) cos(2 pi k t), psi_{2k+1}(t) = sqrt(2) sin(2 pi k t)
inline double eval_basis(long j, double t) {
  if (j < 1) throw std::domain_error("eval_basis: index must be >= 1");
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("eval_basis: t must lie in [0,1]");
  if (j == 1) return 1.0;
  const double k = static_cast<double>(j / 2);
  if (j % 2 == 0) return std::sqrt(2.0) * std::cos(two_pi * k * t);
  return std::sqrt(2.0) * std::sin(two_pi * k * t);
}

enum class WeightKind { Constant, Sobolev, PolyDecay, ExpDecay, Explicit };

// Lazily evaluated positive weight sequence, normalized so w(1) = 1 for the
// formula-based kinds.
class WeightSequence {
public:
  static WeightSequence constant() { return WeightSequence(WeightKind::Constant, 0.0); }

  // w(1)=1, w(2k)=w(2k+1)=k^{2p}; noninteger p is allowed.
  static WeightSequence sobolev(double p) {
    if (p < 0.0) throw std::invalid_argument("WeightSequence::sobolev: p must be >= 0");
    return WeightSequence(WeightKind::Sobolev, p);
  }

  // w(1)=1, w(j)=j^{-2a}, j>=2; summable for a > 1/2.
  static WeightSequence poly_decay(double a) {
    if (!(a > 0.5)) throw std::invalid_argument("WeightSequence::poly_decay: a must be > 1/2");
    return WeightSequence(WeightKind::PolyDecay, a);
  }

  // w(1)=1, w(j)=exp(-j^{2a}), j>=2.
  static WeightSequence exp_decay(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("WeightSequence::exp_decay: a must be > 0");
    return WeightSequence(WeightKind::ExpDecay, a);
  }

  static WeightSequence explicit_values(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("WeightSequence::explicit_values: empty");
    for (double v : values)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("WeightSequence::explicit_values: entries must be positive and finite");
    WeightSequence w(WeightKind::Explicit, 0.0);
    w.values_ = std::move(values);
    return w;
  }

  double operator()(long j) const {
    if (j < 1) throw std::domain_error("WeightSequence: index must be >= 1");
    switch (kind_) {
      case WeightKind::Constant: return 1.0;
      case WeightKind::Sobolev: {
        if (j == 1) return 1.0;
        return std::pow(static_cast<double>(j / 2), 2.0 * param_);
      }
      case WeightKind::PolyDecay:
        if (j == 1) return 1.0;
        return std::pow(static_cast<double>(j), -2.0 * param_);
      case WeightKind::ExpDecay:
        if (j == 1) return 1.0;
        return std::exp(-std::pow(static_cast<double>(j), 2.0 * param_));
      case WeightKind::Explicit:
        if (static_cast<std::size_t>(j) > values_.size())
          throw std::domain_error("WeightSequence: index beyond explicit values");
        return values_[static_cast<std::size_t>(j - 1)];
    }
    throw std::logic_error("WeightSequence: unknown kind");
  }

  WeightKind kind() const { return kind_; }
  double param() const { return param_; }
  const std::vector<double>& values() const { return values_; }

private:
  WeightSequence(WeightKind kind, double param) : kind_(kind), param_(param) {}
  WeightKind kind_;
  double param_;
  std::vector<double> values_;
};

// sum_{j<=J} w(j) f_j^2; the squared L2 norm under Constant weights (Parseval).
inline double weighted_norm_sq(const Vector& f, const WeightSequence& w) {
  double acc = 0.0;
  for (long j = 1; j <= f.size(); ++j) {
    const double c = f[j - 1];
    acc += w(j) * c * c;
  }
  return acc;
}

// Coefficients of the s-th weak derivative in the same real trig basis.
// One derivative maps the frequency-k pair (c,d) to (2 pi k d, -2 pi k c);
// s-fold application is exactly s single steps, so composition is bit-exact.
inline Vector derivative_transform(const Vector& f, int s) {
  if (s < 0) throw std::invalid_argument("derivative_transform: s must be >= 0");
  Vector out = f;
  const long J = f.size();
  for (int step = 0; step < s; ++step) {
    Vector next = Vector::Zero(J);
    for (long k = 1; 2 * k <= J; ++k) {
      const double c = out[2 * k - 1];
      const double d = (2 * k + 1 <= J) ? out[2 * k] : 0.0;
      const double scale = two_pi * static_cast<double>(k);
      next[2 * k - 1] = scale * d;
      if (2 * k + 1 <= J) next[2 * k] = -scale * c;
    }
    out = next;  // constant term drops to zero on the first step
  }
  return out;
}

}  // namespace flgal
