#pragma once

// Theoretical rate machinery: the m*/delta* balancing rule, closed-form rate
// exponents, side-condition checks, and log-log slope fitting.

#include "flgal/basis.hpp"

#include <algorithm>
#include <array>

namespace flgal {

struct Balancing {
  long m_star = 0;
  double delta_star = 0.0;   // omega_{m*} / b_{m*}
  double achieved_delta = 0.0;  // value of the balancing expression at m*
};

// Smallest m >= 1 with (b_m / (n omega_m)) sum_{j<=m} omega_j/upsilon_j >= 1.
inline Balancing m_star(long n, const WeightSequence& b, const WeightSequence& omega,
                        const WeightSequence& upsilon, long cap = 1000000) {
  if (n < 2) throw std::invalid_argument("m_star: n must be >= 2");
  double partial = 0.0;
  for (long m = 1; m <= cap; ++m) {
    partial += omega(m) / upsilon(m);
    const double expr = b(m) / (static_cast<double>(n) * omega(m)) * partial;
    if (expr >= 1.0) {
      Balancing out;
      out.m_star = m;
      out.delta_star = omega(m) / b(m);
      out.achieved_delta = expr;
      return out;
    }
  }
  throw std::runtime_error("m_star: search cap exceeded");
}

enum class DecayKind { Poly, Exp };
enum class RateTarget { Prediction, DerivativeL2 };

struct RateCase {
  DecayKind decay = DecayKind::Poly;
  double a = 1.0;
  double p = 1.0;
  int s = 0;  // ignored for Prediction
  RateTarget target = RateTarget::Prediction;

  void validate() const {
    if (decay == DecayKind::Poly && !(a > 0.5))
      throw std::invalid_argument("RateCase: polynomial decay requires a > 1/2");
    if (decay == DecayKind::Exp && !(a > 0.0))
      throw std::invalid_argument("RateCase: exponential decay requires a > 0");
    if (target == RateTarget::DerivativeL2 && (s < 0 || s > p))
      throw std::domain_error("RateCase: need 0 <= s <= p");
  }
};

struct RateExponent {
  double n_power = 0.0;
  double log_power = 0.0;
};

// Poly prediction:  n^{-(2p+2a)/(2p+2a+1)}
// Exp prediction:   n^{-1} (log n)^{1/(2a)}
// Poly derivative:  n^{-(2p-2s)/(2p+2a+1)}
// Exp derivative:   (log n)^{-(p-s)/a}
inline RateExponent theoretical_exponent(const RateCase& c) {
  c.validate();
  RateExponent e;
  if (c.target == RateTarget::Prediction) {
    if (c.decay == DecayKind::Poly) {
      e.n_power = -(2.0 * c.p + 2.0 * c.a) / (2.0 * c.p + 2.0 * c.a + 1.0);
    } else {
      e.n_power = -1.0;
      e.log_power = 1.0 / (2.0 * c.a);
    }
  } else {
    if (c.decay == DecayKind::Poly) {
      e.n_power = -(2.0 * c.p - 2.0 * c.s) / (2.0 * c.p + 2.0 * c.a + 1.0);
    } else {
      e.log_power = -(c.p - c.s) / c.a;
    }
  }
  return e;
}

// The three weight sequences (b, omega, upsilon) a RateCase induces.
struct CaseSequences {
  WeightSequence b;
  WeightSequence omega;
  WeightSequence upsilon;
};

inline CaseSequences case_sequences(const RateCase& c) {
  c.validate();
  WeightSequence upsilon =
      c.decay == DecayKind::Poly ? WeightSequence::poly_decay(c.a) : WeightSequence::exp_decay(c.a);
  WeightSequence omega = c.target == RateTarget::Prediction
                             ? upsilon
                             : WeightSequence::sobolev(static_cast<double>(c.s));
  return CaseSequences{WeightSequence::sobolev(c.p), omega, upsilon};
}

struct SideConditionReport {
  // ratio 1: m*^{2k} / (delta* n^k); ratio 2: (m*/(delta* n)) max_{j<=m*} omega_j/upsilon_j;
  // ratio 3: m*^{2+k} / n^{k/2-1}
  std::vector<long> n_grid;
  std::vector<long> m_stars;
  std::array<std::vector<double>, 3> ratios;
  std::array<double, 3> max_ratio{};
  std::array<bool, 3> growing{};
  bool moment_ok = true;  // k >= 2 + 8/(2p+2a-1) in the polynomial case
  bool pass = true;       // no growing trend and moment_ok
};

// Evaluates the upper-bound side conditions over a grid of sample sizes.
// "Growing" flags a ratio whose mean over the last third of the grid exceeds
// twice the mean over the first third.
inline SideConditionReport check_side_condition(const RateCase& c, const std::vector<long>& n_grid,
                                                int k) {
  if (k < 4) throw std::invalid_argument("check_side_condition: k must be >= 4");
  if (n_grid.size() < 3) throw std::invalid_argument("check_side_condition: need >= 3 grid points");
  const CaseSequences seq = case_sequences(c);
  SideConditionReport rep;
  rep.n_grid = n_grid;
  for (long n : n_grid) {
    const Balancing bal = m_star(n, seq.b, seq.omega, seq.upsilon);
    rep.m_stars.push_back(bal.m_star);
    const double m = static_cast<double>(bal.m_star);
    const double nn = static_cast<double>(n);
    double sup_ratio = 0.0;
    for (long j = 1; j <= bal.m_star; ++j)
      sup_ratio = std::max(sup_ratio, seq.omega(j) / seq.upsilon(j));
    rep.ratios[0].push_back(std::pow(m, 2.0 * k) / (bal.delta_star * std::pow(nn, k)));
    rep.ratios[1].push_back(m / (bal.delta_star * nn) * sup_ratio);
    rep.ratios[2].push_back(std::pow(m, 2.0 + k) / std::pow(nn, k / 2.0 - 1.0));
  }
  const std::size_t third = std::max<std::size_t>(1, n_grid.size() / 3);
  for (int i = 0; i < 3; ++i) {
    const auto& r = rep.ratios[i];
    rep.max_ratio[i] = *std::max_element(r.begin(), r.end());
    double head = 0.0, tail = 0.0;
    for (std::size_t q = 0; q < third; ++q) {
      head += r[q];
      tail += r[r.size() - 1 - q];
    }
    rep.growing[i] = tail > 2.0 * head;
    if (rep.growing[i]) rep.pass = false;
  }
  if (c.decay == DecayKind::Poly && c.target == RateTarget::Prediction)
    rep.moment_ok = k >= 2.0 + 8.0 / (2.0 * c.p + 2.0 * c.a - 1.0);
  if (!rep.moment_ok) rep.pass = false;
  return rep;
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

// OLS of log(risk) on log(n); the slope is the empirical rate exponent.
inline RateFit fit_rate(const std::vector<long>& n_grid, const std::vector<double>& mean_risks) {
  if (n_grid.size() != mean_risks.size() || n_grid.size() < 3)
    throw std::invalid_argument("fit_rate: need >= 3 matching grid points");
  const std::size_t k = n_grid.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(mean_risks[i] > 0.0)) throw std::invalid_argument("fit_rate: risks must be positive");
    lx[i] = std::log(static_cast<double>(n_grid[i]));
    ly[i] = std::log(mean_risks[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace flgal
