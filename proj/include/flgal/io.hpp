#pragma once

// Experiment configuration (JSON), result serialization and CSV emission.
// JSON output uses ordered maps for stable key order; CSV uses ',' separators,
// '.' decimals, a header row and LF line endings.

#include "flgal/rates.hpp"
#include "flgal/risk.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace flgal {

using Json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MRule { Explicit, MStar, PolyPower, ExpLog };
enum class GammaRule { N, EightD3OverUpsilonM, Explicit };

struct ExperimentConfig {
  // process
  DecayKind decay = DecayKind::Poly;
  double a = 1.0;
  double d = 1.0;
  bool link_alternate = false;
  double sigma = 0.5;
  ErrorLaw error_law = ErrorLaw::Gaussian;
  int student_df = 17;
  long truncation = 0;  // 0 -> max(128, 4 * m_max)

  // slope
  double p = 1.0;
  double rho = 1.0;
  std::optional<std::vector<double>> slope_coeffs;

  // estimator
  MRule m_rule = MRule::PolyPower;
  long m_explicit = 0;
  GammaRule gamma_rule = GammaRule::N;
  double gamma_explicit = 0.0;
  int s = 0;
  int threshold_power = 1;
  bool allow_s_gt_p = false;

  // experiment
  std::vector<long> n_grid = {500, 1000, 2000, 4000, 8000};
  long replications = 200;
  std::uint64_t master_seed = 42;
  RiskKind risk_kind = RiskKind::Prediction;
  double risk_sobolev_p = 0.0;
  double tolerance = 0.2;
  unsigned threads = 0;

  // output
  std::string output_dir = "out";

  WeightSequence upsilon() const {
    return decay == DecayKind::Poly ? WeightSequence::poly_decay(a) : WeightSequence::exp_decay(a);
  }

  long resolve_m(long n) const {
    switch (m_rule) {
      case MRule::Explicit: return m_explicit;
      case MRule::PolyPower:
        return static_cast<long>(std::ceil(std::pow(n, 1.0 / (2.0 * p + 2.0 * a + 1.0))));
      case MRule::ExpLog:
        return static_cast<long>(std::ceil(std::pow(std::log(static_cast<double>(n)), 1.0 / (2.0 * a))));
      case MRule::MStar: {
        const CaseSequences seq = case_sequences(rate_case());
        return flgal::m_star(n, seq.b, seq.omega, seq.upsilon).m_star;
      }
    }
    throw std::logic_error("resolve_m: unknown rule");
  }

  double resolve_gamma(long n, long m) const {
    switch (gamma_rule) {
      case GammaRule::N: return static_cast<double>(n);
      case GammaRule::EightD3OverUpsilonM: return 8.0 * d * d * d / upsilon()(m);
      case GammaRule::Explicit: return gamma_explicit;
    }
    throw std::logic_error("resolve_gamma: unknown rule");
  }

  long resolve_truncation() const {
    if (truncation > 0) return truncation;
    long m_max = 1;
    for (long n : n_grid) m_max = std::max(m_max, resolve_m(n));
    return std::max<long>(128, 4 * m_max);
  }

  RateCase rate_case() const {
    RateCase c;
    c.decay = decay;
    c.a = a;
    c.p = p;
    c.s = s;
    c.target = risk_kind == RiskKind::DerivativeL2 ? RateTarget::DerivativeL2 : RateTarget::Prediction;
    return c;
  }

  ProcessSpec process() const {
    ProcessSpec proc;
    proc.decay = upsilon();
    proc.d = d;
    proc.link_alternate = link_alternate;
    proc.sigma = sigma;
    proc.error_law = error_law;
    proc.student_df = student_df;
    proc.truncation = resolve_truncation();
    return proc;
  }

  SlopeSpec slope() const {
    SlopeSpec sl;
    sl.p = p;
    sl.rho = rho;
    if (slope_coeffs)
      sl.explicit_coeffs = Eigen::Map<const Vector>(slope_coeffs->data(),
                                                    static_cast<long>(slope_coeffs->size()));
    return sl;
  }

  // Checks every module precondition before any simulation runs.
  void validate() const {
    if (decay == DecayKind::Poly && !(a > 0.5))
      throw ConfigError("config: polynomial decay requires a > 1/2");
    if (decay == DecayKind::Exp && !(a > 0.0))
      throw ConfigError("config: exponential decay requires a > 0");
    if (d < 1.0) throw ConfigError("config: link constant d must be >= 1");
    if (!(sigma >= 0.0)) throw ConfigError("config: sigma must be >= 0");
    if (error_law == ErrorLaw::ScaledStudentT && student_df < 17)
      throw ConfigError("config: student_df must be >= 17 (finite 16th moment)");
    if (!(rho > 0.0)) throw ConfigError("config: rho must be > 0");
    if (p < 0.0) throw ConfigError("config: smoothness p must be >= 0");
    if (s < 0) throw ConfigError("config: derivative order s must be >= 0");
    if (s > p && !allow_s_gt_p)
      throw ConfigError("config: s > p needs allow_s_gt_p (derivative order above smoothness)");
    if (threshold_power != 1 && threshold_power != 2)
      throw ConfigError("config: threshold_power must be 1 or 2");
    if (m_rule == MRule::Explicit && m_explicit < 1)
      throw ConfigError("config: explicit m must be >= 1");
    if (gamma_rule == GammaRule::Explicit && !(gamma_explicit > 0.0))
      throw ConfigError("config: explicit gamma must be > 0");
    if (n_grid.empty()) throw ConfigError("config: n_grid must be nonempty");
    for (long n : n_grid)
      if (n < 1) throw ConfigError("config: sample sizes must be >= 1");
    if (replications < 2) throw ConfigError("config: R must be >= 2");
    const long J = resolve_truncation();
    for (long n : n_grid)
      if (resolve_m(n) > J) throw ConfigError("config: m exceeds truncation J");
    if (slope_coeffs && static_cast<long>(slope_coeffs->size()) != J)
      throw ConfigError("config: explicit slope length must equal truncation J");
  }
};

inline const char* to_string(DecayKind k) { return k == DecayKind::Poly ? "poly" : "exp"; }
inline const char* to_string(ErrorLaw e) {
  return e == ErrorLaw::Gaussian ? "gaussian" : "student_t";
}
inline const char* to_string(RiskKind k) {
  switch (k) {
    case RiskKind::L2: return "l2";
    case RiskKind::Sobolev: return "sobolev";
    case RiskKind::Prediction: return "prediction";
    case RiskKind::DerivativeL2: return "derivative_l2";
  }
  return "?";
}
inline const char* to_string(MRule r) {
  switch (r) {
    case MRule::Explicit: return "explicit";
    case MRule::MStar: return "m_star";
    case MRule::PolyPower: return "poly_power";
    case MRule::ExpLog: return "exp_log";
  }
  return "?";
}
inline const char* to_string(GammaRule r) {
  switch (r) {
    case GammaRule::N: return "n";
    case GammaRule::EightD3OverUpsilonM: return "8d3_over_upsilon_m";
    case GammaRule::Explicit: return "explicit";
  }
  return "?";
}

inline Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["schema_version"] = schema_version;
  j["process"] = {{"decay", to_string(c.decay)},
                  {"a", c.a},
                  {"d", c.d},
                  {"link_alternate", c.link_alternate},
                  {"sigma", c.sigma},
                  {"error_law", to_string(c.error_law)},
                  {"student_df", c.student_df},
                  {"truncation", c.resolve_truncation()}};
  j["slope"] = {{"p", c.p}, {"rho", c.rho}};
  if (c.slope_coeffs) j["slope"]["coeffs"] = *c.slope_coeffs;
  j["estimator"] = {{"m_rule", to_string(c.m_rule)},
                    {"m", c.m_explicit},
                    {"gamma_rule", to_string(c.gamma_rule)},
                    {"gamma", c.gamma_explicit},
                    {"s", c.s},
                    {"threshold_power", c.threshold_power},
                    {"allow_s_gt_p", c.allow_s_gt_p}};
  // threads and the output directory are execution details, not experiment
  // identity; leaving them out keeps the audit trail byte-stable across
  // thread counts and output locations.
  j["experiment"] = {{"n_grid", c.n_grid},
                     {"R", c.replications},
                     {"master_seed", c.master_seed},
                     {"risk", to_string(c.risk_kind)},
                     {"sobolev_p", c.risk_sobolev_p},
                     {"tolerance", c.tolerance}};
  return j;
}

namespace detail {
template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}
}  // namespace detail

inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("process")) {
      const Json& pj = j.at("process");
      if (pj.contains("decay")) {
        const std::string d = pj.at("decay").get<std::string>();
        if (d == "poly") c.decay = DecayKind::Poly;
        else if (d == "exp") c.decay = DecayKind::Exp;
        else throw ConfigError("config: decay must be 'poly' or 'exp'");
      }
      c.a = detail::get_or(pj, "a", c.a);
      c.d = detail::get_or(pj, "d", c.d);
      c.link_alternate = detail::get_or(pj, "link_alternate", c.link_alternate);
      c.sigma = detail::get_or(pj, "sigma", c.sigma);
      if (pj.contains("error_law")) {
        const std::string e = pj.at("error_law").get<std::string>();
        if (e == "gaussian") c.error_law = ErrorLaw::Gaussian;
        else if (e == "student_t") c.error_law = ErrorLaw::ScaledStudentT;
        else throw ConfigError("config: error_law must be 'gaussian' or 'student_t'");
      }
      c.student_df = detail::get_or(pj, "student_df", c.student_df);
      c.truncation = detail::get_or(pj, "truncation", c.truncation);
    }
    if (j.contains("slope")) {
      const Json& sj = j.at("slope");
      c.p = detail::get_or(sj, "p", c.p);
      c.rho = detail::get_or(sj, "rho", c.rho);
      if (sj.contains("coeffs")) c.slope_coeffs = sj.at("coeffs").get<std::vector<double>>();
    }
    if (j.contains("estimator")) {
      const Json& ej = j.at("estimator");
      if (ej.contains("m_rule")) {
        const std::string r = ej.at("m_rule").get<std::string>();
        if (r == "explicit") c.m_rule = MRule::Explicit;
        else if (r == "m_star") c.m_rule = MRule::MStar;
        else if (r == "poly_power") c.m_rule = MRule::PolyPower;
        else if (r == "exp_log") c.m_rule = MRule::ExpLog;
        else throw ConfigError("config: unknown m_rule '" + r + "'");
      }
      c.m_explicit = detail::get_or(ej, "m", c.m_explicit);
      if (ej.contains("gamma_rule")) {
        const std::string r = ej.at("gamma_rule").get<std::string>();
        if (r == "n") c.gamma_rule = GammaRule::N;
        else if (r == "8d3_over_upsilon_m") c.gamma_rule = GammaRule::EightD3OverUpsilonM;
        else if (r == "explicit") c.gamma_rule = GammaRule::Explicit;
        else throw ConfigError("config: unknown gamma_rule '" + r + "'");
      }
      c.gamma_explicit = detail::get_or(ej, "gamma", c.gamma_explicit);
      c.s = detail::get_or(ej, "s", c.s);
      c.threshold_power = detail::get_or(ej, "threshold_power", c.threshold_power);
      c.allow_s_gt_p = detail::get_or(ej, "allow_s_gt_p", c.allow_s_gt_p);
    }
    if (j.contains("experiment")) {
      const Json& xj = j.at("experiment");
      if (xj.contains("n_grid")) c.n_grid = xj.at("n_grid").get<std::vector<long>>();
      c.replications = detail::get_or(xj, "R", c.replications);
      c.master_seed = detail::get_or(xj, "master_seed", c.master_seed);
      if (xj.contains("risk")) {
        const std::string r = xj.at("risk").get<std::string>();
        if (r == "l2") c.risk_kind = RiskKind::L2;
        else if (r == "sobolev") c.risk_kind = RiskKind::Sobolev;
        else if (r == "prediction") c.risk_kind = RiskKind::Prediction;
        else if (r == "derivative_l2") c.risk_kind = RiskKind::DerivativeL2;
        else throw ConfigError("config: unknown risk '" + r + "'");
      }
      c.risk_sobolev_p = detail::get_or(xj, "sobolev_p", c.risk_sobolev_p);
      c.tolerance = detail::get_or(xj, "tolerance", c.tolerance);
      c.threads = detail::get_or(xj, "threads", c.threads);
    }
    if (j.contains("output")) c.output_dir = detail::get_or(j.at("output"), "dir", c.output_dir);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: malformed value: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  // Sidecars wrap the resolved config under a "config" key; accept both shapes
  // so any command can be re-run from its own sidecar.
  if (j.contains("config")) return config_from_json(j.at("config"));
  return config_from_json(j);
}

// Shortest round-trippable decimal text for a double.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    std::sscanf(shorter, "%lf", &back);
    if (back == v) return shorter;
  }
  return buf;
}

inline Json estimate_to_json(const EstimateResult& est) {
  Json j;
  j["schema_version"] = schema_version;
  j["m"] = est.m;
  j["s"] = est.s;
  j["sigma_min"] = est.sigma_min;
  j["omega_held"] = est.omega_held;
  j["coefficients"] = std::vector<double>(est.beta_hat.data(), est.beta_hat.data() + est.beta_hat.size());
  return j;
}

inline Json report_to_json(const RiskReport& rep, bool keep_replications = false) {
  Json j;
  j["schema_version"] = schema_version;
  j["n"] = rep.n;
  j["m"] = rep.m;
  j["gamma"] = rep.gamma;
  j["s"] = rep.s;
  j["weight_kind"] = to_string(rep.weight_kind);
  j["R"] = rep.replications;
  j["mean_risk"] = rep.mean_risk;
  j["std_error"] = rep.std_error;
  j["omega_frequency"] = rep.omega_frequency;
  if (keep_replications) j["per_replication"] = rep.per_replication;
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

inline void write_json(const std::string& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace flgal
