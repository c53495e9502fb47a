#pragma once

// Censored bivariate observations, CSV I/O, scenario files and the simulation
// engine Y_j = min(T_j, X_j, omega_j), delta_j = 1[Y_j = T_j].

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "copula.hpp"
#include "errors.hpp"
#include "numerics.hpp"
#include "rng.hpp"

namespace censcop {

struct Observation {
  double y1 = 0.0;
  double y2 = 0.0;
  int delta1 = 1;
  int delta2 = 1;

  friend bool operator==(const Observation&, const Observation&) = default;
};

inline void validate(const Observation& o) {
  if (!(std::isfinite(o.y1) && std::isfinite(o.y2)) || o.y1 < 0.0 || o.y2 < 0.0)
    throw InputError("observed values must be finite and nonnegative");
  if ((o.delta1 != 0 && o.delta1 != 1) || (o.delta2 != 0 && o.delta2 != 1))
    throw InputError("censoring indicators must be 0 or 1");
}

enum class Scenario { Complete, SingleCensored, DoubleCensored };

struct ScenarioHint {
  Scenario kind = Scenario::Complete;
  int censored_margin = 0;  ///< 1 or 2 for SingleCensored, else 0

  friend bool operator==(const ScenarioHint&, const ScenarioHint&) = default;
};

inline std::string to_string(const ScenarioHint& h) {
  switch (h.kind) {
    case Scenario::Complete: return "complete";
    case Scenario::SingleCensored: return "single" + std::to_string(h.censored_margin);
    case Scenario::DoubleCensored: return "double";
  }
  return "?";
}

inline ScenarioHint infer_scenario(const std::vector<Observation>& obs) {
  bool c1 = false;
  bool c2 = false;
  for (const auto& o : obs) {
    c1 = c1 || o.delta1 == 0;
    c2 = c2 || o.delta2 == 0;
  }
  if (c1 && c2) return {Scenario::DoubleCensored, 0};
  if (c1) return {Scenario::SingleCensored, 1};
  if (c2) return {Scenario::SingleCensored, 2};
  return {Scenario::Complete, 0};
}

class Sample {
 public:
  Sample() = default;

  explicit Sample(std::vector<Observation> obs) : obs_(std::move(obs)) {
    if (obs_.empty()) throw InputError("no observations");
    for (const auto& o : obs_) validate(o);
    hint_ = infer_scenario(obs_);
  }

  /// The hint must be consistent with the indicators (a complete sample may be
  /// labelled single or double, the reverse is rejected).
  Sample(std::vector<Observation> obs, ScenarioHint hint) : Sample(std::move(obs)) {
    const ScenarioHint actual = hint_;
    const bool ok = hint.kind == Scenario::DoubleCensored || actual.kind == Scenario::Complete ||
                    (hint == actual);
    if (!ok) throw InputError("scenario hint " + to_string(hint) + " contradicts the data (" +
                              to_string(actual) + ")");
    hint_ = hint;
  }

  const std::vector<Observation>& observations() const noexcept { return obs_; }
  std::size_t size() const noexcept { return obs_.size(); }
  const Observation& operator[](std::size_t i) const { return obs_[i]; }
  ScenarioHint scenario_hint() const noexcept { return hint_; }

  bool complete() const {
    return std::all_of(obs_.begin(), obs_.end(),
                       [](const Observation& o) { return o.delta1 == 1 && o.delta2 == 1; });
  }

  /// Fraction of observations with at least one censored component.
  double censored_fraction() const {
    std::size_t c = 0;
    for (const auto& o : obs_) c += (o.delta1 == 0 || o.delta2 == 0) ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(obs_.size());
  }

  double value(std::size_t i, int margin) const { return margin == 1 ? obs_[i].y1 : obs_[i].y2; }
  int delta(std::size_t i, int margin) const {
    return margin == 1 ? obs_[i].delta1 : obs_[i].delta2;
  }

 private:
  std::vector<Observation> obs_;
  ScenarioHint hint_;
};

// --- marginal models ---------------------------------------------------------

enum class MarginKind { UnitExponential, Exponential, LogNormal };

class MarginalModel {
 public:
  static MarginalModel unit_exponential() { return {MarginKind::UnitExponential, 1.0, 0.0}; }
  static MarginalModel exponential(double rate) {
    if (!(rate > 0.0 && std::isfinite(rate))) throw DomainError("exponential rate must be > 0");
    return {MarginKind::Exponential, rate, 0.0};
  }
  static MarginalModel lognormal(double mu, double sigma) {
    if (!(sigma > 0.0 && std::isfinite(sigma) && std::isfinite(mu)))
      throw DomainError("lognormal sigma must be > 0");
    return {MarginKind::LogNormal, mu, sigma};
  }

  MarginKind kind() const noexcept { return kind_; }
  double rate() const noexcept { return kind_ == MarginKind::LogNormal ? 0.0 : a_; }
  double mu() const noexcept { return a_; }
  double sigma() const noexcept { return b_; }

  double cdf(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
      case MarginKind::UnitExponential:
      case MarginKind::Exponential: return -std::expm1(-a_ * t);
      case MarginKind::LogNormal: return numerics::normal_cdf((std::log(t) - a_) / b_);
    }
    return 0.0;
  }

  /// Inverse CDF taking 1 - u (the survival probability) for tail accuracy.
  double quantile_from_survival(double s) const {
    switch (kind_) {
      case MarginKind::UnitExponential:
      case MarginKind::Exponential: return -std::log(s) / a_;
      case MarginKind::LogNormal: return std::exp(a_ - b_ * normal_quantile(s));
    }
    return 0.0;
  }

  double quantile(double u) const { return quantile_from_survival(1.0 - u); }

  double draw(Rng& rng) const {
    switch (kind_) {
      case MarginKind::UnitExponential:
      case MarginKind::Exponential: return rng.exponential() / a_;
      case MarginKind::LogNormal: return std::exp(a_ + b_ * rng.normal());
    }
    return 0.0;
  }

  friend bool operator==(const MarginalModel&, const MarginalModel&) = default;

  /// Standard normal quantile (Acklam's rational approximation refined by one
  /// Halley step).
  static double normal_quantile(double p) {
    if (p <= 0.0) return -numerics::kInf;
    if (p >= 1.0) return numerics::kInf;
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    double x = 0.0;
    if (p < 0.02425) {
      const double q = std::sqrt(-2.0 * std::log(p));
      x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
          ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > 1.0 - 0.02425) {
      const double q = std::sqrt(-2.0 * std::log1p(-p));
      x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
          ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
      const double q = p - 0.5;
      const double r = q * q;
      x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
          (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double e = numerics::normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
  }

 private:
  MarginalModel(MarginKind k, double a, double b) : kind_(k), a_(a), b_(b) {}
  MarginKind kind_;
  double a_;
  double b_;
};

// --- simulation --------------------------------------------------------------

struct SimulationConfig {
  DependenceParam copula = DependenceParam::independence();
  MarginalModel margin1 = MarginalModel::unit_exponential();
  MarginalModel margin2 = MarginalModel::unit_exponential();
  std::optional<MarginalModel> censor1;
  std::optional<MarginalModel> censor2;
  bool shared_censor = false;  ///< X1 = X2, drawn from censor1
  double limit1 = numerics::kInf;
  double limit2 = numerics::kInf;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

inline void validate(const SimulationConfig& c) {
  if (c.n == 0) throw InputError("simulation size n must be at least 1");
  if (!(c.limit1 > 0.0) || !(c.limit2 > 0.0)) throw InputError("limits must be strictly positive");
  if (c.shared_censor) {
    if (!c.censor1) throw InputError("shared censoring needs a censoring model");
    if (c.censor2 && !(*c.censor2 == *c.censor1))
      throw InputError("shared censoring requires identical censoring models");
  }
}

struct LatentPair {
  double t1;
  double t2;
};

/// Applies censoring and limits to latent times. Ties go to delta = 1.
inline Observation censor_pair(const LatentPair& t, double x1, double x2, double limit1,
                               double limit2) {
  Observation o;
  const double c1 = std::min(x1, limit1);
  const double c2 = std::min(x2, limit2);
  o.delta1 = t.t1 <= c1 ? 1 : 0;
  o.delta2 = t.t2 <= c2 ? 1 : 0;
  o.y1 = o.delta1 ? t.t1 : c1;
  o.y2 = o.delta2 ? t.t2 : c2;
  return o;
}

inline LatentPair draw_latent(const SimulationConfig& c, Rng& rng) {
  const auto [u1, u2] = sample_pair(c.copula, rng);
  return {c.margin1.quantile_from_survival(1.0 - u1), c.margin2.quantile_from_survival(1.0 - u2)};
}

inline std::pair<double, double> draw_censors(const SimulationConfig& c, Rng& rng) {
  if (c.shared_censor) {
    const double x = c.censor1->draw(rng);
    return {x, x};
  }
  const double x1 = c.censor1 ? c.censor1->draw(rng) : numerics::kInf;
  const double x2 = c.censor2 ? c.censor2->draw(rng) : numerics::kInf;
  return {x1, x2};
}

inline Sample simulate_censored(const SimulationConfig& c) {
  validate(c);
  Rng rng(c.seed, c.stream);
  std::vector<Observation> obs;
  obs.reserve(c.n);
  for (std::size_t i = 0; i < c.n; ++i) {
    const LatentPair t = draw_latent(c, rng);
    const auto [x1, x2] = draw_censors(c, rng);
    obs.push_back(censor_pair(t, x1, x2, c.limit1, c.limit2));
  }
  return Sample(std::move(obs));
}

// --- censoring calibration ---------------------------------------------------

enum class CensoringScenario { None, Single1, Single2, Double, Shared };

inline CensoringScenario parse_censoring_scenario(std::string_view s) {
  if (s == "none" || s == "complete") return CensoringScenario::None;
  if (s == "single" || s == "single1") return CensoringScenario::Single1;
  if (s == "single2") return CensoringScenario::Single2;
  if (s == "double") return CensoringScenario::Double;
  if (s == "shared") return CensoringScenario::Shared;
  throw InputError("unknown censoring scenario '" + std::string(s) + "'");
}

inline std::string_view to_string(CensoringScenario s) {
  switch (s) {
    case CensoringScenario::None: return "none";
    case CensoringScenario::Single1: return "single1";
    case CensoringScenario::Single2: return "single2";
    case CensoringScenario::Double: return "double";
    case CensoringScenario::Shared: return "shared";
  }
  return "?";
}

/// Low / medium / high total-censoring presets of the limit study.
inline constexpr std::array<double, 3> kCensoringPresets = {0.05, 0.30, 0.75};

struct CensorRates {
  double rate1 = 0.0;  ///< 0 means margin 1 uncensored
  double rate2 = 0.0;
  double achieved = 0.0;  ///< pilot censored fraction at the returned rates
};

/// Installs exponential censors with the given rates on a configuration.
inline void apply_censor_rates(SimulationConfig& c, CensoringScenario s, const CensorRates& r) {
  c.censor1.reset();
  c.censor2.reset();
  c.shared_censor = false;
  switch (s) {
    case CensoringScenario::None: break;
    case CensoringScenario::Single1: c.censor1 = MarginalModel::exponential(r.rate1); break;
    case CensoringScenario::Single2: c.censor2 = MarginalModel::exponential(r.rate2); break;
    case CensoringScenario::Double:
      c.censor1 = MarginalModel::exponential(r.rate1);
      c.censor2 = MarginalModel::exponential(r.rate2);
      break;
    case CensoringScenario::Shared:
      c.censor1 = MarginalModel::exponential(r.rate1);
      c.censor2 = c.censor1;
      c.shared_censor = true;
      break;
  }
}

/// Finds a common exponential censoring rate so that the Monte Carlo fraction
/// of observations with at least one censored component hits `target`. The
/// pilot uses common random numbers, so the fraction is monotone in the rate.
inline CensorRates calibrate_censoring(const DependenceParam& copula, const MarginalModel& m1,
                                       const MarginalModel& m2, double target,
                                       CensoringScenario scenario, std::uint64_t seed = 7,
                                       std::size_t pilot = 40000) {
  if (!(target >= 0.0 && target < 1.0)) throw DomainError("target fraction must lie in [0, 1)");
  if (scenario == CensoringScenario::None) {
    if (target > 0.0) throw DomainError("scenario 'none' cannot reach a positive target");
    return {};
  }
  if (target == 0.0) return {};
  Rng rng(seed, 0xCA11B);
  std::vector<LatentPair> t(pilot);
  std::vector<std::pair<double, double>> e(pilot);
  SimulationConfig base;
  base.copula = copula;
  base.margin1 = m1;
  base.margin2 = m2;
  for (std::size_t i = 0; i < pilot; ++i) {
    t[i] = draw_latent(base, rng);
    e[i] = {rng.exponential(), rng.exponential()};
  }
  const bool use1 = scenario != CensoringScenario::Single2;
  const bool use2 = scenario == CensoringScenario::Single2 || scenario == CensoringScenario::Double;
  const bool shared = scenario == CensoringScenario::Shared;
  auto fraction = [&](double log_rate) {
    const double r = std::exp(log_rate);
    std::size_t c = 0;
    for (std::size_t i = 0; i < pilot; ++i) {
      const double x1 = use1 ? e[i].first / r : numerics::kInf;
      const double x2 = shared ? x1 : (use2 ? e[i].second / r : numerics::kInf);
      c += (t[i].t1 > x1 || t[i].t2 > x2) ? 1 : 0;
    }
    return static_cast<double>(c) / static_cast<double>(pilot);
  };
  double lo = std::log(1e-8);
  double hi = std::log(1e8);
  if (fraction(hi) < target) throw DomainError("censoring target unattainable in this scenario");
  for (int it = 0; it < 100 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fraction(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double rate = std::exp(hi);
  CensorRates out;
  out.rate1 = use1 ? rate : 0.0;
  out.rate2 = (use2 || shared) ? rate : 0.0;
  out.achieved = fraction(hi);
  return out;
}

// --- CSV ---------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t line, std::string_view col) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty())
    throw InputError("line " + std::to_string(line) + ": column " + std::string(col) +
                     ": cannot parse '" + s + "' as a number");
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Reads `y1,y2,delta1,delta2` (any column order, extra columns ignored).
inline Sample read_csv(std::istream& in, std::string_view origin = "<stream>") {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) {
      header = detail::split_csv(line);
      break;
    }
  }
  if (header.empty()) throw InputError(std::string(origin) + ": no observations");
  const std::array<std::string_view, 4> names = {"y1", "y2", "delta1", "delta2"};
  std::array<std::size_t, 4> idx{};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto it = std::find(header.begin(), header.end(), names[k]);
    if (it == header.end())
      throw InputError(std::string(origin) + ": missing column '" + std::string(names[k]) + "'");
    idx[k] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<Observation> obs;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() < header.size())
      throw InputError(std::string(origin) + ": line " + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    Observation o;
    o.y1 = detail::parse_double(cells[idx[0]], lineno, names[0]);
    o.y2 = detail::parse_double(cells[idx[1]], lineno, names[1]);
    const double d1 = detail::parse_double(cells[idx[2]], lineno, names[2]);
    const double d2 = detail::parse_double(cells[idx[3]], lineno, names[3]);
    if ((d1 != 0.0 && d1 != 1.0) || (d2 != 0.0 && d2 != 1.0))
      throw InputError(std::string(origin) + ": line " + std::to_string(lineno) +
                       ": delta must be 0 or 1");
    if (!(std::isfinite(o.y1) && std::isfinite(o.y2)) || o.y1 < 0.0 || o.y2 < 0.0)
      throw InputError(std::string(origin) + ": line " + std::to_string(lineno) +
                       ": values must be finite and nonnegative");
    o.delta1 = static_cast<int>(d1);
    o.delta2 = static_cast<int>(d2);
    obs.push_back(o);
  }
  if (obs.empty()) throw InputError(std::string(origin) + ": no observations");
  return Sample(std::move(obs));
}

inline Sample load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_csv(in, path);
}

/// Shortest round-trip formatting, so load_csv(save_csv(s)) == s bit for bit.
inline void write_csv(std::ostream& out, const Sample& s) {
  out << "y1,y2,delta1,delta2\n";
  for (const auto& o : s.observations()) {
    out << detail::format_double(o.y1) << ',' << detail::format_double(o.y2) << ',' << o.delta1
        << ',' << o.delta2 << '\n';
  }
}

inline void save_csv(const std::string& path, const Sample& s) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_csv(out, s);
}

// --- scenario files ----------------------------------------------------------

/// Declarative simulation scenario, read from `key = value` lines.
struct ScenarioSpec {
  CopulaFamily family = CopulaFamily::Clayton;
  std::optional<double> tau;
  std::optional<double> alpha;
  CensoringScenario censoring = CensoringScenario::Double;
  double target = 0.20;
  double limit1 = numerics::kInf;
  double limit2 = numerics::kInf;
  std::size_t n = 500;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;

  DependenceParam param() const {
    if (alpha) return {family, *alpha};
    if (tau) {
      if (family == CopulaFamily::Independence) return DependenceParam::independence();
      return alpha_from_tau(family, KendallTau(*tau));
    }
    return DependenceParam::independence();
  }
};

inline ScenarioSpec parse_scenario(std::istream& in) {
  ScenarioSpec spec;
  std::string line;
  std::size_t lineno = 0;
  auto num = [&](const std::string& v, const std::string& key) {
    return detail::parse_double(v, lineno, key);
  };
  auto count = [&](const std::string& v, const std::string& key) {
    const double x = num(v, key);
    if (!(x >= 0.0) || x != std::floor(x))
      throw InputError("line " + std::to_string(lineno) + ": " + key + " must be a count");
    return static_cast<std::size_t>(x);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string val = detail::trim(std::string_view(line).substr(eq + 1));
    if (key == "family") spec.family = parse_family(val);
    else if (key == "tau") spec.tau = num(val, key);
    else if (key == "alpha") spec.alpha = num(val, key);
    else if (key == "censoring") spec.censoring = parse_censoring_scenario(val);
    else if (key == "target") spec.target = num(val, key);
    else if (key == "limit1") spec.limit1 = num(val, key);
    else if (key == "limit2") spec.limit2 = num(val, key);
    else if (key == "n") spec.n = count(val, key);
    else if (key == "replicates") spec.replicates = count(val, key);
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(count(val, key));
    else throw InputError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (spec.n == 0) throw InputError("scenario n must be at least 1");
  if (spec.tau && spec.alpha) throw InputError("scenario sets both tau and alpha");
  return spec;
}

inline ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_scenario(in);
}

/// Unit-exponential margins with exponential censors calibrated to the spec.
inline SimulationConfig make_config(const ScenarioSpec& spec, std::uint64_t stream = 0) {
  SimulationConfig c;
  c.copula = spec.param();
  c.n = spec.n;
  c.seed = spec.seed;
  c.stream = stream;
  c.limit1 = spec.limit1;
  c.limit2 = spec.limit2;
  if (spec.censoring != CensoringScenario::None && spec.target > 0.0) {
    const auto rates = calibrate_censoring(c.copula, c.margin1, c.margin2, spec.target,
                                           spec.censoring, spec.seed);
    apply_censor_rates(c, spec.censoring, rates);
  }
  return c;
}

}  // namespace censcop
