#pragma once

// Model validation: omnibus pseudo-likelihood comparison, L2 distance between
// K-hat and K_alpha with bootstrap pseudo p-values, and the multiple-imputation
// (U, V) correlation goodness-of-fit test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "censored_data.hpp"
#include "copula.hpp"
#include "errors.hpp"
#include "kendall.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "survival.hpp"

namespace censcop {

// --- estimation pipeline -------------------------------------------------------

/// Joint estimator feeding K-hat. Auto picks the counting estimator for
/// complete data, the single-censoring estimator when one margin is fully
/// observed and the Akritas estimator otherwise.
enum class JointMethod { Akritas, Auto, Avk, Ecdf };

inline JointMethod parse_joint_method(std::string_view s) {
  if (s == "akritas" || s == "flexible") return JointMethod::Akritas;
  if (s == "auto") return JointMethod::Auto;
  if (s == "avk" || s == "single") return JointMethod::Avk;
  if (s == "ecdf" || s == "counting") return JointMethod::Ecdf;
  throw InputError("unknown joint estimator '" + std::string(s) + "'");
}

inline std::string_view to_string(JointMethod m) {
  switch (m) {
    case JointMethod::Akritas: return "akritas";
    case JointMethod::Auto: return "auto";
    case JointMethod::Avk: return "avk";
    case JointMethod::Ecdf: return "ecdf";
  }
  return "?";
}

struct PipelineOptions {
  KernelSpec kernel;
  double w = 0.5;
  JointMethod method = JointMethod::Akritas;
};

namespace detail {

inline JointMethod resolve_method(const Sample& s, JointMethod m) {
  if (m != JointMethod::Auto) return m;
  const ScenarioHint h = infer_scenario(s.observations());
  if (h.kind == Scenario::Complete) return JointMethod::Ecdf;
  if (h.kind == Scenario::SingleCensored) return JointMethod::Avk;
  return JointMethod::Akritas;
}

inline JointDistributionEstimate joint_for(const Sample& s, const PipelineOptions& o) {
  switch (resolve_method(s, o.method)) {
    case JointMethod::Ecdf: return ecdf_bivariate(s);
    case JointMethod::Avk: return avk_joint_single(s, o.kernel);
    default: return akritas_joint(s, o.kernel, o.w);
  }
}

}  // namespace detail

inline KendallCurve estimate_curve(const Sample& s, const PipelineOptions& o = {}) {
  const JointMethod m = detail::resolve_method(s, o.method);
  if (m == JointMethod::Ecdf) return kendall_counting(s);
  return kendall_from_joint(detail::joint_for(s, o), std::string(to_string(m)));
}

/// tau-hat without materialising the curve.
inline double estimate_tau(const Sample& s, const PipelineOptions& o = {}) {
  const JointMethod m = detail::resolve_method(s, o.method);
  if (m == JointMethod::Ecdf) return kendall_counting(s).tau_hat;
  return tau_from_joint(detail::joint_for(s, o));
}

// --- pseudo-likelihood -----------------------------------------------------------

struct PseudoObservations {
  std::vector<double> u1;
  std::vector<double> u2;
};

/// Rescaled Kaplan-Meier values F_j(y_ij) * n/(n+1), clamped to [1/(n+1), n/(n+1)].
inline PseudoObservations pseudo_observations(const Sample& s) {
  const std::size_t n = s.size();
  const double lo = 1.0 / static_cast<double>(n + 1);
  const double hi = static_cast<double>(n) / static_cast<double>(n + 1);
  PseudoObservations p;
  for (int m = 1; m <= 2; ++m) {
    const StepFunction km = kaplan_meier(s, m, true);
    auto& u = m == 1 ? p.u1 : p.u2;
    u.resize(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::clamp(km(s.value(i, m)), lo, hi);
  }
  return p;
}

/// Censored-copula log-likelihood: each observation contributes only its active
/// case term, log c (both observed), log(1 - dC/du1) (second censored),
/// log(1 - dC/du2) (first censored) or log(1 - u1 - u2 + C) (both censored).
inline double log_likelihood(const Sample& s, const PseudoObservations& p,
                             const DependenceParam& param) {
  constexpr double kFloor = -700.0;
  double ll = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double u1 = p.u1[i];
    const double u2 = p.u2[i];
    const int d1 = s[i].delta1;
    const int d2 = s[i].delta2;
    double term = 0.0;
    if (d1 == 1 && d2 == 1) {
      term = detail::log_density(param, u1, u2);
    } else if (d1 == 1) {
      term = std::log(1.0 - detail::partial_u1(param, u1, u2));
    } else if (d2 == 1) {
      term = std::log(1.0 - detail::partial_u1(param, u2, u1));
    } else {
      term = std::log(1.0 - u1 - u2 + detail::cdf(param, u1, u2));
    }
    ll += std::isfinite(term) ? std::max(term, kFloor) : kFloor;
  }
  return ll;
}

struct MleResult {
  double alpha = 0.0;
  double log_likelihood = 0.0;
};

inline constexpr double kMleMaxAlpha = 60.0;

/// Maximises the censored pseudo-likelihood over the family's parameter range.
/// Clayton, Gumbel and Joe are searched on log(alpha - boundary).
inline MleResult pseudo_mle(const Sample& s, CopulaFamily family,
                            const PseudoObservations& p) {
  if (family == CopulaFamily::Independence) {
    return {0.0, log_likelihood(s, p, DependenceParam::independence())};
  }
  const double boundary = (family == CopulaFamily::Clayton) ? 0.0 : 1.0;
  auto to_alpha = [&](double x) {
    if (family == CopulaFamily::Frank) return x;
    return boundary + std::exp(x);
  };
  double lo = std::log(1e-4);
  double hi = std::log(kMleMaxAlpha);
  if (family == CopulaFamily::Frank) {
    lo = -kMleMaxAlpha;
    hi = kMleMaxAlpha;
  }
  auto objective = [&](double x) {
    const double ll = log_likelihood(s, p, DependenceParam(family, to_alpha(x)));
    return std::isfinite(ll) ? -ll : numerics::kInf;
  };
  const auto r = numerics::minimize_scalar(objective, lo, hi, 60, 40);
  return {to_alpha(r.x), -r.value};
}

inline MleResult pseudo_mle(const Sample& s, CopulaFamily family) {
  return pseudo_mle(s, family, pseudo_observations(s));
}

// --- L2 distance -----------------------------------------------------------------

/// D = sum_{i >= 2} (K-hat(nu_i) - K_alpha(nu_i))^2 (nu_i - nu_{i-1}) over the
/// curve's ordered grid.
inline double l2_distance(const KendallCurve& c, const DependenceParam& p) {
  double d = 0.0;
  for (std::size_t i = 1; i < c.nu_grid.size(); ++i) {
    const double diff = c.K_values[i] - detail::kendall(p, c.nu_grid[i]);
    d += diff * diff * (c.nu_grid[i] - c.nu_grid[i - 1]);
  }
  return d;
}

inline double l2_distance(const KendallCurve& c, CopulaFamily family, double alpha) {
  return l2_distance(c, DependenceParam(family, alpha));
}

// --- fitted censoring model for bootstrap samples ------------------------------------

struct ExponentialCensoringModel {
  double rate1 = 1.0;
  double rate2 = 1.0;
  double censor_rate1 = 0.0;  ///< 0 = margin never censored
  double censor_rate2 = 0.0;
};

/// Censored-data MLE of exponential event and censoring rates per margin.
inline ExponentialCensoringModel fit_exponential_censoring(const Sample& s) {
  ExponentialCensoringModel m;
  for (int j = 1; j <= 2; ++j) {
    double total = 0.0;
    double events = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      total += s.value(i, j);
      events += s.delta(i, j);
    }
    const double censored = static_cast<double>(s.size()) - events;
    if (!(total > 0.0) || events == 0.0)
      throw NumericalError("cannot fit an exponential margin: no events or zero exposure");
    (j == 1 ? m.rate1 : m.rate2) = events / total;
    (j == 1 ? m.censor_rate1 : m.censor_rate2) = censored / total;
  }
  return m;
}

inline SimulationConfig bootstrap_config(const ExponentialCensoringModel& m,
                                         const DependenceParam& p, std::size_t n,
                                         std::uint64_t seed, std::uint64_t stream) {
  SimulationConfig c;
  c.copula = p;
  c.margin1 = MarginalModel::exponential(m.rate1);
  c.margin2 = MarginalModel::exponential(m.rate2);
  if (m.censor_rate1 > 0.0) c.censor1 = MarginalModel::exponential(m.censor_rate1);
  if (m.censor_rate2 > 0.0) c.censor2 = MarginalModel::exponential(m.censor_rate2);
  c.n = n;
  c.seed = seed;
  c.stream = stream;
  return c;
}

// --- bootstrap pseudo p-values --------------------------------------------------------

struct BootstrapResult {
  std::vector<CopulaFamily> candidates;
  std::vector<double> alpha_hat;   ///< per candidate, from the data
  std::vector<double> pseudo_p;    ///< fraction of rounds in which the candidate is not the minimiser
  std::size_t rounds_used = 0;
  std::size_t rounds_failed = 0;
  std::size_t winner = 0;
};

inline std::uint64_t family_stream(CopulaFamily f) { return static_cast<std::uint64_t>(f); }

/// Steps 1-4: fit alpha_m on the data; per round b draw one censored sample of
/// size n from each C_{alpha_m}, refit alpha_{b,m} on it and compute its L2
/// distance to the data's K-hat; p_m is the fraction of rounds in which m does
/// not attain the strict minimum.
inline BootstrapResult bootstrap_pseudo_p(const Sample& data, const KendallCurve& curve,
                                          const std::vector<CopulaFamily>& candidates,
                                          std::size_t B, std::uint64_t seed,
                                          const PipelineOptions& opt = {},
                                          std::size_t threads = 0) {
  if (B == 0) throw InputError("bootstrap needs B >= 1");
  if (candidates.size() < 2) throw InputError("bootstrap needs at least two candidates");
  const std::size_t M = candidates.size();
  BootstrapResult r;
  r.candidates = candidates;
  std::vector<DependenceParam> fitted;
  for (CopulaFamily f : candidates) {
    fitted.push_back(fit_alpha_from_tau(f, curve.tau_hat).param);
    r.alpha_hat.push_back(fitted.back().alpha());
  }
  const ExponentialCensoringModel cens = fit_exponential_censoring(data);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> D(B * M, nan);
  parallel_for(
      B * M,
      [&](std::size_t job) {
        const std::size_t b = job / M;
        const std::size_t m = job % M;
        try {
          const auto cfg = bootstrap_config(cens, fitted[m], data.size(), seed,
                                            b * 16 + family_stream(candidates[m]));
          const Sample boot = simulate_censored(cfg);
          const double tau_b = estimate_tau(boot, opt);
          const auto refit = fit_alpha_from_tau(candidates[m], tau_b).param;
          D[job] = l2_distance(curve, refit);
        } catch (const Error&) {
          D[job] = nan;
        }
      },
      threads);
  std::vector<double> rejected(M, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    bool ok = true;
    for (std::size_t m = 0; m < M; ++m) ok = ok && std::isfinite(D[b * M + m]);
    if (!ok) {
      ++r.rounds_failed;
      continue;
    }
    ++r.rounds_used;
    for (std::size_t m = 0; m < M; ++m) {
      bool beaten = false;
      for (std::size_t l = 0; l < M; ++l)
        if (l != m && D[b * M + l] < D[b * M + m]) beaten = true;
      rejected[m] += beaten ? 1.0 : 0.0;
    }
  }
  if (r.rounds_failed * 10 > B)
    throw NumericalError("bootstrap: " + std::to_string(r.rounds_failed) + " of " +
                         std::to_string(B) + " rounds failed");
  for (std::size_t m = 0; m < M; ++m)
    r.pseudo_p.push_back(rejected[m] / static_cast<double>(r.rounds_used));
  r.winner = static_cast<std::size_t>(
      std::min_element(r.pseudo_p.begin(), r.pseudo_p.end()) - r.pseudo_p.begin());
  return r;
}

// --- imputation of (U, V) --------------------------------------------------------------

/// Which copula the candidate describes: the copula of the joint distribution
/// (F = C(F1, F2), consistent with K-hat) or of the joint survival function
/// (S = C(S1, S2), the form in which the imputation distributions are usually
/// written).
enum class Orientation { Distribution, Survival };

struct ImputedPair {
  double u;
  double v;
};

namespace detail {

inline constexpr double kInvTol = 1e-12;

/// Inverse of a CDF known up to normalisation: solves G(v) = target * G(hi).
template <class G>
double invert_case_cdf(G&& g, double lo, double hi, double target) {
  const double glo = g(lo);
  const double ghi = g(hi);
  const double goal = glo + target * (ghi - glo);
  return numerics::invert_monotone(g, goal, lo, hi, kInvTol);
}

inline void check_support(bool ok, const char* what) {
  if (!ok) throw NumericalError(std::string("imputation support violated: ") + what);
}

inline ImputedPair impute_distribution(int d1, int d2, double a1, double a2,
                                       const DependenceParam& p, Rng& rng) {
  const double A1 = phi(p, a1);
  const double A2 = phi(p, a2);
  if (d1 == 1 && d2 == 1) {
    return {A1 / (A1 + A2), cdf(p, a1, a2)};
  }
  const double c = cdf(p, a1, a2);
  const double gc = reciprocal_slope(p, c);
  if (d1 == 1 && d2 == 0) {
    const double w = rng.uniform();
    const double v = invert_case_cdf([&](double x) { return reciprocal_slope(p, x); }, c, a1, w);
    const double u = std::clamp(A1 / phi(p, v), 0.0, 1.0);
    check_support(v >= c - 1e-9 && v <= a1 + 1e-9, "case (1,0) V");
    return {u, v};
  }
  if (d1 == 0 && d2 == 1) {
    const double w = rng.uniform();
    const double v = invert_case_cdf([&](double x) { return reciprocal_slope(p, x); }, c, a2, w);
    const double u = std::clamp(1.0 - A2 / phi(p, v), 0.0, 1.0);
    check_support(v >= c - 1e-9 && v <= a2 + 1e-9, "case (0,1) V");
    return {u, v};
  }
  // Both censored: P(V <= v, U1 > a1, U2 > a2) up to the event probability.
  const double Ka1 = kendall(p, a1);
  const double Kc = kendall(p, c);
  auto G = [&](double v) {
    const double m1 = std::min(v, a1);
    const double m2 = std::min(v, a2);
    double g = A1 * (reciprocal_slope(p, m1) - gc);
    if (v > a1) g += kendall(p, v) - Ka1;
    g -= (kendall(p, m2) - Kc) - A2 * (reciprocal_slope(p, m2) - gc);
    return g;
  };
  const double w = rng.uniform();
  double v = c;
  if (G(1.0) - G(c) > 0.0) {
    v = invert_case_cdf(G, c, 1.0, w);
  } else {
    v = 0.5 * (c + std::min(a1, a2));
  }
  const double fv = phi(p, v);
  const double lo = std::max(0.0, 1.0 - A2 / fv);
  const double hi = std::min(1.0, A1 / fv);
  check_support(v >= c - 1e-9, "case (0,0) V");
  const double u = hi > lo ? lo + (hi - lo) * rng.uniform() : 0.5 * (lo + hi);
  return {u, v};
}

inline ImputedPair impute_survival(int d1, int d2, double s1, double s2,
                                   const DependenceParam& p, Rng& rng) {
  const double P1 = phi(p, s1);
  const double P2 = phi(p, s2);
  if (d1 == 1 && d2 == 1) return {P1 / (P1 + P2), cdf(p, s1, s2)};
  const double S = cdf(p, s1, s2);
  if (d1 == 0 && d2 == 0) {
    const double phiS = phi(p, S);
    auto F1 = [&](double v) {
      if (v <= 0.0) return 0.0;
      return (v - (phi(p, v) - phiS) / dphi(p, v)) / S;
    };
    const double w = rng.uniform();
    const double v = numerics::invert_monotone(F1, w, 0.0, S, kInvTol * S);
    const double fv = phi(p, v);
    const double lo = P1 / fv;
    const double hi = 1.0 - P2 / fv;
    check_support(v <= S + 1e-12 && lo <= hi + 1e-9, "case (0,0)");
    return {lo + std::max(hi - lo, 0.0) * rng.uniform(), v};
  }
  // One component censored: F(v) = g(v) / g(S) on [0, S]; U follows from V.
  const double gS = reciprocal_slope(p, S);
  const double w = rng.uniform();
  const double v = numerics::invert_monotone([&](double x) { return reciprocal_slope(p, x) / gS; },
                                             w, 0.0, S, kInvTol * S);
  check_support(v <= S + 1e-12, "case with one censored component");
  const double fv = phi(p, v);
  if (d1 == 1) return {std::clamp(P1 / fv, 0.0, 1.0), v};
  return {std::clamp(1.0 - P2 / fv, 0.0, 1.0), v};
}

}  // namespace detail

/// Draws (U, V) for one observation. `s1`, `s2` are the marginal survival
/// values S_j(y_j); the copula acts on F_j = 1 - S_j under
/// Orientation::Distribution and on S_j under Orientation::Survival.
inline ImputedPair impute_uv(const Observation& o, const DependenceParam& p, double s1, double s2,
                             Rng& rng, Orientation orient = Orientation::Distribution) {
  if (!(s1 > 0.0 && s1 < 1.0 && s2 > 0.0 && s2 < 1.0))
    throw DomainError("marginal survival values must lie in (0, 1)");
  if (orient == Orientation::Survival) return detail::impute_survival(o.delta1, o.delta2, s1, s2, p, rng);
  return detail::impute_distribution(o.delta1, o.delta2, 1.0 - s1, 1.0 - s2, p, rng);
}

// --- goodness-of-fit test ----------------------------------------------------------------

enum class Combination { Average, Rubin };

/// Raw correlates U with V. For an exchangeable copula E[U | V] = 1/2 under any
/// generator, so Raw has no power there; Folded correlates |U - 1/2| with V,
/// which keeps the null distribution and detects misfit.
enum class UTransform { Folded, Raw };

struct GofOptions {
  std::size_t M = 5;
  Orientation orientation = Orientation::Distribution;
  Combination combination = Combination::Average;
  UTransform transform = UTransform::Folded;
};

struct GofResult {
  double statistic = 0.0;  ///< sqrt(n) * Zbar, or Zbar / sqrt(T) for Rubin
  double z_bar = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  ///< some |r_n| = 1
  std::vector<double> z;    ///< per imputation
  Combination combination = Combination::Average;
};

/// Fisher z of a correlation; infinite for |r| = 1.
inline double fisher_z(double r) { return 0.5 * std::log((1.0 + r) / (1.0 - r)); }

inline GofResult combine_z(const std::vector<double>& z, std::size_t n, Combination how) {
  GofResult g;
  g.z = z;
  g.combination = how;
  const double M = static_cast<double>(z.size());
  double zbar = 0.0;
  for (double v : z) zbar += v;
  zbar /= M;
  g.z_bar = zbar;
  const double within = 1.0 / static_cast<double>(n);
  if (how == Combination::Rubin && z.size() > 1) {
    double between = 0.0;
    for (double v : z) between += (v - zbar) * (v - zbar);
    between /= (M - 1.0);
    const double T = within + (1.0 + 1.0 / M) * between;
    g.statistic = zbar / std::sqrt(T);
    if (between > 0.0) {
      const double ratio = within / ((1.0 + 1.0 / M) * between);
      const double df = (M - 1.0) * (1.0 + ratio) * (1.0 + ratio);
      const boost::math::students_t dist(df);
      g.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(g.statistic)));
    } else {
      g.p_value = numerics::normal_two_sided_p(g.statistic);
    }
    return g;
  }
  g.statistic = std::sqrt(static_cast<double>(n)) * zbar;
  g.p_value = numerics::normal_two_sided_p(g.statistic);
  return g;
}

/// Tests H0: (U, V) uncorrelated under the candidate copula. Censored
/// observations are imputed M times; complete data need a single pass.
inline GofResult wang_gof(const Sample& s, const DependenceParam& p, std::uint64_t seed,
                          const GofOptions& opt = {}) {
  if (opt.M == 0) throw InputError("GOF needs M >= 1");
  const std::size_t n = s.size();
  const PseudoObservations po = pseudo_observations(s);
  const std::size_t passes = s.complete() ? 1 : opt.M;
  std::vector<double> z;
  bool degenerate = false;
  std::vector<double> u(n);
  std::vector<double> v(n);
  for (std::size_t m = 0; m < passes; ++m) {
    Rng rng(seed, 0x60F0000 + m);
    for (std::size_t i = 0; i < n; ++i) {
      const auto pr = impute_uv(s[i], p, 1.0 - po.u1[i], 1.0 - po.u2[i], rng, opt.orientation);
      u[i] = opt.transform == UTransform::Folded ? std::abs(pr.u - 0.5) : pr.u;
      v[i] = pr.v;
    }
    const double r = numerics::pearson(u, v);
    if (!std::isfinite(r) || std::abs(r) >= 1.0) {
      degenerate = true;
      z.push_back(std::isfinite(r) ? std::copysign(numerics::kInf, r) : 0.0);
    } else {
      z.push_back(fisher_z(r));
    }
  }
  if (degenerate) {
    GofResult g;
    g.z = z;
    g.degenerate = true;
    g.p_value = 0.0;
    g.statistic = numerics::kInf;
    g.combination = opt.combination;
    return g;
  }
  return combine_z(z, n, opt.combination);
}

// --- omnibus and the full report ----------------------------------------------------------

struct FitResult {
  CopulaFamily family = CopulaFamily::Clayton;
  double alpha_hat = 0.0;
  bool alpha_hat_clamped = false;
  double alpha_star = 0.0;
  double omnibus_gap = 0.0;
  double l2_distance = 0.0;
  std::optional<double> pseudo_p;
  std::optional<double> gof_p;
};

/// Index of the smallest gap; ties go to the smaller L2 distance, then to the
/// family order.
inline std::size_t omnibus_winner(const std::vector<FitResult>& fits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i) {
    const auto& a = fits[i];
    const auto& b = fits[best];
    if (a.omnibus_gap < b.omnibus_gap ||
        (a.omnibus_gap == b.omnibus_gap &&
         (a.l2_distance < b.l2_distance ||
          (a.l2_distance == b.l2_distance && a.family < b.family))))
      best = i;
  }
  return best;
}

inline std::vector<FitResult> omnibus_table(const Sample& s, const KendallCurve& curve,
                                            const std::vector<CopulaFamily>& candidates) {
  if (candidates.empty()) throw InputError("no candidate families");
  const PseudoObservations po = pseudo_observations(s);
  std::vector<FitResult> out;
  for (CopulaFamily f : candidates) {
    FitResult r;
    r.family = f;
    const auto inv = fit_alpha_from_tau(f, curve.tau_hat);
    r.alpha_hat = inv.param.alpha();
    r.alpha_hat_clamped = inv.clamped;
    r.alpha_star = pseudo_mle(s, f, po).alpha;
    r.omnibus_gap = std::abs(r.alpha_hat - r.alpha_star);
    r.l2_distance = l2_distance(curve, inv.param);
    out.push_back(r);
  }
  return out;
}

inline std::vector<FitResult> omnibus_table(const Sample& s,
                                            const std::vector<CopulaFamily>& candidates,
                                            const PipelineOptions& opt = {}) {
  return omnibus_table(s, estimate_curve(s, opt), candidates);
}

struct SelectionConfig {
  std::vector<CopulaFamily> candidates{kArchimedeanFamilies.begin(), kArchimedeanFamilies.end()};
  PipelineOptions pipeline;
  double nu0 = 0.5;
  std::size_t B = 1000;
  GofOptions gof;
  std::uint64_t seed = 1;
  bool run_bootstrap = true;
  bool run_gof = true;
  std::size_t threads = 0;
};

struct SelectionReport {
  SelectionConfig config;
  std::size_t n = 0;
  ScenarioHint scenario;
  double censored_fraction = 0.0;
  double tau_hat = 0.0;
  double tau_raw = 0.0;
  double bandwidth1 = 0.0;
  double bandwidth2 = 0.0;
  std::string estimator;
  std::vector<FitResult> fits;
  std::size_t omnibus_winner = 0;
  std::size_t l2_winner = 0;
  std::optional<std::size_t> pseudo_p_winner;
  std::optional<std::size_t> gof_winner;
  std::size_t bootstrap_failed = 0;
  std::vector<std::string> notes;
  KendallCurve curve;
};

inline SelectionReport run_selection(const Sample& s, const SelectionConfig& cfg) {
  SelectionReport rep;
  rep.config = cfg;
  rep.n = s.size();
  rep.scenario = s.scenario_hint();
  rep.censored_fraction = s.censored_fraction();
  rep.curve = estimate_curve(s, cfg.pipeline);
  rep.estimator = rep.curve.estimator;
  rep.tau_hat = rep.curve.tau_hat;
  rep.tau_raw = rep.curve.tau_raw;
  rep.bandwidth1 = bandwidth_for(s, 1, cfg.pipeline.kernel);
  rep.bandwidth2 = bandwidth_for(s, 2, cfg.pipeline.kernel);
  if (rep.curve.tau_clamped) rep.notes.push_back("tau-hat clamped to [-1, 1]");
  rep.fits = omnibus_table(s, rep.curve, cfg.candidates);
  for (const auto& f : rep.fits)
    if (f.alpha_hat_clamped)
      rep.notes.push_back(std::string(family_name(f.family)) +
                          ": tau-hat outside the family range, alpha-hat set to the nearest admissible value");
  rep.omnibus_winner = omnibus_winner(rep.fits);
  rep.l2_winner = 0;
  for (std::size_t i = 1; i < rep.fits.size(); ++i)
    if (rep.fits[i].l2_distance < rep.fits[rep.l2_winner].l2_distance) rep.l2_winner = i;
  if (cfg.run_bootstrap && cfg.candidates.size() >= 2) {
    const auto boot = bootstrap_pseudo_p(s, rep.curve, cfg.candidates, cfg.B, cfg.seed,
                                         cfg.pipeline, cfg.threads);
    for (std::size_t i = 0; i < rep.fits.size(); ++i) rep.fits[i].pseudo_p = boot.pseudo_p[i];
    rep.pseudo_p_winner = boot.winner;
    rep.bootstrap_failed = boot.rounds_failed;
  }
  if (cfg.run_gof) {
    for (auto& f : rep.fits) {
      const DependenceParam p(f.family, f.alpha_hat);
      f.gof_p = wang_gof(s, p, cfg.seed, cfg.gof).p_value;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < rep.fits.size(); ++i)
      if (*rep.fits[i].gof_p > *rep.fits[best].gof_p) best = i;
    rep.gof_winner = best;
    if (cfg.gof.combination == Combination::Average && !s.complete())
      rep.notes.push_back("GOF combines imputations by averaging Fisher z (Rubin rule available)");
  }
  return rep;
}

inline nlohmann::json to_json(const SelectionReport& r) {
  using nlohmann::json;
  json j;
  j["n"] = r.n;
  j["scenario"] = to_string(r.scenario);
  j["censored_fraction"] = r.censored_fraction;
  j["estimator"] = r.estimator;
  j["tau_hat"] = r.tau_hat;
  j["tau_raw"] = r.tau_raw;
  json cands = json::array();
  for (const auto& f : r.fits) {
    json c;
    c["family"] = std::string(family_name(f.family));
    c["alpha_hat"] = f.alpha_hat;
    c["alpha_hat_clamped"] = f.alpha_hat_clamped;
    c["alpha_star"] = f.alpha_star;
    c["omnibus_gap"] = f.omnibus_gap;
    c["l2_distance"] = f.l2_distance;
    c["pseudo_p"] = f.pseudo_p ? json(*f.pseudo_p) : json(nullptr);
    c["gof_p"] = f.gof_p ? json(*f.gof_p) : json(nullptr);
    cands.push_back(c);
  }
  j["candidates"] = cands;
  auto name = [&](std::size_t i) { return std::string(family_name(r.fits[i].family)); };
  json w;
  w["omnibus"] = name(r.omnibus_winner);
  w["l2"] = name(r.l2_winner);
  w["pseudo_p"] = r.pseudo_p_winner ? json(name(*r.pseudo_p_winner)) : json(nullptr);
  w["gof"] = r.gof_winner ? json(name(*r.gof_winner)) : json(nullptr);
  j["winners"] = w;
  json cfg;
  cfg["kernel"] = std::string(to_string(r.config.pipeline.kernel.shape));
  cfg["bandwidth"] = r.config.pipeline.kernel.bandwidth > 0.0
                         ? json(r.config.pipeline.kernel.bandwidth)
                         : json("rule");
  cfg["bandwidth_rule_constant"] = r.config.pipeline.kernel.rule_constant;
  cfg["bandwidth_used"] = {r.bandwidth1, r.bandwidth2};
  cfg["w"] = r.config.pipeline.w;
  cfg["joint_estimator"] = std::string(to_string(r.config.pipeline.method));
  cfg["nu0"] = r.config.nu0;
  cfg["B"] = r.config.run_bootstrap ? json(r.config.B) : json(nullptr);
  cfg["M"] = r.config.gof.M;
  cfg["gof_orientation"] =
      r.config.gof.orientation == Orientation::Distribution ? "distribution" : "survival";
  cfg["gof_combination"] = r.config.gof.combination == Combination::Average ? "average" : "rubin";
  cfg["gof_u"] = r.config.gof.transform == UTransform::Folded ? "folded" : "raw";
  cfg["seed"] = r.config.seed;
  j["config"] = cfg;
  j["bootstrap_failed_rounds"] = r.bootstrap_failed;
  j["notes"] = r.notes;
  return j;
}

}  // namespace censcop
