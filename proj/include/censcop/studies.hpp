#pragma once

// Replicated simulation studies: independence bias, omnibus selection, L2
// bootstrap pseudo p-values, GOF rejection rates and the effect of limits.
// Every replicate draws from its own stream Rng(seed, stream), so results do
// not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "censored_data.hpp"
#include "copula.hpp"
#include "errors.hpp"
#include "kendall.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "selection.hpp"

namespace censcop {

struct StudyOptions {
  std::size_t replicates = 1000;
  std::size_t n = 0;  ///< 0 = the study's own default
  std::size_t B = 1000;
  std::size_t M = 5;
  std::uint64_t seed = 2024;
  std::size_t threads = 0;
  double censor_target = 0.20;  ///< share of observations with a censored component
  std::vector<CopulaFamily> candidates{kArchimedeanFamilies.begin(), kArchimedeanFamilies.end()};
  // Row filters; empty keeps every row of the study.
  std::vector<CensoringScenario> scenarios;
  std::vector<CopulaFamily> truths;
  std::vector<double> taus;
  KernelSpec kernel;
  double w = 0.5;
};

struct StudyTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  void write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
  }
};

/// Mean and Monte Carlo standard error.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& x) {
  MeanSe m;
  if (x.empty()) return m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  if (x.size() < 2) return m;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return m;
}

namespace detail {

inline std::string fmt(double x) { return format_double(x); }
inline std::string fmt(std::size_t x) { return std::to_string(x); }
inline std::string fam(CopulaFamily f) { return std::string(family_name(f)); }

inline std::string scenario_label(CensoringScenario s) {
  switch (s) {
    case CensoringScenario::None: return "none";
    case CensoringScenario::Single1: return "single1";
    case CensoringScenario::Single2: return "single2";
    case CensoringScenario::Double: return "double";
    case CensoringScenario::Shared: return "shared";
  }
  return "?";
}

template <class T>
bool keep(const std::vector<T>& filter, const T& v) {
  return filter.empty() || std::find(filter.begin(), filter.end(), v) != filter.end();
}

inline bool keep_tau(const std::vector<double>& filter, double tau) {
  if (filter.empty()) return true;
  for (double t : filter)
    if (std::abs(t - tau) < 1e-9) return true;
  return false;
}

inline DependenceParam truth_param(CopulaFamily f, double tau) {
  if (tau == 0.0) return DependenceParam::independence();
  return alpha_from_tau(f, KendallTau(tau));
}

/// Unit-exponential margins with exponential censoring calibrated to the
/// target share of observations having a censored component.
inline SimulationConfig study_config(CopulaFamily truth, double tau, CensoringScenario scen,
                                     const StudyOptions& o, std::size_t n) {
  SimulationConfig c;
  c.copula = truth_param(truth, tau);
  c.n = n;
  c.seed = o.seed;
  if (scen != CensoringScenario::None) {
    const auto rates = calibrate_censoring(c.copula, c.margin1, c.margin2, o.censor_target, scen,
                                           o.seed);
    apply_censor_rates(c, scen, rates);
  }
  return c;
}

inline std::uint64_t cell_stream(std::size_t cell, std::size_t replicate) {
  return (static_cast<std::uint64_t>(cell) << 32) | static_cast<std::uint64_t>(replicate);
}

inline PipelineOptions pipeline(const StudyOptions& o, JointMethod m) {
  PipelineOptions p;
  p.kernel = o.kernel;
  p.w = o.w;
  p.method = m;
  return p;
}

}  // namespace detail

/// Mean alpha-hat per family when the data are independent (complete data,
/// Akritas pipeline).
inline StudyTable study_independence(const StudyOptions& o) {
  const std::size_t n = o.n ? o.n : 1000;
  const std::map<CopulaFamily, double> paper = {{CopulaFamily::Clayton, 0.0249},
                                                {CopulaFamily::Frank, 0.0352},
                                                {CopulaFamily::Gumbel, 1.0163},
                                                {CopulaFamily::Joe, 1.0150}};
  StudyTable t;
  t.columns = {"family", "replicates", "n", "mean_alpha_hat", "mc_se", "target", "paper"};
  const auto pipe = detail::pipeline(o, JointMethod::Akritas);
  for (CopulaFamily f : o.candidates) {
    if (!detail::keep(o.truths, f)) continue;
    std::vector<double> alpha(o.replicates);
    parallel_for(
        o.replicates,
        [&](std::size_t r) {
          SimulationConfig c = detail::study_config(f, 0.0, CensoringScenario::None, o, n);
          c.stream = detail::cell_stream(static_cast<std::size_t>(f), r);
          const Sample s = simulate_censored(c);
          alpha[r] = fit_alpha_from_tau(f, estimate_tau(s, pipe)).param.alpha();
        },
        o.threads);
    const auto m = mean_se(alpha);
    const double target = (f == CopulaFamily::Clayton || f == CopulaFamily::Frank) ? 0.0 : 1.0;
    const auto it = paper.find(f);
    t.add({detail::fam(f), detail::fmt(o.replicates), detail::fmt(n), detail::fmt(m.mean),
           detail::fmt(m.se), detail::fmt(target),
           it == paper.end() ? "" : detail::fmt(it->second)});
  }
  return t;
}

inline const std::vector<CensoringScenario>& omnibus_scenarios() {
  static const std::vector<CensoringScenario> s = {CensoringScenario::None, CensoringScenario::Single1,
                                                   CensoringScenario::Double};
  return s;
}

/// One omnibus table per true family and scenario (tau = 0.4).
inline StudyTable study_omnibus_single(const StudyOptions& o) {
  const std::size_t n = o.n ? o.n : 1000;
  StudyTable t;
  t.columns = {"scenario", "true_family", "candidate", "alpha_hat", "alpha_star", "gap", "selected"};
  const auto pipe = detail::pipeline(o, JointMethod::Akritas);
  std::size_t cell = 0;
  for (CopulaFamily truth : o.candidates) {
    for (CensoringScenario scen : omnibus_scenarios()) {
      ++cell;
      if (!detail::keep(o.truths, truth) || !detail::keep(o.scenarios, scen)) continue;
      SimulationConfig c = detail::study_config(truth, 0.4, scen, o, n);
      c.stream = detail::cell_stream(cell, 0);
      const Sample s = simulate_censored(c);
      const auto fits = omnibus_table(s, o.candidates, pipe);
      const std::size_t win = omnibus_winner(fits);
      for (std::size_t i = 0; i < fits.size(); ++i)
        t.add({detail::scenario_label(scen), detail::fam(truth), detail::fam(fits[i].family),
               detail::fmt(fits[i].alpha_hat), detail::fmt(fits[i].alpha_star),
               detail::fmt(fits[i].omnibus_gap), i == win ? "1" : "0"});
    }
  }
  return t;
}

/// Share of replicates in which the omnibus procedure does not pick the true
/// family, with the choice counts.
inline StudyTable study_omnibus_repeated(const StudyOptions& o) {
  const std::size_t n = o.n ? o.n : 1000;
  StudyTable t;
  t.columns = {"scenario", "true_family", "replicates", "rejection_rate", "mc_se"};
  for (CopulaFamily f : o.candidates) t.columns.push_back("chosen_" + detail::fam(f));
  const auto pipe = detail::pipeline(o, JointMethod::Akritas);
  std::size_t cell = 0;
  for (CensoringScenario scen : omnibus_scenarios()) {
    for (CopulaFamily truth : o.candidates) {
      ++cell;
      if (!detail::keep(o.truths, truth) || !detail::keep(o.scenarios, scen)) continue;
      const SimulationConfig base = detail::study_config(truth, 0.4, scen, o, n);
      std::vector<std::size_t> chosen(o.replicates);
      parallel_for(
          o.replicates,
          [&](std::size_t r) {
            SimulationConfig c = base;
            c.stream = detail::cell_stream(100 + cell, r);
            const Sample s = simulate_censored(c);
            chosen[r] = omnibus_winner(omnibus_table(s, o.candidates, pipe));
          },
          o.threads);
      std::vector<double> miss;
      std::vector<std::size_t> counts(o.candidates.size(), 0);
      for (std::size_t k : chosen) {
        ++counts[k];
        miss.push_back(o.candidates[k] == truth ? 0.0 : 1.0);
      }
      const auto m = mean_se(miss);
      std::vector<std::string> row = {detail::scenario_label(scen), detail::fam(truth),
                                      detail::fmt(o.replicates), detail::fmt(m.mean),
                                      detail::fmt(m.se)};
      for (std::size_t k : counts) row.push_back(detail::fmt(k));
      t.add(row);
    }
  }
  return t;
}

struct StudyCell {
  CensoringScenario scenario;
  CopulaFamily truth;
  double tau;
};

inline std::vector<StudyCell> l2_cells() {
  std::vector<StudyCell> cells;
  for (auto scen : {CensoringScenario::None, CensoringScenario::Single1})
    for (auto f : {CopulaFamily::Frank, CopulaFamily::Joe})
      for (double tau : {0.2, 0.4, 0.6}) cells.push_back({scen, f, tau});
  for (auto f : kArchimedeanFamilies)
    for (double tau : {0.0, 0.2, 0.4, 0.6}) cells.push_back({CensoringScenario::Double, f, tau});
  return cells;
}

inline std::vector<StudyCell> gof_cells() {
  std::vector<StudyCell> cells;
  for (auto scen : {CensoringScenario::None, CensoringScenario::Single1})
    for (auto f : {CopulaFamily::Frank, CopulaFamily::Joe})
      for (double tau : {0.2, 0.4, 0.6}) cells.push_back({scen, f, tau});
  for (auto f : kArchimedeanFamilies)
    for (double tau : {0.2, 0.4, 0.6}) cells.push_back({CensoringScenario::Double, f, tau});
  return cells;
}

inline bool keep_cell(const StudyOptions& o, const StudyCell& c) {
  return detail::keep(o.scenarios, c.scenario) && detail::keep(o.truths, c.truth) &&
         detail::keep_tau(o.taus, c.tau);
}

/// Bootstrap pseudo p-values per candidate (n = 500). With more than one
/// replicate the p-values are averaged.
inline StudyTable study_l2_bootstrap(const StudyOptions& o) {
  const std::size_t n = o.n ? o.n : 500;
  StudyTable t;
  t.columns = {"scenario", "true_family", "tau", "replicates", "B"};
  for (CopulaFamily f : o.candidates) t.columns.push_back("p_" + detail::fam(f));
  for (CopulaFamily f : o.candidates) t.columns.push_back("se_" + detail::fam(f));
  t.columns.push_back("true_family_minimum_share");
  const auto pipe = detail::pipeline(o, JointMethod::Auto);
  const auto cells = l2_cells();
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const StudyCell& cell = cells[ci];
    if (!keep_cell(o, cell)) continue;
    const SimulationConfig base = detail::study_config(cell.truth, cell.tau, cell.scenario, o, n);
    const std::size_t M = o.candidates.size();
    std::vector<std::vector<double>> p(M, std::vector<double>(o.replicates));
    std::vector<double> true_min(o.replicates, 0.0);
    for (std::size_t r = 0; r < o.replicates; ++r) {
      SimulationConfig c = base;
      c.stream = detail::cell_stream(200 + ci, r);
      const Sample s = simulate_censored(c);
      const KendallCurve curve = estimate_curve(s, pipe);
      const auto boot = bootstrap_pseudo_p(s, curve, o.candidates, o.B,
                                           o.seed + 7919 * (ci + 1) + r, pipe, o.threads);
      for (std::size_t m = 0; m < M; ++m) p[m][r] = boot.pseudo_p[m];
      true_min[r] = o.candidates[boot.winner] == cell.truth ? 1.0 : 0.0;
    }
    std::vector<std::string> row = {detail::scenario_label(cell.scenario), detail::fam(cell.truth),
                                    detail::fmt(cell.tau), detail::fmt(o.replicates),
                                    detail::fmt(o.B)};
    for (std::size_t m = 0; m < M; ++m) row.push_back(detail::fmt(mean_se(p[m]).mean));
    for (std::size_t m = 0; m < M; ++m) row.push_back(detail::fmt(mean_se(p[m]).se));
    row.push_back(detail::fmt(mean_se(true_min).mean));
    t.add(row);
  }
  return t;
}

/// GOF rejection rates at the 5% level per null family (n = 200).
inline StudyTable study_gof(const StudyOptions& o, const GofOptions& gof_base = {}) {
  const std::size_t n = o.n ? o.n : 200;
  StudyTable t;
  t.columns = {"scenario", "true_family", "tau", "replicates"};
  for (CopulaFamily f : o.candidates) t.columns.push_back("reject_" + detail::fam(f));
  for (CopulaFamily f : o.candidates) t.columns.push_back("se_" + detail::fam(f));
  const auto pipe = detail::pipeline(o, JointMethod::Auto);
  GofOptions gof = gof_base;
  gof.M = o.M;
  const auto cells = gof_cells();
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const StudyCell& cell = cells[ci];
    if (!keep_cell(o, cell)) continue;
    const SimulationConfig base = detail::study_config(cell.truth, cell.tau, cell.scenario, o, n);
    const std::size_t M = o.candidates.size();
    std::vector<std::vector<double>> rej(M, std::vector<double>(o.replicates));
    parallel_for(
        o.replicates,
        [&](std::size_t r) {
          SimulationConfig c = base;
          c.stream = detail::cell_stream(300 + ci, r);
          const Sample s = simulate_censored(c);
          const double tau = estimate_tau(s, pipe);
          for (std::size_t m = 0; m < M; ++m) {
            const auto p = fit_alpha_from_tau(o.candidates[m], tau).param;
            const auto g = wang_gof(s, p, detail::cell_stream(300 + ci, r) ^ 0x5eed, gof);
            rej[m][r] = g.p_value < 0.05 ? 1.0 : 0.0;
          }
        },
        o.threads);
    std::vector<std::string> row = {detail::scenario_label(cell.scenario), detail::fam(cell.truth),
                                    detail::fmt(cell.tau), detail::fmt(o.replicates)};
    for (std::size_t m = 0; m < M; ++m) row.push_back(detail::fmt(mean_se(rej[m]).mean));
    for (std::size_t m = 0; m < M; ++m) row.push_back(detail::fmt(mean_se(rej[m]).se));
    t.add(row);
  }
  return t;
}

// --- limits ---------------------------------------------------------------------------

struct LimitModel {
  double mu1 = 8.0;
  double mu2 = 7.0;
  double sigma1 = 1.0;
  double sigma2 = 3.0;
  double rho = 0.35;  ///< correlation of the log times
  double censor_sigma = 1.0;
};

struct LimitPreset {
  std::string name;
  double censor1;  ///< share of T1 censored by X1
  double censor2;
};

inline const std::vector<LimitPreset>& limit_presets() {
  static const std::vector<LimitPreset> p = {
      {"low", 0.02, 0.01}, {"medium", 0.25, 0.40}, {"high", 0.65, 0.75}};
  return p;
}

/// Location of a lognormal censor (log-scale sd `cs`) such that
/// P(X < T) = target for T lognormal(mu, sigma). Both logs are normal, so the
/// probability is Phi((mu - m) / sqrt(sigma^2 + cs^2)).
inline double censor_location(double mu, double sigma, double cs, double target) {
  if (!(target > 0.0 && target < 1.0)) throw DomainError("censoring share must lie in (0, 1)");
  return mu - std::sqrt(sigma * sigma + cs * cs) * MarginalModel::normal_quantile(target);
}

struct LimitReplicate {
  double tau_full = 0.0;
  double tau_limited = 0.0;
  CopulaFamily l2_full = CopulaFamily::Clayton;
  CopulaFamily l2_limited = CopulaFamily::Clayton;
};

namespace detail {

inline double empirical_quantile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= x.size()) return x.back();
  return x[i] + (pos - static_cast<double>(i)) * (x[i + 1] - x[i]);
}

inline CopulaFamily l2_choice(const KendallCurve& c, const std::vector<CopulaFamily>& cands) {
  CopulaFamily best = cands.front();
  double bd = numerics::kInf;
  for (CopulaFamily f : cands) {
    const double d = l2_distance(c, fit_alpha_from_tau(f, c.tau_hat).param);
    if (d < bd) {
      bd = d;
      best = f;
    }
  }
  return best;
}

}  // namespace detail

/// One replicate: latent lognormal times with Gaussian dependence on the log
/// scale, independent lognormal censors and limits at the empirical quantiles
/// q_high and q_low of the unlimited observed Y_j.
inline LimitReplicate limit_replicate(const LimitModel& m, const LimitPreset& preset,
                                      std::size_t n, double q_high, double q_low,
                                      const StudyOptions& o, std::uint64_t stream) {
  Rng rng(o.seed, stream);
  const double mx1 = censor_location(m.mu1, m.sigma1, m.censor_sigma, preset.censor1);
  const double mx2 = censor_location(m.mu2, m.sigma2, m.censor_sigma, preset.censor2);
  std::vector<LatentPair> t(n);
  std::vector<std::pair<double, double>> x(n);
  std::vector<double> y1(n);
  std::vector<double> y2(n);
  const double rc = std::sqrt(1.0 - m.rho * m.rho);
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = rng.normal();
    const double z2 = m.rho * z1 + rc * rng.normal();
    t[i] = {std::exp(m.mu1 + m.sigma1 * z1), std::exp(m.mu2 + m.sigma2 * z2)};
    x[i] = {std::exp(mx1 + m.censor_sigma * rng.normal()), std::exp(mx2 + m.censor_sigma * rng.normal())};
    y1[i] = std::min(t[i].t1, x[i].first);
    y2[i] = std::min(t[i].t2, x[i].second);
  }
  auto build = [&](double q) {
    const double w1 = detail::empirical_quantile(y1, q);
    const double w2 = detail::empirical_quantile(y2, q);
    std::vector<Observation> obs(n);
    for (std::size_t i = 0; i < n; ++i) obs[i] = censor_pair(t[i], x[i].first, x[i].second, w1, w2);
    return Sample(std::move(obs));
  };
  const auto pipe = detail::pipeline(o, JointMethod::Akritas);
  const KendallCurve full = estimate_curve(build(q_high), pipe);
  const KendallCurve lim = estimate_curve(build(q_low), pipe);
  return {full.tau_hat, lim.tau_hat, detail::l2_choice(full, o.candidates),
          detail::l2_choice(lim, o.candidates)};
}

inline StudyTable study_limits(const StudyOptions& o, double q_high = 0.99, double q_low = 0.75) {
  const std::size_t n = o.n ? o.n : 500;
  const LimitModel model;
  StudyTable t;
  t.columns = {"preset", "replicates", "tau_hat_q_high", "se_high", "tau_hat_q_low", "se_low",
               "l2_family_unchanged_share"};
  for (CopulaFamily f : o.candidates) t.columns.push_back("high_" + detail::fam(f));
  for (CopulaFamily f : o.candidates) t.columns.push_back("low_" + detail::fam(f));
  const auto& presets = limit_presets();
  for (std::size_t pi = 0; pi < presets.size(); ++pi) {
    std::vector<LimitReplicate> reps(o.replicates);
    parallel_for(
        o.replicates,
        [&](std::size_t r) {
          reps[r] = limit_replicate(model, presets[pi], n, q_high, q_low, o,
                                    detail::cell_stream(400 + pi, r));
        },
        o.threads);
    std::vector<double> th;
    std::vector<double> tl;
    std::vector<double> same;
    std::map<CopulaFamily, std::size_t> ch;
    std::map<CopulaFamily, std::size_t> cl;
    for (const auto& r : reps) {
      th.push_back(r.tau_full);
      tl.push_back(r.tau_limited);
      same.push_back(r.l2_full == r.l2_limited ? 1.0 : 0.0);
      ++ch[r.l2_full];
      ++cl[r.l2_limited];
    }
    const auto mh = mean_se(th);
    const auto ml = mean_se(tl);
    std::vector<std::string> row = {presets[pi].name, detail::fmt(o.replicates), detail::fmt(mh.mean),
                                    detail::fmt(mh.se), detail::fmt(ml.mean), detail::fmt(ml.se),
                                    detail::fmt(mean_se(same).mean)};
    for (CopulaFamily f : o.candidates) row.push_back(detail::fmt(ch[f]));
    for (CopulaFamily f : o.candidates) row.push_back(detail::fmt(cl[f]));
    t.add(row);
  }
  return t;
}

/// Dispatch by table id: 4 independence, 5 omnibus single run, 6 omnibus
/// repeated, 7 L2 bootstrap, 8 GOF, "limits" for the limit study.
inline StudyTable reproduce_table(std::string_view id, const StudyOptions& o) {
  if (o.replicates == 0) throw InputError("replicates must be positive");
  if (id == "4") return study_independence(o);
  if (id == "5") return study_omnibus_single(o);
  if (id == "6") return study_omnibus_repeated(o);
  if (id == "7") return study_l2_bootstrap(o);
  if (id == "8") return study_gof(o);
  if (id == "limits" || id == "limit") return study_limits(o);
  throw InputError("unknown table id '" + std::string(id) + "' (expected 4, 5, 6, 7, 8 or limits)");
}

}  // namespace censcop
