#pragma once

// Empirical Kendall distribution K-hat, lambda-hat = nu - K-hat, tau-hat, the
// nonparametric generator estimate and candidate overlays for graphical
// selection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "copula.hpp"
#include "errors.hpp"
#include "survival.hpp"

namespace censcop {

enum class CurveSource { CountingComplete, JointEstimate };

/// Right-continuous step function K-hat on an increasing grid; K-hat = 0 below
/// the first grid point.
struct KendallCurve {
  std::vector<double> nu_grid;
  std::vector<double> K_values;
  std::vector<double> lambda_values;
  double tau_hat = 0.0;
  double tau_raw = 0.0;      ///< before clamping to [-1, 1]
  bool tau_clamped = false;
  CurveSource source = CurveSource::JointEstimate;
  std::string estimator;     ///< e.g. "counting", "akritas", "avk", "ecdf"
  std::size_t sample_size = 0;

  double K(double nu) const {
    const auto it = std::upper_bound(nu_grid.begin(), nu_grid.end(), nu);
    if (it == nu_grid.begin()) return 0.0;
    return K_values[static_cast<std::size_t>(it - nu_grid.begin()) - 1];
  }
  double lambda(double nu) const { return nu - K(nu); }
};

namespace detail {

/// Distinct values closer than this are merged; the lattice arithmetic of a
/// joint estimate carries rounding of this order.
inline constexpr double kNuMergeTol = 1e-12;

inline double step_integral(const std::vector<double>& grid, const std::vector<double>& K) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double next = i + 1 < grid.size() ? grid[i + 1] : 1.0;
    if (next > grid[i]) s += K[i] * (next - grid[i]);
  }
  return s;
}

inline void finish_curve(KendallCurve& c, std::vector<std::pair<double, double>>& atoms,
                         double total) {
  std::sort(atoms.begin(), atoms.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    acc += atoms[i].second;
    const bool last_of_group =
        i + 1 == atoms.size() || atoms[i + 1].first - atoms[i].first > kNuMergeTol;
    if (!last_of_group) continue;
    c.nu_grid.push_back(atoms[i].first);
    c.K_values.push_back(std::min(acc / total, 1.0));
  }
  if (c.nu_grid.back() < 1.0) {
    c.nu_grid.push_back(1.0);
    c.K_values.push_back(1.0);
  }
  c.K_values.back() = 1.0;
  c.lambda_values.resize(c.nu_grid.size());
  for (std::size_t i = 0; i < c.nu_grid.size(); ++i)
    c.lambda_values[i] = c.nu_grid[i] - c.K_values[i];
  c.tau_raw = 3.0 - 4.0 * step_integral(c.nu_grid, c.K_values);
  c.tau_hat = std::clamp(c.tau_raw, -1.0, 1.0);
  c.tau_clamped = c.tau_hat != c.tau_raw;
}

inline double orthant_factor(std::size_t n) {
  return n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
}

/// Pseudo-observation of a lattice cell: strict lower-orthant mass times n/(n-1).
inline double cell_nu(const JointDistributionEstimate& j, std::size_t k, std::size_t l,
                      double factor) {
  const double below = (k > 0 && l > 0) ? j.cumulative(k - 1, l - 1) : 0.0;
  return std::clamp(below * factor, 0.0, 1.0);
}

}  // namespace detail

/// K-hat(nu) = sum of masses at lattice points whose pseudo-observation is
/// <= nu. A defective surface (censored tail mass) is first rescaled to a
/// proper distribution, so both the masses and the pseudo-observations are
/// taken relative to the total mass.
inline KendallCurve kendall_from_joint(const JointDistributionEstimate& j,
                                       std::string estimator = "joint") {
  const double total = j.total_mass();
  if (!(total > 0.0)) throw NumericalError("joint estimate carries no mass");
  const double factor = detail::orthant_factor(j.sample_size()) / total;
  std::vector<std::pair<double, double>> atoms;
  for (std::size_t k = 0; k < j.rows(); ++k)
    for (std::size_t l = 0; l < j.cols(); ++l)
      if (const double m = j.mass(k, l); m > 0.0) atoms.emplace_back(detail::cell_nu(j, k, l, factor), m);
  KendallCurve c;
  c.source = CurveSource::JointEstimate;
  c.estimator = std::move(estimator);
  c.sample_size = j.sample_size();
  detail::finish_curve(c, atoms, total);
  return c;
}

/// tau-hat straight from a joint estimate: int_0^1 K-hat = sum_p m_p (1 - nu_p) / M.
/// Equal to tau_hat(kendall_from_joint(j)) up to rounding, without the sort.
inline double tau_from_joint(const JointDistributionEstimate& j) {
  const double total = j.total_mass();
  if (!(total > 0.0)) throw NumericalError("joint estimate carries no mass");
  const double factor = detail::orthant_factor(j.sample_size()) / total;
  double s = 0.0;
  for (std::size_t k = 0; k < j.rows(); ++k)
    for (std::size_t l = 0; l < j.cols(); ++l)
      if (const double m = j.mass(k, l); m > 0.0) s += m * (1.0 - detail::cell_nu(j, k, l, factor));
  return std::clamp(3.0 - 4.0 * s / total, -1.0, 1.0);
}

namespace detail {

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : t_(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < t_.size(); i += i & (~i + 1)) ++t_[i];
  }
  /// Number of inserted positions < i.
  std::size_t prefix(std::size_t i) const {
    std::size_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += t_[i];
    return s;
  }

 private:
  std::vector<std::size_t> t_;
};

/// For each pair, #{j : x_j < x_i and y_j < y_i}.
inline std::vector<std::size_t> strict_lower_counts(const std::vector<double>& x,
                                                    const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> ys = y;
  std::sort(ys.begin(), ys.end());
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i)
    rank[i] = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y[i]) - ys.begin());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  Fenwick fw(n);
  std::vector<std::size_t> out(n, 0);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) out[order[k]] = fw.prefix(rank[order[k]]);
    for (std::size_t k = i; k < j; ++k) fw.add(rank[order[k]]);
    i = j;
  }
  return out;
}

}  // namespace detail

/// Complete-data estimator: nu_i = #{j : t1j < t1i, t2j < t2i} / (n - 1),
/// K-hat(nu) = fraction of nu_i <= nu.
inline KendallCurve kendall_counting(const Sample& s) {
  if (!s.complete()) throw DomainError("kendall_counting requires complete data");
  const std::size_t n = s.size();
  if (n < 2) throw DomainError("kendall_counting requires n >= 2");
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = s[i].y1;
    y[i] = s[i].y2;
  }
  const auto counts = detail::strict_lower_counts(x, y);
  std::vector<std::pair<double, double>> atoms(n);
  for (std::size_t i = 0; i < n; ++i)
    atoms[i] = {static_cast<double>(counts[i]) / static_cast<double>(n - 1), 1.0};
  KendallCurve c;
  c.source = CurveSource::CountingComplete;
  c.estimator = "counting";
  c.sample_size = n;
  detail::finish_curve(c, atoms, static_cast<double>(n));
  return c;
}

/// tau-hat = 3 - 4 int_0^1 K-hat, exact for the step function, clamped to [-1, 1].
inline double tau_hat(const KendallCurve& c) {
  return std::clamp(3.0 - 4.0 * detail::step_integral(c.nu_grid, c.K_values), -1.0, 1.0);
}

/// Same integral through lambda-hat: tau-hat = 1 + 4 int_0^1 lambda-hat.
inline double tau_hat_from_lambda(const KendallCurve& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.nu_grid.size(); ++i) {
    const double a = c.nu_grid[i];
    const double b = i + 1 < c.nu_grid.size() ? c.nu_grid[i + 1] : 1.0;
    if (b > a) s += 0.5 * (b * b - a * a) - c.K_values[i] * (b - a);
  }
  if (!c.nu_grid.empty()) s += 0.5 * c.nu_grid.front() * c.nu_grid.front();
  return std::clamp(1.0 + 4.0 * s, -1.0, 1.0);
}

// --- generator estimate --------------------------------------------------------

struct GeneratorEstimate {
  std::vector<double> nu_grid;
  std::vector<double> phi_values;
  double nu0 = 0.5;
  std::size_t excluded_cells = 0;  ///< cells skipped because t - K-hat(t) vanishes in them
};

namespace detail {

/// int_a^b dt / (t - c) for constant c, or NaN if the integrand is singular on [a, b].
inline double log_cell(double a, double b, double c) {
  constexpr double kSingular = 1e-10;
  if (c >= a - kSingular && c <= b + kSingular) return std::numeric_limits<double>::quiet_NaN();
  return std::log(std::abs(b - c)) - std::log(std::abs(a - c));
}

}  // namespace detail

/// phi-hat(nu) = exp{ int_{nu0}^{nu} dt / (t - K-hat(t)) }, integrated exactly
/// over each constant piece of K-hat. Cells where t - K-hat(t) vanishes are
/// excluded (log phi-hat carried across them) and counted.
inline GeneratorEstimate generator_estimate(const KendallCurve& c, double nu0 = 0.5,
                                            std::vector<double> nu_eval = {}) {
  if (!(nu0 > 0.0 && nu0 < 1.0)) throw DomainError("nu0 must lie in (0, 1)");
  if (nu_eval.empty()) {
    for (double v : c.nu_grid)
      if (v > 0.0) nu_eval.push_back(v);
  }
  std::sort(nu_eval.begin(), nu_eval.end());
  // Breakpoints of K-hat plus evaluation points and nu0.
  std::vector<double> pts;
  for (double v : c.nu_grid)
    if (v > 0.0) pts.push_back(v);
  pts.insert(pts.end(), nu_eval.begin(), nu_eval.end());
  pts.push_back(nu0);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> logphi(pts.size(), 0.0);
  const auto i0 = static_cast<std::size_t>(std::lower_bound(pts.begin(), pts.end(), nu0) - pts.begin());
  GeneratorEstimate g;
  g.nu0 = nu0;
  std::size_t excluded = 0;
  bool any_used = false;
  for (std::size_t i = i0 + 1; i < pts.size(); ++i) {
    const double d = detail::log_cell(pts[i - 1], pts[i], c.K(pts[i - 1]));
    if (std::isnan(d)) {
      ++excluded;
      logphi[i] = logphi[i - 1];
    } else {
      any_used = true;
      logphi[i] = logphi[i - 1] + d;
    }
  }
  for (std::size_t i = i0; i-- > 0;) {
    const double d = detail::log_cell(pts[i], pts[i + 1], c.K(pts[i]));
    if (std::isnan(d)) {
      ++excluded;
      logphi[i] = logphi[i + 1];
    } else {
      any_used = true;
      logphi[i] = logphi[i + 1] - d;
    }
  }
  if (!any_used && pts.size() > 1) throw NumericalError("degenerate curve: t - K(t) vanishes everywhere");
  g.excluded_cells = excluded;
  for (double v : nu_eval) {
    const auto k = static_cast<std::size_t>(std::lower_bound(pts.begin(), pts.end(), v) - pts.begin());
    g.nu_grid.push_back(v);
    g.phi_values.push_back(std::exp(logphi[k]));
  }
  return g;
}

// --- graphical comparison -------------------------------------------------------

struct CandidateColumn {
  CopulaFamily family;
  double alpha;
  std::vector<double> K;
  std::vector<double> lambda;
};

struct GraphicalTable {
  std::vector<double> nu;
  std::vector<double> K_hat;
  std::vector<double> lambda_hat;
  std::vector<CandidateColumn> columns;
  std::vector<std::string> notes;
};

inline std::vector<double> uniform_nu_grid(std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = static_cast<double>(i + 1) / static_cast<double>(points);
  return g;
}

/// Overlays lambda_{alpha-hat} for each candidate, alpha-hat obtained by
/// inverting tau-hat. Candidates whose range excludes tau-hat are skipped.
inline GraphicalTable graphical_curves(const KendallCurve& c,
                                       const std::vector<CopulaFamily>& candidates,
                                       std::vector<double> grid = {}) {
  if (candidates.empty()) throw InputError("no candidate families");
  if (grid.empty()) {
    for (double v : c.nu_grid)
      if (v > 0.0) grid.push_back(v);
  }
  GraphicalTable t;
  t.nu = grid;
  for (double v : grid) {
    t.K_hat.push_back(c.K(v));
    t.lambda_hat.push_back(v - c.K(v));
  }
  for (CopulaFamily f : candidates) {
    std::optional<DependenceParam> p;
    try {
      p = alpha_from_tau(f, KendallTau(c.tau_hat));
    } catch (const Error& e) {
      t.notes.push_back(std::string(family_name(f)) + " skipped: " + e.what());
      continue;
    }
    CandidateColumn col{f, p->alpha(), {}, {}};
    for (double v : grid) {
      const double lam = detail::lambda(*p, v);
      col.K.push_back(v - lam);
      col.lambda.push_back(lam);
    }
    t.columns.push_back(std::move(col));
  }
  return t;
}

inline void write_curve_csv(std::ostream& out, const GraphicalTable& t) {
  out << "nu,K_hat,lambda_hat";
  for (const auto& c : t.columns) {
    const std::string name(family_name(c.family));
    out << ',' << name << "_K," << name << "_lambda";
  }
  out << '\n';
  for (std::size_t i = 0; i < t.nu.size(); ++i) {
    out << detail::format_double(t.nu[i]) << ',' << detail::format_double(t.K_hat[i]) << ','
        << detail::format_double(t.lambda_hat[i]);
    for (const auto& c : t.columns)
      out << ',' << detail::format_double(c.K[i]) << ',' << detail::format_double(c.lambda[i]);
    out << '\n';
  }
}

// --- empirical Kendall tau of raw pairs -------------------------------------------

struct EmpiricalTau {
  double tau;
  double se;  ///< asymptotic U-statistic standard error
};

/// O(n log n) Kendall tau of continuous (tie-free) pairs with its standard error
/// from the U-statistic variance 4/n Var(2 C_i/(n-1) - 1).
inline EmpiricalTau empirical_kendall_tau(const std::vector<std::pair<double, double>>& pairs) {
  const std::size_t n = pairs.size();
  if (n < 3) throw DomainError("empirical_kendall_tau needs at least 3 pairs");
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = pairs[i].first;
    y[i] = pairs[i].second;
  }
  const auto lower = detail::strict_lower_counts(x, y);
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    std::vector<std::size_t> r(n);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), v[i]) - s.begin());
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  std::vector<double> h(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double upper = static_cast<double>(n - 1) - static_cast<double>(rx[i]) -
                         static_cast<double>(ry[i]) + static_cast<double>(lower[i]);
    const double concordant = static_cast<double>(lower[i]) + upper;
    h[i] = 2.0 * concordant / static_cast<double>(n - 1) - 1.0;
    mean += h[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : h) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  return {mean, std::sqrt(4.0 * var / static_cast<double>(n))};
}

}  // namespace censcop
