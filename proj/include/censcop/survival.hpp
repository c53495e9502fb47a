#pragma once

// Nonparametric distribution estimators under right censoring: Kaplan-Meier
// marginals, the Beran kernel-conditional estimator, the Akritas joint
// estimator, its single-censoring predecessor and the bivariate ECDF.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "censored_data.hpp"
#include "errors.hpp"

namespace censcop {

/// Right-continuous nondecreasing step function, 0 before the first jump.
struct StepFunction {
  std::vector<double> jump_points;
  std::vector<double> values;
  bool degenerate = false;  ///< e.g. all observations of the margin censored

  double operator()(double t) const {
    const auto it = std::upper_bound(jump_points.begin(), jump_points.end(), t);
    if (it == jump_points.begin()) return 0.0;
    return values[static_cast<std::size_t>(it - jump_points.begin()) - 1];
  }

  /// Jump size at jump_points[i].
  double jump(std::size_t i) const { return values[i] - (i == 0 ? 0.0 : values[i - 1]); }
};

/// Product-limit estimate of F_j. Censored observations tied with an event stay
/// in the risk set at that time. With `rescale`, values are multiplied by n/(n+1).
inline StepFunction kaplan_meier(const Sample& s, int margin, bool rescale = false) {
  if (margin != 1 && margin != 2) throw DomainError("margin must be 1 or 2");
  const std::size_t n = s.size();
  std::vector<std::pair<double, int>> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {s.value(i, margin), s.delta(i, margin)};
  std::sort(v.begin(), v.end());
  StepFunction f;
  double surv = 1.0;
  std::size_t at_risk = n;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::size_t events = 0;
    while (j < n && v[j].first == v[i].first) {
      events += static_cast<std::size_t>(v[j].second);
      ++j;
    }
    if (events > 0) {
      surv *= 1.0 - static_cast<double>(events) / static_cast<double>(at_risk);
      f.jump_points.push_back(v[i].first);
      f.values.push_back(1.0 - surv);
    }
    at_risk -= j - i;
    i = j;
  }
  if (f.jump_points.empty()) f.degenerate = true;
  if (rescale) {
    const double r = static_cast<double>(n) / static_cast<double>(n + 1);
    for (auto& x : f.values) x *= r;
  }
  return f;
}

// --- kernels -----------------------------------------------------------------

enum class KernelShape { Epanechnikov, Gaussian, Uniform };

inline KernelShape parse_kernel(std::string_view s) {
  if (s == "epanechnikov") return KernelShape::Epanechnikov;
  if (s == "gaussian") return KernelShape::Gaussian;
  if (s == "uniform") return KernelShape::Uniform;
  throw InputError("unknown kernel '" + std::string(s) + "'");
}

inline std::string_view to_string(KernelShape k) {
  switch (k) {
    case KernelShape::Epanechnikov: return "epanechnikov";
    case KernelShape::Gaussian: return "gaussian";
    case KernelShape::Uniform: return "uniform";
  }
  return "?";
}

inline double kernel_value(KernelShape k, double u) {
  switch (k) {
    case KernelShape::Epanechnikov: return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelShape::Gaussian: return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case KernelShape::Uniform: return std::abs(u) <= 1.0 ? 0.5 : 0.0;
  }
  return 0.0;
}

/// Kernel and bandwidth. A non-positive bandwidth selects the rule
/// h = c * min(sd, IQR/1.349) * n^(-1/5) on the conditioning margin.
struct KernelSpec {
  KernelShape shape = KernelShape::Epanechnikov;
  double bandwidth = 0.0;
  double rule_constant = 1.0;

  static KernelSpec fixed(KernelShape shape, double h) {
    if (!(h > 0.0 && std::isfinite(h))) throw DomainError("bandwidth must be positive");
    return {shape, h, 1.0};
  }
};

inline double robust_scale(std::vector<double> x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::sort(x.begin(), x.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
  };
  const double iqr = (q(0.75) - q(0.25)) / 1.349;
  return iqr > 0.0 ? std::min(sd, iqr) : sd;
}

/// Bandwidth for conditioning on `margin`.
inline double bandwidth_for(const Sample& s, int margin, const KernelSpec& k) {
  if (k.bandwidth > 0.0) return k.bandwidth;
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = s.value(i, margin);
  double scale = robust_scale(std::move(x));
  if (!(scale > 0.0)) scale = 1.0;
  return k.rule_constant * scale * std::pow(static_cast<double>(s.size()), -0.2);
}

// --- Beran conditional estimator --------------------------------------------

namespace detail {

/// Shared ordering of one target margin, reused across conditioning points.
struct TargetOrder {
  std::vector<std::size_t> order;          ///< indices sorted by target value
  std::vector<std::size_t> group_start;    ///< start of each tie group in `order`
  std::vector<double> group_value;         ///< distinct target values
  std::vector<bool> group_has_event;

  TargetOrder(const Sample& s, int target) {
    const std::size_t n = s.size();
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return s.value(a, target) < s.value(b, target);
    });
    for (std::size_t i = 0; i < n; ++i) {
      const double v = s.value(order[i], target);
      if (i == 0 || v != group_value.back()) {
        group_start.push_back(i);
        group_value.push_back(v);
        group_has_event.push_back(false);
      }
      if (s.delta(order[i], target) == 1) group_has_event.back() = true;
    }
    group_start.push_back(n);
  }
};

/// Beran conditional survival product for weights `w` (indexed by observation):
/// returns F(t | z) at the end of every tie group of the target margin.
inline void beran_groups(const Sample& s, int target, const TargetOrder& ord,
                         const std::vector<double>& w, std::vector<double>& cdf_at_group) {
  const std::size_t g = ord.group_value.size();
  cdf_at_group.assign(g, 0.0);
  // Risk sums run from the top; the product runs from the bottom.
  std::vector<double> risk(g + 1, 0.0);
  std::vector<double> events(g, 0.0);
  for (std::size_t k = g; k-- > 0;) {
    double total = 0.0;
    double ev = 0.0;
    for (std::size_t i = ord.group_start[k]; i < ord.group_start[k + 1]; ++i) {
      const std::size_t idx = ord.order[i];
      total += w[idx];
      if (s.delta(idx, target) == 1) ev += w[idx];
    }
    risk[k] = risk[k + 1] + total;
    events[k] = ev;
  }
  double surv = 1.0;
  for (std::size_t k = 0; k < g; ++k) {
    if (events[k] > 0.0 && risk[k] > 0.0) {
      const double h = events[k] >= risk[k] ? 1.0 : events[k] / risk[k];
      surv *= 1.0 - h;
    }
    cdf_at_group[k] = 1.0 - surv;
  }
}

inline void conditioning_weights(const Sample& s, int cond, double z, double h, KernelShape shape,
                                 std::vector<double>& w) {
  const std::size_t n = s.size();
  w.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (s.delta(i, cond) == 1) w[i] = kernel_value(shape, (z - s.value(i, cond)) / h);
  }
}

}  // namespace detail

struct BeranResult {
  double value = 0.0;
  bool degenerate = false;  ///< all kernel weights vanished
};

/// F-hat_{target | cond}(y | given) with standard Beran weights: kernel in the
/// conditioning margin, zero weight at censored conditioning points.
inline BeranResult beran_conditional_result(const Sample& s, int target_margin, double y,
                                            double given, const KernelSpec& kernel) {
  if (target_margin != 1 && target_margin != 2) throw DomainError("margin must be 1 or 2");
  const int cond = 3 - target_margin;
  bool found = false;
  for (std::size_t i = 0; i < s.size() && !found; ++i)
    found = s.value(i, cond) == given && s.delta(i, cond) == 1;
  if (!found)
    throw DomainError("conditioning value must be an uncensored observation of margin " +
                      std::to_string(cond));
  const double h = bandwidth_for(s, cond, kernel);
  std::vector<double> w;
  detail::conditioning_weights(s, cond, given, h, kernel.shape, w);
  if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) return {0.0, true};
  const detail::TargetOrder ord(s, target_margin);
  std::vector<double> cdf;
  detail::beran_groups(s, target_margin, ord, w, cdf);
  const auto it = std::upper_bound(ord.group_value.begin(), ord.group_value.end(), y);
  if (it == ord.group_value.begin()) return {0.0, false};
  return {cdf[static_cast<std::size_t>(it - ord.group_value.begin()) - 1], false};
}

inline double beran_conditional(const Sample& s, int target_margin, double y, double given,
                                const KernelSpec& kernel) {
  return beran_conditional_result(s, target_margin, y, given, kernel).value;
}

// --- joint distribution estimates ---------------------------------------------

/// Bivariate distribution on a product lattice x (margin 1) by y (margin 2)
/// with point masses; cumulative(k, l) = F-hat(x_k, y_l).
class JointDistributionEstimate {
 public:
  JointDistributionEstimate() = default;

  JointDistributionEstimate(std::vector<double> x, std::vector<double> y,
                            std::vector<double> mass, std::size_t sample_size)
      : x_(std::move(x)), y_(std::move(y)), mass_(std::move(mass)), n_(sample_size) {
    if (mass_.size() != x_.size() * y_.size())
      throw DomainError("mass matrix does not match the lattice");
    rebuild_cumulative();
  }

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& y() const noexcept { return y_; }
  std::size_t rows() const noexcept { return x_.size(); }
  std::size_t cols() const noexcept { return y_.size(); }
  double mass(std::size_t k, std::size_t l) const { return mass_[k * y_.size() + l]; }
  double cumulative(std::size_t k, std::size_t l) const { return cum_[k * y_.size() + l]; }
  const std::vector<double>& masses() const noexcept { return mass_; }
  std::size_t sample_size() const noexcept { return n_; }
  double total_mass() const {
    return cum_.empty() ? 0.0 : cum_.back();
  }
  std::size_t repaired_cells() const noexcept { return repaired_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }
  void add_note(std::string s) { notes_.push_back(std::move(s)); }

  double cdf(double y1, double y2) const {
    const auto ik = std::upper_bound(x_.begin(), x_.end(), y1);
    const auto il = std::upper_bound(y_.begin(), y_.end(), y2);
    if (ik == x_.begin() || il == y_.begin()) return 0.0;
    return cumulative(static_cast<std::size_t>(ik - x_.begin()) - 1,
                      static_cast<std::size_t>(il - y_.begin()) - 1);
  }

  /// Rectifies a surface that is not 2-increasing: negative masses are set to
  /// zero and the removed amount is taken proportionally from positive masses
  /// so the total is preserved. Returns the number of cells changed.
  std::size_t repair() {
    double negative = 0.0;
    double positive = 0.0;
    std::size_t changed = 0;
    for (double m : mass_) {
      if (m < 0.0) {
        negative += m;
        ++changed;
      } else {
        positive += m;
      }
    }
    if (changed == 0) return 0;
    const double scale = positive > 0.0 ? (positive + negative) / positive : 0.0;
    for (double& m : mass_) m = m < 0.0 ? 0.0 : m * std::max(scale, 0.0);
    repaired_ += changed;
    rebuild_cumulative();
    return changed;
  }

 private:
  void rebuild_cumulative() {
    const std::size_t r = x_.size();
    const std::size_t c = y_.size();
    cum_.assign(r * c, 0.0);
    for (std::size_t k = 0; k < r; ++k) {
      double row = 0.0;
      for (std::size_t l = 0; l < c; ++l) {
        row += mass_[k * c + l];
        cum_[k * c + l] = row + (k > 0 ? cum_[(k - 1) * c + l] : 0.0);
      }
    }
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> mass_;
  std::vector<double> cum_;
  std::size_t n_ = 0;
  std::size_t repaired_ = 0;
  std::vector<std::string> notes_;
};

namespace detail {

inline std::vector<double> distinct_uncensored(const Sample& s, int margin) {
  std::vector<double> v;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.delta(i, margin) == 1) v.push_back(s.value(i, margin));
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline std::vector<double> distinct_values(const Sample& s, int margin) {
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = s.value(i, margin);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Adds scale * dG(z_m) * dF_{target|cond}(. | z_m) onto the lattice, where the
/// conditioning points z_m and masses dG are given. The target lattice must
/// contain every uncensored target value.
inline void add_conditional_branch(const Sample& s, int target, const std::vector<double>& lattice_t,
                                   const std::vector<double>& cond_points,
                                   const std::vector<double>& cond_mass,
                                   const std::vector<double>& lattice_c, double h,
                                   KernelShape shape, double scale, std::vector<double>& mass,
                                   std::size_t& degenerate) {
  const int cond = 3 - target;
  const TargetOrder ord(s, target);
  // Map target tie groups onto lattice indices (events only).
  std::vector<std::size_t> group_to_lattice(ord.group_value.size(), lattice_t.size());
  for (std::size_t g = 0; g < ord.group_value.size(); ++g) {
    if (!ord.group_has_event[g]) continue;
    const auto it = std::lower_bound(lattice_t.begin(), lattice_t.end(), ord.group_value[g]);
    group_to_lattice[g] = static_cast<std::size_t>(it - lattice_t.begin());
  }
  const std::size_t cols = target == 1 ? lattice_c.size() : lattice_t.size();
  std::vector<double> w;
  std::vector<double> cdf;
  for (std::size_t m = 0; m < cond_points.size(); ++m) {
    if (cond_mass[m] <= 0.0) continue;
    conditioning_weights(s, cond, cond_points[m], h, shape, w);
    if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) {
      ++degenerate;
      continue;
    }
    beran_groups(s, target, ord, w, cdf);
    const auto ic = std::lower_bound(lattice_c.begin(), lattice_c.end(), cond_points[m]);
    const auto c_idx = static_cast<std::size_t>(ic - lattice_c.begin());
    double prev = 0.0;
    for (std::size_t g = 0; g < cdf.size(); ++g) {
      const double jump = cdf[g] - prev;
      prev = cdf[g];
      if (jump <= 0.0 || group_to_lattice[g] == lattice_t.size()) continue;
      const std::size_t t_idx = group_to_lattice[g];
      const std::size_t k = target == 1 ? t_idx : c_idx;
      const std::size_t l = target == 1 ? c_idx : t_idx;
      mass[k * cols + l] += scale * cond_mass[m] * jump;
    }
  }
}

}  // namespace detail

/// Akritas joint estimator
///   F(y) = w * int_0^{y2} F_{1|2}(y1 | z) dF2(z) + (1 - w) * int_0^{y1} F_{2|1}(y2 | z) dF1(z)
/// with Kaplan-Meier integrators, realised exactly on the lattice of uncensored
/// values. The kernel bandwidth is chosen per conditioning margin.
inline JointDistributionEstimate akritas_joint(const Sample& s, const KernelSpec& kernel,
                                               double w = 0.5) {
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("weight w must lie in [0, 1]");
  const auto x = detail::distinct_uncensored(s, 1);
  const auto y = detail::distinct_uncensored(s, 2);
  std::vector<double> mass(x.size() * y.size(), 0.0);
  std::size_t degenerate = 0;
  const StepFunction km1 = kaplan_meier(s, 1);
  const StepFunction km2 = kaplan_meier(s, 2);
  auto jumps = [](const StepFunction& f) {
    std::vector<double> j(f.values.size());
    for (std::size_t i = 0; i < j.size(); ++i) j[i] = f.jump(i);
    return j;
  };
  if (w > 0.0 && !x.empty() && !y.empty()) {
    detail::add_conditional_branch(s, 1, x, km2.jump_points, jumps(km2), y,
                                   bandwidth_for(s, 2, kernel), kernel.shape, w, mass, degenerate);
  }
  if (w < 1.0 && !x.empty() && !y.empty()) {
    detail::add_conditional_branch(s, 2, y, km1.jump_points, jumps(km1), x,
                                   bandwidth_for(s, 1, kernel), kernel.shape, 1.0 - w, mass,
                                   degenerate);
  }
  JointDistributionEstimate est(x, y, std::move(mass), s.size());
  est.repair();
  if (degenerate > 0)
    est.add_note(std::to_string(degenerate) + " conditioning points had zero kernel weight");
  if (x.empty() || y.empty()) est.add_note("a margin has no uncensored observations");
  return est;
}

/// Single-censoring estimator F(y1, t2) = (1/n) sum_{t2k <= t2} F_{1|2}(y1 | t2k),
/// averaging Beran conditionals over the fully observed margin. Either margin
/// may be the censored one.
inline JointDistributionEstimate avk_joint_single(const Sample& s, const KernelSpec& kernel) {
  const ScenarioHint actual = infer_scenario(s.observations());
  if (actual.kind == Scenario::DoubleCensored)
    throw DomainError("the single-censoring estimator needs one fully observed margin");
  const int complete_margin = actual.kind == Scenario::SingleCensored && actual.censored_margin == 2 ? 1 : 2;
  const int target = 3 - complete_margin;
  const auto lattice_t = detail::distinct_uncensored(s, target);
  const auto lattice_c = detail::distinct_values(s, complete_margin);
  std::vector<double> cond_mass(lattice_c.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto it = std::lower_bound(lattice_c.begin(), lattice_c.end(), s.value(i, complete_margin));
    cond_mass[static_cast<std::size_t>(it - lattice_c.begin())] += 1.0 / static_cast<double>(s.size());
  }
  const auto& x = target == 1 ? lattice_t : lattice_c;
  const auto& y = target == 1 ? lattice_c : lattice_t;
  std::vector<double> mass(x.size() * y.size(), 0.0);
  std::size_t degenerate = 0;
  if (!lattice_t.empty()) {
    detail::add_conditional_branch(s, target, lattice_t, lattice_c, cond_mass, lattice_c,
                                   bandwidth_for(s, complete_margin, kernel), kernel.shape, 1.0,
                                   mass, degenerate);
  }
  JointDistributionEstimate est(x, y, std::move(mass), s.size());
  est.repair();
  if (degenerate > 0)
    est.add_note(std::to_string(degenerate) + " conditioning points had zero kernel weight");
  return est;
}

/// Bivariate ECDF with mass 1/n per pair.
inline JointDistributionEstimate ecdf_bivariate(const Sample& s) {
  if (!s.complete()) throw DomainError("ecdf_bivariate requires complete data");
  const auto x = detail::distinct_values(s, 1);
  const auto y = detail::distinct_values(s, 2);
  std::vector<double> mass(x.size() * y.size(), 0.0);
  const double unit = 1.0 / static_cast<double>(s.size());
  for (const auto& o : s.observations()) {
    const auto k = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), o.y1) - x.begin());
    const auto l = static_cast<std::size_t>(std::lower_bound(y.begin(), y.end(), o.y2) - y.begin());
    mass[k * y.size() + l] += unit;
  }
  return JointDistributionEstimate(x, y, std::move(mass), s.size());
}

}  // namespace censcop
