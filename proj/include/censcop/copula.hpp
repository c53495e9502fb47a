#pragma once

// Archimedean copula families: generators, lambda and Kendall functions,
// distribution/density/partials, tau <-> alpha maps and exact samplers.
//
// Conventions: phi is the generator, p = phi^{-1}, lambda = phi / phi', and
// K(nu) = nu - lambda(nu). Every expression that can overflow for large alpha or
// arguments near the boundary is evaluated in log space or through expm1/log1p.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "rng.hpp"

namespace censcop {

enum class CopulaFamily { Clayton, Frank, Gumbel, Joe, Independence };

inline constexpr std::array<CopulaFamily, 4> kArchimedeanFamilies = {
    CopulaFamily::Clayton, CopulaFamily::Frank, CopulaFamily::Gumbel, CopulaFamily::Joe};

inline std::string_view family_name(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Clayton: return "Clayton";
    case CopulaFamily::Frank: return "Frank";
    case CopulaFamily::Gumbel: return "Gumbel";
    case CopulaFamily::Joe: return "Joe";
    case CopulaFamily::Independence: return "Independence";
  }
  return "?";
}

inline CopulaFamily parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "clayton") return CopulaFamily::Clayton;
  if (lower == "frank") return CopulaFamily::Frank;
  if (lower == "gumbel" || lower == "gumbel-hougaard") return CopulaFamily::Gumbel;
  if (lower == "joe") return CopulaFamily::Joe;
  if (lower == "independence" || lower == "product") return CopulaFamily::Independence;
  throw InputError("unknown copula family '" + std::string(name) + "'");
}

/// Family plus dependence parameter. The independence copula is representable
/// directly and as the boundary of each family (Clayton/Frank alpha = 0,
/// Gumbel/Joe alpha = 1).
class DependenceParam {
 public:
  DependenceParam(CopulaFamily family, double alpha) : family_(family), alpha_(alpha) {
    if (!std::isfinite(alpha)) throw DomainError("dependence parameter must be finite");
    switch (family) {
      case CopulaFamily::Clayton:
        if (alpha < 0.0) throw DomainError("Clayton requires alpha >= 0, got " + std::to_string(alpha));
        break;
      case CopulaFamily::Frank:
        break;
      case CopulaFamily::Gumbel:
        if (alpha < 1.0) throw DomainError("Gumbel requires alpha >= 1, got " + std::to_string(alpha));
        break;
      case CopulaFamily::Joe:
        if (alpha < 1.0) throw DomainError("Joe requires alpha >= 1, got " + std::to_string(alpha));
        break;
      case CopulaFamily::Independence:
        alpha_ = 0.0;
        break;
    }
  }

  static DependenceParam independence() { return {CopulaFamily::Independence, 0.0}; }

  CopulaFamily family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }

  bool is_independence() const noexcept {
    switch (family_) {
      case CopulaFamily::Clayton:
      case CopulaFamily::Frank: return alpha_ == 0.0;
      case CopulaFamily::Gumbel:
      case CopulaFamily::Joe: return alpha_ == 1.0;
      case CopulaFamily::Independence: return true;
    }
    return false;
  }

  /// Family whose formulas apply; boundary parameters collapse to Independence.
  CopulaFamily effective_family() const noexcept {
    return is_independence() ? CopulaFamily::Independence : family_;
  }

  friend bool operator==(const DependenceParam&, const DependenceParam&) = default;

 private:
  CopulaFamily family_;
  double alpha_;
};

/// Kendall's tau, restricted to the open interval (-1, 1).
class KendallTau {
 public:
  explicit KendallTau(double tau) : value_(tau) {
    if (!(tau > -1.0 && tau < 1.0)) throw DomainError("Kendall's tau must lie in (-1, 1)");
  }
  double value() const noexcept { return value_; }

 private:
  double value_;
};

namespace detail {

inline void check_unit_open_closed(double nu) {
  if (!(nu > 0.0 && nu <= 1.0)) throw DomainError("argument must lie in (0, 1], got " + std::to_string(nu));
}

// --- generator and friends, no argument checks -------------------------------

// log(1 - (1-t)^a), accurate at both ends of (0, 1).
inline double joe_log_om(double a, double t) {
  const double la = a * std::log1p(-t);
  return la < -0.7 ? std::log1p(-std::exp(la)) : std::log(-std::expm1(la));
}

inline double phi(const DependenceParam& p, double t) {
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Independence: return -std::log(t);
    case CopulaFamily::Clayton: return std::expm1(-a * std::log(t)) / a;
    case CopulaFamily::Frank:
      return -std::log1p(-std::exp(-a * t) * std::expm1(-a * (1.0 - t)) / std::expm1(-a));
    case CopulaFamily::Gumbel: return std::pow(-std::log(t), a);
    case CopulaFamily::Joe: return -joe_log_om(a, t);
  }
  return 0.0;
}

inline double dphi(const DependenceParam& p, double t) {
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Independence: return -1.0 / t;
    case CopulaFamily::Clayton: return -std::exp(-(a + 1.0) * std::log(t));
    case CopulaFamily::Frank: return -a / std::expm1(a * t);
    case CopulaFamily::Gumbel: return -a * std::pow(-std::log(t), a - 1.0) / t;
    case CopulaFamily::Joe: {
      const double l1 = std::log1p(-t);
      return -a * std::exp((a - 1.0) * l1) / (-std::expm1(a * l1));
    }
  }
  return 0.0;
}

/// g(t) = -1 / phi'(t) = -p'(phi(t)); positive and nondecreasing on (0, 1].
inline double reciprocal_slope(const DependenceParam& p, double t) {
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Independence: return t;
    case CopulaFamily::Clayton: return std::exp((a + 1.0) * std::log(t));
    case CopulaFamily::Frank: return std::expm1(a * t) / a;
    case CopulaFamily::Gumbel: return t * std::pow(-std::log(t), 1.0 - a) / a;
    case CopulaFamily::Joe: {
      if (t >= 1.0) return a == 1.0 ? 1.0 : numerics::kInf;
      const double l1 = std::log1p(-t);
      return -std::expm1(a * l1) * std::exp((1.0 - a) * l1) / a;
    }
  }
  return 0.0;
}

/// p(x) = phi^{-1}(x) for x in [0, inf].
inline double phi_inv(const DependenceParam& p, double x) {
  const double a = p.alpha();
  if (x == numerics::kInf) return 0.0;
  switch (p.effective_family()) {
    case CopulaFamily::Independence: return std::exp(-x);
    case CopulaFamily::Clayton: return std::exp(-std::log1p(a * x) / a);
    case CopulaFamily::Frank: {
      if (std::abs(a) <= 1.0) return -std::log1p(std::exp(-x) * std::expm1(-a)) / a;
      return -std::log(-std::expm1(-x) + std::exp(-x - a)) / a;
    }
    case CopulaFamily::Gumbel: return std::exp(-std::pow(x, 1.0 / a));
    case CopulaFamily::Joe: return -std::expm1(std::log(-std::expm1(-x)) / a);
  }
  return 0.0;
}

/// p'(x), negative.
inline double dphi_inv(const DependenceParam& p, double x) {
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Independence: return -std::exp(-x);
    case CopulaFamily::Clayton: return -std::exp(-(1.0 / a + 1.0) * std::log1p(a * x));
    case CopulaFamily::Frank: {
      const double em = std::expm1(-a);
      const double q = std::abs(a) <= 1.0 ? 1.0 + std::exp(-x) * em
                                          : -std::expm1(-x) + std::exp(-x - a);
      return std::exp(-x) * em / (a * q);
    }
    case CopulaFamily::Gumbel: {
      const double r = std::pow(x, 1.0 / a);
      return -(1.0 / a) * r / x * std::exp(-r);
    }
    case CopulaFamily::Joe:
      return -(1.0 / a) * std::exp((1.0 / a - 1.0) * std::log(-std::expm1(-x)) - x);
  }
  return 0.0;
}

inline double lambda(const DependenceParam& p, double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Independence: return t * std::log(t);
    case CopulaFamily::Clayton: return t * std::expm1(a * std::log(t)) / a;
    case CopulaFamily::Frank: return phi(p, t) * std::expm1(a * t) / (-a);
    case CopulaFamily::Gumbel: return t * std::log(t) / a;
    case CopulaFamily::Joe: {
      const double l1 = std::log1p(-t);
      const double w = std::exp(a * l1);
      const double om = -std::expm1(a * l1);
      if (w == 0.0) return -(1.0 - t) / a;  // (1-t)^a underflowed
      return joe_log_om(a, t) / w * om * (1.0 - t) / a;
    }
  }
  return 0.0;
}

inline double kendall(const DependenceParam& p, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t - lambda(p, t);
}

// Frank denominator em + expm1(-a u) expm1(-a v), evaluated without cancellation.
inline double frank_denominator(double a, double u, double v) {
  if (std::abs(a) <= 1.0) return std::expm1(-a) + std::expm1(-a * u) * std::expm1(-a * v);
  const double eu = std::exp(-a * u);
  const double ev = std::exp(-a * v);
  return std::exp(-a) - eu - ev + eu * ev;
}

// log(s) for Clayton with s = u^-a + v^-a - 1.
inline double clayton_log_s(double a, double u, double v) {
  const double x = -a * std::log(u);
  const double y = -a * std::log(v);
  const double m = std::max(x, y);
  const double mn = std::min(x, y);
  return m + std::log1p(std::exp(-m) * std::expm1(mn));
}

// log(s) for Joe with s = ubar^a + vbar^a - ubar^a vbar^a.
inline double joe_log_s(double a, double u, double v) {
  const double A = a * std::log1p(-u);
  const double B = a * std::log1p(-v);
  const double lse = numerics::logaddexp(A, B);
  return lse + std::log1p(-std::exp(A + B - lse));
}

// log of (-log u)^a + (-log v)^a for Gumbel.
inline double gumbel_log_s(double a, double u, double v) {
  return numerics::logaddexp(a * std::log(-std::log(u)), a * std::log(-std::log(v)));
}

inline double cdf(const DependenceParam& p, double u, double v) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return v;
  if (v >= 1.0) return u;
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Independence: return u * v;
    case CopulaFamily::Clayton: return std::exp(-clayton_log_s(a, u, v) / a);
    case CopulaFamily::Frank: {
      const double em = std::expm1(-a);
      if (std::abs(a) <= 1.0) return -std::log1p(std::expm1(-a * u) * std::expm1(-a * v) / em) / a;
      return -std::log(frank_denominator(a, u, v) / em) / a;
    }
    case CopulaFamily::Gumbel: return std::exp(-std::exp(gumbel_log_s(a, u, v) / a));
    case CopulaFamily::Joe: return -std::expm1(joe_log_s(a, u, v) / a);
  }
  return 0.0;
}

inline double partial_u1(const DependenceParam& p, double u, double v) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Independence: return v;
    case CopulaFamily::Clayton:
      return std::exp(-(a + 1.0) * std::log(u) - (1.0 / a + 1.0) * clayton_log_s(a, u, v));
    case CopulaFamily::Frank:
      return std::exp(-a * u) * std::expm1(-a * v) / frank_denominator(a, u, v);
    case CopulaFamily::Gumbel: {
      const double x = -std::log(u);
      const double y = -std::log(v);
      const double log_c = -std::exp(gumbel_log_s(a, u, v) / a);
      return std::exp(log_c - std::log(u) +
                      (1.0 / a - 1.0) * numerics::log1pexp(a * (std::log(y) - std::log(x))));
    }
    case CopulaFamily::Joe: {
      const double B = a * std::log1p(-v);
      return std::exp((a - 1.0) * std::log1p(-u) + std::log(-std::expm1(B)) +
                      (1.0 / a - 1.0) * joe_log_s(a, u, v));
    }
  }
  return 0.0;
}

inline double log_density(const DependenceParam& p, double u, double v) {
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Independence: return 0.0;
    case CopulaFamily::Clayton:
      return std::log1p(a) - (a + 1.0) * (std::log(u) + std::log(v)) -
             (2.0 + 1.0 / a) * clayton_log_s(a, u, v);
    case CopulaFamily::Frank: {
      const double em = std::expm1(-a);
      return std::log(-a * em) - a * (u + v) - 2.0 * std::log(std::abs(frank_denominator(a, u, v)));
    }
    case CopulaFamily::Gumbel: {
      const double x = -std::log(u);
      const double y = -std::log(v);
      const double ls = gumbel_log_s(a, u, v);
      const double log_c = -std::exp(ls / a);
      return log_c - std::log(u) - std::log(v) + (a - 1.0) * (std::log(x) + std::log(y)) +
             (2.0 / a - 2.0) * ls + std::log1p((a - 1.0) * std::exp(-ls / a));
    }
    case CopulaFamily::Joe: {
      const double ls = joe_log_s(a, u, v);
      return (1.0 / a - 2.0) * ls + (a - 1.0) * (std::log1p(-u) + std::log1p(-v)) +
             std::log(a - 1.0 + std::exp(ls));
    }
  }
  return 0.0;
}

}  // namespace detail

// --- checked public surface ---------------------------------------------------

inline double generator(const DependenceParam& p, double nu) {
  detail::check_unit_open_closed(nu);
  return detail::phi(p, nu);
}

inline double generator_derivative(const DependenceParam& p, double nu) {
  detail::check_unit_open_closed(nu);
  return detail::dphi(p, nu);
}

inline double generator_inverse(const DependenceParam& p, double x) {
  if (!(x >= 0.0)) throw DomainError("generator inverse needs x >= 0");
  return detail::phi_inv(p, x);
}

inline double lambda_fn(const DependenceParam& p, double nu) {
  detail::check_unit_open_closed(nu);
  return detail::lambda(p, nu);
}

inline double kendall_cdf(const DependenceParam& p, double nu) {
  detail::check_unit_open_closed(nu);
  return detail::kendall(p, nu);
}

inline double copula_cdf(const DependenceParam& p, double u1, double u2) {
  if (!(u1 >= 0.0 && u1 <= 1.0 && u2 >= 0.0 && u2 <= 1.0))
    throw DomainError("copula_cdf arguments must lie in the unit square");
  return detail::cdf(p, u1, u2);
}

inline double copula_density(const DependenceParam& p, double u1, double u2) {
  if (!(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0))
    throw DomainError("copula_density arguments must lie in the open unit square");
  return std::exp(detail::log_density(p, u1, u2));
}

/// dC/du1, the conditional distribution P[U2 <= u2 | U1 = u1].
inline double partial_u1(const DependenceParam& p, double u1, double u2) {
  if (!(u1 > 0.0 && u1 < 1.0 && u2 >= 0.0 && u2 <= 1.0))
    throw DomainError("partial_u1 needs u1 in (0,1) and u2 in [0,1]");
  return detail::partial_u1(p, u1, u2);
}

/// dC/du2; every family here is exchangeable.
inline double partial_u2(const DependenceParam& p, double u1, double u2) {
  if (!(u2 > 0.0 && u2 < 1.0 && u1 >= 0.0 && u1 <= 1.0))
    throw DomainError("partial_u2 needs u2 in (0,1) and u1 in [0,1]");
  return detail::partial_u1(p, u2, u1);
}

// --- Kendall's tau -----------------------------------------------------------

namespace detail {

inline double frank_tau(double alpha) {
  if (alpha == 0.0) return 0.0;
  const double a = std::abs(alpha);
  double tau = 0.0;
  if (a < 1e-4) {
    tau = a / 9.0 - a * a * a / 900.0;
  } else {
    const double debye = numerics::integrate(
                             [](double xi) { return xi == 0.0 ? 1.0 : xi / std::expm1(xi); }, 0.0,
                             a, 1e-12) /
                         a;
    tau = 1.0 - 4.0 / a + 4.0 * debye / a;
  }
  return alpha < 0.0 ? -tau : tau;
}

inline double joe_tau(double alpha) {
  if (alpha == 1.0) return 0.0;
  const DependenceParam p(CopulaFamily::Joe, alpha);
  return 1.0 + 4.0 * numerics::integrate([&](double t) { return lambda(p, t); }, 0.0, 1.0, 1e-12);
}

inline constexpr double kMaxAlpha = 500.0;
inline constexpr double kFrankMinAlpha = 1e-6;

}  // namespace detail

inline KendallTau tau_from_alpha(const DependenceParam& p) {
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Independence: return KendallTau(0.0);
    case CopulaFamily::Clayton: return KendallTau(a / (a + 2.0));
    case CopulaFamily::Frank: return KendallTau(detail::frank_tau(a));
    case CopulaFamily::Gumbel: return KendallTau(1.0 - 1.0 / a);
    case CopulaFamily::Joe: return KendallTau(detail::joe_tau(a));
  }
  return KendallTau(0.0);
}

/// Largest tau reachable inside the root-finding brackets.
inline double max_admissible_tau(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Clayton: return detail::kMaxAlpha / (detail::kMaxAlpha + 2.0);
    case CopulaFamily::Frank: {
      static const double t = detail::frank_tau(detail::kMaxAlpha);
      return t;
    }
    case CopulaFamily::Gumbel: return 1.0 - 1.0 / detail::kMaxAlpha;
    case CopulaFamily::Joe: {
      static const double t = detail::joe_tau(detail::kMaxAlpha);
      return t;
    }
    case CopulaFamily::Independence: return 0.0;
  }
  return 0.0;
}

inline double min_admissible_tau(CopulaFamily f) {
  return f == CopulaFamily::Frank ? -max_admissible_tau(f) : 0.0;
}

inline DependenceParam alpha_from_tau(CopulaFamily family, KendallTau tau) {
  const double t = tau.value();
  if (t < min_admissible_tau(family) || t > max_admissible_tau(family)) {
    throw DomainError("tau = " + std::to_string(t) + " is outside the range of the " +
                      std::string(family_name(family)) + " family");
  }
  constexpr double kTol = 1e-10;
  switch (family) {
    case CopulaFamily::Independence: return DependenceParam::independence();
    case CopulaFamily::Clayton: return {family, 2.0 * t / (1.0 - t)};
    case CopulaFamily::Gumbel: return {family, 1.0 / (1.0 - t)};
    case CopulaFamily::Frank: {
      if (t == 0.0) return {family, 0.0};
      const double target = std::abs(t);
      if (target <= detail::frank_tau(detail::kFrankMinAlpha)) {
        return {family, std::copysign(9.0 * target, t)};
      }
      const double a = numerics::bisect(
          [&](double x) { return detail::frank_tau(x) - target; }, detail::kFrankMinAlpha,
          detail::kMaxAlpha, kTol);
      return {family, std::copysign(a, t)};
    }
    case CopulaFamily::Joe: {
      if (t == 0.0) return {family, 1.0};
      const double a = numerics::bisect([&](double x) { return detail::joe_tau(x) - t; }, 1.0,
                                        detail::kMaxAlpha, kTol);
      return {family, a};
    }
  }
  return DependenceParam::independence();
}

struct TauInversion {
  DependenceParam param;
  bool clamped = false;  ///< tau was outside the family's range and was moved to its edge
};

/// Moment-type estimate of alpha from an estimated tau. Values outside the
/// family's range are clamped to the nearest admissible tau (e.g. tau-hat < 0
/// maps Clayton/Gumbel/Joe onto their independence boundary).
inline TauInversion fit_alpha_from_tau(CopulaFamily family, double tau) {
  if (!std::isfinite(tau)) throw DomainError("tau estimate is not finite");
  const double lo = min_admissible_tau(family);
  const double hi = max_admissible_tau(family);
  const double t = std::clamp(tau, lo, hi);
  return {alpha_from_tau(family, KendallTau(t)), t != tau};
}

// --- sampling ----------------------------------------------------------------

namespace detail {

inline double clamp_unit(double u) {
  constexpr double kTop = 1.0 - 0x1.0p-53;
  return std::clamp(u, 1e-300, kTop);
}

// Kemp's LK algorithm for the logarithmic series distribution,
// P(M = k) = -p^k / (k log(1 - p)), with log1mp = log(1 - p).
inline double sample_log_series(double p, double log1mp, Rng& rng) {
  const double u2 = rng.uniform();
  if (u2 > p) return 1.0;
  const double q = -std::expm1(rng.uniform() * log1mp);
  if (u2 < q * q) {
    const double k = std::floor(1.0 + std::log(u2) / std::log(q));
    return std::max(k, 1.0);
  }
  return u2 > q ? 1.0 : 2.0;
}

// Sibuya distribution with Laplace transform 1 - (1 - e^-s)^a, 0 < a < 1.
inline double sample_sibuya(double a, Rng& rng) {
  const double u = rng.uniform();
  if (u <= a) return 1.0;
  const double ginv = std::exp(-(std::log1p(-u) + std::lgamma(1.0 - a)) / a);
  const double fginv = std::floor(ginv);
  if (ginv > 1.0 / std::numeric_limits<double>::epsilon()) return fginv;
  const double log_beta = std::lgamma(fginv) + std::lgamma(1.0 - a) - std::lgamma(fginv + 1.0 - a);
  if (1.0 - u < std::exp(-std::log(fginv) - log_beta)) return std::ceil(ginv);
  return fginv;
}

// log of a positive a-stable variate with Laplace transform exp(-s^a), 0 < a < 1
// (Chambers-Mallows-Stuck / Kanter representation).
inline double sample_log_positive_stable(double a, Rng& rng) {
  const double theta = std::numbers::pi * rng.uniform();
  const double w = rng.exponential();
  return std::log(std::sin(a * theta)) - std::log(std::sin(theta)) / a +
         (1.0 - a) / a * (std::log(std::sin((1.0 - a) * theta)) - std::log(w));
}

}  // namespace detail

/// Solves dC/du1(u1, v) = w for v by bisection (conditional inversion).
inline double conditional_inverse(const DependenceParam& p, double u1, double w) {
  if (p.effective_family() == CopulaFamily::Independence) return w;
  return numerics::invert_monotone([&](double v) { return detail::partial_u1(p, u1, v); }, w,
                                   0.0, 1.0, 1e-14);
}

/// One pair by conditional inversion; family-agnostic, used as the oracle for
/// the frailty samplers and for Frank with negative alpha.
inline std::pair<double, double> sample_pair_conditional(const DependenceParam& p, Rng& rng) {
  const double u1 = rng.uniform();
  const double w = rng.uniform();
  return {u1, detail::clamp_unit(conditional_inverse(p, u1, w))};
}

/// One pair by the Marshall-Olkin frailty construction U_j = p(E_j / M).
inline std::pair<double, double> sample_pair(const DependenceParam& p, Rng& rng) {
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Independence: {
      const double u1 = rng.uniform();
      return {u1, rng.uniform()};
    }
    case CopulaFamily::Clayton: {
      // M ~ Gamma(1/a, 1); U = (1 + E/M)^(-1/a).
      const double log_m = rng.log_gamma_variate(1.0 / a);
      auto draw = [&] {
        const double x = std::log(rng.exponential()) - log_m;
        return detail::clamp_unit(std::exp(-numerics::log1pexp(x) / a));
      };
      const double u1 = draw();
      return {u1, draw()};
    }
    case CopulaFamily::Frank: {
      if (a < 0.0) return sample_pair_conditional(p, rng);
      const double m = detail::sample_log_series(-std::expm1(-a), -a, rng);
      auto draw = [&] { return detail::clamp_unit(detail::phi_inv(p, rng.exponential() / m)); };
      const double u1 = draw();
      return {u1, draw()};
    }
    case CopulaFamily::Gumbel: {
      const double inv = 1.0 / a;
      const double log_s = detail::sample_log_positive_stable(inv, rng);
      auto draw = [&] {
        const double x = std::exp(inv * (std::log(rng.exponential()) - log_s));
        return detail::clamp_unit(std::exp(-x));
      };
      const double u1 = draw();
      return {u1, draw()};
    }
    case CopulaFamily::Joe: {
      const double m = detail::sample_sibuya(1.0 / a, rng);
      auto draw = [&] { return detail::clamp_unit(detail::phi_inv(p, rng.exponential() / m)); };
      const double u1 = draw();
      return {u1, draw()};
    }
  }
  return {rng.uniform(), rng.uniform()};
}

inline std::vector<std::pair<double, double>> sample(const DependenceParam& p, std::size_t n,
                                                     std::uint64_t seed) {
  if (n == 0) throw DomainError("sample size must be at least 1");
  Rng rng(seed);
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_pair(p, rng));
  return out;
}

}  // namespace censcop
