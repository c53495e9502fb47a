#include <catch_amalgamated.hpp>

#include <censcop/copula.hpp>
#include <censcop/kendall.hpp>

#include <cmath>
#include <vector>

using namespace censcop;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<DependenceParam> parameter_grid() {
  std::vector<DependenceParam> g;
  for (double a : {0.3, 1.3332, 4.0, 12.0}) g.emplace_back(CopulaFamily::Clayton, a);
  for (double a : {-6.0, -0.5, 0.7, 4.1611, 15.0}) g.emplace_back(CopulaFamily::Frank, a);
  for (double a : {1.2, 1.6667, 3.0, 8.0}) g.emplace_back(CopulaFamily::Gumbel, a);
  for (double a : {1.3, 2.2191, 4.0, 9.0}) g.emplace_back(CopulaFamily::Joe, a);
  g.push_back(DependenceParam::independence());
  return g;
}

// Reference generators written out independently of the library, in forms
// that stay accurate near t = 1.
double ref_phi(const DependenceParam& p, double t) {
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Clayton: return std::expm1(-a * std::log(t)) / a;
    case CopulaFamily::Frank:
      // (e^{-at} - 1) / (e^{-a} - 1) = 1 + e^{-a} (e^{a(1-t)} - 1) / (e^{-a} - 1)
      return -std::log1p(std::exp(-a) * std::expm1(a * (1.0 - t)) / std::expm1(-a));
    case CopulaFamily::Gumbel: return std::pow(-std::log(t), a);
    case CopulaFamily::Joe: return -std::log1p(-std::pow(1.0 - t, a));
    case CopulaFamily::Independence: return -std::log(t);
  }
  return 0.0;
}

double ref_dphi(const DependenceParam& p, double t) {
  const double a = p.alpha();
  switch (p.effective_family()) {
    case CopulaFamily::Clayton: return -std::pow(t, -a - 1.0);
    case CopulaFamily::Frank: return -a / std::expm1(a * t);
    case CopulaFamily::Gumbel: return -a * std::pow(-std::log(t), a - 1.0) / t;
    case CopulaFamily::Joe: return -a * std::pow(1.0 - t, a - 1.0) / -std::expm1(a * std::log1p(-t));
    case CopulaFamily::Independence: return -1.0 / t;
  }
  return 0.0;
}

}  // namespace

TEST_CASE("generator values", "[copula]") {
  CHECK(generator(DependenceParam::independence(), 1.0) == 0.0);
  CHECK_THAT(generator({CopulaFamily::Clayton, 2.0}, 0.5), WithinAbs(1.5, 1e-14));
  CHECK_THAT(generator({CopulaFamily::Gumbel, 1.0}, std::exp(-1.0)), WithinAbs(1.0, 1e-14));
  for (const auto& p : parameter_grid())
    for (double t : {0.01, 0.2, 0.5, 0.9, 0.999})
      CHECK_THAT(generator(p, t), WithinRel(ref_phi(p, t), 1e-10) || WithinAbs(ref_phi(p, t), 1e-300));
}

TEST_CASE("lambda function examples", "[copula]") {
  const DependenceParam c(CopulaFamily::Clayton, 1.3332);
  const double oracle = 0.5 * (std::pow(0.5, 1.3332) - 1.0) / 1.3332;
  CHECK_THAT(lambda_fn(c, 0.5), WithinAbs(oracle, 1e-14));
  CHECK_THAT(lambda_fn(c, 0.5), WithinAbs(-0.2262, 1e-4));
  for (double t : {0.1, 0.4, 0.8})
    CHECK_THAT(lambda_fn({CopulaFamily::Gumbel, 1.0}, t), WithinAbs(t * std::log(t), 1e-15));
  for (const auto& p : parameter_grid()) CHECK_THAT(lambda_fn(p, 1.0), WithinAbs(0.0, 1e-14));
}

TEST_CASE("Kendall distribution examples", "[copula]") {
  for (double t : {0.05, 0.3, 0.77})
    CHECK_THAT(kendall_cdf(DependenceParam::independence(), t), WithinAbs(t - t * std::log(t), 1e-15));
  CHECK_THAT(kendall_cdf({CopulaFamily::Clayton, 2.0}, 0.25),
             WithinAbs(0.25 - 0.25 * (0.0625 - 1.0) / 2.0, 1e-14));
  for (const auto& p : parameter_grid()) CHECK_THAT(kendall_cdf(p, 1.0), WithinAbs(1.0, 1e-14));
}

TEST_CASE("Kendall distribution matches simulated V = C(U1, U2)", "[copula][mc]") {
  const DependenceParam p(CopulaFamily::Clayton, 2.0);
  const auto pairs = sample(p, 200000, 17);
  double hits = 0.0;
  for (const auto& [u, v] : pairs) hits += copula_cdf(p, u, v) <= 0.25 ? 1.0 : 0.0;
  const double est = hits / static_cast<double>(pairs.size());
  const double k = kendall_cdf(p, 0.25);
  const double se = std::sqrt(k * (1.0 - k) / static_cast<double>(pairs.size()));
  CHECK(std::abs(est - k) < 4.0 * se);
}

TEST_CASE("copula cdf examples", "[copula]") {
  CHECK_THAT(copula_cdf(DependenceParam::independence(), 0.3, 0.7), WithinAbs(0.21, 1e-15));
  for (const auto& p : parameter_grid()) {
    CHECK(copula_cdf(p, 0.4, 0.0) == 0.0);
    CHECK_THAT(copula_cdf(p, 0.4, 1.0), WithinAbs(0.4, 1e-12));
  }
  CHECK_THAT(copula_cdf({CopulaFamily::Clayton, 2.0}, 0.5, 0.5), WithinAbs(1.0 / std::sqrt(7.0), 1e-14));
}

TEST_CASE("identity K = nu - lambda holds exactly", "[copula][invariant]") {
  for (const auto& p : parameter_grid())
    for (int i = 1; i < 100; ++i) {
      const double t = i / 100.0;
      CHECK(kendall_cdf(p, t) == t - lambda_fn(p, t));
    }
}

TEST_CASE("lambda agrees with phi / phi' by finite differences", "[copula][invariant]") {
  for (const auto& p : parameter_grid())
    for (double t = 0.05; t <= 0.95 + 1e-12; t += 0.05) {
      const double h = 1e-6;
      const double d = (ref_phi(p, t + h) - ref_phi(p, t - h)) / (2.0 * h);
      CHECK_THAT(lambda_fn(p, t), WithinAbs(ref_phi(p, t) / d, 1e-6));
    }
}

TEST_CASE("partial derivatives agree with finite differences", "[copula][invariant]") {
  CHECK_THAT(partial_u1({CopulaFamily::Clayton, 2.0}, 0.5, 0.5), WithinAbs(std::pow(1.75, -1.5), 1e-14));
  CHECK_THAT(partial_u1({CopulaFamily::Clayton, 1.7}, 0.3, 1.0), WithinAbs(1.0, 1e-12));
  const double h = 1e-6;
  for (const auto& p : parameter_grid())
    for (double u : {0.1, 0.3, 0.6, 0.9})
      for (double v : {0.15, 0.5, 0.85}) {
        const double fd1 = (copula_cdf(p, u + h, v) - copula_cdf(p, u - h, v)) / (2.0 * h);
        const double fd2 = (copula_cdf(p, v, u + h) - copula_cdf(p, v, u - h)) / (2.0 * h);
        CHECK_THAT(partial_u1(p, u, v), WithinAbs(fd1, 1e-5));
        CHECK_THAT(partial_u2(p, v, u), WithinAbs(fd2, 1e-5));
      }
}

TEST_CASE("density agrees with mixed finite differences", "[copula][invariant]") {
  CHECK_THAT(copula_density(DependenceParam::independence(), 0.4, 0.9), WithinAbs(1.0, 1e-14));
  const double h = 1e-4;
  for (const auto& p : parameter_grid())
    for (double u : {0.2, 0.5, 0.8})
      for (double v : {0.2, 0.5, 0.8}) {
        const double fd = (copula_cdf(p, u + h, v + h) - copula_cdf(p, u + h, v - h) -
                           copula_cdf(p, u - h, v + h) + copula_cdf(p, u - h, v - h)) /
                          (4.0 * h * h);
        CHECK_THAT(copula_density(p, u, v), WithinAbs(fd, 1e-4 * std::max(1.0, fd)));
      }
}

TEST_CASE("tau for the reference parameters", "[copula]") {
  CHECK_THAT(tau_from_alpha({CopulaFamily::Clayton, 2.0}).value(), WithinAbs(0.5, 1e-15));
  CHECK_THAT(tau_from_alpha({CopulaFamily::Gumbel, 1.6667}).value(), WithinAbs(0.4, 1e-4));
  CHECK_THAT(tau_from_alpha({CopulaFamily::Frank, 4.1611}).value(), WithinAbs(0.4, 1e-3));
  CHECK_THAT(tau_from_alpha({CopulaFamily::Joe, 2.2191}).value(), WithinAbs(0.4, 1e-3));
  CHECK_THAT(alpha_from_tau(CopulaFamily::Clayton, KendallTau(0.4)).alpha(), WithinAbs(1.3333, 2e-4));
  CHECK(alpha_from_tau(CopulaFamily::Gumbel, KendallTau(0.0)).alpha() == 1.0);
  CHECK_THAT(alpha_from_tau(CopulaFamily::Joe, KendallTau(0.4)).alpha(), WithinAbs(2.2191, 1e-3));
  CHECK_THAT(alpha_from_tau(CopulaFamily::Frank, KendallTau(0.4)).alpha(), WithinAbs(4.1611, 1e-3));
}

TEST_CASE("Frank and Joe tau against direct quadrature of 1 + 4 int phi/phi'", "[copula][oracle]") {
  for (const auto& p : parameter_grid()) {
    if (p.family() != CopulaFamily::Frank && p.family() != CopulaFamily::Joe) continue;
    // Midpoint rule on a fine grid with the reference generator and its derivative.
    const int m = 200000;
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      const double t = (i + 0.5) / m;
      s += ref_phi(p, t) / ref_dphi(p, t);
    }
    CHECK_THAT(tau_from_alpha(p).value(), WithinAbs(1.0 + 4.0 * s / m, 2e-5));
  }
}

TEST_CASE("tau to alpha round trip", "[copula][invariant]") {
  for (CopulaFamily f : kArchimedeanFamilies)
    for (int i = 1; i <= 18; ++i) {
      const double tau = 0.05 * i;
      if (tau > max_admissible_tau(f)) continue;
      CHECK_THAT(tau_from_alpha(alpha_from_tau(f, KendallTau(tau))).value(), WithinAbs(tau, 1e-8));
    }
  for (double tau : {-0.8, -0.4, -0.05})
    CHECK_THAT(tau_from_alpha(alpha_from_tau(CopulaFamily::Frank, KendallTau(tau))).value(),
               WithinAbs(tau, 1e-8));
}

TEST_CASE("out of range tau is rejected or clamped with a flag", "[copula]") {
  CHECK_THROWS_AS(alpha_from_tau(CopulaFamily::Gumbel, KendallTau(-0.2)), DomainError);
  const auto c = fit_alpha_from_tau(CopulaFamily::Clayton, -0.2);
  CHECK(c.clamped);
  CHECK(c.param.is_independence());
  CHECK_THROWS_AS(KendallTau(1.0), DomainError);
  CHECK_THROWS_AS(DependenceParam(CopulaFamily::Joe, 0.5), DomainError);
  CHECK_THROWS_AS(lambda_fn({CopulaFamily::Joe, 2.0}, 0.0), DomainError);
}

TEST_CASE("Clayton lambda tends to the independence lambda", "[copula][invariant]") {
  for (double t : {0.05, 0.3, 0.6, 0.95})
    CHECK_THAT(lambda_fn({CopulaFamily::Clayton, 1e-6}, t),
               WithinAbs(lambda_fn({CopulaFamily::Gumbel, 1.0}, t), 1e-4));
}

TEST_CASE("samplers reproduce tau within three standard errors", "[copula][mc]") {
  for (CopulaFamily f : kArchimedeanFamilies)
    for (double tau : {0.2, 0.4, 0.6}) {
      const auto p = alpha_from_tau(f, KendallTau(tau));
      const auto draws = sample(p, 100000, 31 + static_cast<std::uint64_t>(f));
      const auto est = empirical_kendall_tau(draws);
      INFO(family_name(f) << " tau " << tau << " estimate " << est.tau << " se " << est.se);
      CHECK(std::abs(est.tau - tau) < 3.0 * est.se);
      CHECK(std::abs(est.tau - tau) < 0.01);
    }
  const auto neg = sample(alpha_from_tau(CopulaFamily::Frank, KendallTau(-0.4)), 50000, 5);
  const auto est = empirical_kendall_tau(neg);
  CHECK(std::abs(est.tau + 0.4) < 3.0 * est.se);
}

TEST_CASE("frailty sampler agrees with conditional inversion", "[copula][mc]") {
  for (CopulaFamily f : kArchimedeanFamilies) {
    const auto p = alpha_from_tau(f, KendallTau(0.5));
    Rng a(9, 1);
    Rng b(9, 2);
    double ca = 0.0;
    double cb = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const auto [u1, v1] = sample_pair(p, a);
      const auto [u2, v2] = sample_pair_conditional(p, b);
      ca += (u1 <= 0.3 && v1 <= 0.6) ? 1.0 : 0.0;
      cb += (u2 <= 0.3 && v2 <= 0.6) ? 1.0 : 0.0;
    }
    const double c = copula_cdf(p, 0.3, 0.6);
    const double se = std::sqrt(c * (1 - c) / n);
    CHECK(std::abs(ca / n - c) < 4 * se);
    CHECK(std::abs(cb / n - c) < 4 * se);
  }
}

TEST_CASE("independence draws and seeding", "[copula]") {
  const auto a = sample(DependenceParam::independence(), 4, 11);
  const auto b = sample(DependenceParam::independence(), 4, 11);
  REQUIRE(a.size() == 4);
  CHECK(a == b);
  for (const auto& [u, v] : a) {
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK(sample(DependenceParam::independence(), 4, 12) != a);
}
