#include <catch_amalgamated.hpp>

#include <censcop/censored_data.hpp>
#include <censcop/kendall.hpp>
#include <censcop/survival.hpp>

#include <cmath>
#include <sstream>

using namespace censcop;
using Catch::Matchers::WithinAbs;

namespace {

Sample complete_sample(const DependenceParam& p, std::size_t n, std::uint64_t seed) {
  SimulationConfig c;
  c.copula = p;
  c.n = n;
  c.seed = seed;
  return simulate_censored(c);
}

double sup_vs(const KendallCurve& c, const DependenceParam& p) {
  double d = 0;
  for (int i = 1; i < 1000; ++i) {
    const double v = i / 1000.0;
    d = std::max(d, std::abs(c.K(v) - kendall_cdf(p, v)));
  }
  return d;
}

// Fine step approximation of an analytic K.
KendallCurve analytic_curve(const DependenceParam& p, int points) {
  KendallCurve c;
  for (int i = 1; i <= points; ++i) {
    const double v = static_cast<double>(i) / points;
    c.nu_grid.push_back(v);
    c.K_values.push_back(i == points ? 1.0 : kendall_cdf(p, v));
    c.lambda_values.push_back(v - c.K_values.back());
  }
  c.tau_hat = tau_hat(c);
  c.tau_raw = c.tau_hat;
  return c;
}

}  // namespace

TEST_CASE("ECDF route equals the counting estimator", "[kendall][invariant]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Sample s = complete_sample(alpha_from_tau(CopulaFamily::Gumbel, KendallTau(0.3)), 200, seed);
    const auto a = kendall_counting(s);
    const auto b = kendall_from_joint(ecdf_bivariate(s), "ecdf");
    for (int i = 0; i <= 400; ++i) CHECK_THAT(a.K(i / 400.0), WithinAbs(b.K(i / 400.0), 1e-12));
    CHECK_THAT(a.tau_hat, WithinAbs(b.tau_hat, 1e-12));
    CHECK_THAT(tau_from_joint(ecdf_bivariate(s)), WithinAbs(b.tau_hat, 1e-12));
  }
}

TEST_CASE("counting estimator on tiny samples", "[kendall]") {
  const Sample up({{1, 1, 1, 1}, {2, 2, 1, 1}});
  const auto c = kendall_counting(up);
  CHECK(c.K(0.0) == 0.5);
  CHECK(c.K(1.0) == 1.0);
  CHECK_THAT(c.tau_hat, WithinAbs(1.0, 1e-15));
  const Sample down({{1, 2, 1, 1}, {2, 1, 1, 1}});
  const auto d = kendall_counting(down);
  CHECK(d.K(0.0) == 1.0);
  CHECK_THAT(d.tau_hat, WithinAbs(-1.0, 1e-15));
  CHECK_THROWS_AS(kendall_counting(Sample({{1, 1, 1, 1}})), DomainError);
  CHECK_THROWS_AS(kendall_counting(Sample({{1, 1, 0, 1}, {2, 2, 1, 1}})), DomainError);
}

TEST_CASE("tau from K and from lambda agree", "[kendall][invariant]") {
  const Sample s = complete_sample(alpha_from_tau(CopulaFamily::Joe, KendallTau(0.5)), 300, 4);
  const auto c = kendall_counting(s);
  CHECK_THAT(tau_hat(c), WithinAbs(tau_hat_from_lambda(c), 1e-12));
  CHECK(c.K_values.back() == 1.0);
  for (std::size_t i = 1; i < c.K_values.size(); ++i) CHECK(c.K_values[i - 1] <= c.K_values[i]);
  const auto e = empirical_kendall_tau(sample(alpha_from_tau(CopulaFamily::Joe, KendallTau(0.5)), 300, 4));
  CHECK(std::abs(e.tau - 0.5) < 4 * e.se);
}

TEST_CASE("K-hat converges to the true K", "[kendall][mc]") {
  const DependenceParam indep(CopulaFamily::Independence, 0.0);
  CHECK(sup_vs(kendall_counting(complete_sample(indep, 2000, 11)), indep) <= 0.05);
  const auto clayton = alpha_from_tau(CopulaFamily::Clayton, KendallTau(0.5));
  CHECK(sup_vs(kendall_counting(complete_sample(clayton, 5000, 12)), clayton) <= 0.03);
}

TEST_CASE("joint estimators give K-hat near the truth under censoring", "[kendall][mc]") {
  SimulationConfig c;
  c.copula = alpha_from_tau(CopulaFamily::Frank, KendallTau(0.4));
  c.n = 1000;
  c.seed = 13;
  c.censor1 = MarginalModel::exponential(0.25);
  c.censor2 = MarginalModel::exponential(0.25);
  const Sample s = simulate_censored(c);
  const auto k = kendall_from_joint(akritas_joint(s, KernelSpec{}), "akritas");
  CHECK(sup_vs(k, c.copula) <= 0.08);
  CHECK_THAT(k.tau_hat, WithinAbs(0.4, 0.08));
}

TEST_CASE("generator estimate", "[kendall][generator]") {
  const DependenceParam indep(CopulaFamily::Independence, 0.0);
  const auto curve = analytic_curve(indep, 20000);
  const std::vector<double> eval = {0.1, 0.3, 0.5, 0.7, 0.9};
  const auto g = generator_estimate(curve, 0.5, eval);
  for (std::size_t i = 0; i < eval.size(); ++i)
    CHECK_THAT(g.phi_values[i], WithinAbs(std::log(eval[i]) / std::log(0.5), 2e-3));
  CHECK_THAT(g.phi_values[2], WithinAbs(1.0, 1e-15));

  // changing nu0 only rescales
  const auto g2 = generator_estimate(curve, 0.3, eval);
  for (std::size_t i = 0; i < eval.size(); ++i)
    CHECK_THAT(g2.phi_values[i] / g2.phi_values[2], WithinAbs(g.phi_values[i], 1e-8));

  const auto clayton = alpha_from_tau(CopulaFamily::Clayton, KendallTau(0.5));
  const auto emp = generator_estimate(kendall_counting(complete_sample(clayton, 5000, 14)), 0.5, eval);
  for (std::size_t i = 0; i < eval.size(); ++i) {
    const double truth = generator(clayton, eval[i]) / generator(clayton, 0.5);
    // the lower tail is noisier: 1 / (t - K) is large near 0
    CHECK(std::abs(std::log(emp.phi_values[i]) - std::log(truth)) <= (eval[i] < 0.2 ? 0.3 : 0.1));
  }
  CHECK_THROWS_AS(generator_estimate(curve, 1.0), DomainError);
}

TEST_CASE("graphical curves", "[kendall][graphical]") {
  KendallCurve c = analytic_curve(DependenceParam(CopulaFamily::Independence, 0.0), 100);
  c.tau_hat = 0.0;
  const auto t = graphical_curves(c, {CopulaFamily::Clayton, CopulaFamily::Frank, CopulaFamily::Gumbel},
                                  uniform_nu_grid(50));
  REQUIRE(t.columns.size() == 3);
  for (std::size_t i = 0; i < t.nu.size(); ++i) {
    CHECK_THAT(t.columns[0].lambda[i], WithinAbs(t.columns[1].lambda[i], 1e-6));
    CHECK_THAT(t.columns[0].lambda[i], WithinAbs(t.columns[2].lambda[i], 1e-6));
  }
  c.tau_hat = -0.3;
  const auto neg = graphical_curves(c, {CopulaFamily::Clayton, CopulaFamily::Frank});
  CHECK(neg.columns.size() == 1);
  CHECK(neg.notes.size() == 1);

  std::ostringstream out;
  write_curve_csv(out, t);
  CHECK(out.str().rfind("nu,K_hat,lambda_hat,Clayton_K,Clayton_lambda,Frank_K", 0) == 0);
  CHECK(uniform_nu_grid(4) == std::vector<double>{0.25, 0.5, 0.75, 1.0});
}
