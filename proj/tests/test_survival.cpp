#include <catch_amalgamated.hpp>

#include <censcop/censored_data.hpp>
#include <censcop/survival.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using namespace censcop;
using Catch::Matchers::WithinAbs;

namespace {

Sample frank_sample(std::size_t n, double rate1, double rate2, std::uint64_t seed) {
  SimulationConfig c;
  c.copula = alpha_from_tau(CopulaFamily::Frank, KendallTau(0.4));
  c.n = n;
  c.seed = seed;
  if (rate1 > 0) c.censor1 = MarginalModel::exponential(rate1);
  if (rate2 > 0) c.censor2 = MarginalModel::exponential(rate2);
  return simulate_censored(c);
}

Sample independent_sample(std::size_t n, std::uint64_t seed) {
  SimulationConfig c;
  c.copula = DependenceParam(CopulaFamily::Independence, 0.0);
  c.n = n;
  c.seed = seed;
  return simulate_censored(c);
}

double ecdf2(const Sample& s, double a, double b) {
  double c = 0;
  for (const auto& o : s.observations()) c += (o.y1 <= a && o.y2 <= b);
  return c / static_cast<double>(s.size());
}

double sup_vs_ecdf(const JointDistributionEstimate& f, const Sample& s) {
  double d = 0;
  for (std::size_t i = 0; i < s.size(); i += 3)
    for (std::size_t j = 0; j < s.size(); j += 7)
      d = std::max(d, std::abs(f.cdf(s[i].y1, s[j].y2) - ecdf2(s, s[i].y1, s[j].y2)));
  return d;
}

// Direct product-limit with explicit weights and distinct event times.
double naive_beran(const Sample& s, int target, double y, double z, double h) {
  const int cond = 3 - target;
  std::vector<double> w(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    w[i] = s.delta(i, cond) == 1 ? kernel_value(KernelShape::Epanechnikov, (z - s.value(i, cond)) / h) : 0.0;
  std::set<double> times;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.delta(i, target) == 1 && s.value(i, target) <= y) times.insert(s.value(i, target));
  double surv = 1;
  for (double t : times) {
    double d = 0, r = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.value(i, target) >= t) r += w[i];
      if (s.value(i, target) == t && s.delta(i, target) == 1) d += w[i];
    }
    if (d > 0 && r > 0) surv *= 1 - std::min(1.0, d / r);
  }
  return 1 - surv;
}

void check_distribution(const JointDistributionEstimate& f) {
  std::size_t negative = 0, decreasing = 0;
  double total = 0;
  for (double m : f.masses()) {
    negative += m < 0.0;
    total += m;
  }
  for (std::size_t k = 0; k < f.rows(); ++k)
    for (std::size_t l = 0; l < f.cols(); ++l) {
      if (l + 1 < f.cols()) decreasing += f.cumulative(k, l) > f.cumulative(k, l + 1) + 1e-15;
      if (k + 1 < f.rows()) decreasing += f.cumulative(k, l) > f.cumulative(k + 1, l) + 1e-15;
    }
  CHECK(negative == 0);
  CHECK(decreasing == 0);
  CHECK_THAT(total, WithinAbs(f.total_mass(), 1e-12));
  CHECK(f.total_mass() <= 1.0 + 1e-12);
}

}  // namespace

TEST_CASE("Kaplan-Meier on small hand examples", "[km]") {
  const Sample s({{1, 1, 1, 1}, {2, 2, 0, 1}, {3, 3, 1, 1}});
  const auto f = kaplan_meier(s, 1);
  CHECK_THAT(f(1.0), WithinAbs(1.0 / 3, 1e-15));
  CHECK_THAT(f(2.5), WithinAbs(1.0 / 3, 1e-15));
  CHECK_THAT(f(3.0), WithinAbs(1.0, 1e-15));
  CHECK(f(0.5) == 0.0);
  const auto r = kaplan_meier(s, 1, true);
  CHECK_THAT(r(3.0), WithinAbs(0.75, 1e-15));

  const Sample all_censored({{1, 1, 0, 1}, {2, 2, 0, 1}});
  CHECK(kaplan_meier(all_censored, 1).degenerate);
  CHECK_THROWS_AS(kaplan_meier(s, 3), DomainError);
}

TEST_CASE("Kaplan-Meier equals the ECDF for complete data", "[km][invariant]") {
  const Sample s = frank_sample(400, 0, 0, 2);
  const auto f = kaplan_meier(s, 2);
  for (std::size_t i = 0; i < s.size(); ++i) {
    double c = 0;
    for (const auto& o : s.observations()) c += o.y2 <= s[i].y2;
    CHECK_THAT(f(s[i].y2), WithinAbs(c / 400.0, 1e-13));
  }
}

TEST_CASE("Kaplan-Meier keeps censored ties in the risk set", "[km]") {
  const Sample s({{1, 1, 1, 1}, {1, 1, 0, 1}, {2, 2, 1, 1}});
  CHECK_THAT(kaplan_meier(s, 1)(1.0), WithinAbs(1.0 / 3, 1e-15));
}

TEST_CASE("Beran estimator matches a direct product-limit", "[beran]") {
  const Sample s = frank_sample(150, 0.5, 0.0, 5);
  const auto kernel = KernelSpec::fixed(KernelShape::Epanechnikov, 0.4);
  for (std::size_t j = 0; j < 20; ++j) {
    const double z = s[j].y2;
    for (double y : {0.1, 0.5, 1.0, 3.0})
      CHECK_THAT(beran_conditional(s, 1, y, z, kernel), WithinAbs(naive_beran(s, 1, y, z, 0.4), 1e-12));
  }
}

TEST_CASE("Beran with flat weights is the marginal distribution", "[beran]") {
  const Sample s = frank_sample(200, 0, 0, 6);
  const auto wide = KernelSpec::fixed(KernelShape::Uniform, 1e6);
  const auto km = kaplan_meier(s, 1);
  for (std::size_t i = 0; i < 30; ++i)
    CHECK_THAT(beran_conditional(s, 1, s[i].y1, s[0].y2, wide), WithinAbs(km(s[i].y1), 1e-12));
}

TEST_CASE("Beran conditioning value must be an uncensored observation", "[beran]") {
  const Sample s({{1, 1, 1, 1}, {2, 2, 1, 0}, {3, 3, 1, 1}});
  const auto k = KernelSpec::fixed(KernelShape::Gaussian, 1.0);
  CHECK_NOTHROW(beran_conditional(s, 1, 2.0, 1.0, k));
  CHECK_THROWS_AS(beran_conditional(s, 1, 2.0, 2.0, k), DomainError);
  CHECK_THROWS_AS(beran_conditional(s, 1, 2.0, 2.5, k), DomainError);
}

TEST_CASE("Akritas joint is close to the ECDF for complete data", "[joint]") {
  const Sample s = frank_sample(500, 0, 0, 7);
  const auto wide = KernelSpec::fixed(KernelShape::Epanechnikov, 1e6);
  // with flat weights the surface is the product of margins; local kernels recover the ECDF
  const auto f = akritas_joint(s, KernelSpec{});
  check_distribution(f);
  CHECK(sup_vs_ecdf(f, s) < 0.06);
  const auto g = akritas_joint(s, wide);
  const auto k1 = kaplan_meier(s, 1);
  const auto k2 = kaplan_meier(s, 2);
  for (std::size_t i = 0; i < 20; ++i)
    CHECK_THAT(g.cdf(s[i].y1, s[i + 1].y2), WithinAbs(k1(s[i].y1) * k2(s[i + 1].y2), 1e-10));
}

TEST_CASE("Akritas with a vanishing bandwidth is the ECDF", "[joint]") {
  const Sample s = frank_sample(200, 0, 0, 3);
  double gap = 1e300;
  for (int m = 1; m <= 2; ++m) {
    std::vector<double> v;
    for (std::size_t i = 0; i < s.size(); ++i) v.push_back(s.value(i, m));
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i] - v[i - 1]);
  }
  const auto f = akritas_joint(s, KernelSpec::fixed(KernelShape::Epanechnikov, 0.5 * gap));
  CHECK(sup_vs_ecdf(f, s) < 1e-12);
}

TEST_CASE("Akritas weight branches are valid distributions", "[joint][invariant]") {
  const Sample s = frank_sample(300, 0.4, 0.4, 8);
  for (double w : {0.0, 0.5, 1.0}) {
    const auto f = akritas_joint(s, KernelSpec{}, w);
    check_distribution(f);
    CHECK(f.total_mass() > 0.3);
  }
  CHECK_THROWS_AS(akritas_joint(s, KernelSpec{}, 1.5), DomainError);
}

TEST_CASE("Akritas at the medians under independence", "[joint][mc]") {
  const Sample s = independent_sample(2000, 9);
  std::vector<double> a, b;
  for (const auto& o : s.observations()) {
    a.push_back(o.y1);
    b.push_back(o.y2);
  }
  std::nth_element(a.begin(), a.begin() + 1000, a.end());
  std::nth_element(b.begin(), b.begin() + 1000, b.end());
  CHECK_THAT(akritas_joint(s, KernelSpec{}).cdf(a[1000], b[1000]), WithinAbs(0.25, 0.03));
}

TEST_CASE("single-censoring estimator agrees with Akritas", "[joint][mc]") {
  const Sample s = frank_sample(1000, 0.5, 0.0, 10);
  REQUIRE(s.scenario_hint().kind == Scenario::SingleCensored);
  const auto a = avk_joint_single(s, KernelSpec{});
  const auto b = akritas_joint(s, KernelSpec{});
  check_distribution(a);
  double d = 0;
  for (std::size_t i = 0; i < s.size(); i += 11)
    for (std::size_t j = 0; j < s.size(); j += 13)
      d = std::max(d, std::abs(a.cdf(s[i].y1, s[j].y2) - b.cdf(s[i].y1, s[j].y2)));
  CHECK(d < 0.05);

  CHECK_THROWS_AS(avk_joint_single(frank_sample(100, 0.5, 0.5, 1), KernelSpec{}), DomainError);
  const Sample one({{1.0, 2.0, 1, 1}});
  CHECK_THAT(avk_joint_single(one, KernelSpec{}).total_mass(), WithinAbs(1.0, 1e-15));
}

TEST_CASE("bivariate ECDF", "[joint]") {
  const Sample s({{1, 1, 1, 1}, {2, 2, 1, 1}});
  const auto f = ecdf_bivariate(s);
  CHECK_THAT(f.cdf(1.5, 1.5), WithinAbs(0.5, 1e-15));
  CHECK_THAT(f.cdf(2, 2), WithinAbs(1.0, 1e-15));
  CHECK(f.cdf(0.5, 3) == 0.0);
  CHECK_THROWS_AS(ecdf_bivariate(Sample({{1, 1, 0, 1}})), DomainError);
}

TEST_CASE("repair keeps total mass", "[joint][invariant]") {
  JointDistributionEstimate f({1, 2}, {1, 2}, {0.5, -0.1, 0.2, 0.4}, 4);
  const double before = f.total_mass();
  CHECK(f.repair() == 1);
  CHECK_THAT(f.total_mass(), WithinAbs(before, 1e-15));
  for (double m : f.masses()) CHECK(m >= 0.0);
}
