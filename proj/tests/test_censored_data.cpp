#include <catch_amalgamated.hpp>

#include <censcop/censored_data.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace censcop;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

SimulationConfig clayton_config(std::size_t n, std::uint64_t seed = 3) {
  SimulationConfig c;
  c.copula = alpha_from_tau(CopulaFamily::Clayton, KendallTau(0.4));
  c.n = n;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("no censors and no limits give complete data", "[data]") {
  const Sample s = simulate_censored(clayton_config(500));
  CHECK(s.complete());
  CHECK(s.scenario_hint().kind == Scenario::Complete);
  Rng rng(3, 0);
  const auto c = clayton_config(500);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const LatentPair t = draw_latent(c, rng);
    draw_censors(c, rng);
    CHECK(s[i].y1 == t.t1);
    CHECK(s[i].y2 == t.t2);
  }
}

TEST_CASE("observed values never exceed latent times, censors or limits", "[data][invariant]") {
  auto c = clayton_config(3000, 8);
  c.censor1 = MarginalModel::exponential(0.4);
  c.censor2 = MarginalModel::exponential(0.7);
  c.limit1 = 2.0;
  c.limit2 = 1.5;
  const Sample s = simulate_censored(c);
  Rng rng(8, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const LatentPair t = draw_latent(c, rng);
    const auto [x1, x2] = draw_censors(c, rng);
    const auto& o = s[i];
    CHECK(o.y1 <= std::min({t.t1, x1, c.limit1}));
    CHECK(o.y2 <= std::min({t.t2, x2, c.limit2}));
    CHECK((o.delta1 == 1) == (t.t1 <= std::min(x1, c.limit1)));
    CHECK((o.delta2 == 1) == (t.t2 <= std::min(x2, c.limit2)));
    CHECK(o.y1 == std::min({t.t1, x1, c.limit1}));
  }
}

TEST_CASE("ties between latent time and censor count as events", "[data]") {
  const Observation o = censor_pair({1.0, 2.0}, 1.0, 5.0, 10.0, 2.0);
  CHECK(o.delta1 == 1);
  CHECK(o.delta2 == 1);
  CHECK(o.y1 == 1.0);
}

TEST_CASE("tiny limit censors almost everything", "[data]") {
  auto c = clayton_config(2000);
  c.margin1 = MarginalModel::lognormal(0.0, 2.0);
  c.limit1 = 0.01;
  const Sample s = simulate_censored(c);
  std::size_t censored = 0;
  for (const auto& o : s.observations()) {
    censored += o.delta1 == 0;
    CHECK(o.y1 <= 0.01);
    if (o.delta1 == 0) CHECK(o.y1 == 0.01);
  }
  CHECK(censored > 0.98 * s.size());
}

TEST_CASE("limit below the support censors every observation", "[data][invariant]") {
  auto c = clayton_config(500);
  c.limit1 = 1e-300;
  c.limit2 = 1e-300;
  const Sample s = simulate_censored(c);
  for (const auto& o : s.observations()) {
    CHECK(o.delta1 == 0);
    CHECK(o.delta2 == 0);
  }
  c.limit1 = 0.0;
  CHECK_THROWS_AS(simulate_censored(c), InputError);
}

TEST_CASE("censoring calibration hits the target", "[data][mc]") {
  const auto c = clayton_config(10000, 21);
  const auto r = calibrate_censoring(c.copula, c.margin1, c.margin2, 0.20, CensoringScenario::Double);
  CHECK(r.achieved >= 0.19);
  CHECK(r.achieved <= 0.21);
  CHECK(r.rate1 == r.rate2);
  auto cfg = c;
  apply_censor_rates(cfg, CensoringScenario::Double, r);
  CHECK_THAT(simulate_censored(cfg).censored_fraction(), WithinAbs(0.20, 0.03));
  cfg.n = 100000;
  cfg.stream = 5;
  CHECK_THAT(simulate_censored(cfg).censored_fraction(), WithinAbs(0.20, 0.01));

  const auto single = calibrate_censoring(c.copula, c.margin1, c.margin2, 0.20, CensoringScenario::Single1);
  CHECK(single.rate2 == 0.0);
  auto scfg = c;
  apply_censor_rates(scfg, CensoringScenario::Single1, single);
  const Sample ss = simulate_censored(scfg);
  CHECK(ss.scenario_hint().kind == Scenario::SingleCensored);
  CHECK(ss.scenario_hint().censored_margin == 1);

  const auto none = calibrate_censoring(c.copula, c.margin1, c.margin2, 0.0, CensoringScenario::Double);
  CHECK(none.rate1 == 0.0);
  CHECK(none.rate2 == 0.0);
  CHECK_THROWS_AS(calibrate_censoring(c.copula, c.margin1, c.margin2, 1.0, CensoringScenario::Double),
                  DomainError);
}

TEST_CASE("CSV reading and diagnostics", "[data][csv]") {
  std::istringstream ok("y1,y2,delta1,delta2\n1.5,2,1,1\n0.5,3,0,1\n2,1,1,0\n");
  const Sample s = read_csv(ok);
  CHECK(s.size() == 3);
  CHECK(s.scenario_hint().kind == Scenario::DoubleCensored);

  std::istringstream complete("y1,y2,delta1,delta2,extra\n1,2,1,1,x\n3,4,1,1,y\n");
  CHECK(read_csv(complete).scenario_hint().kind == Scenario::Complete);

  std::istringstream bad("y1,y2,delta1,delta2\n1,2,1,1\n1,2,2,1\n");
  CHECK_THROWS_WITH(read_csv(bad, "bad.csv"), ContainsSubstring("line 3"));

  std::istringstream empty("y1,y2,delta1,delta2\n");
  CHECK_THROWS_WITH(read_csv(empty), ContainsSubstring("no observations"));

  std::istringstream negative("y1,y2,delta1,delta2\n-1,2,1,1\n");
  CHECK_THROWS_AS(read_csv(negative), InputError);

  std::istringstream noheader("1,2,1,1\n");
  CHECK_THROWS_AS(read_csv(noheader), InputError);
}

TEST_CASE("CSV round trip is bit exact", "[data][csv][invariant]") {
  auto c = clayton_config(300, 77);
  c.censor1 = MarginalModel::exponential(0.3);
  c.censor2 = MarginalModel::exponential(0.3);
  const Sample s = simulate_censored(c);
  const auto path = std::filesystem::temp_directory_path() / "censcop_roundtrip.csv";
  save_csv(path.string(), s);
  const Sample back = load_csv(path.string());
  std::filesystem::remove(path);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(back[i] == s[i]);
}

TEST_CASE("simulation is deterministic per seed and stream", "[data]") {
  auto c = clayton_config(200, 4);
  c.censor1 = MarginalModel::exponential(0.5);
  const Sample a = simulate_censored(c);
  const Sample b = simulate_censored(c);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  c.stream = 1;
  const Sample d = simulate_censored(c);
  CHECK_FALSE(d[0] == a[0]);
}

TEST_CASE("scenario files", "[data]") {
  std::istringstream in("# doubly censored Joe\nfamily = joe\ntau = 0.4\ncensoring = double\n"
                        "target = 0.2\nn = 250\nseed = 9\n");
  const ScenarioSpec spec = parse_scenario(in);
  CHECK(spec.family == CopulaFamily::Joe);
  CHECK(spec.n == 250);
  const Sample s = simulate_censored(make_config(spec));
  CHECK(s.size() == 250);
  CHECK_THAT(s.censored_fraction(), WithinAbs(0.2, 0.08));

  std::istringstream bad("family = joe\ncolour = red\n");
  CHECK_THROWS_WITH(parse_scenario(bad), ContainsSubstring("line 2"));
  std::istringstream both("tau = 0.3\nalpha = 2\n");
  CHECK_THROWS_AS(parse_scenario(both), InputError);
}

TEST_CASE("marginal models", "[data]") {
  const auto e = MarginalModel::exponential(2.0);
  CHECK_THAT(e.cdf(e.quantile(0.3)), WithinAbs(0.3, 1e-14));
  const auto ln = MarginalModel::lognormal(1.0, 0.5);
  for (double u : {1e-6, 0.01, 0.5, 0.97, 1 - 1e-9}) CHECK_THAT(ln.cdf(ln.quantile(u)), WithinAbs(u, 1e-12));
  CHECK_THAT(MarginalModel::normal_quantile(0.975), WithinAbs(1.959963984540054, 1e-13));
  CHECK_THROWS_AS(MarginalModel::exponential(-1.0), DomainError);
}
