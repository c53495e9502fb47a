#include <catch_amalgamated.hpp>

#include <censcop/studies.hpp>

#include <sstream>

using namespace censcop;
using Catch::Matchers::WithinAbs;

namespace {

StudyOptions small(std::size_t reps, std::size_t n) {
  StudyOptions o;
  o.replicates = reps;
  o.n = n;
  o.B = 10;
  o.M = 2;
  o.threads = 1;
  return o;
}

std::string csv(const StudyTable& t) {
  std::ostringstream out;
  t.write_csv(out);
  return out.str();
}

}  // namespace

TEST_CASE("mean and standard error", "[studies]") {
  const auto m = mean_se({1.0, 2.0, 3.0, 4.0});
  CHECK_THAT(m.mean, WithinAbs(2.5, 1e-15));
  CHECK_THAT(m.se, WithinAbs(std::sqrt(5.0 / 3.0) / 2.0, 1e-15));
}

TEST_CASE("independence study", "[studies]") {
  auto o = small(8, 150);
  const auto t = reproduce_table("4", o);
  REQUIRE(t.rows.size() == 4);
  CHECK(t.columns.front() == "family");
  for (const auto& r : t.rows) CHECK(r.size() == t.columns.size());
  o.threads = 3;
  CHECK(csv(reproduce_table("4", o)) == csv(t));
  o.truths = {CopulaFamily::Gumbel};
  CHECK(reproduce_table("4", o).rows.size() == 1);
}

TEST_CASE("omnibus studies", "[studies]") {
  auto o = small(1, 150);
  o.truths = {CopulaFamily::Frank};
  const auto single = reproduce_table("5", o);
  CHECK(single.rows.size() == 3 * 4);
  std::size_t selected = 0;
  for (const auto& r : single.rows) selected += r.back() == "1";
  CHECK(selected == 3);

  o.replicates = 4;
  o.scenarios = {CensoringScenario::Double};
  const auto rep = reproduce_table("6", o);
  REQUIRE(rep.rows.size() == 1);
  std::size_t total = 0;
  for (std::size_t i = 5; i < rep.rows[0].size(); ++i) total += std::stoul(rep.rows[0][i]);
  CHECK(total == 4);
}

TEST_CASE("bootstrap study", "[studies]") {
  auto o = small(1, 120);
  o.scenarios = {CensoringScenario::Double};
  o.truths = {CopulaFamily::Clayton};
  o.taus = {0.4};
  const auto t = reproduce_table("7", o);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.columns.back() == "true_family_minimum_share");
  o.threads = 2;
  CHECK(csv(reproduce_table("7", o)) == csv(t));
}

TEST_CASE("GOF study", "[studies]") {
  auto o = small(3, 100);
  o.scenarios = {CensoringScenario::Single1};
  o.taus = {0.2, 0.6};
  const auto t = reproduce_table("8", o);
  CHECK(t.rows.size() == 4);
  for (const auto& r : t.rows)
    for (std::size_t i = 4; i < 8; ++i) {
      const double v = std::stod(r[i]);
      CHECK((v >= 0.0 && v <= 1.0));
    }
}

TEST_CASE("limit study", "[studies]") {
  auto o = small(2, 200);
  const auto t = reproduce_table("limits", o);
  CHECK(t.rows.size() == 3);
  CHECK(t.columns[0] == "preset");
  CHECK_THAT(censor_location(1.0, 0.0, 1.0, 0.5), WithinAbs(1.0, 1e-12));
}

TEST_CASE("invalid study requests", "[studies]") {
  CHECK_THROWS_AS(reproduce_table("9", small(1, 50)), InputError);
  CHECK_THROWS_AS(reproduce_table("4", small(0, 50)), InputError);
}
