// Acceptance run: one PASS / FAIL / SKIPPED line per criterion.
// Criterion 6 reads the Loss-ALAE data as a y1,y2,delta1,delta2 CSV (loss
// censored at the policy limit) from $CENSCOP_LOSSALAE or tests/data/lossalae.csv.

#include <censcop/studies.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

using namespace censcop;

namespace {

enum class Verdict { Pass, Fail, Skipped };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

std::string f4(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4f", x);
  return b;
}

std::string sci(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2e", x);
  return b;
}

std::size_t column(const StudyTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return i;
  throw std::runtime_error("missing column " + name);
}

double cell(const StudyTable& t, std::size_t row, const std::string& name) {
  return std::stod(t.rows.at(row).at(column(t, name)));
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  std::size_t samples = 0;
  for (std::size_t n : {10u, 100u, 1000u}) {
    for (std::uint64_t k = 0; k < 50; ++k) {
      SimulationConfig c;
      const auto fam = kArchimedeanFamilies[k % 4];
      c.copula = alpha_from_tau(fam, KendallTau(0.1 + 0.01 * static_cast<double>(k)));
      c.n = n;
      c.seed = 101;
      c.stream = n * 1000 + k;
      const Sample s = simulate_censored(c);
      const auto a = kendall_counting(s);
      const auto b = kendall_from_joint(ecdf_bivariate(s), "ecdf");
      // compare atom by atom: evaluating a step function at its own jump is ill-conditioned
      if (a.nu_grid.size() != b.nu_grid.size()) {
        worst = 1.0;
        continue;
      }
      for (std::size_t i = 0; i < a.nu_grid.size(); ++i) {
        worst = std::max(worst, std::abs(a.nu_grid[i] - b.nu_grid[i]));
        worst = std::max(worst, std::abs(a.K_values[i] - b.K_values[i]));
      }
      worst = std::max(worst, std::abs(a.tau_hat - b.tau_hat));
      ++samples;
    }
  }
  return {worst <= 1e-12 ? Verdict::Pass : Verdict::Fail,
          std::to_string(samples) + " samples, max deviation of atoms and K " + sci(worst)};
}

Outcome closed_forms() {
  double lam = 0, part = 0, dens = 0, trip = 0, table = 0;
  const std::pair<CopulaFamily, double> tab[] = {{CopulaFamily::Clayton, 1.3332},
                                                 {CopulaFamily::Gumbel, 1.6667},
                                                 {CopulaFamily::Frank, 4.1611},
                                                 {CopulaFamily::Joe, 2.2191}};
  for (const auto& [f, a] : tab) {
    table = std::max(table, std::abs(alpha_from_tau(f, KendallTau(0.4)).alpha() - a));
    for (double tau : {0.1, 0.3, 0.5, 0.7, 0.85}) {
      const auto p = alpha_from_tau(f, KendallTau(tau));
      trip = std::max(trip, std::abs(tau_from_alpha(p).value() - tau));
      for (double v = 0.05; v < 0.96; v += 0.05) {
        const double h = 1e-5;
        const double d = (generator(p, v + h) - generator(p, v - h)) / (2 * h);
        lam = std::max(lam, std::abs(lambda_fn(p, v) - generator(p, v) / d));
        lam = std::max(lam, std::abs(kendall_cdf(p, v) - (v - lambda_fn(p, v))));
        for (double w = 0.1; w < 0.95; w += 0.2) {
          const double du = (copula_cdf(p, v + h, w) - copula_cdf(p, v - h, w)) / (2 * h);
          part = std::max(part, std::abs(partial_u1(p, v, w) - du));
          const double g = 1e-4;
          const double mixed = (copula_cdf(p, v + g, w + g) - copula_cdf(p, v + g, w - g) -
                                copula_cdf(p, v - g, w + g) + copula_cdf(p, v - g, w - g)) /
                               (4 * g * g);
          dens = std::max(dens, std::abs(copula_density(p, v, w) - mixed) / std::max(1.0, mixed));
        }
      }
    }
  }
  const bool ok = lam <= 1e-6 && part <= 1e-6 && dens <= 1e-4 && trip <= 1e-8 && table <= 5e-4;
  std::ostringstream d;
  d << "lambda/K " << lam << ", dC/du " << part << ", density " << dens << ", round trip " << trip
    << ", table alpha " << table;
  return {ok ? Verdict::Pass : Verdict::Fail, d.str()};
}

Outcome independence_study() {
  StudyOptions o;
  o.replicates = 1000;
  o.n = 1000;
  const auto t = reproduce_table("4", o);
  bool ok = true;
  std::string d;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double m = cell(t, r, "mean_alpha_hat");
    const double target = cell(t, r, "target");
    const double paper = cell(t, r, "paper");
    ok = ok && std::abs(m - target) <= 0.05 && std::abs(m - paper) <= 0.05;
    d += t.rows[r][0] + " " + f4(m) + " (paper " + f4(paper) + ") ";
  }
  return {ok ? Verdict::Pass : Verdict::Fail, d};
}

Outcome l2_bootstrap() {
  bool ok = true;
  std::string d;
  for (CopulaFamily truth : {CopulaFamily::Frank, CopulaFamily::Clayton, CopulaFamily::Joe}) {
    StudyOptions o;
    o.replicates = 1;
    o.B = 200;
    o.scenarios = {CensoringScenario::Double};
    o.truths = {truth};
    o.taus = {0.4};
    const auto t = reproduce_table("7", o);
    const std::string name(family_name(truth));
    const double own = cell(t, 0, "p_" + name);
    bool minimal = true;
    for (CopulaFamily f : kArchimedeanFamilies)
      if (f != truth && cell(t, 0, "p_" + std::string(family_name(f))) < own) minimal = false;
    // the absolute bound is stated for the Frank row; the other rows need the true family to win
    ok = ok && minimal && (truth != CopulaFamily::Frank || own <= 0.10);
    d += name + " p=" + f4(own) + (minimal ? " (min)" : " (not min)") + "; ";
  }
  return {ok ? Verdict::Pass : Verdict::Fail, d};
}

Outcome gof_size_power() {
  StudyOptions o;
  o.replicates = 200;
  o.n = 200;
  o.scenarios = {CensoringScenario::None};
  o.truths = {CopulaFamily::Frank};
  const auto t = reproduce_table("8", o);
  // rows are tau 0.2, 0.4, 0.6
  const double size = cell(t, 1, "reject_Frank");
  const double power = cell(t, 1, "reject_Clayton");
  bool monotone = true;
  std::string d = "tau 0.4: H0 Frank " + f4(size) + ", H0 Clayton " + f4(power) + "; power by tau:";
  for (CopulaFamily f : {CopulaFamily::Clayton, CopulaFamily::Gumbel, CopulaFamily::Joe}) {
    const std::string n(family_name(f));
    d += " " + n;
    for (std::size_t r = 0; r < 3; ++r) d += " " + f4(cell(t, r, "reject_" + n));
    for (std::size_t r = 0; r + 1 < 3; ++r) {
      const double slack = 2.0 * std::hypot(cell(t, r, "se_" + n), cell(t, r + 1, "se_" + n));
      if (cell(t, r, "reject_" + n) > cell(t, r + 1, "reject_" + n) + slack) monotone = false;
    }
  }
  const bool ok = size <= 0.15 && power >= 0.5 && monotone;
  return {ok ? Verdict::Pass : Verdict::Fail, d};
}

Outcome loss_alae() {
  std::string path = std::string(CENSCOP_SOURCE_DIR) + "/tests/data/lossalae.csv";
  if (const char* env = std::getenv("CENSCOP_LOSSALAE")) path = env;
  if (!std::filesystem::exists(path))
    return {Verdict::Skipped, "no Loss-ALAE data (set CENSCOP_LOSSALAE or add tests/data/lossalae.csv)"};
  const Sample s = load_csv(path);
  const auto curve = estimate_curve(s);
  const std::pair<CopulaFamily, double> paper[] = {{CopulaFamily::Clayton, 1.0803},
                                                   {CopulaFamily::Frank, 3.5177},
                                                   {CopulaFamily::Gumbel, 1.5403},
                                                   {CopulaFamily::Joe, 1.9805}};
  bool ok = std::abs(curve.tau_hat - 0.3507) <= 0.02;
  std::string d = "tau-hat " + f4(curve.tau_hat) + ";";
  CopulaFamily best = CopulaFamily::Clayton;
  double bd = numerics::kInf;
  for (const auto& [f, a] : paper) {
    const auto p = fit_alpha_from_tau(f, curve.tau_hat).param;
    ok = ok && std::abs(p.alpha() - a) <= 0.05 * a;
    d += " " + std::string(family_name(f)) + " " + f4(p.alpha());
    if (const double dist = l2_distance(curve, p); dist < bd) {
      bd = dist;
      best = f;
    }
  }
  ok = ok && best == CopulaFamily::Gumbel;
  d += "; L2 choice " + std::string(family_name(best));
  return {ok ? Verdict::Pass : Verdict::Fail, d};
}

Outcome limit_study() {
  StudyOptions o;
  o.replicates = 100;
  const auto t = reproduce_table("limits", o);
  bool ok = true;
  std::string d;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double share = cell(t, r, "l2_family_unchanged_share");
    ok = ok && share >= 0.80;
    d += t.rows[r][0] + ": unchanged " + f4(share) + ", tau " + f4(cell(t, r, "tau_hat_q_high")) + " -> " +
         f4(cell(t, r, "tau_hat_q_low")) + "; ";
  }
  return {ok ? Verdict::Pass : Verdict::Fail, d};
}

Outcome properties() {
  std::size_t violations = 0;
  std::string d;
  // imputation support
  for (CopulaFamily f : kArchimedeanFamilies) {
    const auto p = alpha_from_tau(f, KendallTau(0.5));
    Rng rng(31, static_cast<std::uint64_t>(f));
    for (int i = 0; i < 500; ++i) {
      const double a1 = 0.02 + 0.96 * rng.uniform();
      const double a2 = 0.02 + 0.96 * rng.uniform();
      const double c = copula_cdf(p, a1, a2);
      for (int d1 = 0; d1 <= 1; ++d1)
        for (int d2 = 0; d2 <= 1; ++d2) {
          const auto r = impute_uv({1, 1, d1, d2}, p, 1 - a1, 1 - a2, rng);
          violations += !(r.u >= 0 && r.u <= 1 && r.v >= c - 1e-9 && r.v <= 1);
          violations += d1 == 1 && r.v > a1 + 1e-9;
          violations += d2 == 1 && r.v > a2 + 1e-9;
        }
    }
  }
  d += "support violations " + std::to_string(violations);
  // independence of (U, V) under the true model
  double worst_r = 0;
  for (CopulaFamily f : kArchimedeanFamilies) {
    const auto p = alpha_from_tau(f, KendallTau(0.5));
    std::vector<double> u, fu, v;
    Rng rng(0);
    for (const auto& [x, y] : sample(p, 10000, 40 + static_cast<std::uint64_t>(f))) {
      const auto r = impute_uv({1, 1, 1, 1}, p, 1 - x, 1 - y, rng);
      u.push_back(r.u);
      fu.push_back(std::abs(r.u - 0.5));
      v.push_back(r.v);
    }
    worst_r = std::max({worst_r, std::abs(numerics::pearson(u, v)), std::abs(numerics::pearson(fu, v))});
  }
  d += ", max |r(U,V)| " + f4(worst_r);
  // estimator monotonicity and seed determinism
  SimulationConfig c;
  c.copula = alpha_from_tau(CopulaFamily::Joe, KendallTau(0.4));
  c.n = 400;
  c.seed = 5;
  c.censor1 = MarginalModel::exponential(0.3);
  c.censor2 = MarginalModel::exponential(0.3);
  const Sample s = simulate_censored(c);
  const auto joint = akritas_joint(s, KernelSpec{});
  std::size_t bad = 0;
  for (double m : joint.masses()) bad += m < 0;
  const auto k = kendall_from_joint(joint);
  for (std::size_t i = 1; i < k.K_values.size(); ++i) bad += k.K_values[i] < k.K_values[i - 1];
  bad += k.K_values.back() != 1.0;
  const Sample again = simulate_censored(c);
  bool same = true;
  for (std::size_t i = 0; i < s.size(); ++i) same = same && s[i] == again[i];
  const auto b1 = bootstrap_pseudo_p(s, k, {CopulaFamily::Clayton, CopulaFamily::Joe}, 10, 3);
  const auto b2 = bootstrap_pseudo_p(s, k, {CopulaFamily::Clayton, CopulaFamily::Joe}, 10, 3);
  same = same && b1.pseudo_p == b2.pseudo_p;
  d += ", monotonicity violations " + std::to_string(bad) + (same ? ", deterministic" : ", NOT deterministic");
  const bool ok = violations == 0 && worst_r < 4.0 / std::sqrt(10000.0) && bad == 0 && same;
  return {ok ? Verdict::Pass : Verdict::Fail, d};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 oracle equivalence (complete data)", oracle_equivalence},
      {"2 closed forms and tau/alpha round trip", closed_forms},
      {"3 independence study, 1000 replicates", independence_study},
      {"4 L2 bootstrap selection, double censoring", l2_bootstrap},
      {"5 GOF size and power", gof_size_power},
      {"6 Loss-ALAE reproduction", loss_alae},
      {"7 limit study", limit_study},
      {"8 property suite", properties},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIPPED";
    std::printf("[%s] %s | %s | %.1fs\n", tag, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.verdict == Verdict::Fail;
  }
  return failed == 0 ? 0 : 1;
}
