// censcop: command-line front end for the censored Archimedean copula pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <censcop/censored_data.hpp>
#include <censcop/copula.hpp>
#include <censcop/errors.hpp>
#include <censcop/kendall.hpp>
#include <censcop/selection.hpp>
#include <censcop/studies.hpp>
#include <censcop/svg.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace censcop;

namespace {

struct CommonArgs {
  std::string input;
  std::string candidates = "clayton,frank,gumbel,joe";
  std::string kernel = "epanechnikov";
  double bandwidth = 0.0;
  double bandwidth_constant = 1.0;
  double w = 0.5;
  std::string joint = "akritas";
  double nu0 = 0.5;
  std::size_t B = 1000;
  std::size_t M = 5;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t grid = 200;
  std::size_t threads = 0;
  std::string orientation = "distribution";
  std::string combination = "average";
  std::string gof_u = "folded";
  bool svg = false;
};

std::vector<CopulaFamily> parse_candidates(const std::string& list) {
  std::vector<CopulaFamily> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const CopulaFamily f = parse_family(item);
    if (std::find(out.begin(), out.end(), f) != out.end())
      throw InputError("candidate '" + item + "' listed twice");
    out.push_back(f);
  }
  if (out.empty()) throw InputError("no candidate families");
  return out;
}

PipelineOptions pipeline_of(const CommonArgs& a) {
  PipelineOptions p;
  p.kernel.shape = parse_kernel(a.kernel);
  p.kernel.bandwidth = a.bandwidth;
  p.kernel.rule_constant = a.bandwidth_constant;
  if (!(a.bandwidth_constant > 0.0)) throw InputError("bandwidth rule constant must be positive");
  if (!(a.w >= 0.0 && a.w <= 1.0)) throw InputError("w must lie in [0, 1]");
  p.w = a.w;
  p.method = parse_joint_method(a.joint);
  return p;
}

GofOptions gof_of(const CommonArgs& a) {
  GofOptions g;
  if (a.M == 0) throw InputError("M must be at least 1");
  g.M = a.M;
  if (a.orientation == "distribution") g.orientation = Orientation::Distribution;
  else if (a.orientation == "survival") g.orientation = Orientation::Survival;
  else throw InputError("orientation must be 'distribution' or 'survival'");
  if (a.combination == "average") g.combination = Combination::Average;
  else if (a.combination == "rubin") g.combination = Combination::Rubin;
  else throw InputError("combination must be 'average' or 'rubin'");
  if (a.gof_u == "folded") g.transform = UTransform::Folded;
  else if (a.gof_u == "raw") g.transform = UTransform::Raw;
  else throw InputError("gof-u must be 'folded' or 'raw'");
  return g;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw InputError("cannot write '" + p.string() + "'");
  return f;
}

void emit_json(const json& j, const std::string& out, const std::string& name) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  fs::create_directories(out);
  auto f = open_out(fs::path(out) / name);
  f << j.dump(2) << '\n';
}

GraphicalTable curves_for(const KendallCurve& c, const CommonArgs& a) {
  std::vector<double> grid;
  if (a.grid > 0) grid = uniform_nu_grid(a.grid);
  return graphical_curves(c, parse_candidates(a.candidates), grid);
}

void emit_curves(const GraphicalTable& t, const CommonArgs& a) {
  if (a.out.empty()) {
    write_curve_csv(std::cout, t);
    return;
  }
  fs::create_directories(a.out);
  auto f = open_out(fs::path(a.out) / "curves.csv");
  write_curve_csv(f, t);
  if (a.svg) {
    auto s = open_out(fs::path(a.out) / "curves.svg");
    write_lambda_svg(s, t);
  }
}

json curve_summary(const KendallCurve& c) {
  return {{"estimator", c.estimator},
          {"tau_hat", c.tau_hat},
          {"tau_raw", c.tau_raw},
          {"tau_clamped", c.tau_clamped},
          {"grid_points", c.nu_grid.size()},
          {"sample_size", c.sample_size}};
}

int cmd_fit(const CommonArgs& a) {
  const Sample s = load_csv(a.input);
  const auto pipe = pipeline_of(a);
  const KendallCurve c = estimate_curve(s, pipe);
  const GeneratorEstimate g = generator_estimate(c, a.nu0, uniform_nu_grid(a.grid ? a.grid : 200));
  json j = curve_summary(c);
  j["n"] = s.size();
  j["scenario"] = to_string(s.scenario_hint());
  j["tau_from_lambda"] = tau_hat_from_lambda(c);
  j["nu0"] = a.nu0;
  j["generator_excluded_cells"] = g.excluded_cells;
  json fams = json::array();
  for (CopulaFamily f : parse_candidates(a.candidates)) {
    const auto inv = fit_alpha_from_tau(f, c.tau_hat);
    fams.push_back({{"family", std::string(family_name(f))},
                    {"alpha_hat", inv.param.alpha()},
                    {"clamped", inv.clamped}});
  }
  j["candidates"] = fams;
  j["config"] = {{"kernel", a.kernel},
                 {"bandwidth", a.bandwidth > 0.0 ? json(a.bandwidth) : json("rule")},
                 {"w", a.w},
                 {"joint_estimator", a.joint}};
  emit_json(j, a.out, "fit.json");
  if (!a.out.empty()) {
    auto f = open_out(fs::path(a.out) / "generator.csv");
    f << "nu,phi_hat\n";
    for (std::size_t i = 0; i < g.nu_grid.size(); ++i)
      f << detail::format_double(g.nu_grid[i]) << ',' << detail::format_double(g.phi_values[i]) << '\n';
  }
  return 0;
}

int cmd_select(const CommonArgs& a) {
  const Sample s = load_csv(a.input);
  SelectionConfig cfg;
  cfg.candidates = parse_candidates(a.candidates);
  cfg.pipeline = pipeline_of(a);
  cfg.nu0 = a.nu0;
  cfg.B = a.B;
  cfg.run_bootstrap = a.B > 0;
  cfg.gof = gof_of(a);
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  const SelectionReport r = run_selection(s, cfg);
  emit_json(to_json(r), a.out, "report.json");
  if (!a.out.empty()) emit_curves(curves_for(r.curve, a), a);
  return 0;
}

int cmd_curves(const CommonArgs& a) {
  const Sample s = load_csv(a.input);
  emit_curves(curves_for(estimate_curve(s, pipeline_of(a)), a), a);
  return 0;
}

int cmd_gof(const CommonArgs& a, const std::string& family, std::optional<double> alpha) {
  const Sample s = load_csv(a.input);
  const CopulaFamily f = parse_family(family);
  double tau = 0.0;
  DependenceParam p = DependenceParam::independence();
  if (alpha) {
    p = DependenceParam(f, *alpha);
  } else {
    tau = estimate_tau(s, pipeline_of(a));
    p = fit_alpha_from_tau(f, tau).param;
  }
  const GofResult g = wang_gof(s, p, a.seed, gof_of(a));
  json j = {{"family", std::string(family_name(f))},
            {"alpha", p.alpha()},
            {"alpha_source", alpha ? "given" : "tau_hat"},
            {"statistic", g.degenerate ? json(nullptr) : json(g.statistic)},
            {"z_bar", g.degenerate ? json(nullptr) : json(g.z_bar)},
            {"p_value", g.p_value},
            {"degenerate", g.degenerate},
            {"imputations", g.z.size()},
            {"M", a.M},
            {"combination", a.combination},
            {"orientation", a.orientation},
            {"gof_u", a.gof_u},
            {"seed", a.seed}};
  if (!alpha) j["tau_hat"] = tau;
  emit_json(j, a.out, "gof.json");
  return 0;
}

struct SimulateArgs {
  std::string scenario;
  std::string family = "clayton";
  std::optional<double> tau;
  std::optional<double> alpha;
  std::string censoring = "double";
  double target = 0.2;
  std::size_t n = 500;
};

int cmd_simulate(const CommonArgs& a, const SimulateArgs& sa) {
  ScenarioSpec spec;
  if (!sa.scenario.empty()) {
    spec = load_scenario(sa.scenario);
  } else {
    spec.family = parse_family(sa.family);
    spec.tau = sa.tau;
    spec.alpha = sa.alpha;
    if (spec.tau && spec.alpha) throw InputError("give either --tau or --alpha, not both");
    spec.censoring = parse_censoring_scenario(sa.censoring);
    spec.target = spec.censoring == CensoringScenario::None ? 0.0 : sa.target;
    spec.n = sa.n;
  }
  spec.seed = a.seed;
  if (spec.n == 0) throw InputError("n must be at least 1");
  const Sample s = simulate_censored(make_config(spec));
  if (a.out.empty()) {
    write_csv(std::cout, s);
  } else {
    const fs::path p(a.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    save_csv(a.out, s);
  }
  return 0;
}

int cmd_reproduce(const CommonArgs& a, const std::string& id, std::size_t replicates,
                  std::size_t n, double target, const std::vector<std::string>& scenarios,
                  const std::vector<std::string>& truths, const std::vector<double>& taus) {
  StudyOptions o;
  o.replicates = replicates;
  o.n = n;
  o.B = a.B;
  o.M = a.M;
  o.seed = a.seed;
  o.threads = a.threads;
  o.censor_target = target;
  o.candidates = parse_candidates(a.candidates);
  const auto pipe = pipeline_of(a);
  o.kernel = pipe.kernel;
  o.w = pipe.w;
  for (const auto& s : scenarios) o.scenarios.push_back(parse_censoring_scenario(s));
  for (const auto& f : truths) o.truths.push_back(parse_family(f));
  o.taus = taus;
  const StudyTable t = reproduce_table(id, o);
  if (a.out.empty()) {
    t.write_csv(std::cout);
  } else {
    fs::create_directories(a.out);
    auto f = open_out(fs::path(a.out) / ("table_" + id + ".csv"));
    t.write_csv(f);
  }
  return 0;
}

int fail(ErrorClass cls, const std::string& msg) {
  const json j = {{"error", {{"class", error_class_name(cls)}, {"message", msg}}}};
  std::cerr << j.dump() << '\n';
  return cls == ErrorClass::Numerical ? 3 : 2;
}

void add_pipeline_flags(CLI::App* sub, CommonArgs& a) {
  sub->add_option("--candidates", a.candidates, "Comma-separated families")->capture_default_str();
  sub->add_option("--kernel", a.kernel, "epanechnikov, gaussian or uniform")
      ->capture_default_str();
  sub->add_option("--bandwidth", a.bandwidth, "Fixed bandwidth; 0 uses the rule")->capture_default_str();
  sub->add_option("--bandwidth-constant", a.bandwidth_constant, "Rule constant c")->capture_default_str();
  sub->add_option("--w", a.w, "Akritas weight in [0, 1]")->capture_default_str();
  sub->add_option("--joint", a.joint, "akritas, auto, avk or ecdf")->capture_default_str();
  sub->add_option("--out", a.out, "Output directory (stdout when omitted)");
  sub->add_option("--threads", a.threads, "Worker threads; 0 = hardware")->capture_default_str();
}

void add_gof_flags(CLI::App* sub, CommonArgs& a) {
  sub->add_option("--M", a.M, "Imputations")->capture_default_str();
  sub->add_option("--orientation", a.orientation, "distribution or survival")->capture_default_str();
  sub->add_option("--combine", a.combination, "average or rubin")->capture_default_str();
  sub->add_option("--gof-u", a.gof_u, "folded or raw")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Archimedean copula selection for censored bivariate data"};
  app.require_subcommand(1);
  CommonArgs a;

  auto* fit = app.add_subcommand("fit", "Estimate K, lambda, tau and alpha per candidate");
  fit->add_option("input", a.input, "CSV with y1,y2,delta1,delta2")->required();
  add_pipeline_flags(fit, a);
  fit->add_option("--nu0", a.nu0, "Generator normalisation point")->capture_default_str();
  fit->add_option("--grid", a.grid, "Generator grid points")->capture_default_str();

  auto* sel = app.add_subcommand("select", "Full selection report");
  sel->add_option("input", a.input, "CSV with y1,y2,delta1,delta2")->required();
  add_pipeline_flags(sel, a);
  add_gof_flags(sel, a);
  sel->add_option("--nu0", a.nu0, "Generator normalisation point")->capture_default_str();
  sel->add_option("--B", a.B, "Bootstrap rounds; 0 skips the bootstrap")->capture_default_str();
  sel->add_option("--seed", a.seed, "Random seed")->required();
  sel->add_option("--grid", a.grid, "Curve CSV grid points; 0 uses the estimate's own grid")
      ->capture_default_str();
  sel->add_flag("--svg", a.svg, "Also write curves.svg");

  auto* cur = app.add_subcommand("curves", "Curve CSV of K-hat, lambda-hat and candidate overlays");
  cur->add_option("input", a.input, "CSV with y1,y2,delta1,delta2")->required();
  add_pipeline_flags(cur, a);
  cur->add_option("--grid", a.grid, "Grid points; 0 uses the estimate's own grid")->capture_default_str();
  cur->add_flag("--svg", a.svg, "Also write curves.svg");

  std::string gof_family;
  std::optional<double> gof_alpha;
  auto* gof = app.add_subcommand("gof", "Imputation-based goodness-of-fit test");
  gof->add_option("input", a.input, "CSV with y1,y2,delta1,delta2")->required();
  gof->add_option("--family", gof_family, "Family under H0")->required();
  gof->add_option("--alpha", gof_alpha, "Parameter under H0; default inverts tau-hat");
  add_pipeline_flags(gof, a);
  add_gof_flags(gof, a);
  gof->add_option("--seed", a.seed, "Random seed")->required();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Draw a censored sample");
  sim->add_option("--scenario", sa.scenario, "Scenario file (key = value lines)");
  sim->add_option("--family", sa.family, "Copula family")->capture_default_str();
  sim->add_option("--tau", sa.tau, "Kendall tau");
  sim->add_option("--alpha", sa.alpha, "Dependence parameter");
  sim->add_option("--censoring", sa.censoring, "none, single1, single2, double or shared")
      ->capture_default_str();
  sim->add_option("--target", sa.target, "Share of observations with a censored component")
      ->capture_default_str();
  sim->add_option("--n", sa.n, "Sample size")->capture_default_str();
  sim->add_option("--seed", a.seed, "Random seed")->required();
  sim->add_option("--out", a.out, "Output CSV (stdout when omitted)");

  std::string table_id;
  std::size_t replicates = 1000;
  std::size_t study_n = 0;
  double target = 0.2;
  std::vector<std::string> scen_filter;
  std::vector<std::string> truth_filter;
  std::vector<double> tau_filter;
  auto* rep = app.add_subcommand("reproduce-table", "Replicated simulation study");
  rep->add_option("table", table_id, "4, 5, 6, 7, 8 or limits")->required();
  rep->add_option("--replicates", replicates, "Replicates per cell")->capture_default_str();
  rep->add_option("--n", study_n, "Sample size; 0 = study default")->capture_default_str();
  rep->add_option("--target", target, "Censoring share for simulated scenarios")->capture_default_str();
  rep->add_option("--scenario", scen_filter, "Keep only these censoring scenarios");
  rep->add_option("--true-family", truth_filter, "Keep only these true families");
  rep->add_option("--tau", tau_filter, "Keep only these tau values");
  rep->add_option("--B", a.B, "Bootstrap rounds")->capture_default_str();
  rep->add_option("--M", a.M, "Imputations")->capture_default_str();
  rep->add_option("--seed", a.seed, "Random seed")->required();
  add_pipeline_flags(rep, a);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorClass::Input, e.what());
  }

  try {
    if (*fit) return cmd_fit(a);
    if (*sel) return cmd_select(a);
    if (*cur) return cmd_curves(a);
    if (*gof) return cmd_gof(a, gof_family, gof_alpha);
    if (*sim) return cmd_simulate(a, sa);
    if (*rep)
      return cmd_reproduce(a, table_id, replicates, study_n, target, scen_filter, truth_filter,
                           tau_filter);
  } catch (const Error& e) {
    return fail(e.error_class(), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(ErrorClass::Input, e.what());
  } catch (const std::exception& e) {
    return fail(ErrorClass::Numerical, e.what());
  }
  return 0;
}
