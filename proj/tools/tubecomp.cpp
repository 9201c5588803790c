#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tubecomp/errors.hpp"
#include "tubecomp/expression.hpp"
#include "tubecomp/scenario.hpp"

using namespace tubecomp;

namespace {

// Comma-separated arithmetic list such as "0.3, pi/2".
std::vector<double> parse_list(const std::string& text, const std::string& what) {
  if (text.empty()) return {};
  try {
    ExpressionList list = ExpressionList::parse(text, 0);
    std::vector<double> out(list.count());
    list.evaluate(static_cast<const double*>(nullptr), out.data());
    return out;
  } catch (const ParseError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

struct Common {
  std::string ambient = "euclidean(3)";
  std::string chart;
  std::string name = "cli";
  std::string out;
  std::vector<int> counts;
  int circle_nodes = 256;
  int radial_nodes = 16;
  int polar_nodes = 32;
  double tol_report = 1e-7;
  double eq_tol = 1e-6;
  double eps_class = 1e-8;
  long long seed = -1;
  int codimension = 0;
  bool serial = false;
  bool quiet = false;
};

struct CheckFlags {
  std::string point, direction, x, xi, y, kappa, radii;
  std::vector<std::string> u;
  int l = 1;
  double delta = 0.0;
  int random = 0;
  double r_max = 0.5;
  std::string grid = "log";
  double upper = 0.0;
  int nodes = 64;
  double t_max = 10.0;
  std::string model = "principal";
  std::string mean_pairing;
  double r0 = 0.5;
  long samples = 1000000;
  double fd_step = 1e-4;
  double rel_tol = 1e-5;
  double bound_scale = 1.0;
};

void add_common(CLI::App* app, Common& c, bool chart) {
  app->add_option("--ambient", c.ambient, "euclidean(k), spaceform(k,delta) or cone(k,a)")->capture_default_str();
  if (chart) app->add_option("--chart", c.chart, "built-in chart, e.g. sphere(2,1)")->required();
  app->add_option("--name", c.name, "scenario name used in report file names")->capture_default_str();
  app->add_option("--out", c.out, "directory for JSON/CSV reports and the timing sidecar");
  app->add_option("--counts", c.counts, "per-axis quadrature node counts")->delimiter(',');
  app->add_option("--circle-nodes", c.circle_nodes, "normal circle rule size")->capture_default_str();
  app->add_option("--radial-nodes", c.radial_nodes, "radial rule size of the tube bound")->capture_default_str();
  app->add_option("--polar-nodes", c.polar_nodes, "polar rule size of the tube bound")->capture_default_str();
  app->add_option("--tol-report", c.tol_report, "violation tolerance")->capture_default_str();
  app->add_option("--eq-tol", c.eq_tol, "equality tolerance")->capture_default_str();
  app->add_option("--eps-class", c.eps_class, "normal classification tolerance")->capture_default_str();
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--codimension", c.codimension, "expected codimension m; checked against n + m = k");
  app->add_flag("--serial", c.serial, "run kernels on one thread");
  app->add_flag("--quiet", c.quiet, "print only the status line");
}

ScenarioConfig base_config(const Common& c) {
  ScenarioConfig cfg;
  cfg.name = c.name;
  cfg.ambient = AmbientSpec::parse(c.ambient);
  if (!c.chart.empty()) cfg.chart = ChartSpec::parse(c.chart);
  if (c.codimension > 0) cfg.codimension = c.codimension;
  cfg.counts = c.counts;
  cfg.sphere.circle_nodes = c.circle_nodes;
  cfg.radial_nodes = c.radial_nodes;
  cfg.polar_nodes = c.polar_nodes;
  cfg.tolerances = Tolerances{c.tol_report, c.eq_tol, c.eps_class};
  if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
  cfg.output_dir = c.out;
  return cfg;
}

CheckConfig build_check(const std::string& type, const CheckFlags& f) {
  CheckConfig c;
  c.type = type;
  c.point = parse_list(f.point, "--point");
  c.direction = parse_list(f.direction, "--direction");
  c.l = f.l;
  c.delta = f.delta;
  c.x = parse_list(f.x, "--x");
  if (f.xi == "outward" || f.xi == "inward") {
    c.xi_name = f.xi;
  } else {
    c.xi = parse_list(f.xi, "--xi");
  }
  c.y = parse_list(f.y, "--y");
  c.u = f.u;
  c.random_samples = f.random;
  c.r_max = f.r_max;
  c.grid = GridSpec{f.grid, f.upper, f.nodes};
  c.model.mode = f.model;
  c.model.delta = f.delta;
  if (!f.kappa.empty()) c.model.kappa = parse_list(f.kappa, "--kappa");
  if (!f.mean_pairing.empty()) c.model.mean_pairing = parse_list(f.mean_pairing, "--mean-pairing").at(0);
  c.t_max = f.t_max;
  c.r0 = f.r0;
  c.n_samples = f.samples;
  c.radii = parse_list(f.radii, "--radii");
  c.fd_step = f.fd_step;
  c.rel_tol = f.rel_tol;
  c.bound_scale = f.bound_scale;
  return c;
}

int execute(const ScenarioConfig& cfg, bool serial, bool quiet) {
  const RunReport report = run(cfg, serial ? Execution::Serial : Execution::Parallel);
  if (!cfg.output_dir.empty()) write_reports(report, cfg.output_dir);
  if (!quiet) std::cout << report.to_json().dump(2) << "\n";
  for (const CheckResult& r : report.checks) {
    std::cerr << cfg.name << " " << r.type << ": " << status_name(r.status);
    if (r.status == RunStatus::Error) std::cerr << " (" << r.error_kind << ": " << r.error_message << ")";
    std::cerr << "\n";
  }
  std::cerr << "status: " << status_name(report.status) << "\n";
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical comparison geometry of tubes around submanifolds"};
  app.require_subcommand(1);
  Common common;
  CheckFlags flags;
  std::string selector;

  auto with_rays = [&](CLI::App* sub) {
    sub->add_option("--x", flags.x, "chart parameter point, comma separated");
    sub->add_option("--xi", flags.xi, "unit normal in frame coefficients, or outward / inward");
    sub->add_option("--random", flags.random, "number of seeded random rays or points");
    sub->add_option("--t-max", flags.t_max, "search window and grid cap")->capture_default_str();
  };
  auto with_grid = [&](CLI::App* sub) {
    sub->add_option("--grid", flags.grid, "log or uniform")->capture_default_str();
    sub->add_option("--upper", flags.upper, "grid upper end; 0 = automatic")->capture_default_str();
    sub->add_option("--nodes", flags.nodes, "grid nodes")->capture_default_str();
    sub->add_option("--delta", flags.delta, "model curvature")->capture_default_str();
  };

  CLI::App* verify = app.add_subcommand("verify", "integral inequality with its sharp bound");
  verify->add_option("functional", selector, "chern-lashof, willmore or fenchel")
      ->required()
      ->check(CLI::IsMember({"chern-lashof", "willmore", "fenchel"}));
  verify->add_option("--bound-scale", flags.bound_scale, "multiply the sharp bound (testing aid)");
  add_common(verify, common, true);

  CLI::App* compare = app.add_subcommand("compare", "comparison check along a ray");
  compare->add_option("kind", selector, "hessian, thm17, wedge, thm38 or thm57")
      ->required()
      ->check(CLI::IsMember({"hessian", "thm17", "wedge", "thm38", "thm57"}));
  compare->add_option("--chart", common.chart, "built-in chart (thm38, thm57)");
  compare->add_option("--point", flags.point, "ambient base point (hessian, thm17, wedge)");
  compare->add_option("--direction", flags.direction, "ambient direction (hessian, thm17, wedge)");
  compare->add_option("--l", flags.l, "number of orthonormal directions")->capture_default_str();
  compare->add_option("--model", flags.model, "principal or umbilic")->capture_default_str();
  compare->add_option("--kappa", flags.kappa, "model principal curvatures; default = own");
  compare->add_option("--mean-pairing", flags.mean_pairing, "model <H, xi>; default = own");
  with_rays(compare);
  with_grid(compare);
  add_common(compare, common, false);

  CLI::App* tube = app.add_subcommand("tube", "tube volume bound or Monte Carlo estimate");
  tube->add_option("mode", selector, "bound or mc")->required()->check(CLI::IsMember({"bound", "mc"}));
  tube->add_option("--r0", flags.r0, "tube radius")->capture_default_str();
  tube->add_option("--samples", flags.samples, "Monte Carlo samples")->capture_default_str();
  add_common(tube, common, true);

  CLI::App* jac = app.add_subcommand("jacobian", "Jacobian of the normal exponential map");
  jac->add_option("mode", selector, "q, fd or both")->required()->check(CLI::IsMember({"q", "fd", "both"}));
  jac->add_option("--x", flags.x, "chart parameter point");
  jac->add_option("--y", flags.y, "normal vector in frame coefficients");
  jac->add_option("--u", flags.u, "scalar field expressions in x1..xn, cycled over samples");
  jac->add_option("--random", flags.random, "number of seeded random normal points");
  jac->add_option("--r-max", flags.r_max, "normal length bound of random points")->capture_default_str();
  jac->add_option("--fd-step", flags.fd_step, "finite-difference step")->capture_default_str();
  jac->add_option("--rel-tol", flags.rel_tol, "agreement threshold for 'both'")->capture_default_str();
  add_common(jac, common, true);

  CLI::App* focal = app.add_subcommand("focal", "focal radius and modified cut distance");
  with_rays(focal);
  add_common(focal, common, true);

  CLI::App* avr = app.add_subcommand("avr", "asymptotic volume ratio and ball-volume ratios");
  avr->add_option("--radii", flags.radii, "increasing radii, comma separated")->required();
  add_common(avr, common, false);

  CLI::App* metric = app.add_subcommand("metric", "equality-case pullback metric against finite differences");
  metric->add_option("mode", selector, "chern-lashof or willmore")
      ->required()
      ->check(CLI::IsMember({"chern-lashof", "willmore"}));
  metric->add_option("--x", flags.x, "chart parameter point");
  metric->add_option("--y", flags.y, "normal vector in frame coefficients");
  metric->add_option("--random", flags.random, "number of seeded random normal points");
  metric->add_option("--r-max", flags.r_max, "normal length bound of random points")->capture_default_str();
  metric->add_option("--rel-tol", flags.rel_tol, "agreement threshold")->capture_default_str();
  add_common(metric, common, true);

  std::string config_path;
  bool run_serial = false;
  bool run_quiet = false;
  std::string out_override;
  CLI::App* run_cmd = app.add_subcommand("run", "run a JSON scenario config");
  run_cmd->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_override, "override the output directory");
  run_cmd->add_flag("--serial", run_serial, "run kernels on one thread");
  run_cmd->add_flag("--quiet", run_quiet, "print only the status line");

  std::string scenario_name;
  CLI::App* scen = app.add_subcommand("scenario", "run a golden scenario by name");
  scen->add_option("name", scenario_name, "scenario name (see list)")->required();
  scen->add_option("--out", out_override, "output directory");
  scen->add_flag("--serial", run_serial, "run kernels on one thread");
  scen->add_flag("--quiet", run_quiet, "print only the status line");

  bool list_json = false;
  CLI::App* list = app.add_subcommand("list", "built-in charts, ambients and golden scenarios");
  list->add_flag("--json", list_json, "print the registry as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      if (list_json) {
        std::cout << registry_json().dump(2) << "\n";
      } else {
        std::cout << registry_text();
      }
      return 0;
    }
    if (run_cmd->parsed()) {
      std::ifstream in(config_path);
      Json doc;
      try {
        doc = Json::parse(in);
      } catch (const Json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      ScenarioConfig cfg = config_from_json(doc);
      if (!out_override.empty()) cfg.output_dir = out_override;
      return execute(cfg, run_serial, run_quiet);
    }
    if (scen->parsed()) {
      ScenarioConfig cfg = golden_scenario(scenario_name);
      cfg.output_dir = out_override;
      return execute(cfg, run_serial, run_quiet);
    }

    ScenarioConfig cfg = base_config(common);
    std::string type;
    if (verify->parsed()) type = selector;
    if (compare->parsed()) type = selector;
    if (tube->parsed()) type = "tube-" + selector;
    if (jac->parsed()) type = "jacobian-" + selector;
    if (focal->parsed()) type = "focal";
    if (avr->parsed()) type = "avr";
    if (metric->parsed()) type = "equality-metric";
    CheckConfig check = build_check(type, flags);
    if (metric->parsed()) check.equality_mode = selector;
    if ((type == "tube-mc" || check.random_samples > 0) && !cfg.seed) cfg.seed = 1;
    cfg.checks.push_back(check);
    return execute(cfg, common.serial, common.quiet);
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
