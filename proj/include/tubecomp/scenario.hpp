#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tubecomp/report.hpp"

namespace tubecomp {

inline constexpr int kSchemaVersion = 1;

// Ambient text form: euclidean(k), spaceform(k, delta), cone(k, a).
struct AmbientSpec {
  std::string kind = "euclidean";
  int k = 3;
  double delta = 0.0;
  double a = 1.0;

  static AmbientSpec parse(const std::string& text);
  Ambient build() const;
  std::string text() const;
};

// A built-in chart with parameters, or an expression chart on a parameter box.
struct ChartSpec {
  std::string builtin;
  std::vector<double> params;
  std::string expression;
  std::vector<Axis> axes;
  std::vector<int> nodes;  // expression charts only; empty = chart default

  // "name(p1, p2, ...)"; parameters may be arithmetic expressions such as pi/4.
  static ChartSpec parse(const std::string& text);
  ImmersionChart build(const Ambient& ambient) const;
  std::string text() const;
};

struct GridSpec {
  std::string kind = "log";  // log or uniform
  double upper = 0.0;        // 0 = automatic: the modified cut distance of the ray, capped at t_max
  int nodes = 64;
};

struct ModelSpec {
  std::string mode = "principal";  // principal or umbilic
  double delta = 0.0;
  std::optional<std::vector<double>> kappa;  // empty = the submanifold's own principal curvatures
  std::optional<double> mean_pairing;        // empty = the submanifold's own <H, xi>
};

// Check types: chern-lashof, willmore, fenchel, hessian, thm17, wedge, thm38, thm57, tube-bound,
// tube-mc, jacobian-q, jacobian-fd, jacobian-both, focal, avr, equality-metric.
struct CheckConfig {
  std::string type;

  // Ambient ray checks: base point and direction in ambient coordinates (empty = defaults).
  std::vector<double> point;
  std::vector<double> direction;
  int l = 1;
  double delta = 0.0;

  // Normal rays and normal points: parameter x, unit normal xi or normal vector y in frame
  // coefficients. xi may also be given by the names "outward" or "inward".
  std::vector<double> x;
  std::vector<double> xi;
  std::string xi_name;
  std::vector<double> y;
  int random_samples = 0;  // > 0 replaces x and xi (or y) by seeded random draws
  double r_max = 0.5;      // normal length bound of random normal points
  std::vector<std::string> u;  // scalar fields cycled over samples; "" = zero field

  GridSpec grid;
  ModelSpec model;
  double t_max = 10.0;

  double r0 = 0.5;
  long n_samples = 1000000;

  std::vector<double> radii;

  std::string equality_mode = "chern-lashof";  // equality-metric: chern-lashof or willmore
  double fd_step = 1e-4;
  double rel_tol = 1e-5;   // jacobian-both and equality-metric agreement threshold
  double bound_scale = 1.0;  // scales the sharp bound of inequality checks
};

struct Tolerances {
  double tol_report = 1e-7;
  double eq_tol = 1e-6;
  double eps_class = 1e-8;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name = "scenario";
  std::string description;
  AmbientSpec ambient;
  std::optional<ChartSpec> chart;
  std::optional<int> codimension;  // checked against the chart when given
  std::vector<int> counts;         // Sigma rule per-axis node counts; empty = chart default
  NormalSphereRule sphere;
  int radial_nodes = 16;
  int polar_nodes = 32;
  Tolerances tolerances;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::vector<CheckConfig> checks;
};

// Parses and validates a config document; throws ConfigError on schema violations.
ScenarioConfig config_from_json(const Json& doc);
// Every field with defaults resolved.
Json config_to_json(const ScenarioConfig& config);
// Schema-level checks (tolerances, seeds, check types) and chart/ambient dimension agreement.
void validate(const ScenarioConfig& config);

enum class RunStatus { Pass, Violation, Error };
std::string status_name(RunStatus s);

struct CheckResult {
  std::string type;
  RunStatus status = RunStatus::Pass;
  Json report;
  std::string csv;
  std::string error_kind;
  std::string error_message;
  double seconds = 0.0;
};

struct RunReport {
  Json config;
  std::string scenario;
  std::vector<CheckResult> checks;
  RunStatus status = RunStatus::Pass;

  // Deterministic report: config echo, per-check results and overall status; no timings.
  Json to_json() const;
  // Wall-clock seconds per check.
  Json timing_json() const;
  int exit_code() const;
};

// Runs the checks in declaration order. Configuration errors (including chart construction)
// propagate; errors inside a check are recorded in its result.
RunReport run(const ScenarioConfig& config, Execution exec = Execution::Parallel);

// Writes {scenario}_{check}.json and .csv per check, {scenario}_run.json and the timing sidecar
// {scenario}_timing.json. Returns the written paths.
std::vector<std::string> write_reports(const RunReport& report, const std::string& directory);

struct GoldenScenario {
  std::string name;
  int criterion;  // acceptance criterion number
  ScenarioConfig config;
};

// The golden scenario suite; each acceptance criterion maps to one or more named scenarios.
std::vector<GoldenScenario> golden_scenarios();
// Throws ConfigError for unknown names.
ScenarioConfig golden_scenario(const std::string& name);

// Built-in charts, ambients, check types and golden scenarios.
Json registry_json();
std::string registry_text();

}  // namespace tubecomp
