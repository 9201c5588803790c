#include <array>
#include <cmath>
#include <random>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tubecomp/errors.hpp"
#include "tubecomp/scenario.hpp"

using namespace tubecomp;

namespace {

struct Command {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI with stderr discarded and captures stdout.
Command cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(TUBECOMP_CLI) + " " + args + " 2>/dev/null";
  Command c;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) c.out.append(buf.data(), n);
  const int status = pclose(pipe);
  c.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tubecomp_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("descriptor parsing") {
    AmbientSpec a = AmbientSpec::parse("spaceform(3, 1)");
    CHECK(a.kind == "spaceform");
    CHECK(a.k == 3);
    CHECK(a.delta == 1.0);
    CHECK(AmbientSpec::parse("Euclidean(4)").text() == "euclidean(4)");
    CHECK(AmbientSpec::parse("warped_cone(3,0.8)").text() == "cone(3,0.8)");
    CHECK_THROWS_AS(AmbientSpec::parse("torus(3)"), ConfigError);
    CHECK_THROWS_AS(AmbientSpec::parse("euclidean(3"), ConfigError);
    CHECK_THROWS_AS(AmbientSpec::parse("euclidean(2.5)"), ConfigError);

    ChartSpec c = ChartSpec::parse("small_subsphere(2, 1, pi/4)");
    CHECK(c.builtin == "small_subsphere");
    REQUIRE(c.params.size() == 3);
    CHECK(c.params[2] == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
    CHECK_THROWS_AS(ChartSpec::parse("klein_bottle(1)"), ConfigError);
  }

  TEST_CASE("config round trip through the resolved echo") {
    const Json doc = Json::parse(R"j({
      "schema_version": 1,
      "name": "roundtrip",
      "ambient": "euclidean(3)",
      "chart": {"expression": "2*cos(x1), sin(x1), 0", "axes": [{"lower": 0, "upper": "2*pi", "periodic": true}]},
      "tolerances": {"eq_tol": 1e-7},
      "seed": 5,
      "checks": [{"type": "fenchel"}, {"type": "tube-mc", "r0": 0.1, "n_samples": 1000}]
    })j");
    ScenarioConfig c = config_from_json(doc);
    CHECK(c.chart->axes[0].upper == doctest::Approx(2 * std::numbers::pi).epsilon(1e-15));
    CHECK(c.tolerances.eq_tol == 1e-7);
    CHECK(c.tolerances.tol_report == 1e-7);
    const Json echo = config_to_json(c);
    CHECK(echo["checks"][1]["n_samples"] == 1000);
    CHECK(echo["quadrature"]["counts"] == "default");
    ScenarioConfig again = config_from_json(echo);
    CHECK(config_to_json(again) == echo);
  }

  TEST_CASE("schema violations are configuration errors") {
    auto parse = [](const std::string& text) { return config_from_json(Json::parse(text)); };
    const std::string ok_checks = R"j("checks": [{"type": "chern-lashof"}])j";
    CHECK_THROWS_AS(parse(R"j({"ambient": "euclidean(3)", "chart": "sphere(2,1)", )j" + ok_checks + "}"), ConfigError);
    CHECK_THROWS_AS(parse(R"j({"schema_version": 2, "ambient": "euclidean(3)", "chart": "sphere(2,1)", )j" + ok_checks +
                          "}"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"j({"schema_version": 1, "ambient": "euclidean(3)", "chart": "sphere(2,1)", "colour": 1, )j" +
                          ok_checks + "}"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"j({"schema_version": 1, "ambient": "euclidean(3)", "chart": "sphere(2,1)",
                              "tolerances": {"tol_report": 0}, )j" +
                          ok_checks + "}"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"j({"schema_version": 1, "ambient": "euclidean(3)", "chart": "sphere(2,1)",
                              "checks": [{"type": "tube-mc"}]})j"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"j({"schema_version": 1, "ambient": "euclidean(3)", "checks": [{"type": "willmore"}]})j"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"j({"schema_version": 1, "ambient": "euclidean(3)", "chart": "sphere(2,1)",
                              "checks": [{"type": "volume"}]})j"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"j({"schema_version": 1, "ambient": "euclidean(3)", "chart": "sphere(2,1)",
                              "checks": [{"type": "thm57", "model": {"mode": "umbilic", "kappa": [1, 1]}}]})j"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"j({"schema_version": 1, "ambient": "euclidean(3)", "chart": "sphere(2,1)",
                              "checks": [{"type": "avr", "radii": [2, 1]}]})j"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"j({"schema_version": 1, "ambient": "euclidean(3)", "chart": "sphere(2,1)",
                              "checks": [{"type": "chern-lashof", "l": "two"}]})j"),
                    ConfigError);
  }

  TEST_CASE("dimension mismatch names both dimensions") {
    ScenarioConfig c = golden_scenario("cl-sphere-equality");
    c.ambient = AmbientSpec::parse("euclidean(4)");
    c.codimension = 1;
    try {
      validate(c);
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("n + m = 3") != std::string::npos);
      CHECK(msg.find("k = 4") != std::string::npos);
    }
  }

  TEST_CASE("run statuses") {
    CHECK(run(golden_scenario("cl-sphere-equality")).exit_code() == 0);
    CHECK(run(golden_scenario("pseudo-forced-violation")).exit_code() == 1);
    RunReport broken = run(golden_scenario("pseudo-hypothesis-break"));
    CHECK(broken.exit_code() == 2);
    CHECK(broken.checks[0].error_kind == "HypothesisError");
  }

  TEST_CASE("inequality status is a violation exactly when the margin is below tolerance") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> scale(0.999, 1.001);
    std::uniform_real_distribution<double> log_tol(-8.0, -3.0);
    for (int trial = 0; trial < 25; ++trial) {
      ScenarioConfig c = golden_scenario("cl-torus-strict");
      c.chart = ChartSpec::parse("sphere(2,1)");
      c.checks[0].bound_scale = scale(rng);
      c.tolerances.tol_report = std::pow(10.0, log_tol(rng));
      const CheckResult r = run(c).checks[0];
      const double margin = r.report["margin"].get<double>();
      const double bound = r.report["bound"].get<double>();
      CHECK((r.status == RunStatus::Violation) == (margin < -c.tolerances.tol_report * bound));
      CHECK(r.status != RunStatus::Error);
    }
  }

  TEST_CASE("hyperbolic geodesic sphere: inward focal radius and far comparison rays") {
    const Json doc = Json::parse(R"j({
      "schema_version": 1, "name": "hyperbolic", "ambient": "spaceform(3,-1)", "chart": "small_subsphere(2,1,0.8)",
      "seed": 3,
      "checks": [{"type": "focal", "xi": "inward"},
                 {"type": "thm57", "random_samples": 8, "model": {"mode": "umbilic", "delta": -1}},
                 {"type": "thm57", "xi": "outward", "model": {"mode": "umbilic", "delta": 0}}]
    })j");
    const RunReport r = run(config_from_json(doc));
    REQUIRE(r.checks.size() == 3);
    CHECK(r.checks[0].status == RunStatus::Pass);
    CHECK(r.checks[0].report["rays"][0]["rho"].get<double>() == doctest::Approx(0.8).epsilon(1e-8));
    CHECK(r.checks[1].status == RunStatus::Pass);
    CHECK(r.checks[2].status == RunStatus::Error);
    CHECK(r.checks[2].error_kind == "HypothesisError");
  }

  TEST_CASE("serial and parallel reports are identical") {
    ScenarioConfig c = golden_scenario("tube-circle");
    c.checks[1].n_samples = 20000;
    const std::string serial = run(c, Execution::Serial).to_json().dump();
    const std::string parallel = run(c, Execution::Parallel).to_json().dump();
    CHECK(serial == parallel);
  }

  TEST_CASE("report files") {
    const auto dir = scratch_dir("files");
    ScenarioConfig c = golden_scenario("tube-circle");
    c.checks[1].n_samples = 5000;
    const auto written = write_reports(run(c), dir.string());
    for (const char* f : {"tube-circle_tube-bound.json", "tube-circle_tube-bound.csv", "tube-circle_tube-mc.json",
                          "tube-circle_tube-mc.csv", "tube-circle_run.json", "tube-circle_timing.json"}) {
      CHECK(std::filesystem::exists(dir / f));
    }
    const std::string csv = read_file(dir / "tube-circle_tube-mc.csv");
    CHECK(csv.rfind("r0,estimate,standard_error,bound_integral,samples,accepted,seed\r\n", 0) == 0);
    const Json run_json = Json::parse(read_file(dir / "tube-circle_run.json"));
    CHECK(run_json["status"] == "pass");
    CHECK_FALSE(run_json.dump().find("seconds") != std::string::npos);
  }

  TEST_CASE("comparison csv columns") {
    ScenarioConfig c = golden_scenario("thm17-spaceform-monotone");
    RunReport r = run(c);
    const std::string& csv = r.checks[0].csv;
    CHECK(csv.rfind("t,lhs,rhs,ratio,margin,flag\r\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);
  }

  TEST_CASE("cli exit codes") {
    CHECK(cli("verify chern-lashof --chart \"sphere(2,1)\" --ambient \"euclidean(3)\" --quiet").exit_code == 0);
    const Command w = cli("verify willmore --chart \"cone_cross_section(3,0.8,1)\" --ambient \"cone(3,0.8)\"");
    CHECK(w.exit_code == 0);
    const Json report = Json::parse(w.out);
    CHECK(report["checks"][0]["report"]["equality"] == true);
    CHECK(report["checks"][0]["report"]["integral"].get<double>() ==
          doctest::Approx(0.64 * 4 * std::numbers::pi).epsilon(1e-9));
    CHECK(cli("verify willmore --chart \"sphere(2,1)\" --ambient \"euclidean(4)\" --codimension 1").exit_code == 2);
    CHECK(cli("verify fenchel --chart \"circle3(1)\" --ambient \"euclidean(4)\"").exit_code == 2);
    CHECK(cli("scenario pseudo-hypothesis-break --quiet").exit_code == 2);
    CHECK(cli("scenario pseudo-forced-violation --quiet").exit_code == 1);
    CHECK(cli("verify chern-lashof --chart \"sphere(2,1)\" --bound-scale 1.01 --quiet").exit_code == 1);
    CHECK(cli("verify bogus --chart \"sphere(2,1)\"").exit_code == 2);
    CHECK(cli("verify chern-lashof --chart \"sphere(2,1)\" --tol-report -1").exit_code == 2);
    CHECK(cli("scenario no-such-scenario").exit_code == 2);
    CHECK(cli("compare thm57 --chart \"sphere(2,1)\" --xi outward --kappa \"-5,-5\" --quiet").exit_code == 2);
  }

  TEST_CASE("cli subcommands") {
    CHECK(cli("compare hessian --ambient \"spaceform(4,1)\" --l 3 --delta 1 --quiet").exit_code == 0);
    CHECK(cli("compare thm17 --ambient \"spaceform(3,1)\" --l 2 --grid uniform --upper 2.9 --quiet").exit_code == 0);
    CHECK(cli("compare wedge --ambient \"cone(3,0.5)\" --l 2 --t-max 3 --quiet").exit_code == 0);
    CHECK(cli("compare thm38 --chart \"sphere(2,1)\" --xi inward --quiet").exit_code == 0);
    CHECK(cli("tube bound --chart \"sphere(2,1)\" --r0 0.5 --quiet").exit_code == 0);
    CHECK(cli("tube mc --chart \"circle3(1)\" --r0 0.25 --samples 20000 --quiet").exit_code == 0);
    CHECK(cli("jacobian both --chart \"torus_rev(2,1)\" --random 4 --seed 3 --u \"0.03*sin(x1)\" --quiet").exit_code == 0);
    CHECK(cli("focal --chart \"great_subsphere(2,1)\" --ambient \"spaceform(3,1)\" --quiet").exit_code == 0);
    CHECK(cli("avr --ambient \"cone(3,0.5)\" --radii \"1,2,4\" --quiet").exit_code == 0);
    CHECK(cli("metric willmore --chart \"sphere(2,1)\" --random 3 --quiet").exit_code == 0);

    const Command focal = cli("focal --chart \"sphere(2,1)\" --xi inward");
    const Json f = Json::parse(focal.out);
    CHECK(f["checks"][0]["report"]["rays"][0]["rho"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("cli run writes reports named by scenario and check") {
    const auto dir = scratch_dir("run");
    {
      std::ofstream cfg(dir / "config.json");
      cfg << R"j({"schema_version": 1, "name": "demo", "ambient": "euclidean(3)", "chart": "torus_rev(2,1)",
                 "checks": [{"type": "chern-lashof"}, {"type": "willmore"}]})j";
    }
    const Command c = cli("run " + (dir / "config.json").string() + " --out " + (dir / "out").string() + " --quiet");
    CHECK(c.exit_code == 0);
    CHECK(std::filesystem::exists(dir / "out" / "demo_chern-lashof.json"));
    CHECK(std::filesystem::exists(dir / "out" / "demo_willmore.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "demo_timing.json"));
    {
      std::ofstream bad(dir / "bad.json");
      bad << "{not json";
    }
    CHECK(cli("run " + (dir / "bad.json").string()).exit_code == 2);
  }

  TEST_CASE("cli reports are byte-identical across thread counts") {
    const std::string args = "tube mc --chart \"torus_rev(2,1)\" --r0 0.3 --samples 30000 --seed 7";
    const Command one = cli(args, "TUBECOMP_THREADS=1");
    const Command three = cli(args, "TUBECOMP_THREADS=3");
    REQUIRE(one.exit_code == 0);
    CHECK(one.out == three.out);
    CHECK(one.out == cli(args, "TUBECOMP_THREADS=1").out);
  }

  TEST_CASE("list") {
    const Command text = cli("list");
    CHECK(text.exit_code == 0);
    for (const char* s : {"sphere", "torus_rev", "cone_cross_section", "cl-sphere-equality", "wc-cone-equality",
                          "tube-sphere-weyl"}) {
      CHECK(text.out.find(s) != std::string::npos);
    }
    const Command js = cli("list --json");
    CHECK(js.exit_code == 0);
    const Json reg = Json::parse(js.out);
    CHECK(reg == registry_json());
    std::set<int> criteria;
    for (const Json& s : reg["scenarios"]) criteria.insert(s["criterion"].get<int>());
    for (int c = 1; c <= 12; ++c) CHECK(criteria.count(c) == 1);
  }
}
