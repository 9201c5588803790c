#include "tubecomp/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "tubecomp/errors.hpp"
#include "tubecomp/expression.hpp"
#include "tubecomp/text.hpp"

namespace tubecomp {

namespace {

constexpr double kPi = std::numbers::pi;

const std::vector<std::string>& check_types() {
  static const std::vector<std::string> types = {
      "chern-lashof", "willmore",   "fenchel",       "hessian",       "thm17", "wedge",
      "thm38",        "thm57",      "tube-bound",    "tube-mc",       "jacobian-q",
      "jacobian-fd",  "jacobian-both", "focal",      "avr",           "equality-metric"};
  return types;
}

bool is_inequality(const std::string& t) { return t == "chern-lashof" || t == "willmore" || t == "fenchel"; }
bool is_ambient_ray(const std::string& t) { return t == "hessian" || t == "thm17" || t == "wedge"; }
bool is_normal_ray(const std::string& t) { return t == "thm38" || t == "thm57" || t == "focal"; }
bool is_normal_point(const std::string& t) { return t.rfind("jacobian-", 0) == 0 || t == "equality-metric"; }
bool needs_chart(const std::string& t) { return !is_ambient_ray(t) && t != "avr"; }

// Arithmetic text such as "2*pi" or "0.5".
std::vector<double> evaluate_list(const std::string& text, const std::string& what) {
  try {
    ExpressionList list = ExpressionList::parse(text, 0);
    std::vector<double> out(list.count());
    list.evaluate(static_cast<const double*>(nullptr), out.data());
    return out;
  } catch (const ParseError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

double evaluate_scalar(const std::string& text, const std::string& what) {
  std::vector<double> v = evaluate_list(text, what);
  if (v.size() != 1) throw ConfigError(what + " must be a single number");
  return v[0];
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

// "name(a, b)" -> ("name", [a, b]); a bare name has no parameters.
std::pair<std::string, std::vector<double>> parse_call(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  if (open == std::string::npos) return {t, {}};
  if (t.back() != ')') throw ConfigError(what + " '" + text + "' is missing ')'");
  const std::string name = trim(t.substr(0, open));
  const std::string body = trim(t.substr(open + 1, t.size() - open - 2));
  if (name.empty()) throw ConfigError(what + " '" + text + "' has no name");
  if (body.empty()) return {name, {}};
  return {name, evaluate_list(body, what + " '" + text + "'")};
}

std::string call_text(const std::string& name, const std::vector<double>& params) {
  std::string s = name + "(";
  for (std::size_t i = 0; i < params.size(); ++i) s += (i ? "," : "") + format_number(params[i]);
  return s + ")";
}

// Reads one JSON object and rejects keys that were never consumed.
class Reader {
 public:
  Reader(const Json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }
  const Json& get(const std::string& key) {
    used_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return to_number(get(key), where_ + "." + key);
  }
  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const double v = to_number(get(key), where_ + "." + key);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError(where_ + "." + key + " must be an integer");
    return static_cast<int>(v);
  }
  long long big_integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const double v = to_number(get(key), where_ + "." + key);
    if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError(where_ + "." + key + " must be an integer");
    return static_cast<long long>(v);
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& j = get(key);
    if (!j.is_string()) throw ConfigError(where_ + "." + key + " must be a string");
    return j.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const Json& j = get(key);
    if (j.is_string() && j == "default") return {};
    if (j.is_string()) return evaluate_list(j.get<std::string>(), where_ + "." + key);
    if (!j.is_array()) throw ConfigError(where_ + "." + key + " must be an array");
    std::vector<double> out;
    for (const Json& e : j) out.push_back(to_number(e, where_ + "." + key));
    return out;
  }
  std::vector<int> integers(const std::string& key) {
    std::vector<int> out;
    for (double v : numbers(key)) {
      if (v != std::floor(v)) throw ConfigError(where_ + "." + key + " must hold integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!used_.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where_);
    }
  }

  static double to_number(const Json& j, const std::string& what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      if (s == "inf") return std::numeric_limits<double>::infinity();
      return evaluate_scalar(s, what);
    }
    throw ConfigError(what + " must be a number or an arithmetic expression");
  }

 private:
  const Json& obj_;
  std::string where_;
  std::set<std::string> used_;
};

AmbientSpec ambient_from_json(const Json& j) {
  if (j.is_string()) return AmbientSpec::parse(j.get<std::string>());
  Reader r(j, "ambient");
  AmbientSpec a;
  a.kind = r.string("kind", a.kind);
  a.k = r.integer("k", a.k);
  a.delta = r.number("delta", a.delta);
  a.a = r.number("a", a.a);
  r.finish();
  return AmbientSpec::parse(a.text());
}

ChartSpec chart_from_json(const Json& j) {
  if (j.is_string()) return ChartSpec::parse(j.get<std::string>());
  Reader r(j, "chart");
  ChartSpec c;
  if (r.has("builtin")) {
    c.builtin = r.string("builtin", "");
    c.params = r.numbers("params");
  } else if (r.has("expression")) {
    c.expression = r.string("expression", "");
    if (!r.has("axes")) throw ConfigError("expression chart needs 'axes'");
    const Json& axes = r.get("axes");
    if (!axes.is_array() || axes.empty()) throw ConfigError("chart.axes must be a non-empty array");
    for (std::size_t i = 0; i < axes.size(); ++i) {
      Reader ar(axes[i], "chart.axes[" + std::to_string(i) + "]");
      Axis a;
      a.lower = ar.number("lower", 0.0);
      a.upper = ar.number("upper", 1.0);
      a.periodic = ar.has("periodic") && ar.get("periodic").get<bool>();
      ar.finish();
      if (!(a.upper > a.lower)) throw ConfigError("chart axis needs upper > lower");
      c.axes.push_back(a);
    }
    c.nodes = r.integers("nodes");
  } else {
    throw ConfigError("chart needs 'builtin' or 'expression'");
  }
  r.finish();
  return c;
}

CheckConfig check_from_json(const Json& j, std::size_t index) {
  const std::string where = "checks[" + std::to_string(index) + "]";
  Reader r(j, where);
  CheckConfig c;
  c.type = r.string("type", "");
  c.point = r.numbers("point");
  c.direction = r.numbers("direction");
  c.l = r.integer("l", c.l);
  c.delta = r.number("delta", c.delta);
  c.x = r.numbers("x");
  if (r.has("xi")) {
    const Json& xi = r.get("xi");
    if (xi.is_string() && (xi == "outward" || xi == "inward")) {
      c.xi_name = xi.get<std::string>();
    } else {
      c.xi = r.numbers("xi");
    }
  }
  c.y = r.numbers("y");
  c.random_samples = r.integer("random_samples", c.random_samples);
  c.r_max = r.number("r_max", c.r_max);
  if (r.has("u")) {
    const Json& u = r.get("u");
    if (u.is_string()) {
      c.u = {u.get<std::string>()};
    } else if (u.is_array()) {
      for (const Json& e : u) {
        if (!e.is_string()) throw ConfigError(where + ".u must hold strings");
        c.u.push_back(e.get<std::string>());
      }
    } else {
      throw ConfigError(where + ".u must be a string or an array of strings");
    }
  }
  if (r.has("grid")) {
    Reader g(r.get("grid"), where + ".grid");
    c.grid.kind = g.string("kind", c.grid.kind);
    if (g.has("upper")) {
      const Json& up = g.get("upper");
      c.grid.upper = up.is_string() && up == "auto" ? 0.0 : Reader::to_number(up, where + ".grid.upper");
    }
    c.grid.nodes = g.integer("nodes", c.grid.nodes);
    g.finish();
  }
  if (r.has("model")) {
    Reader m(r.get("model"), where + ".model");
    c.model.mode = m.string("mode", c.model.mode);
    c.model.delta = m.number("delta", c.model.delta);
    if (m.has("kappa")) {
      const Json& k = m.get("kappa");
      if (!(k.is_string() && k == "self")) c.model.kappa = m.numbers("kappa");
    }
    if (m.has("mean_pairing")) {
      const Json& k = m.get("mean_pairing");
      if (!(k.is_string() && k == "self")) c.model.mean_pairing = m.number("mean_pairing", 0.0);
    }
    m.finish();
  }
  c.t_max = r.number("t_max", c.t_max);
  c.r0 = r.number("r0", c.r0);
  c.n_samples = static_cast<long>(r.big_integer("n_samples", c.n_samples));
  c.radii = r.numbers("radii");
  c.equality_mode = r.string("equality_mode", c.equality_mode);
  c.fd_step = r.number("fd_step", c.fd_step);
  c.rel_tol = r.number("rel_tol", c.rel_tol);
  c.bound_scale = r.number("bound_scale", c.bound_scale);
  r.finish();
  return c;
}

Json numbers_json(const std::vector<double>& v) { return v.empty() ? Json("default") : json_numbers(v); }

Json check_to_json(const CheckConfig& c) {
  Json j;
  j["type"] = c.type;
  const std::string& t = c.type;
  if (is_inequality(t)) j["bound_scale"] = json_number(c.bound_scale);
  if (is_ambient_ray(t)) {
    j["point"] = numbers_json(c.point);
    j["direction"] = numbers_json(c.direction);
    j["l"] = c.l;
    j["delta"] = json_number(c.delta);
  }
  if (is_normal_ray(t) || is_normal_point(t)) {
    j["random_samples"] = c.random_samples;
    if (c.random_samples == 0) j["x"] = numbers_json(c.x);
  }
  if (is_normal_ray(t)) j["xi"] = c.xi_name.empty() ? numbers_json(c.xi) : Json(c.xi_name);
  if (is_normal_point(t)) {
    if (c.random_samples == 0) {
      j["y"] = numbers_json(c.y);
    } else {
      j["r_max"] = json_number(c.r_max);
    }
    j["fd_step"] = json_number(c.fd_step);
    j["rel_tol"] = json_number(c.rel_tol);
  }
  if (t.rfind("jacobian-", 0) == 0) {
    Json u = Json::array();
    for (const std::string& s : c.u) u.push_back(s);
    j["u"] = u;
  }
  if (t == "equality-metric") j["equality_mode"] = c.equality_mode;
  if (is_ambient_ray(t) || t == "thm38" || t == "thm57") {
    Json g;
    g["kind"] = c.grid.kind;
    g["upper"] = c.grid.upper > 0.0 ? json_number(c.grid.upper) : Json("auto");
    g["nodes"] = c.grid.nodes;
    j["grid"] = g;
  }
  if (t == "thm38" || t == "thm57") {
    Json m;
    m["mode"] = c.model.mode;
    m["delta"] = json_number(c.model.delta);
    if (c.model.mode == "principal") m["kappa"] = c.model.kappa ? json_numbers(*c.model.kappa) : Json("self");
    if (c.model.mode == "umbilic") m["mean_pairing"] = c.model.mean_pairing ? json_number(*c.model.mean_pairing) : Json("self");
    j["model"] = m;
  }
  if (is_ambient_ray(t) || is_normal_ray(t)) j["t_max"] = json_number(c.t_max);
  if (t == "tube-bound" || t == "tube-mc") j["r0"] = json_number(c.r0);
  if (t == "tube-mc") j["n_samples"] = c.n_samples;
  if (t == "avr") j["radii"] = json_numbers(c.radii);
  return j;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

AmbientSpec AmbientSpec::parse(const std::string& text) {
  auto [name, p] = parse_call(text, "ambient");
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
  AmbientSpec a;
  auto int_param = [&](double v) {
    require(v == std::floor(v) && v >= 1, "ambient dimension must be a positive integer in '" + text + "'");
    return static_cast<int>(v);
  };
  if (name == "euclidean") {
    require(p.size() == 1, "euclidean takes one parameter (k)");
    a.kind = "euclidean";
    a.k = int_param(p[0]);
  } else if (name == "spaceform" || name == "space_form") {
    require(p.size() == 2, "spaceform takes two parameters (k, delta)");
    a.kind = "spaceform";
    a.k = int_param(p[0]);
    a.delta = p[1];
  } else if (name == "cone" || name == "warped_cone") {
    require(p.size() == 2, "cone takes two parameters (k, a)");
    a.kind = "cone";
    a.k = int_param(p[0]);
    a.a = p[1];
  } else {
    throw ConfigError("unknown ambient '" + text + "' (expected euclidean(k), spaceform(k,delta) or cone(k,a))");
  }
  return a;
}

Ambient AmbientSpec::build() const {
  if (kind == "euclidean") return Ambient::euclidean(k);
  if (kind == "spaceform") return Ambient::space_form(k, delta);
  if (kind == "cone") return Ambient::warped_cone(k, a);
  throw ConfigError("unknown ambient kind '" + kind + "'");
}

std::string AmbientSpec::text() const {
  if (kind == "euclidean") return call_text(kind, {static_cast<double>(k)});
  if (kind == "spaceform") return call_text(kind, {static_cast<double>(k), delta});
  return call_text(kind, {static_cast<double>(k), a});
}

ChartSpec ChartSpec::parse(const std::string& text) {
  auto [name, p] = parse_call(text, "chart");
  const auto names = ImmersionChart::builtin_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError("unknown chart '" + name + "'; expression charts need the JSON form with axes");
  }
  ChartSpec c;
  c.builtin = name;
  c.params = p;
  return c;
}

ImmersionChart ChartSpec::build(const Ambient& ambient) const {
  if (!builtin.empty()) return ImmersionChart::builtin(builtin, params, ambient);
  return ImmersionChart::from_expression(ambient, expression, axes, nodes);
}

std::string ChartSpec::text() const { return builtin.empty() ? expression : call_text(builtin, params); }

namespace {
ScenarioConfig parse_config(const Json& doc);
}  // namespace

ScenarioConfig config_from_json(const Json& doc) {
  try {
    return parse_config(doc);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

namespace {

ScenarioConfig parse_config(const Json& doc) {
  Reader r(doc, "config");
  ScenarioConfig c;
  c.schema_version = r.integer("schema_version", -1);
  require(c.schema_version == kSchemaVersion,
          "schema_version must be " + std::to_string(kSchemaVersion) + ", got " + std::to_string(c.schema_version));
  c.name = r.string("name", c.name);
  c.description = r.string("description", "");
  require(r.has("ambient"), "config needs an 'ambient'");
  c.ambient = ambient_from_json(r.get("ambient"));
  if (r.has("chart")) c.chart = chart_from_json(r.get("chart"));
  if (r.has("codimension")) c.codimension = r.integer("codimension", 0);
  if (r.has("quadrature")) {
    Reader q(r.get("quadrature"), "quadrature");
    c.counts = q.integers("counts");
    c.radial_nodes = q.integer("radial_nodes", c.radial_nodes);
    c.polar_nodes = q.integer("polar_nodes", c.polar_nodes);
    q.finish();
  }
  if (r.has("sphere_rule")) {
    Reader s(r.get("sphere_rule"), "sphere_rule");
    c.sphere.circle_nodes = s.integer("circle_nodes", c.sphere.circle_nodes);
    c.sphere.polar_panels = s.integer("polar_panels", c.sphere.polar_panels);
    c.sphere.relative_tolerance = s.number("relative_tolerance", c.sphere.relative_tolerance);
    s.finish();
  }
  if (r.has("tolerances")) {
    Reader t(r.get("tolerances"), "tolerances");
    c.tolerances.tol_report = t.number("tol_report", c.tolerances.tol_report);
    c.tolerances.eq_tol = t.number("eq_tol", c.tolerances.eq_tol);
    c.tolerances.eps_class = t.number("eps_class", c.tolerances.eps_class);
    t.finish();
  }
  if (r.has("seed")) {
    const Json& s = r.get("seed");
    require(s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0),
            "seed must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.output_dir = r.string("output_dir", "");
  require(r.has("checks") && r.get("checks").is_array(), "config needs a 'checks' array");
  const Json& checks = r.get("checks");
  for (std::size_t i = 0; i < checks.size(); ++i) c.checks.push_back(check_from_json(checks[i], i));
  r.finish();
  validate(c);
  return c;
}

}  // namespace

Json config_to_json(const ScenarioConfig& c) {
  Json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["description"] = c.description;
  j["ambient"] = c.ambient.text();
  if (c.chart) {
    if (!c.chart->builtin.empty()) {
      j["chart"] = c.chart->text();
    } else {
      Json ch;
      ch["expression"] = c.chart->expression;
      Json axes = Json::array();
      for (const Axis& a : c.chart->axes) {
        Json aj;
        aj["lower"] = json_number(a.lower);
        aj["upper"] = json_number(a.upper);
        aj["periodic"] = a.periodic;
        axes.push_back(aj);
      }
      ch["axes"] = axes;
      ch["nodes"] = c.chart->nodes.empty() ? Json("default") : Json(c.chart->nodes);
      j["chart"] = ch;
    }
  } else {
    j["chart"] = nullptr;
  }
  j["codimension"] = c.codimension ? Json(*c.codimension) : Json(nullptr);
  Json q;
  q["counts"] = c.counts.empty() ? Json("default") : Json(c.counts);
  q["radial_nodes"] = c.radial_nodes;
  q["polar_nodes"] = c.polar_nodes;
  j["quadrature"] = q;
  Json s;
  s["circle_nodes"] = c.sphere.circle_nodes;
  s["polar_panels"] = c.sphere.polar_panels;
  s["relative_tolerance"] = json_number(c.sphere.relative_tolerance);
  j["sphere_rule"] = s;
  Json t;
  t["tol_report"] = json_number(c.tolerances.tol_report);
  t["eq_tol"] = json_number(c.tolerances.eq_tol);
  t["eps_class"] = json_number(c.tolerances.eps_class);
  j["tolerances"] = t;
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  j["output_dir"] = c.output_dir;
  Json checks = Json::array();
  for (const CheckConfig& ch : c.checks) checks.push_back(check_to_json(ch));
  j["checks"] = checks;
  return j;
}

void validate(const ScenarioConfig& c) {
  require(c.schema_version == kSchemaVersion, "unsupported schema_version " + std::to_string(c.schema_version));
  require(!c.name.empty() && c.name.find_first_of("/\\") == std::string::npos,
          "scenario name must be non-empty and free of path separators");
  require(c.tolerances.tol_report > 0.0 && c.tolerances.eq_tol > 0.0 && c.tolerances.eps_class > 0.0,
          "all tolerances must be positive");
  require(c.radial_nodes >= 1 && c.polar_nodes >= 1 && c.sphere.circle_nodes >= 4 && c.sphere.polar_panels >= 1 &&
              c.sphere.relative_tolerance > 0.0,
          "quadrature and sphere-rule sizes must be positive");
  for (int n : c.counts) require(n >= 2, "quadrature counts must be at least 2");
  require(!c.checks.empty(), "config lists no checks");
  const auto& types = check_types();
  for (const CheckConfig& ch : c.checks) {
    require(std::find(types.begin(), types.end(), ch.type) != types.end(), "unknown check type '" + ch.type + "'");
    if (needs_chart(ch.type)) require(c.chart.has_value(), "check '" + ch.type + "' needs a chart");
    if (ch.type == "tube-mc" || ch.random_samples > 0) {
      require(c.seed.has_value(), "check '" + ch.type + "' draws random samples and needs a seed");
    }
    require(ch.random_samples >= 0, "random_samples must be non-negative");
    require(ch.grid.kind == "log" || ch.grid.kind == "uniform", "grid kind must be 'log' or 'uniform'");
    require(ch.grid.nodes >= 1 && ch.grid.upper >= 0.0, "grid needs nodes >= 1 and upper >= 0");
    require(ch.model.mode == "principal" || ch.model.mode == "umbilic", "model mode must be principal or umbilic");
    require(!(ch.model.mode == "umbilic" && ch.model.kappa), "an umbilic model takes mean_pairing, not kappa");
    require(!(ch.model.mode == "principal" && ch.model.mean_pairing), "a principal model takes kappa, not mean_pairing");
    require(ch.t_max > 0.0, "t_max must be positive");
    require(ch.r0 >= 0.0 && std::isfinite(ch.r0), "r0 must be finite and non-negative");
    require(ch.n_samples > 0, "n_samples must be positive");
    require(ch.r_max >= 0.0 && ch.fd_step > 0.0 && ch.rel_tol > 0.0 && ch.bound_scale > 0.0,
            "r_max, fd_step, rel_tol and bound_scale must be positive");
    require(ch.equality_mode == "chern-lashof" || ch.equality_mode == "willmore",
            "equality_mode must be chern-lashof or willmore");
    if (ch.type == "avr") {
      require(!ch.radii.empty(), "avr needs radii");
      for (std::size_t i = 0; i < ch.radii.size(); ++i) {
        require(ch.radii[i] > 0.0 && (i == 0 || ch.radii[i] > ch.radii[i - 1]), "avr radii must increase from 0");
      }
    }
  }
  const Ambient M = c.ambient.build();
  if (c.chart) {
    const ImmersionChart chart = c.chart->build(M);
    if (c.codimension && chart.n() + *c.codimension != M.dim()) {
      throw DimensionError("chart " + c.chart->text() + " has n + m = " + std::to_string(chart.n() + *c.codimension) +
                           " but ambient " + M.describe() + " has k = " + std::to_string(M.dim()));
    }
  }
}

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Pass:
      return "pass";
    case RunStatus::Violation:
      return "violation";
    case RunStatus::Error:
      return "error";
  }
  return "";
}

Json RunReport::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = scenario;
  j["status"] = status_name(status);
  j["config"] = config;
  Json list = Json::array();
  for (const CheckResult& r : checks) {
    Json c;
    c["type"] = r.type;
    c["status"] = status_name(r.status);
    if (r.status == RunStatus::Error) {
      c["error"] = {{"kind", r.error_kind}, {"message", r.error_message}};
    } else {
      c["report"] = r.report;
    }
    list.push_back(c);
  }
  j["checks"] = list;
  return j;
}

Json RunReport::timing_json() const {
  Json j;
  j["scenario"] = scenario;
  Json list = Json::array();
  double total = 0.0;
  for (const CheckResult& r : checks) {
    list.push_back({{"type", r.type}, {"seconds", r.seconds}});
    total += r.seconds;
  }
  j["checks"] = list;
  j["total_seconds"] = total;
  j["threads"] = thread_limit();
  return j;
}

int RunReport::exit_code() const {
  switch (status) {
    case RunStatus::Pass:
      return 0;
    case RunStatus::Violation:
      return 1;
    case RunStatus::Error:
      return 2;
  }
  return 2;
}

namespace {

struct Context {
  const ScenarioConfig& config;
  const Ambient& M;
  const ImmersionChart* chart;
  Execution exec;
};

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

std::mt19937_64 check_rng(const Context& ctx, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(*ctx.config.seed), static_cast<std::uint32_t>(*ctx.config.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

Vec random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v(i) = nd(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

Vec random_param(const ImmersionChart& chart, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(0.1, 0.9);
  Vec x(chart.n());
  for (int i = 0; i < chart.n(); ++i) {
    const Axis& a = chart.axes()[i];
    x(i) = a.lower + ud(rng) * (a.upper - a.lower);
  }
  return x;
}

Vec box_center(const ImmersionChart& chart) {
  Vec x(chart.n());
  for (int i = 0; i < chart.n(); ++i) x(i) = 0.5 * (chart.axes()[i].lower + chart.axes()[i].upper);
  return x;
}

Vec param_or_center(const ImmersionChart& chart, const std::vector<double>& x) {
  if (x.empty()) return box_center(chart);
  if (static_cast<int>(x.size()) != chart.n()) {
    throw DimensionError("parameter point has " + std::to_string(x.size()) + " components but the chart has n = " +
                         std::to_string(chart.n()));
  }
  return to_vec(x);
}

// Unit normal in frame coefficients from the check's xi or xi_name at x.
Vec resolve_xi(const Context& ctx, const CheckConfig& c, const ShapeData& sd) {
  if (!c.xi_name.empty()) {
    const double sign = c.xi_name == "outward" ? 1.0 : -1.0;
    // The position vector decides in flat and cone ambients; otherwise H is taken to point inward.
    const Vec radial = sd.normal_coefficients(ctx.M, sd.point);
    if (radial.norm() > 1e-8 * std::max(1.0, sd.point.norm())) return sign * radial / radial.norm();
    const double h = sd.mean_coeffs.norm();
    if (h > 1e-8) return -sign * sd.mean_coeffs / h;
    throw DomainError("neither the position vector nor the mean curvature has a normal component here, so '" +
                      c.xi_name + "' is undefined");
  }
  if (c.xi.empty()) {
    Vec e = Vec::Zero(sd.m());
    e(0) = 1.0;
    return e;
  }
  if (static_cast<int>(c.xi.size()) != sd.m()) {
    throw DimensionError("xi has " + std::to_string(c.xi.size()) + " components but the chart has m = " +
                         std::to_string(sd.m()));
  }
  Vec xi = to_vec(c.xi);
  if (!(xi.norm() > 0.0)) throw DomainError("xi must be nonzero");
  return xi / xi.norm();
}

struct NormalRay {
  Vec x;
  Vec xi;
};

std::vector<NormalRay> normal_rays(const Context& ctx, const CheckConfig& c, std::size_t index) {
  std::vector<NormalRay> rays;
  if (c.random_samples > 0) {
    std::mt19937_64 rng = check_rng(ctx, index);
    for (int s = 0; s < c.random_samples; ++s) {
      Vec x = random_param(*ctx.chart, rng);
      Vec xi = random_unit(rng, ctx.chart->m());
      if (!c.xi_name.empty()) xi = resolve_xi(ctx, c, shape_data(*ctx.chart, x, false));
      rays.push_back({x, xi});
    }
    return rays;
  }
  Vec x = param_or_center(*ctx.chart, c.x);
  rays.push_back({x, resolve_xi(ctx, c, shape_data(*ctx.chart, x, false))});
  return rays;
}

std::vector<NormalPoint> normal_points(const Context& ctx, const CheckConfig& c, std::size_t index) {
  std::vector<NormalPoint> points;
  if (c.random_samples > 0) {
    std::mt19937_64 rng = check_rng(ctx, index);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int s = 0; s < c.random_samples; ++s) {
      Vec x = random_param(*ctx.chart, rng);
      const double r = c.r_max * ud(rng);
      points.push_back({x, r * random_unit(rng, ctx.chart->m())});
    }
    return points;
  }
  Vec x = param_or_center(*ctx.chart, c.x);
  Vec y = Vec::Zero(ctx.chart->m());
  if (!c.y.empty()) {
    if (static_cast<int>(c.y.size()) != ctx.chart->m()) {
      throw DimensionError("y has " + std::to_string(c.y.size()) + " components but the chart has m = " +
                           std::to_string(ctx.chart->m()));
    }
    y = to_vec(c.y);
  }
  points.push_back({x, y});
  return points;
}

std::vector<double> make_grid(const GridSpec& g, double cap) {
  const double upper = g.upper > 0.0 ? g.upper : cap;
  if (!std::isfinite(upper)) throw ConfigError("grid upper is unbounded; set grid.upper or t_max");
  if (g.kind == "uniform") return uniform_t_grid(g.upper > 0.0 ? upper : 0.95 * upper, g.nodes);
  return log_t_grid(upper, g.nodes);
}

CheckResult inequality_check(const Context& ctx, const CheckConfig& c) {
  FunctionalOptions opts;
  opts.counts = ctx.config.counts;
  opts.sphere = ctx.config.sphere;
  opts.eq_tol = ctx.config.tolerances.eq_tol;
  opts.exec = ctx.exec;
  InequalityReport r = c.type == "chern-lashof" ? chern_lashof(*ctx.chart, opts)
                       : c.type == "willmore"   ? willmore_chen(*ctx.chart, opts)
                                                : fenchel(*ctx.chart, opts);
  if (c.bound_scale != 1.0) {
    r.bound *= c.bound_scale;
    r.margin = r.integral - r.bound;
    r.relative_margin = r.margin / r.bound;
    r.equality = std::abs(r.margin) <= r.eq_tol * r.bound;
  }
  CheckResult out;
  out.report = to_json(r);
  if (c.bound_scale != 1.0) out.report["bound_scale"] = json_number(c.bound_scale);
  out.csv = inequality_csv(r);
  out.status = r.violated(ctx.config.tolerances.tol_report) ? RunStatus::Violation : RunStatus::Pass;
  return out;
}

CheckResult ambient_ray_check(const Context& ctx, const CheckConfig& c) {
  const Ambient& M = ctx.M;
  Vec p = c.point.empty() ? M.base_point() : to_vec(c.point);
  M.check_point(p);
  Vec v = c.direction.empty() ? Vec(M.frame(p).col(0)) : to_vec(c.direction);
  if (v.size() != M.coord_dim()) throw DimensionError("direction has the wrong number of coordinates");
  v = M.project_tangent(p, v);
  if (!(M.norm(p, v) > 0.0)) throw DomainError("direction must have a nonzero tangent component");
  v /= M.norm(p, v);
  const double cap = std::min(M.cut_distance(p, v), c.t_max);
  const std::vector<double> grid = make_grid(c.grid, cap);
  ComparisonSample s = c.type == "hessian" ? hessian_bound_check(M, p, v, c.l, c.delta, grid)
                       : c.type == "thm17" ? monotonicity_check_thm17(M, p, v, c.l, c.delta, grid)
                                           : wedge_bound_check(M, p, v, c.l, c.delta, grid);
  s.set_tol_report(ctx.config.tolerances.tol_report);
  CheckResult out;
  out.report = to_json(s);
  out.report["inputs"] = {{"point", json_vector(p)}, {"direction", json_vector(v)}, {"l", c.l},
                          {"delta", json_number(c.delta)}, {"cut_distance", json_number(M.cut_distance(p, v))}};
  out.csv = comparison_csv({s});
  out.status = s.passed() ? RunStatus::Pass : RunStatus::Violation;
  return out;
}

ModelData build_model(const ModelSpec& spec, const ShapeData& sd, const Vec& xi) {
  const ComparisonMode mode = spec.mode == "umbilic" ? ComparisonMode::Umbilic : ComparisonMode::Principal;
  if (mode == ComparisonMode::Principal && spec.kappa) {
    if (static_cast<int>(spec.kappa->size()) != sd.n()) {
      throw DimensionError("model kappa has " + std::to_string(spec.kappa->size()) +
                           " entries but the chart has n = " + std::to_string(sd.n()));
    }
    return ModelData::principal(spec.delta, to_vec(*spec.kappa));
  }
  if (mode == ComparisonMode::Umbilic && spec.mean_pairing) return ModelData::umbilic(spec.delta, *spec.mean_pairing);
  return ModelData::self(sd, xi, spec.delta, mode);
}

CheckResult normal_ray_check(const Context& ctx, const CheckConfig& c, std::size_t index) {
  const ImmersionChart& chart = *ctx.chart;
  const std::vector<NormalRay> rays = normal_rays(ctx, c, index);
  Json list = Json::array();
  std::vector<ComparisonSample> samples;
  bool ok = true;
  bool all_equal = true;
  double min_margin = std::numeric_limits<double>::infinity();
  for (const NormalRay& ray : rays) {
    Json rj;
    rj["x"] = json_vector(ray.x);
    rj["xi"] = json_vector(ray.xi);
    const TildeTau tt = tilde_tau(chart, ray.x, ray.xi, c.t_max);
    if (c.type == "focal") {
      rj["rho"] = json_number(tt.rho.radius);
      rj["focal_found"] = tt.rho.found;
      rj["searched_to"] = json_number(tt.rho.searched_to);
      rj["mu"] = json_number(tt.mu);
      rj["tilde_tau"] = json_number(tt.value);
      list.push_back(rj);
      continue;
    }
    const ShapeData sd = shape_data(chart, ray.x);
    const ModelData model = build_model(c.model, sd, ray.xi);
    const std::vector<double> grid = make_grid(c.grid, std::min(tt.value, c.t_max));
    ComparisonSample s = c.type == "thm38"
                             ? det_t_comparison_thm38(chart, ray.x, ray.xi, model, grid)
                             : jacobian_comparison_thm57(chart, ray.x, ray.xi, model, grid, ctx.config.tolerances.eq_tol);
    s.set_tol_report(ctx.config.tolerances.tol_report);
    ok = ok && s.passed();
    all_equal = all_equal && s.equality;
    min_margin = std::min(min_margin, s.margin);
    rj["model"] = {{"delta", json_number(model.delta)},
                   {"mode", model.mode == ComparisonMode::Principal ? "principal" : "umbilic"},
                   {"kappa", json_vector(model.kappa)},
                   {"mean_pairing", json_number(model.mean_pairing)}};
    rj["sample"] = to_json(s);
    list.push_back(rj);
    samples.push_back(std::move(s));
  }
  CheckResult out;
  out.report["rays"] = list;
  if (c.type == "focal") {
    CsvTable table({"ray", "rho", "mu", "tilde_tau", "focal_found"});
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto cell = [&](const char* key) {
        const Json& v = list[i][key];
        return v.is_string() ? v.get<std::string>() : csv_cell(v.get<double>());
      };
      table.row({std::to_string(i), cell("rho"), cell("mu"), cell("tilde_tau"), csv_cell(list[i]["focal_found"].get<bool>())});
    }
    out.csv = table.str();
    return out;
  }
  out.report["passed"] = ok;
  out.report["min_margin"] = json_number(min_margin);
  if (c.type == "thm57") out.report["equality_all"] = all_equal;
  out.csv = comparison_csv(samples);
  out.status = ok ? RunStatus::Pass : RunStatus::Violation;
  return out;
}

CheckResult tube_check(const Context& ctx, const CheckConfig& c) {
  TubeBoundOptions bopts;
  bopts.counts = ctx.config.counts;
  bopts.radial_nodes = ctx.config.radial_nodes;
  bopts.circle_nodes = ctx.config.sphere.circle_nodes;
  bopts.polar_nodes = ctx.config.polar_nodes;
  bopts.exec = ctx.exec;
  CheckResult out;
  if (c.type == "tube-bound") {
    const TubeBound b = tube_bound_integral(*ctx.chart, c.r0, bopts);
    out.report = to_json(b);
    out.report["r0"] = json_number(c.r0);
    out.csv = tube_bound_csv(c.r0, b);
    out.status = b.clamp_events > 0 ? RunStatus::Violation : RunStatus::Pass;
    return out;
  }
  TubeMcOptions opts;
  opts.samples = c.n_samples;
  opts.seed = *ctx.config.seed;
  opts.bound = bopts;
  opts.exec = ctx.exec;
  const TubeReport r = tube_volume_mc(*ctx.chart, c.r0, opts);
  out.report = to_json(r);
  out.csv = tube_csv(r);
  out.status = r.within_bound() ? RunStatus::Pass : RunStatus::Violation;
  return out;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CheckResult normal_point_check(const Context& ctx, const CheckConfig& c, std::size_t index) {
  const ImmersionChart& chart = *ctx.chart;
  const std::vector<NormalPoint> points = normal_points(ctx, c, index);
  std::vector<ScalarField> fields;
  for (const std::string& s : c.u) fields.push_back(s.empty() ? ScalarField{} : ScalarField::from_expression(s, chart.n()));
  if (fields.empty()) fields.emplace_back();
  const bool metric = c.type == "equality-metric";
  const bool want_q = c.type == "jacobian-q" || c.type == "jacobian-both";
  const bool want_fd = c.type == "jacobian-fd" || c.type == "jacobian-both";
  const EqualityMode mode = c.equality_mode == "willmore" ? EqualityMode::Willmore : EqualityMode::ChernLashof;

  Json list = Json::array();
  CsvTable table(metric ? std::vector<std::string>{"sample", "r", "fd_norm", "closed_norm", "relative_gap"}
                        : std::vector<std::string>{"sample", "r", "field", "via_q", "fd", "fd_error", "relative_gap"});
  double worst = 0.0;
  for (std::size_t s = 0; s < points.size(); ++s) {
    const NormalPoint& np = points[s];
    Json pj;
    pj["x"] = json_vector(np.x);
    pj["y"] = json_vector(np.y);
    if (metric) {
      const Mat fd = pullback_metric_fd(chart, np, c.fd_step);
      const Mat closed = equality_case_metric(chart, np, mode);
      const double gap = (fd - closed).norm() / closed.norm();
      worst = std::max(worst, gap);
      pj["relative_gap"] = json_number(gap);
      table.row({std::to_string(s), csv_cell(np.r()), csv_cell(fd.norm()), csv_cell(closed.norm()), csv_cell(gap)});
    } else {
      const std::size_t f = s % fields.size();
      const ScalarField& u = fields[f];
      pj["u"] = f < c.u.size() ? c.u[f] : "";
      double q = std::numeric_limits<double>::quiet_NaN();
      FdJacobian fd{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
      if (want_q) q = jacobian_via_q(chart, np, u);
      if (want_fd) fd = jacobian_fd(chart, np, u, c.fd_step);
      pj["via_q"] = json_number(q);
      pj["fd"] = json_number(fd.value);
      pj["fd_error"] = json_number(fd.error_estimate);
      double gap = std::numeric_limits<double>::quiet_NaN();
      if (want_q && want_fd) {
        gap = relative_gap(q, fd.value);
        worst = std::max(worst, gap);
      }
      pj["relative_gap"] = json_number(gap);
      table.row({std::to_string(s), csv_cell(np.r()), std::to_string(f), csv_cell(q), csv_cell(fd.value),
                 csv_cell(fd.error_estimate), csv_cell(gap)});
    }
    list.push_back(pj);
  }
  CheckResult out;
  out.report["points"] = list;
  const bool compared = metric || (want_q && want_fd);
  if (compared) {
    out.report["worst_relative_gap"] = json_number(worst);
    out.report["rel_tol"] = json_number(c.rel_tol);
  }
  out.csv = table.str();
  out.status = compared && !(worst <= c.rel_tol) ? RunStatus::Violation : RunStatus::Pass;
  return out;
}

CheckResult avr_check(const Context& ctx, const CheckConfig& c) {
  const std::vector<double> ratios = ctx.M.avr_numeric(c.radii);
  CheckResult out;
  double analytic = std::numeric_limits<double>::quiet_NaN();
  try {
    analytic = ctx.M.avr();
  } catch (const NotApplicableError&) {
  }
  // Bishop-Gromov: with Ric >= 0 the volume ratio is nonincreasing in r.
  const bool applicable = ctx.M.curvature() >= 0.0;
  bool monotone = true;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    if (ratios[i] > ratios[i - 1] * (1.0 + 1e-10)) monotone = false;
  }
  out.report["radii"] = json_numbers(c.radii);
  out.report["ratios"] = json_numbers(ratios);
  out.report["avr"] = json_number(analytic);
  out.report["monotonicity_applies"] = applicable;
  out.report["nonincreasing"] = monotone;
  CsvTable table({"radius", "ratio"});
  for (std::size_t i = 0; i < ratios.size(); ++i) table.row({csv_cell(c.radii[i]), csv_cell(ratios[i])});
  out.csv = table.str();
  out.status = applicable && !monotone ? RunStatus::Violation : RunStatus::Pass;
  return out;
}

CheckResult run_check(const Context& ctx, const CheckConfig& c, std::size_t index) {
  if (is_inequality(c.type)) return inequality_check(ctx, c);
  if (is_ambient_ray(c.type)) return ambient_ray_check(ctx, c);
  if (is_normal_ray(c.type)) return normal_ray_check(ctx, c, index);
  if (c.type == "tube-bound" || c.type == "tube-mc") return tube_check(ctx, c);
  if (is_normal_point(c.type)) return normal_point_check(ctx, c, index);
  if (c.type == "avr") return avr_check(ctx, c);
  throw ConfigError("unknown check type '" + c.type + "'");
}

}  // namespace

RunReport run(const ScenarioConfig& config, Execution exec) {
  validate(config);
  const Ambient M = config.ambient.build();
  std::optional<ImmersionChart> chart;
  if (config.chart) chart.emplace(config.chart->build(M));
  const Context ctx{config, M, chart ? &*chart : nullptr, exec};

  RunReport report;
  report.config = config_to_json(config);
  report.scenario = config.name;
  bool violation = false;
  bool error = false;
  for (std::size_t i = 0; i < config.checks.size(); ++i) {
    const CheckConfig& c = config.checks[i];
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = run_check(ctx, c, i);
    } catch (const Error& e) {
      r = CheckResult{};
      r.status = RunStatus::Error;
      r.error_kind = e.kind();
      r.error_message = e.what();
    } catch (const std::exception& e) {
      r = CheckResult{};
      r.status = RunStatus::Error;
      r.error_kind = "std::exception";
      r.error_message = e.what();
    }
    r.type = c.type;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    violation = violation || r.status == RunStatus::Violation;
    error = error || r.status == RunStatus::Error;
    report.checks.push_back(std::move(r));
  }
  report.status = error ? RunStatus::Error : violation ? RunStatus::Violation : RunStatus::Pass;
  return report;
}

std::vector<std::string> write_reports(const RunReport& report, const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir = directory.empty() ? fs::path(".") : fs::path(directory);
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& text) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    written.push_back(path.string());
  };
  std::map<std::string, int> seen;
  for (const CheckResult& r : report.checks) seen[r.type]++;
  std::map<std::string, int> index;
  for (const CheckResult& r : report.checks) {
    std::string stem = report.scenario + "_" + r.type;
    if (seen[r.type] > 1) stem += "-" + std::to_string(++index[r.type]);
    Json j;
    j["scenario"] = report.scenario;
    j["type"] = r.type;
    j["status"] = status_name(r.status);
    if (r.status == RunStatus::Error) {
      j["error"] = {{"kind", r.error_kind}, {"message", r.error_message}};
    } else {
      j["report"] = r.report;
    }
    write(stem + ".json", j.dump(2) + "\n");
    if (!r.csv.empty()) write(stem + ".csv", r.csv);
  }
  write(report.scenario + "_run.json", report.to_json().dump(2) + "\n");
  write(report.scenario + "_timing.json", report.timing_json().dump(2) + "\n");
  return written;
}

namespace {

ScenarioConfig scenario(const std::string& name, const std::string& description, const std::string& ambient,
                        const std::optional<std::string>& chart, std::vector<CheckConfig> checks) {
  ScenarioConfig c;
  c.name = name;
  c.description = description;
  c.ambient = AmbientSpec::parse(ambient);
  if (chart) c.chart = ChartSpec::parse(*chart);
  c.checks = std::move(checks);
  return c;
}

CheckConfig check(const std::string& type) {
  CheckConfig c;
  c.type = type;
  return c;
}

ScenarioConfig expression_scenario(const std::string& name, const std::string& description, const std::string& source,
                                   std::vector<CheckConfig> checks) {
  ScenarioConfig c = scenario(name, description, "euclidean(3)", std::nullopt, std::move(checks));
  ChartSpec chart;
  chart.expression = source;
  chart.axes = {Axis{0.0, 2.0 * kPi, true}};
  c.chart = chart;
  return c;
}

}  // namespace

std::vector<GoldenScenario> golden_scenarios() {
  std::vector<GoldenScenario> out;
  auto add = [&](int criterion, ScenarioConfig c) { out.push_back({c.name, criterion, std::move(c)}); };

  add(1, scenario("fenchel-circle-equality", "total curvature of the unit circle equals 2 pi", "euclidean(3)",
                  "circle3(1)", {check("fenchel")}));
  add(1, expression_scenario("fenchel-ellipse-equality", "total curvature of the (2, 1) ellipse equals 2 pi",
                             "2*cos(x1), sin(x1), 0", {check("fenchel")}));
  add(2, scenario("cl-sphere-equality", "integral of K* over the unit sphere equals 8 pi", "euclidean(3)",
                  "sphere(2,1)", {check("chern-lashof")}));
  add(3, scenario("cl-torus-strict", "integral of K* over torus_rev(2,1) is 16 pi, strictly above 8 pi",
                  "euclidean(3)", "torus_rev(2,1)", {check("chern-lashof")}));
  for (const char* R : {"0.5", "1", "3"}) {
    add(4, scenario(std::string("wc-sphere-equality-r") + R, std::string("Willmore energy of sphere(2,") + R +
                                                                   ") equals 4 pi",
                    "euclidean(3)", std::string("sphere(2,") + R + ")", {check("willmore")}));
  }
  add(5, scenario("wc-cone-equality", "Willmore energy of the cone cross-section equals 0.64 * 4 pi", "cone(3,0.8)",
                  "cone_cross_section(3,0.8,1)", {check("willmore")}));

  const std::vector<std::string> fields = {"", "0.04*cos(x1) + 0.03*sin(2*x2)"};
  struct Oracle {
    const char* name;
    const char* ambient;
    const char* chart;
    double r_max;
  };
  for (const Oracle& o : {Oracle{"jacobian-oracle-euclidean", "euclidean(3)", "torus_rev(2,1)", 0.5},
                          Oracle{"jacobian-oracle-spherical", "spaceform(3,1)", "small_subsphere(2,1,0.8)", 0.6},
                          Oracle{"jacobian-oracle-hyperbolic", "spaceform(3,-1)", "small_subsphere(2,1,0.8)", 0.6},
                          Oracle{"jacobian-oracle-cone", "cone(3,0.8)", "cone_cross_section(3,0.8,1)", 0.5}}) {
    CheckConfig c = check("jacobian-both");
    c.random_samples = 50;
    c.r_max = o.r_max;
    c.u = fields;
    ScenarioConfig s = scenario(o.name, "Jacobian via Q against finite differences at random normal points", o.ambient,
                                o.chart, {c});
    s.seed = 6;
    add(6, s);
  }

  {
    CheckConfig c = check("focal");
    c.xi_name = "inward";
    add(7, scenario("focal-sphere-inward", "inward focal radius of the unit sphere is 1", "euclidean(3)", "sphere(2,1)",
                    {c}));
    CheckConfig g = check("focal");
    g.xi = {1.0};
    add(7, scenario("focal-great-subsphere", "focal radius of a great subsphere is pi/2", "spaceform(3,1)",
                    "great_subsphere(2,1)", {g}));
  }
  {
    CheckConfig c = check("thm17");
    c.l = 2;
    c.grid = GridSpec{"uniform", 0.95 * kPi, 64};
    add(8, scenario("thm17-spaceform-monotone", "Hessian comparison monotonicity on the unit 3-sphere against delta = 0",
                    "spaceform(3,1)", std::nullopt, {c}));
  }
  {
    CheckConfig sphere = check("thm57");
    sphere.random_samples = 8;
    ScenarioConfig s = scenario("thm57-sphere-self", "Jacobian comparison of the unit sphere with its own data",
                                "euclidean(3)", "sphere(2,1)", {sphere});
    s.seed = 9;
    add(9, s);
    CheckConfig cone = check("thm57");
    cone.random_samples = 8;
    cone.xi_name = "outward";
    cone.model.mode = "umbilic";
    cone.t_max = 3.0;
    ScenarioConfig cs = scenario("thm57-cone-radial", "Jacobian comparison along radial rays of the cone cross-section",
                                 "cone(3,0.8)", "cone_cross_section(3,0.8,1)", {cone});
    cs.seed = 9;
    add(9, cs);
    CheckConfig torus = check("thm57");
    torus.random_samples = 50;
    ScenarioConfig ts = scenario("thm57-torus-random", "Jacobian comparison on 50 random normal rays of torus_rev(2,1)",
                                 "euclidean(3)", "torus_rev(2,1)", {torus});
    ts.seed = 9;
    add(9, ts);
  }
  {
    CheckConfig b = check("tube-bound");
    b.r0 = 0.5;
    CheckConfig mc = check("tube-mc");
    mc.r0 = 0.5;
    ScenarioConfig s = scenario("tube-sphere-weyl", "tube of radius 0.5 around the unit sphere", "euclidean(3)",
                                "sphere(2,1)", {b, mc});
    s.seed = 10;
    add(10, s);
    b.r0 = mc.r0 = 0.25;
    ScenarioConfig cs = scenario("tube-circle", "tube of radius 0.25 around the unit circle", "euclidean(3)",
                                 "circle3(1)", {b, mc});
    cs.seed = 10;
    add(10, cs);
  }
  {
    CheckConfig c = check("avr");
    c.radii = {0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0};
    add(11, scenario("avr-cone", "volume ratios of cone(3,0.5) approach 0.25", "cone(3,0.5)", std::nullopt, {c}));
  }
  struct Metric {
    const char* name;
    const char* ambient;
    const char* chart;
    const char* mode;
  };
  for (const Metric& m : {Metric{"metric-sphere-chern-lashof", "euclidean(3)", "sphere(2,1)", "chern-lashof"},
                          Metric{"metric-sphere-willmore", "euclidean(3)", "sphere(2,1)", "willmore"},
                          Metric{"metric-cone-willmore", "cone(3,0.8)", "cone_cross_section(3,0.8,1)", "willmore"}}) {
    CheckConfig c = check("equality-metric");
    c.equality_mode = m.mode;
    c.random_samples = 20;
    c.r_max = 0.5;
    c.rel_tol = 1e-4;
    ScenarioConfig s = scenario(m.name, "closed-form equality-case metric against finite differences", m.ambient,
                                m.chart, {c});
    s.seed = 12;
    add(12, s);
  }

  // Pseudo-scenarios that exercise the exit-code contract.
  {
    CheckConfig c = check("thm57");
    c.xi_name = "outward";
    c.model.kappa = std::vector<double>{-5.0, -5.0};
    add(0, scenario("pseudo-hypothesis-break", "model curvatures below the sphere's own; expects exit code 2",
                    "euclidean(3)", "sphere(2,1)", {c}));
    CheckConfig v = check("chern-lashof");
    v.bound_scale = 1.01;
    add(0, scenario("pseudo-forced-violation", "Chern-Lashof bound inflated by 1%; expects exit code 1",
                    "euclidean(3)", "sphere(2,1)", {v}));
  }
  return out;
}

ScenarioConfig golden_scenario(const std::string& name) {
  for (GoldenScenario& g : golden_scenarios()) {
    if (g.name == name) return std::move(g.config);
  }
  throw ConfigError("unknown scenario '" + name + "' (see 'tubecomp list')");
}

namespace {

const std::vector<std::pair<std::string, std::string>>& chart_signatures() {
  static const std::vector<std::pair<std::string, std::string>> sigs = {
      {"sphere", "sphere(n,R)"},
      {"circle3", "circle3(R)"},
      {"torus_rev", "torus_rev(R,r)"},
      {"flat_torus4", "flat_torus4(a,b)"},
      {"great_subsphere", "great_subsphere(n,m)"},
      {"small_subsphere", "small_subsphere(n,m,r)"},
      {"cone_cross_section", "cone_cross_section(k,a,t0)"}};
  return sigs;
}

}  // namespace

Json registry_json() {
  Json j;
  Json charts = Json::array();
  for (const auto& [name, sig] : chart_signatures()) charts.push_back({{"name", name}, {"signature", sig}});
  j["charts"] = charts;
  j["ambients"] = {{{"name", "euclidean"}, {"signature", "euclidean(k)"}},
                   {{"name", "spaceform"}, {"signature", "spaceform(k,delta)"}},
                   {{"name", "cone"}, {"signature", "cone(k,a)"}}};
  j["checks"] = check_types();
  Json scenarios = Json::array();
  for (const GoldenScenario& g : golden_scenarios()) {
    scenarios.push_back({{"name", g.name},
                         {"criterion", g.criterion},
                         {"description", g.config.description},
                         {"ambient", g.config.ambient.text()},
                         {"chart", g.config.chart ? Json(g.config.chart->text()) : Json(nullptr)}});
  }
  j["scenarios"] = scenarios;
  return j;
}

std::string registry_text() {
  std::ostringstream os;
  os << "charts:\n";
  for (const auto& [name, sig] : chart_signatures()) os << "  " << sig << "\n";
  os << "ambients:\n  euclidean(k)\n  spaceform(k,delta)\n  cone(k,a)\n";
  os << "checks:\n";
  for (const std::string& t : check_types()) os << "  " << t << "\n";
  os << "scenarios:\n";
  for (const GoldenScenario& g : golden_scenarios()) {
    os << "  " << g.name << "  [" << (g.criterion > 0 ? "criterion " + std::to_string(g.criterion) : "pseudo") << "]  "
       << g.config.description << "\n";
  }
  return os.str();
}

}  // namespace tubecomp
