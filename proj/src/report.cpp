#include "tubecomp/report.hpp"

#include <cmath>
#include <sstream>

#include "tubecomp/errors.hpp"
#include "tubecomp/text.hpp"

namespace tubecomp {

Json json_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

Json json_numbers(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(json_number(v));
  return out;
}

Json json_vector(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(json_number(v(i)));
  return out;
}

namespace {

Json json_bools(const std::vector<bool>& values) {
  Json out = Json::array();
  for (bool b : values) out.push_back(b);
  return out;
}

}  // namespace

Json to_json(const HypothesisCheck& h) {
  Json j;
  j["description"] = h.description;
  j["sampled_min"] = json_number(h.sampled_min);
  j["rounding"] = json_number(h.rounding);
  j["samples"] = h.samples;
  j["satisfied"] = h.satisfied();
  return j;
}

Json to_json(const ComparisonSample& s) {
  Json j;
  j["check"] = s.check;
  j["passed"] = s.passed();
  j["margin"] = json_number(s.margin);
  j["tol_report"] = json_number(s.tol_report);
  j["ratio_slack"] = json_number(s.ratio_slack);
  j["ratio_nonincreasing"] = s.ratio_nonincreasing;
  j["any_violation"] = s.any_violation();
  Json hyp = Json::array();
  for (const HypothesisCheck& h : s.hypotheses) hyp.push_back(to_json(h));
  j["hypotheses"] = hyp;
  j["t"] = json_numbers(s.t);
  j["lhs"] = json_numbers(s.lhs);
  j["rhs"] = json_numbers(s.rhs);
  j["ratio"] = json_numbers(s.ratio);
  j["violation"] = json_bools(s.violation);
  if (!s.lhs_derivative.empty()) {
    j["lhs_derivative"] = json_numbers(s.lhs_derivative);
    j["rhs_derivative"] = json_numbers(s.rhs_derivative);
    j["derivative_violation"] = json_bools(s.derivative_violation);
    j["derivative_negative"] = s.derivative_negative;
  }
  if (!std::isnan(s.tilde_tau) || !std::isnan(s.model_tilde_tau)) {
    j["tilde_tau"] = json_number(s.tilde_tau);
    j["model_tilde_tau"] = json_number(s.model_tilde_tau);
    j["tilde_tau_ordered"] = s.tilde_tau_ordered;
  }
  if (!std::isnan(s.equality_gap)) {
    j["equality"] = s.equality;
    j["equality_gap"] = json_number(s.equality_gap);
    j["rigidity_checked"] = s.rigidity_checked;
    j["rigidity_holds"] = s.rigidity_holds;
    j["fd_crosscheck_gap"] = json_number(s.fd_crosscheck_gap);
  }
  return j;
}

Json to_json(const IntegralEstimate& e) {
  Json j;
  j["value"] = json_number(e.value);
  j["counts"] = e.counts;
  j["low_order_value"] = json_number(e.low_order_value);
  j["low_order_counts"] = e.low_order_counts;
  j["error_estimate"] = json_number(e.error_estimate);
  return j;
}

Json to_json(const InequalityReport& r) {
  Json j;
  j["functional"] = r.functional;
  j["integral"] = json_number(r.integral);
  j["bound"] = json_number(r.bound);
  j["margin"] = json_number(r.margin);
  j["relative_margin"] = json_number(r.relative_margin);
  j["eq_tol"] = json_number(r.eq_tol);
  j["equality"] = r.equality;
  j["history"] = to_json(r.history);
  if (!std::isnan(r.mean_curvature_min)) {
    j["mean_curvature_min"] = json_number(r.mean_curvature_min);
    j["mean_curvature_max"] = json_number(r.mean_curvature_max);
    j["mean_curvature_constant"] = r.mean_curvature_constant;
  }
  if (!std::isnan(r.k_star_integral)) {
    j["k_star_integral"] = json_number(r.k_star_integral);
    j["k_star_gap"] = json_number(r.k_star_gap);
  }
  return j;
}

Json to_json(const TubeBound& b) {
  Json j;
  j["value"] = json_number(b.value);
  j["clamp_events"] = b.clamp_events;
  j["min_cutoff"] = json_number(b.min_cutoff);
  return j;
}

Json to_json(const TubeReport& r) {
  Json j;
  j["r0"] = json_number(r.r0);
  j["estimate"] = json_number(r.estimate);
  j["standard_error"] = json_number(r.standard_error);
  j["bound_integral"] = json_number(r.bound_integral);
  j["within_bound"] = r.within_bound();
  j["samples"] = r.samples;
  j["accepted"] = r.accepted;
  j["seed"] = r.seed;
  j["sampling_volume"] = json_number(r.sampling_volume);
  return j;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw DimensionError("csv row has the wrong number of cells");
  rows_.push_back(cells);
  return *this;
}

namespace {

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_line(std::ostringstream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << quote(cells[i]);
  os << "\r\n";
}

}  // namespace

std::string CsvTable::str() const {
  std::ostringstream os;
  write_line(os, header_);
  for (const auto& r : rows_) write_line(os, r);
  return os.str();
}

std::string csv_cell(double value) { return format_number(value); }
std::string csv_cell(bool value) { return value ? "true" : "false"; }

std::string comparison_csv(const std::vector<ComparisonSample>& samples) {
  const bool multi = samples.size() > 1;
  std::vector<std::string> header = {"t", "lhs", "rhs", "ratio", "margin", "flag"};
  if (multi) header.insert(header.begin(), "ray");
  CsvTable table(header);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const ComparisonSample& s = samples[r];
    for (std::size_t j = 0; j < s.t.size(); ++j) {
      std::vector<std::string> cells = {csv_cell(s.t[j]), csv_cell(s.lhs[j]), csv_cell(s.rhs[j]), csv_cell(s.ratio[j]),
                                        csv_cell(s.rhs[j] - s.lhs[j]), s.violation[j] ? "violation" : "ok"};
      if (multi) cells.insert(cells.begin(), std::to_string(r));
      table.row(cells);
    }
  }
  return table.str();
}

std::string inequality_csv(const InequalityReport& r) {
  CsvTable table({"functional", "integral", "bound", "margin", "relative_margin", "equality", "error_estimate"});
  table.row({r.functional, csv_cell(r.integral), csv_cell(r.bound), csv_cell(r.margin), csv_cell(r.relative_margin),
             csv_cell(r.equality), csv_cell(r.history.error_estimate)});
  return table.str();
}

std::string tube_csv(const TubeReport& r) {
  CsvTable table({"r0", "estimate", "standard_error", "bound_integral", "samples", "accepted", "seed"});
  table.row({csv_cell(r.r0), csv_cell(r.estimate), csv_cell(r.standard_error), csv_cell(r.bound_integral),
             std::to_string(r.samples), std::to_string(r.accepted), std::to_string(r.seed)});
  return table.str();
}

std::string tube_bound_csv(double r0, const TubeBound& b) {
  CsvTable table({"r0", "bound_integral", "clamp_events", "min_cutoff"});
  table.row({csv_cell(r0), csv_cell(b.value), std::to_string(b.clamp_events), csv_cell(b.min_cutoff)});
  return table.str();
}

}  // namespace tubecomp
