#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tubecomp/comparison.hpp"
#include "tubecomp/functionals.hpp"

namespace tubecomp {

using Json = nlohmann::ordered_json;

// Finite values as numbers; infinities and NaN as the strings "inf", "-inf", "nan".
Json json_number(double value);
Json json_numbers(const std::vector<double>& values);
Json json_vector(const Vec& v);

Json to_json(const HypothesisCheck& h);
Json to_json(const ComparisonSample& s);
Json to_json(const IntegralEstimate& e);
Json to_json(const InequalityReport& r);
Json to_json(const TubeBound& b);
Json to_json(const TubeReport& r);

// RFC 4180 table builder; numbers use the shortest round-trip text.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(const std::vector<std::string>& cells);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_cell(double value);
std::string csv_cell(bool value);

// Columns t, lhs, rhs, ratio, margin, flag; a leading ray column when there is more than one sample.
std::string comparison_csv(const std::vector<ComparisonSample>& samples);
std::string inequality_csv(const InequalityReport& r);
std::string tube_csv(const TubeReport& r);
std::string tube_bound_csv(double r0, const TubeBound& b);

}  // namespace tubecomp
