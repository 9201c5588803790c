#include "tubecomp/model_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "tubecomp/errors.hpp"

namespace tubecomp {

double s_delta(double delta, double r) {
  if (delta > 0.0) {
    const double k = std::sqrt(delta);
    return std::sin(k * r) / k;
  }
  if (delta < 0.0) {
    const double k = std::sqrt(-delta);
    return std::sinh(k * r) / k;
  }
  return r;
}

double c_delta(double delta, double r) {
  if (delta > 0.0) return std::cos(std::sqrt(delta) * r);
  if (delta < 0.0) return std::cosh(std::sqrt(-delta) * r);
  return 1.0;
}

double cot_delta(double delta, double r) {
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  return c_delta(delta, r) / s_delta(delta, r);
}

double sphere_area(int d) {
  if (d < 1) throw DomainError("sphere_area needs d >= 1, got " + std::to_string(d));
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double ball_volume(int d) {
  if (d < 1) throw DomainError("ball_volume needs d >= 1, got " + std::to_string(d));
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

}  // namespace tubecomp
