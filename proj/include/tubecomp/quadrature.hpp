#pragma once

#include <vector>

#include "tubecomp/linalg.hpp"

namespace tubecomp {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule mapped to [a, b].
Rule1D gauss_legendre(int n, double a, double b);
// n-point rectangle rule for a periodic integrand on [a, b).
Rule1D periodic_trapezoid(int n, double a, double b);

struct Axis {
  double lower = 0.0;
  double upper = 1.0;
  bool periodic = false;
};

struct ProductRule {
  int dim = 0;
  // Row i holds the coordinates of node i.
  Mat nodes;
  std::vector<double> weights;
};

// Tensor product of per-axis rules: Gauss-Legendre on bounded axes, trapezoid on periodic ones.
ProductRule product_rule(const std::vector<Axis>& axes, const std::vector<int>& counts);

struct SphereRule {
  // Column j is a unit vector in R^{d+1}.
  Mat directions;
  std::vector<double> weights;
};

// Rule on the unit sphere S^d in R^{d+1}: 2n equispaced points on circles, n Gauss-Legendre
// nodes per polar level (in cos(phi) for even d, in phi for odd d). Weights sum to |S^d|.
SphereRule sphere_rule(int d, int n);

}  // namespace tubecomp
