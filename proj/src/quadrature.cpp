#include "tubecomp/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "tubecomp/errors.hpp"

namespace tubecomp {

Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int j = 2; j <= n; ++j) {
      double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = mid;
  return rule;
}

Rule1D periodic_trapezoid(int n, double a, double b) {
  if (n < 1) throw DomainError("periodic_trapezoid: need at least one node");
  Rule1D rule;
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(a + i * h);
    rule.weights.push_back(h);
  }
  return rule;
}

ProductRule product_rule(const std::vector<Axis>& axes, const std::vector<int>& counts) {
  if (axes.size() != counts.size()) throw DimensionError("product_rule: axes and counts differ in length");
  std::vector<Rule1D> rules;
  std::size_t total = 1;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    rules.push_back(axes[i].periodic ? periodic_trapezoid(counts[i], axes[i].lower, axes[i].upper)
                                     : gauss_legendre(counts[i], axes[i].lower, axes[i].upper));
    total *= static_cast<std::size_t>(counts[i]);
  }
  ProductRule out;
  out.dim = static_cast<int>(axes.size());
  out.nodes.resize(static_cast<Eigen::Index>(total), out.dim);
  out.weights.assign(total, 1.0);
  std::vector<int> idx(axes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t a = 0; a < axes.size(); ++a) {
      out.nodes(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(a)) = rules[a].nodes[idx[a]];
      out.weights[n] *= rules[a].weights[idx[a]];
    }
    for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

SphereRule sphere_rule(int d, int n) {
  if (d < 0 || n < 1) throw DomainError("sphere_rule: invalid dimension or node count");
  SphereRule out;
  if (d == 0) {
    out.directions = Mat(1, 2);
    out.directions << 1.0, -1.0;
    out.weights = {1.0, 1.0};
    return out;
  }
  if (d == 1) {
    const int m = 2 * n;
    out.directions = Mat(2, m);
    for (int j = 0; j < m; ++j) {
      double th = 2.0 * std::numbers::pi * j / m;
      out.directions(0, j) = std::cos(th);
      out.directions(1, j) = std::sin(th);
      out.weights.push_back(2.0 * std::numbers::pi / m);
    }
    return out;
  }
  // x = (cos phi, sin phi * y) with measure sin^{d-1}(phi) dphi dy. For even d the weight is a
  // polynomial in t = cos(phi), so Gauss-Legendre in t is exact on polynomial integrands.
  SphereRule lower = sphere_rule(d - 1, n);
  const bool polynomial_weight = d % 2 == 0;
  Rule1D polar = polynomial_weight ? gauss_legendre(n, -1.0, 1.0) : gauss_legendre(n, 0.0, std::numbers::pi);
  const int lc = static_cast<int>(lower.directions.cols());
  out.directions = Mat(d + 1, n * lc);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    double c, s, w;
    if (polynomial_weight) {
      c = polar.nodes[i];
      s = std::sqrt(1.0 - c * c);
      w = polar.weights[i] * std::pow(s, d - 2);
    } else {
      c = std::cos(polar.nodes[i]);
      s = std::sin(polar.nodes[i]);
      w = polar.weights[i] * std::pow(s, d - 1);
    }
    for (int j = 0; j < lc; ++j) {
      out.directions(0, col) = c;
      out.directions.col(col).tail(d) = s * lower.directions.col(j);
      out.weights.push_back(w * lower.weights[j]);
      ++col;
    }
  }
  return out;
}

}  // namespace tubecomp
