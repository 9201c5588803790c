#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tubecomp/ambient.hpp"
#include "tubecomp/expression.hpp"
#include "tubecomp/jet.hpp"
#include "tubecomp/linalg.hpp"
#include "tubecomp/quadrature.hpp"

namespace tubecomp {

// Value, first and second derivatives of the chart map at a parameter point.
struct ChartJet {
  Vec value;
  Mat jacobian;                // coord_dim x n
  std::vector<Mat> hessians;   // one n x n matrix per ambient coordinate
};

enum class DerivativeMode { Dual, FiniteDifference };

// A parametrized immersion f: U -> M of an n-dimensional box into an ambient model.
class ImmersionChart {
 public:
  using PointMap = std::function<void(const double*, double*)>;
  using JetMap = std::function<void(const Jet2*, Jet2*)>;

  ImmersionChart(Ambient ambient, std::string name, std::vector<Axis> axes, std::vector<int> default_nodes,
                 PointMap point_map, JetMap jet_map);

  // Expression chart: `source` holds coord_dim() comma-separated expressions in x1..xn.
  static ImmersionChart from_expression(const Ambient& ambient, const std::string& source,
                                        std::vector<Axis> axes, std::vector<int> default_nodes = {});

  // Built-in registry: sphere, circle3, torus_rev, flat_torus4, great_subsphere,
  // small_subsphere, cone_cross_section.
  static ImmersionChart builtin(const std::string& name, const std::vector<double>& params, const Ambient& ambient);
  static std::vector<std::string> builtin_names();

  const Ambient& ambient() const { return ambient_; }
  const std::string& name() const { return name_; }
  int n() const { return static_cast<int>(axes_.size()); }
  int m() const { return ambient_.dim() - n(); }
  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<int>& default_nodes() const { return default_nodes_; }

  void set_derivative_mode(DerivativeMode mode, double step = 1e-5) {
    mode_ = mode;
    fd_step_ = step;
  }
  DerivativeMode derivative_mode() const { return mode_; }

  Vec point(const Vec& x) const;
  // Finite-difference mode uses central differences with the configured step for first
  // derivatives and ten times that step for second derivatives.
  ChartJet jet(const Vec& x) const;
  // Maps periodic coordinates back into their fundamental interval.
  Vec wrap(const Vec& x) const;

 private:
  Ambient ambient_;
  std::string name_;
  std::vector<Axis> axes_;
  std::vector<int> default_nodes_;
  PointMap point_map_;
  JetMap jet_map_;
  DerivativeMode mode_ = DerivativeMode::Dual;
  double fd_step_ = 1e-5;
};

// Scalar function on the parameter box with order-2 derivatives (the gradient field potential).
class ScalarField {
 public:
  ScalarField() = default;  // the zero field
  static ScalarField from_expression(const std::string& source, int variables);

  bool is_zero() const { return !expr_; }
  const std::string& source() const;
  // value, gradient (n), Hessian (n x n) in chart coordinates.
  void evaluate(const Vec& x, double& value, Vec& gradient, Mat& hessian) const;

 private:
  std::shared_ptr<ExpressionList> expr_;
};

struct ShapeData {
  Vec x;
  Vec point;
  Mat tangents;                 // coord_dim x n, columns d f / d x^i
  Mat metric;                   // g_ij
  Mat metric_inv;
  Mat metric_chol;              // lower L with g = L L^T
  Mat tangent_basis;            // n x n, C = L^{-T}: tangents * C is g-orthonormal
  Mat normals;                  // coord_dim x m, orthonormal normal frame
  std::vector<int> normal_seeds;
  std::vector<Mat> second;      // h^alpha_ij in coordinates, one n x n per normal
  Vec mean_curvature;           // H as an ambient vector
  Vec mean_coeffs;              // H in the normal frame
  std::vector<Mat> christoffel; // christoffel[k](i, j) = Gamma^k_ij of the induced metric
  std::vector<Mat> normal_connection;  // [i](beta, alpha) = Gamma^beta_{i alpha}
  bool has_normal_connection = false;
  double volume_density = 0.0;  // sqrt(det g)

  int n() const { return static_cast<int>(metric.rows()); }
  int m() const { return static_cast<int>(normals.cols()); }
  // h^alpha in the g-orthonormal tangent basis.
  Mat second_orthonormal(int alpha) const;
  Vec normal_vector(const Vec& coeffs) const { return normals * coeffs; }
  Vec normal_coefficients(const Ambient& ambient, const Vec& v) const;
};

ShapeData shape_data(const ImmersionChart& chart, const Vec& x, bool with_normal_connection = true);

struct LocalFrame {
  Vec point;
  Mat tangents;
  Mat metric;
  Mat normals;
};
// Point, tangents, metric and normal frame at x, with the normal Gram-Schmidt run on the fixed
// candidate indices `seeds` (ShapeData::normal_seeds of a nearby point keeps the gauge continuous).
LocalFrame local_frame(const ImmersionChart& chart, const Vec& x, const std::vector<int>& seeds);

// Weingarten matrix of S_xi in the g-orthonormal tangent basis: -sum xi^alpha h^alpha.
Mat weingarten(const ShapeData& sd, const Vec& xi);
// Ascending principal curvatures for a unit normal given by frame coefficients.
Vec principal_curvatures(const ShapeData& sd, const Vec& xi);

struct NormalSphereRule {
  int circle_nodes = 256;             // sign-change scan grid and node budget on each normal circle
  int polar_panels = 4;               // m >= 3: initial panels of the adaptive polar-angle rule
  double relative_tolerance = 1e-11;  // m >= 3: adaptive polar refinement target
};

// K*(x): integral of |det <h, xi>| over the unit normal sphere.
double k_star(const ShapeData& sd, const NormalSphereRule& rule = {});

enum class NormalClass { L, M, N };
struct NormalClassification {
  NormalClass label;
  double kappa_min;
  double tolerance;
};
NormalClassification classify_normal(const ShapeData& sd, const Vec& xi, double eps_class = 1e-8);
char normal_class_letter(NormalClass c);

struct SigmaPlusProbe {
  bool positive = false;
  Vec xi;        // maximizer, frame coefficients
  double value = 0.0;  // max over sampled xi of kappa_1(x, xi)
};
// Heuristic maximization of kappa_1 over the unit normal sphere; exact for m = 1.
SigmaPlusProbe sigma_plus_probe(const ShapeData& sd, int samples = 512, int ascent_steps = 20,
                                double eps_class = 1e-8);

struct HRank {
  int rank = 0;
  Vec singular_values;
  Vec xi;  // frame coefficients of the spanning normal when rank == 1
};
HRank h_rank_and_xi(const ShapeData& sd, double tol_rank = 1e-8);

}  // namespace tubecomp
