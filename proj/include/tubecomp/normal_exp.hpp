#pragma once

#include <limits>
#include <vector>

#include "tubecomp/immersion.hpp"

namespace tubecomp {

// A point of the normal bundle: parameter x and normal coefficients y in the shape_data frame at x.
struct NormalPoint {
  Vec x;
  Vec y;

  double r() const { return y.norm(); }
  Vec xi() const;  // y / |y|; DomainError when y = 0
};

// Gradient of u as an ambient tangent vector at f(x).
Vec gradient_vector(const ShapeData& sd, const ScalarField& u);
// Covariant Hessian of u in the g-orthonormal tangent basis.
Mat covariant_hessian(const ShapeData& sd, const ScalarField& u);

// Exp_{f(x)}(grad u(x) + y).
Vec phi(const ImmersionChart& chart, const NormalPoint& np, const ScalarField& u = {});
// Q = (1/2) D^2 d^2_{gamma(1)}(f(x)) on T_x - <h, y> + D^2 u, in the g-orthonormal tangent basis.
Mat q_matrix(const ImmersionChart& chart, const NormalPoint& np, const ScalarField& u = {});
// |det Exp_*| * |det Q|.
double jacobian_via_q(const ImmersionChart& chart, const NormalPoint& np, const ScalarField& u = {});

// Sign of the first-order normal transport y^b -> y^b -/+ s Gamma^b_{j a} y^a used for the
// horizontal stencil directions. Minus realizes D-perp parallel transport.
enum class TransportSign { Minus, Plus };

struct FdDifferential {
  Vec image;      // Phi(x, y)
  Mat columns;    // coord_dim x (n + m): Phi_* of the orthonormal horizontal then vertical basis
};
// Central differences of Phi at step h over the bundle basis {horizontal e_i, vertical nu_a}.
FdDifferential differential_fd(const ImmersionChart& chart, const NormalPoint& np, const ScalarField& u, double h,
                               TransportSign sign = TransportSign::Minus);

struct FdJacobian {
  double value = 0.0;
  double error_estimate = 0.0;  // difference between the h and h/2 determinants
};
// Determinant of Phi_* from its Gram matrix in the ambient metric, Richardson-extrapolated
// over steps h and h/2.
FdJacobian jacobian_fd(const ImmersionChart& chart, const NormalPoint& np, const ScalarField& u = {},
                       double h = 1e-4, TransportSign sign = TransportSign::Minus);

struct TMatrix {
  double t = 0.0;
  Mat T;  // (1/2) D^2 d^2_{sigma(t)} on T_x - t <h, xi>
  Mat A;  // D^2 d_{sigma(t)} on T_x - <h, xi>; empty at t = 0
};
TMatrix t_matrix(const ImmersionChart& chart, const Vec& x, const Vec& xi, double t);

struct FocalRadius {
  double radius = std::numeric_limits<double>::infinity();
  double searched_to = 0.0;  // the search window (0, searched_to) when no focal point was found
  bool found = false;
};
// First zero of the smallest eigenvalue of T_t in (0, min(t_max, mu)).
FocalRadius focal_radius(const ImmersionChart& chart, const Vec& x, const Vec& xi, double t_max);

struct TildeTau {
  double value = 0.0;
  double mu = 0.0;
  FocalRadius rho;
};
TildeTau tilde_tau(const ImmersionChart& chart, const Vec& x, const Vec& xi, double t_max = 1e3);

// Pullback of the ambient metric under exp-perp in the orthonormal bundle basis, by finite differences.
Mat pullback_metric_fd(const ImmersionChart& chart, const NormalPoint& np, double h = 1e-4,
                       TransportSign sign = TransportSign::Minus);

enum class EqualityMode { ChernLashof, Willmore };
// Closed-form pullback metric of the rigidity cases, in the same basis as pullback_metric_fd.
Mat equality_case_metric(const ImmersionChart& chart, const NormalPoint& np, EqualityMode mode);

}  // namespace tubecomp
