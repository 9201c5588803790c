#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tubecomp/linalg.hpp"

namespace tubecomp {

enum class AmbientKind { Euclidean, SpaceForm, WarpedCone };

// Dense tensor with a fixed rank, row-major.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  double at(int a, int b, int c) const { return data[(a * shape[1] + b) * shape[2] + c]; }
  double at(int a, int b, int c, int d) const {
    return data[((a * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }
};

struct DistanceResult {
  double distance = 0.0;
  // Initial velocity of a minimal geodesic from p to q, with metric length `distance`.
  Vec velocity;
};

struct GeodesicState {
  Vec point;
  Vec velocity;
};

// Jacobi fields along t -> Exp_p(t w), expressed in a parallel orthonormal frame.
// Column c of `fields` is the c-th field; rows are frame components.
struct JacobiSample {
  double t = 0.0;
  Mat fields;
  Mat derivatives;
};

// A model Riemannian manifold with chart-level access to its geometry.
//
// Charts:
//   Euclidean(k)      Cartesian coordinates on R^k.
//   SpaceForm(k, d)   embedding chart: the sphere of radius 1/sqrt(d) in R^{k+1} for d > 0,
//                     the upper hyperboloid sheet in Minkowski R^{k,1} for d < 0.
//   WarpedCone(k, a)  Cartesian coordinates x = t*theta on R^k minus the apex, metric
//                     dt^2 + (a t)^2 g_{S^{k-1}}, i.e. g = a^2 I + (1 - a^2) u u^T, u = x/|x|.
//
// Points and tangent vectors are coordinate vectors of length coord_dim(). Bilinear forms on
// T_pM (Hessians, curvature arrays) are returned in the orthonormal frame `frame(p)`.
// Curvature follows R(X,Y,Z,W) = <D_X D_Y Z - D_Y D_X Z - D_[X,Y] Z, W>, so the unit sphere
// has sectional curvature +1.
class Ambient {
 public:
  static constexpr double kApexCutoff = 1e-3;
  static constexpr double kHessianStep = 1e-4;
  static constexpr int kGeodesicSteps = 2048;

  static Ambient euclidean(int k);
  static Ambient space_form(int k, double delta);
  static Ambient warped_cone(int k, double a);

  AmbientKind kind() const { return kind_; }
  int dim() const { return k_; }
  int coord_dim() const { return kind_ == AmbientKind::SpaceForm ? k_ + 1 : k_; }
  // Constant curvature of a space form; 0 otherwise (a lower sectional bound for the cone).
  double curvature() const { return kind_ == AmbientKind::SpaceForm ? delta_ : 0.0; }
  double cone_parameter() const { return a_; }
  // 1/sqrt|delta| for space forms.
  double radius() const;
  bool compact() const { return kind_ == AmbientKind::SpaceForm && delta_ > 0.0; }
  std::string describe() const;

  // Canonical base point: origin, the last embedding axis, or (1, 0, ..., 0) on the cone.
  Vec base_point() const;
  void check_point(const Vec& p) const;

  double inner(const Vec& p, const Vec& v, const Vec& w) const;
  double norm(const Vec& p, const Vec& v) const;
  Vec project_tangent(const Vec& p, const Vec& v) const;
  // coord_dim x dim matrix whose columns are an orthonormal basis of T_pM.
  Mat frame(const Vec& p) const;
  Vec frame_components(const Vec& p, const Mat& frame, const Vec& v) const;

  // Connection term: D_X Y = dY(X) + connection(p, X, Y), followed by tangential projection
  // in the embedding chart.
  Vec connection(const Vec& p, const Vec& v, const Vec& w) const;
  // Gamma^a_bc in chart coordinates (for the embedding chart: valid on tangent vectors).
  Tensor christoffel_at(const Vec& p) const;
  double riemann(const Vec& p, const Vec& x, const Vec& y, const Vec& z, const Vec& w) const;
  // R(E_a, E_b, E_c, E_d) in frame(p).
  Tensor riemann_at(const Vec& p) const;
  double sectional(const Vec& p, const Vec& x, const Vec& y) const;
  // Sum of R(v, e_i, e_i, v) over the columns of `plane`.
  double ric_k(const Vec& p, const Vec& v, const Mat& plane) const;

  Vec exp_map(const Vec& p, const Vec& w) const;
  // Point and velocity of t -> Exp_p(t w) at parameter t.
  GeodesicState geodesic(const Vec& p, const Vec& w, double t) const;
  DistanceResult distance(const Vec& p, const Vec& q) const;
  // mu(p, v) for a unit vector v; +inf when the geodesic minimizes forever.
  double cut_distance(const Vec& p, const Vec& v) const;

  // Hessians at p of d_q and of d_q^2 / 2, as matrices in frame(p).
  Mat hessian_distance(const Vec& p, const Vec& q) const;
  Mat hessian_distance_squared(const Vec& p, const Vec& q) const;
  // Same, for q = Exp_p(w); avoids recovering the direction from q.
  Mat hessian_distance_toward(const Vec& p, const Vec& w) const;
  Mat hessian_distance_squared_toward(const Vec& p, const Vec& w) const;

  // Integrates the Jacobi equation J'' + R(J, g')g' = 0 along t -> Exp_p(t w) by RK4 and
  // reports the fields at the requested (increasing, within [0,1]) times.
  std::vector<JacobiSample> jacobi_fields(const Vec& p, const Vec& w, const Mat& initial,
                                          const Mat& initial_derivative,
                                          std::span<const double> times) const;
  // |det (Exp_p)_{*w}|.
  double exp_differential_det(const Vec& p, const Vec& w) const;

  double avr() const;
  // |B_r(center)| / (omega_k r^k) per radius. The center is the origin (Euclidean), the base
  // point (space form) or the apex (cone).
  std::vector<double> avr_numeric(std::span<const double> radii) const;

  // Geodesic ODE integration in chart coordinates with a fixed number of RK4 steps.
  GeodesicState integrate_geodesic(const Vec& p, const Vec& w, int steps) const;

 private:
  Ambient(AmbientKind kind, int k, double delta, double a) : kind_(kind), k_(k), delta_(delta), a_(a) {}

  Mat hessian_fd(const Vec& p, const Vec& q, bool squared) const;
  // Cone: covariant Hessian at p of d(., q) or d(., q)^2 / 2 by differentiating the cone law.
  Mat hessian_cone(const Vec& p, const Vec& q, bool squared) const;

  AmbientKind kind_;
  int k_;
  double delta_ = 0.0;
  double a_ = 1.0;
};

// Orthonormalizes `candidates` (columns) against the columns of `basis` under `inner`, in
// column order, and returns up to `count` new vectors. A candidate is taken when its residual
// is at least half the largest remaining residual. `chosen` receives the candidate indices.
template <typename Inner>
Mat orthonormal_completion(const Mat& basis, const Mat& candidates, int count, Inner&& inner,
                           std::vector<int>* chosen = nullptr);

// Same selection replayed with fixed candidate indices.
template <typename Inner>
Mat orthonormal_completion_fixed(const Mat& basis, const Mat& candidates,
                                 const std::vector<int>& indices, Inner&& inner);

// R(X,Y,Y,X) / (|X|^2 |Y|^2 - <X,Y>^2) of the metric g(y) (a coordinate chart), from finite
// differences of g: Christoffels by central differences of g, curvature by central differences
// of the Christoffels.
double fd_sectional_curvature(const std::function<Mat(const Vec&)>& metric, const Vec& y,
                              const Vec& x_dir, const Vec& y_dir, double step = 1e-3);

// Aborts the process if the curvature convention is flipped: the unit 3-sphere must have
// sectional curvature +1 both analytically and by finite differences of a graph-chart metric.
void verify_curvature_convention();

}  // namespace tubecomp

#include "tubecomp/ambient_inl.hpp"
