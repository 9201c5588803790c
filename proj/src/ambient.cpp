#include "tubecomp/ambient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>

#include "tubecomp/errors.hpp"
#include "tubecomp/jet.hpp"
#include "tubecomp/model_functions.hpp"
#include "tubecomp/quadrature.hpp"
#include "tubecomp/text.hpp"

namespace tubecomp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minkowski product with signature (+, ..., +, -).
double minkowski(const Vec& v, const Vec& w) {
  const Eigen::Index n = v.size() - 1;
  return v.head(n).dot(w.head(n)) - v(n) * w(n);
}

// Angle between two nonzero vectors without acos cancellation.
double stable_angle(const Vec& a, const Vec& b) {
  Vec ua = a / a.norm();
  Vec ub = b / b.norm();
  return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

struct JacobiState {
  Vec x;
  Vec v;
  Mat frame;
  Mat J;
  Mat Jp;
};

}  // namespace

Ambient Ambient::euclidean(int k) {
  if (k < 2) throw DomainError("euclidean ambient needs k >= 2, got " + std::to_string(k));
  return Ambient(AmbientKind::Euclidean, k, 0.0, 1.0);
}

Ambient Ambient::space_form(int k, double delta) {
  if (k < 2) throw DomainError("space form needs k >= 2, got " + std::to_string(k));
  if (delta == 0.0 || !std::isfinite(delta)) throw DomainError("space form needs a finite nonzero curvature");
  return Ambient(AmbientKind::SpaceForm, k, delta, 1.0);
}

Ambient Ambient::warped_cone(int k, double a) {
  if (k < 2) throw DomainError("cone needs k >= 2, got " + std::to_string(k));
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("cone parameter must lie in (0, 1], got " + format_number(a));
  return Ambient(AmbientKind::WarpedCone, k, 0.0, a);
}

double Ambient::radius() const {
  if (kind_ != AmbientKind::SpaceForm) return kInf;
  return 1.0 / std::sqrt(std::abs(delta_));
}

std::string Ambient::describe() const {
  switch (kind_) {
    case AmbientKind::Euclidean:
      return "euclidean(" + std::to_string(k_) + ")";
    case AmbientKind::SpaceForm:
      return "spaceform(" + std::to_string(k_) + "," + format_number(delta_) + ")";
    case AmbientKind::WarpedCone:
      return "cone(" + std::to_string(k_) + "," + format_number(a_) + ")";
  }
  return "";
}

Vec Ambient::base_point() const {
  Vec p = Vec::Zero(coord_dim());
  if (kind_ == AmbientKind::SpaceForm) p(coord_dim() - 1) = radius();
  if (kind_ == AmbientKind::WarpedCone) p(0) = 1.0;
  return p;
}

void Ambient::check_point(const Vec& p) const {
  if (p.size() != coord_dim()) {
    throw DimensionError("point has " + std::to_string(p.size()) + " coordinates, ambient " + describe() +
                         " expects " + std::to_string(coord_dim()));
  }
  if (!p.allFinite()) throw DomainError("point has non-finite coordinates");
  if (kind_ == AmbientKind::SpaceForm) {
    const double R = radius();
    if (delta_ > 0.0) {
      if (std::abs(p.norm() - R) > 1e-8 * std::max(1.0, R)) throw DomainError("point is off the sphere");
    } else {
      if (std::abs(minkowski(p, p) + R * R) > 1e-8 * std::max(1.0, R * R) || p(coord_dim() - 1) <= 0.0)
        throw DomainError("point is off the upper hyperboloid sheet");
    }
  }
  if (kind_ == AmbientKind::WarpedCone && p.norm() < kApexCutoff) {
    throw ApexError("point at t = " + format_number(p.norm()) + " is inside the apex cutoff");
  }
}

double Ambient::inner(const Vec& p, const Vec& v, const Vec& w) const {
  switch (kind_) {
    case AmbientKind::Euclidean:
      return v.dot(w);
    case AmbientKind::SpaceForm:
      return delta_ > 0.0 ? v.dot(w) : minkowski(v, w);
    case AmbientKind::WarpedCone: {
      Vec u = p / p.norm();
      return a_ * a_ * v.dot(w) + (1.0 - a_ * a_) * u.dot(v) * u.dot(w);
    }
  }
  return 0.0;
}

double Ambient::norm(const Vec& p, const Vec& v) const { return std::sqrt(std::max(0.0, inner(p, v, v))); }

Vec Ambient::project_tangent(const Vec& p, const Vec& v) const {
  if (kind_ != AmbientKind::SpaceForm) return v;
  const double R2 = radius() * radius();
  if (delta_ > 0.0) return v - (v.dot(p) / R2) * p;
  return v + (minkowski(v, p) / R2) * p;
}

Mat Ambient::frame(const Vec& p) const {
  const int N = coord_dim();
  Mat candidates = Mat::Identity(N, N);
  if (kind_ == AmbientKind::Euclidean) return candidates;
  for (int c = 0; c < N; ++c) candidates.col(c) = project_tangent(p, candidates.col(c));
  auto ip = [&](const Vec& v, const Vec& w) { return inner(p, v, w); };
  return orthonormal_completion(Mat(N, 0), candidates, k_, ip);
}

Vec Ambient::frame_components(const Vec& p, const Mat& frame, const Vec& v) const {
  Vec c(frame.cols());
  for (Eigen::Index a = 0; a < frame.cols(); ++a) c(a) = inner(p, frame.col(a), v);
  return c;
}

Vec Ambient::connection(const Vec& p, const Vec& v, const Vec& w) const {
  switch (kind_) {
    case AmbientKind::Euclidean:
      return Vec::Zero(v.size());
    case AmbientKind::SpaceForm: {
      const double R2 = radius() * radius();
      if (delta_ > 0.0) return (v.dot(w) / R2) * p;
      return (-minkowski(v, w) / R2) * p;
    }
    case AmbientKind::WarpedCone: {
      const double t = p.norm();
      Vec u = p / t;
      Vec pv = v - u.dot(v) * u;
      Vec pw = w - u.dot(w) * u;
      return ((1.0 - a_ * a_) / t * pv.dot(pw)) * u;
    }
  }
  return Vec();
}

Tensor Ambient::christoffel_at(const Vec& p) const {
  check_point(p);
  const int N = coord_dim();
  Tensor out{{N, N, N}, std::vector<double>(static_cast<std::size_t>(N) * N * N, 0.0)};
  auto set = [&](int a, int b, int c, double val) { out.data[(a * N + b) * N + c] = val; };
  if (kind_ == AmbientKind::SpaceForm) {
    const double R2 = radius() * radius();
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        double eta = (delta_ < 0.0 && b == N - 1) ? -1.0 : 1.0;
        set(a, b, b, (delta_ > 0.0 ? 1.0 : -1.0) * eta * p(a) / R2);
      }
  } else if (kind_ == AmbientKind::WarpedCone) {
    const double t = p.norm();
    Vec u = p / t;
    const double c = (1.0 - a_ * a_) / t;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        for (int d = 0; d < N; ++d) set(a, b, d, c * u(a) * ((b == d ? 1.0 : 0.0) - u(b) * u(d)));
  }
  return out;
}

double Ambient::riemann(const Vec& p, const Vec& x, const Vec& y, const Vec& z, const Vec& w) const {
  switch (kind_) {
    case AmbientKind::Euclidean:
      return 0.0;
    case AmbientKind::SpaceForm:
      return delta_ * (inner(p, y, z) * inner(p, x, w) - inner(p, x, z) * inner(p, y, w));
    case AmbientKind::WarpedCone: {
      const double t = p.norm();
      Vec u = p / t;
      auto perp = [&](const Vec& v) -> Vec { return v - u.dot(v) * u; };
      Vec px = perp(x), py = perp(y), pz = perp(z), pw = perp(w);
      const double c = (1.0 - a_ * a_) * a_ * a_ / (t * t);
      return c * (py.dot(pz) * px.dot(pw) - px.dot(pz) * py.dot(pw));
    }
  }
  return 0.0;
}

Tensor Ambient::riemann_at(const Vec& p) const {
  check_point(p);
  Mat F = frame(p);
  const int k = k_;
  Tensor out{{k, k, k, k}, std::vector<double>(static_cast<std::size_t>(k) * k * k * k, 0.0)};
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c)
        for (int d = 0; d < k; ++d)
          out.data[((a * k + b) * k + c) * k + d] = riemann(p, F.col(a), F.col(b), F.col(c), F.col(d));
  return out;
}

double Ambient::sectional(const Vec& p, const Vec& x, const Vec& y) const {
  const double den = inner(p, x, x) * inner(p, y, y) - std::pow(inner(p, x, y), 2);
  if (den <= 1e-14 * std::max(1.0, inner(p, x, x) * inner(p, y, y))) {
    throw DegenerateError("sectional curvature of a degenerate plane");
  }
  return riemann(p, x, y, y, x) / den;
}

double Ambient::ric_k(const Vec& p, const Vec& v, const Mat& plane) const {
  const Eigen::Index l = plane.cols();
  if (l < 1 || l > k_ - 1) throw FrameError("ric_k needs 1 <= l <= k-1 plane vectors");
  // Rounding of the Minkowski product grows with the Euclidean size of the coordinates.
  auto tol = [](const Vec& x, const Vec& y) { return 1e-10 * std::max(1.0, x.norm() * y.norm()); };
  if (std::abs(inner(p, v, v) - 1.0) > tol(v, v)) throw FrameError("ric_k direction is not a unit vector");
  for (Eigen::Index i = 0; i < l; ++i) {
    if (std::abs(inner(p, v, plane.col(i))) > tol(v, plane.col(i)))
      throw FrameError("ric_k plane is not orthogonal to v");
    for (Eigen::Index j = 0; j < l; ++j) {
      const double want = i == j ? 1.0 : 0.0;
      if (std::abs(inner(p, plane.col(i), plane.col(j)) - want) > tol(plane.col(i), plane.col(j)))
        throw FrameError("ric_k plane is not orthonormal");
    }
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < l; ++i) sum += riemann(p, v, plane.col(i), plane.col(i), v);
  return sum;
}

GeodesicState Ambient::integrate_geodesic(const Vec& p, const Vec& w, int steps) const {
  Vec x = p;
  Vec v = w;
  const double h = 1.0 / steps;
  auto acc = [&](const Vec& xx, const Vec& vv) -> Vec {
    if (xx.norm() < kApexCutoff) throw ApexError("geodesic enters the apex cutoff");
    return -connection(xx, vv, vv);
  };
  for (int s = 0; s < steps; ++s) {
    Vec k1x = v, k1v = acc(x, v);
    Vec k2x = v + 0.5 * h * k1v, k2v = acc(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
    Vec k3x = v + 0.5 * h * k2v, k3v = acc(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
    Vec k4x = v + h * k3v, k4v = acc(x + h * k3x, v + h * k3v);
    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  if (x.norm() < kApexCutoff) throw ApexError("geodesic ends inside the apex cutoff");
  return {x, v};
}

GeodesicState Ambient::geodesic(const Vec& p, const Vec& w, double t) const {
  check_point(p);
  Vec tw = t * w;
  switch (kind_) {
    case AmbientKind::Euclidean:
      return {p + tw, w};
    case AmbientKind::SpaceForm: {
      const double R = radius();
      const double r = norm(p, w);
      if (r == 0.0) return {p, w};
      Vec u = w / r;
      const double s = t * r / R;
      if (delta_ > 0.0)
        return {std::cos(s) * p + R * std::sin(s) * u, -(r / R) * std::sin(s) * p + r * std::cos(s) * u};
      return {std::cosh(s) * p + R * std::sinh(s) * u, (r / R) * std::sinh(s) * p + r * std::cosh(s) * u};
    }
    case AmbientKind::WarpedCone: {
      const double len = norm(p, tw);
      if (len == 0.0) return {p, w};
      // Very short geodesics (finite-difference stencils) need far fewer steps.
      int steps = len <= 1e-2 * p.norm() ? 32 : kGeodesicSteps;
      const double scale = std::max(1.0, p.norm() + len);
      for (; steps <= (1 << 16); steps *= 2) {
        GeodesicState fine = integrate_geodesic(p, tw, steps);
        GeodesicState coarse = integrate_geodesic(p, tw, steps / 2);
        const double err = (fine.point - coarse.point).norm() / 15.0;
        const double speed_drift = std::abs(norm(fine.point, fine.velocity) - len) / len;
        if (err <= 1e-10 * scale && speed_drift <= 1e-10) {
          return {fine.point, fine.velocity / t};
        }
      }
      throw StepError("cone geodesic integration did not reach tolerance");
    }
  }
  return {};
}

Vec Ambient::exp_map(const Vec& p, const Vec& w) const { return geodesic(p, w, 1.0).point; }

DistanceResult Ambient::distance(const Vec& p, const Vec& q) const {
  check_point(p);
  check_point(q);
  const int N = coord_dim();
  switch (kind_) {
    case AmbientKind::Euclidean:
      return {(q - p).norm(), q - p};
    case AmbientKind::SpaceForm: {
      const double R = radius();
      if (delta_ > 0.0) {
        const double angle = 2.0 * std::atan2((p - q).norm(), (p + q).norm());
        const double d = R * angle;
        Vec dir = project_tangent(p, q);
        double len = dir.norm();
        if (d == 0.0) return {0.0, Vec::Zero(N)};
        if (len <= 1e-15 * R) {
          dir = frame(p).col(0);
          len = 1.0;
        }
        return {d, d * dir / len};
      }
      const double chord = std::sqrt(std::max(0.0, minkowski(p - q, p - q)));
      const double d = 2.0 * R * std::asinh(chord / (2.0 * R));
      if (d == 0.0) return {0.0, Vec::Zero(N)};
      Vec dir = project_tangent(p, q);
      const double len = std::sqrt(std::max(0.0, minkowski(dir, dir)));
      return {d, d * dir / len};
    }
    case AmbientKind::WarpedCone: {
      const double t1 = p.norm();
      const double t2 = q.norm();
      Vec u = p / t1;
      const double angle = stable_angle(p, q);
      const double psi = a_ * angle;
      if (psi >= std::numbers::pi) return {t1 + t2, -(t1 + t2) * u};
      const double sh = std::sin(0.5 * psi);
      const double d = std::sqrt((t1 - t2) * (t1 - t2) + 4.0 * t1 * t2 * sh * sh);
      Vec e = q / t2 - (u.dot(q) / t2) * u;
      const double en = e.norm();
      Vec vel = (t2 * std::cos(psi) - t1) * u;
      if (en > 1e-15) vel += (t2 * std::sin(psi) / a_) * (e / en);
      return {d, vel};
    }
  }
  return {};
}

double Ambient::cut_distance(const Vec& p, const Vec& v) const {
  switch (kind_) {
    case AmbientKind::Euclidean:
      return kInf;
    case AmbientKind::SpaceForm:
      return delta_ > 0.0 ? std::numbers::pi * radius() : kInf;
    case AmbientKind::WarpedCone: {
      if (a_ == 1.0) return kInf;
      const double t1 = p.norm();
      Vec u = p / t1;
      const double vn = norm(p, v);
      // u is a unit vector for the cone metric, so the radial component is g(v, u).
      const double c = std::clamp(inner(p, v, u) / vn, -1.0, 1.0);
      const double tangential = std::sqrt(std::max(0.0, 1.0 - c * c));
      const double beta = std::atan2(tangential, c);
      const double sector = a_ * std::numbers::pi;
      if (beta <= sector) return kInf;
      return t1 * std::sin(sector) / std::sin(beta - sector);
    }
  }
  return kInf;
}

Mat Ambient::hessian_fd(const Vec& p, const Vec& q, bool squared) const {
  const double h = kHessianStep;
  Mat F = frame(p);
  auto value = [&](const Vec& z) {
    const double d = distance(z, q).distance;
    return squared ? 0.5 * d * d : d;
  };
  const double f0 = value(p);
  auto second = [&](const Vec& dir) {
    const double fp = value(exp_map(p, h * dir));
    const double fm = value(exp_map(p, -h * dir));
    return (fp - 2.0 * f0 + fm) / (h * h);
  };
  Mat H(k_, k_);
  for (int a = 0; a < k_; ++a) H(a, a) = second(F.col(a));
  for (int a = 0; a < k_; ++a)
    for (int b = a + 1; b < k_; ++b) {
      const double val = 0.25 * (second(F.col(a) + F.col(b)) - second(F.col(a) - F.col(b)));
      H(a, b) = val;
      H(b, a) = val;
    }
  return H;
}

namespace {

Jet2 acos_jet(const Jet2& c) {
  const double s2 = 1.0 - c.v * c.v;
  return jet_detail::chain(c, std::acos(c.v), -1.0 / std::sqrt(s2), -c.v / (s2 * std::sqrt(s2)));
}

// sin^2(a theta / 2) for the angle theta between the direction of z and the unit vector uq.
// Near theta = 0 it is the power series in w = sin^2(theta / 2) of (1 - 2F1(-a, a; 1/2; w)) / 2,
// which stays smooth where theta itself is not.
Jet2 half_angle_term(const std::array<Jet2, Jet2::kJetVars>& uz, const Vec& uq, int k, double a) {
  Jet2 c(0.0);
  for (int i = 0; i < k; ++i) c += uz[i] * Jet2(uq(i));
  Jet2 w = (Jet2(1.0) - c) * Jet2(0.5);
  if (w.v <= 0.5) {
    std::vector<double> coeffs;
    double b = 1.0;
    for (int n = 1; n < 200; ++n) {
      b *= (n - 1 - a) * (n - 1 + a) / ((n - 0.5) * n);
      coeffs.push_back(-0.5 * b);
      if (std::abs(b) * std::pow(0.5, n) < 1e-18) break;
    }
    Jet2 sum(0.0);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) sum = (sum + Jet2(*it)) * w;
    return sum;
  }
  const Jet2 half = a * acos_jet(c) * Jet2(0.5);
  const Jet2 sh = sin(half);
  return sh * sh;
}

}  // namespace

Mat Ambient::hessian_cone(const Vec& p, const Vec& q, bool squared) const {
  if (k_ > Jet2::kJetVars) return hessian_fd(p, q, squared);
  const double t2 = q.norm();
  const Vec uq = q / t2;
  std::array<Jet2, Jet2::kJetVars> z{};
  for (int i = 0; i < k_; ++i) z[i] = Jet2::variable(p(i), i);
  Jet2 t1sq(0.0);
  for (int i = 0; i < k_; ++i) t1sq += z[i] * z[i];
  const Jet2 t1 = sqrt(t1sq);
  std::array<Jet2, Jet2::kJetVars> uz{};
  for (int i = 0; i < k_; ++i) uz[i] = z[i] / t1;
  const Jet2 diff = t1 - Jet2(t2);
  const Jet2 f = Jet2(0.5) * (diff * diff + Jet2(4.0 * t2) * t1 * half_angle_term(uz, uq, k_, a_));

  Vec grad(k_);
  Mat hess(k_, k_);
  for (int i = 0; i < k_; ++i) {
    grad(i) = f.g[i];
    for (int j = 0; j < k_; ++j) hess(i, j) = f.h[i][j];
  }
  const Mat F = frame(p);
  Mat H = F.transpose() * hess * F;
  for (int a = 0; a < k_; ++a)
    for (int b = 0; b < k_; ++b) H(a, b) -= grad.dot(connection(p, F.col(a), F.col(b)));
  H = 0.5 * (H + H.transpose());
  if (squared) return H;
  const double d = std::sqrt(2.0 * f.v);
  if (d == 0.0) throw DomainError("distance Hessian is undefined at its base point");
  const Vec gd = F.transpose() * grad / d;
  return (H - gd * gd.transpose()) / d;
}

Mat Ambient::hessian_distance_toward(const Vec& p, const Vec& w) const {
  check_point(p);
  const double r = norm(p, w);
  if (r == 0.0) throw DomainError("distance Hessian is undefined at its base point");
  Vec u = w / r;
  if (r >= cut_distance(p, u)) throw CutLocusError("target lies on or beyond the cut locus");
  if (kind_ == AmbientKind::WarpedCone) return hessian_cone(p, exp_map(p, w), false);
  Mat F = frame(p);
  Vec uc = frame_components(p, F, u);
  return cot_delta(curvature(), r) * (Mat::Identity(k_, k_) - uc * uc.transpose());
}

Mat Ambient::hessian_distance_squared_toward(const Vec& p, const Vec& w) const {
  check_point(p);
  const double r = norm(p, w);
  if (r == 0.0) return Mat::Identity(k_, k_);
  Vec u = w / r;
  if (r >= cut_distance(p, u)) throw CutLocusError("target lies on or beyond the cut locus");
  if (kind_ == AmbientKind::WarpedCone) return hessian_cone(p, exp_map(p, w), true);
  Mat F = frame(p);
  Vec uc = frame_components(p, F, u);
  Mat P = uc * uc.transpose();
  const double delta = curvature();
  const double tangential = delta == 0.0 ? 1.0 : r * cot_delta(delta, r);
  return P + tangential * (Mat::Identity(k_, k_) - P);
}

Mat Ambient::hessian_distance(const Vec& p, const Vec& q) const {
  DistanceResult dr = distance(p, q);
  if (dr.distance > 0.0 && dr.distance >= cut_distance(p, dr.velocity / dr.distance))
    throw CutLocusError("target lies on or beyond the cut locus");
  if (kind_ == AmbientKind::WarpedCone) {
    if (dr.distance == 0.0) throw DomainError("distance Hessian is undefined at its base point");
    return hessian_cone(p, q, false);
  }
  return hessian_distance_toward(p, dr.velocity);
}

Mat Ambient::hessian_distance_squared(const Vec& p, const Vec& q) const {
  DistanceResult dr = distance(p, q);
  if (dr.distance > 0.0 && dr.distance >= cut_distance(p, dr.velocity / dr.distance))
    throw CutLocusError("target lies on or beyond the cut locus");
  if (kind_ == AmbientKind::WarpedCone) return hessian_cone(p, q, true);
  return hessian_distance_squared_toward(p, dr.velocity);
}

std::vector<JacobiSample> Ambient::jacobi_fields(const Vec& p, const Vec& w, const Mat& initial,
                                                 const Mat& initial_derivative,
                                                 std::span<const double> times) const {
  check_point(p);
  if (initial.rows() != k_ || initial_derivative.rows() != k_ || initial.cols() != initial_derivative.cols())
    throw DimensionError("Jacobi initial data must be k x c matrices of equal shape");
  JacobiState s{p, w, frame(p), initial, initial_derivative};

  // Rm(a, b) = R(E_b, v, v, E_a), assembled in matrix form.
  auto curvature_matrix = [&](const Vec& x, const Vec& v, const Mat& E) -> Mat {
    switch (kind_) {
      case AmbientKind::Euclidean:
        return Mat::Zero(k_, k_);
      case AmbientKind::SpaceForm: {
        Mat GE = E;
        Vec Gv = v;
        if (delta_ < 0.0) {
          GE.row(GE.rows() - 1) *= -1.0;
          Gv(Gv.size() - 1) *= -1.0;
        }
        Vec Ev = GE.transpose() * v;
        return delta_ * (v.dot(Gv) * (E.transpose() * GE) - Ev * Ev.transpose());
      }
      case AmbientKind::WarpedCone: {
        const double t = x.norm();
        Vec u = x / t;
        Vec pv = v - u.dot(v) * u;
        Mat pE = E - u * (u.transpose() * E);
        Vec Ev = pE.transpose() * pv;
        const double c = (1.0 - a_ * a_) * a_ * a_ / (t * t);
        return c * (pv.squaredNorm() * (pE.transpose() * pE) - Ev * Ev.transpose());
      }
    }
    return Mat();
  };
  auto deriv = [&](const JacobiState& st) {
    if (kind_ == AmbientKind::WarpedCone && st.x.norm() < kApexCutoff)
      throw ApexError("Jacobi integration enters the apex cutoff");
    JacobiState d;
    d.x = st.v;
    d.v = -connection(st.x, st.v, st.v);
    d.frame.resize(st.frame.rows(), st.frame.cols());
    for (Eigen::Index c = 0; c < st.frame.cols(); ++c) d.frame.col(c) = -connection(st.x, st.v, st.frame.col(c));
    d.J = st.Jp;
    d.Jp = -curvature_matrix(st.x, st.v, st.frame) * st.J;
    return d;
  };
  auto axpy = [](const JacobiState& a, double h, const JacobiState& b) {
    return JacobiState{a.x + h * b.x, a.v + h * b.v, a.frame + h * b.frame, a.J + h * b.J, a.Jp + h * b.Jp};
  };

  std::vector<JacobiSample> out;
  double t = 0.0;
  for (double target : times) {
    if (target < t || target > 1.0 + 1e-15) throw DomainError("Jacobi sample times must increase within [0, 1]");
    const int steps = static_cast<int>(std::ceil((target - t) * kGeodesicSteps - 1e-9));
    if (steps > 0) {
      const double h = (target - t) / steps;
      for (int i = 0; i < steps; ++i) {
        JacobiState k1 = deriv(s);
        JacobiState k2 = deriv(axpy(s, 0.5 * h, k1));
        JacobiState k3 = deriv(axpy(s, 0.5 * h, k2));
        JacobiState k4 = deriv(axpy(s, h, k3));
        s.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
        s.v += h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
        s.frame += h / 6.0 * (k1.frame + 2.0 * k2.frame + 2.0 * k3.frame + k4.frame);
        s.J += h / 6.0 * (k1.J + 2.0 * k2.J + 2.0 * k3.J + k4.J);
        s.Jp += h / 6.0 * (k1.Jp + 2.0 * k2.Jp + 2.0 * k3.Jp + k4.Jp);
      }
    }
    t = target;
    out.push_back({target, s.J, s.Jp});
  }
  return out;
}

double Ambient::exp_differential_det(const Vec& p, const Vec& w) const {
  check_point(p);
  const double r = norm(p, w);
  if (kind_ == AmbientKind::Euclidean || r == 0.0) return 1.0;
  if (kind_ == AmbientKind::SpaceForm) {
    if (delta_ > 0.0 && r >= std::numbers::pi * radius())
      throw ConjugateError("conjugate point reached before t = 1");
    return std::pow(s_delta(delta_, r) / r, k_ - 1);
  }
  constexpr int kChecks = 64;
  std::vector<double> times;
  for (int i = 1; i <= kChecks; ++i) times.push_back(static_cast<double>(i) / kChecks);
  auto samples = jacobi_fields(p, w, Mat::Zero(k_, k_), Mat::Identity(k_, k_), times);
  double det = 0.0;
  for (const auto& s : samples) {
    det = s.fields.determinant();
    if (det <= 0.0) throw ConjugateError("conjugate point reached before t = 1");
  }
  return det;
}

double Ambient::avr() const {
  switch (kind_) {
    case AmbientKind::Euclidean:
      return 1.0;
    case AmbientKind::WarpedCone:
      return std::pow(a_, k_ - 1);
    case AmbientKind::SpaceForm:
      throw NotApplicableError("asymptotic volume ratio needs a noncompact model with nonnegative Ricci curvature");
  }
  return 0.0;
}

std::vector<double> Ambient::avr_numeric(std::span<const double> radii) const {
  if (kind_ == AmbientKind::SpaceForm && delta_ < 0.0)
    throw NotApplicableError("asymptotic volume ratio needs nonnegative Ricci curvature");
  constexpr int kRadial = 64;
  constexpr int kSphere = 6;
  double prev = 0.0;
  for (double r : radii) {
    if (!(r > prev)) throw DomainError("avr_numeric radii must be positive and increasing");
    prev = r;
  }
  SphereRule dirs = sphere_rule(k_ - 1, kSphere);
  const int ndir = static_cast<int>(dirs.weights.size());
  const double t0 = kind_ == AmbientKind::WarpedCone ? 2.0 * kApexCutoff : 0.0;
  const double reach = compact() ? std::numbers::pi * radius() : kInf;

  // Radial rules for every radius, merged so each ray is integrated once.
  std::vector<Rule1D> radial;
  std::vector<std::pair<double, std::size_t>> merged;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    radial.push_back(gauss_legendre(kRadial, t0, std::min(radii[j], reach)));
    for (int i = 0; i < kRadial; ++i) merged.emplace_back(radial[j].nodes[i], j * kRadial + i);
  }
  std::sort(merged.begin(), merged.end());
  const double s_max = merged.back().first;

  // density[d][j * kRadial + i]: polar volume density along direction d at node i of radius j.
  std::vector<std::vector<double>> density(ndir, std::vector<double>(merged.size()));
  for (int d = 0; d < ndir; ++d) {
    Vec dir = dirs.directions.col(d);
    if (kind_ == AmbientKind::WarpedCone) {
      // Radial ray from the apex cutoff; tangential Jacobi fields start at a*t0 with slope a.
      Vec x0 = t0 * dir;
      const double len = s_max - t0;
      Mat F = frame(x0);
      Vec uc = frame_components(x0, F, dir);
      Mat basis = orthonormal_completion(uc, Mat::Identity(k_, k_), k_ - 1,
                                         [](const Vec& a, const Vec& b) { return a.dot(b); });
      std::vector<double> times;
      for (const auto& m : merged) times.push_back((m.first - t0) / len);
      auto samples = jacobi_fields(x0, len * dir, a_ * t0 * basis, a_ * len * basis, times);
      for (std::size_t i = 0; i < merged.size(); ++i) {
        const Mat& J = samples[i].fields;
        density[d][merged[i].second] = std::sqrt(std::max(0.0, (J.transpose() * J).determinant()));
      }
    } else {
      Vec p = base_point();
      Vec v = frame(p) * dir;
      for (const auto& m : merged)
        density[d][m.second] = std::pow(m.first, k_ - 1) * exp_differential_det(p, m.first * v);
    }
  }

  std::vector<double> out;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    std::vector<double> per_dir(ndir);
    for (int d = 0; d < ndir; ++d) {
      std::vector<double> vals(kRadial);
      for (int i = 0; i < kRadial; ++i) vals[i] = radial[j].weights[i] * density[d][j * kRadial + i];
      per_dir[d] = dirs.weights[d] * pairwise_sum(vals);
    }
    double volume = pairwise_sum(per_dir);
    if (kind_ == AmbientKind::WarpedCone) volume += std::pow(a_, k_ - 1) * std::pow(t0, k_) / k_ * sphere_area(k_);
    out.push_back(volume / (ball_volume(k_) * std::pow(radii[j], k_)));
  }
  return out;
}

double fd_sectional_curvature(const std::function<Mat(const Vec&)>& metric, const Vec& y, const Vec& x_dir,
                              const Vec& y_dir, double step) {
  const int n = static_cast<int>(y.size());
  const double hg = 1e-5;
  // Gamma^l_ij at a point, from central differences of the metric.
  auto christoffel = [&](const Vec& z) {
    std::vector<Mat> dg(n);
    for (int m = 0; m < n; ++m) {
      Vec e = Vec::Zero(n);
      e(m) = hg;
      dg[m] = (metric(z + e) - metric(z - e)) / (2.0 * hg);
    }
    Mat ginv = metric(z).inverse();
    std::vector<Mat> G(n, Mat::Zero(n, n));
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int m = 0; m < n; ++m) s += ginv(l, m) * (dg[i](j, m) + dg[j](i, m) - dg[m](i, j));
          G[l](i, j) = 0.5 * s;
        }
    return G;
  };
  std::vector<Mat> G = christoffel(y);
  std::vector<std::vector<Mat>> dG(n);
  for (int m = 0; m < n; ++m) {
    Vec e = Vec::Zero(n);
    e(m) = step;
    auto plus = christoffel(y + e);
    auto minus = christoffel(y - e);
    dG[m].resize(n);
    for (int l = 0; l < n; ++l) dG[m][l] = (plus[l] - minus[l]) / (2.0 * step);
  }
  // R^l_{ijk} = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik.
  auto Rup = [&](int l, int i, int j, int k) {
    double s = dG[i][l](j, k) - dG[j][l](i, k);
    for (int m = 0; m < n; ++m) s += G[l](i, m) * G[m](j, k) - G[l](j, m) * G[m](i, k);
    return s;
  };
  Mat g = metric(y);
  double rxyyx = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double coeff = x_dir(i) * y_dir(j) * y_dir(k);
          if (coeff == 0.0) continue;
          double lowered = 0.0;
          for (int m = 0; m < n; ++m) lowered += Rup(m, i, j, k) * g(m, l);
          rxyyx += coeff * lowered * x_dir(l);
        }
  const double xx = x_dir.dot(g * x_dir);
  const double yy = y_dir.dot(g * y_dir);
  const double xy = x_dir.dot(g * y_dir);
  return rxyyx / (xx * yy - xy * xy);
}

void verify_curvature_convention() {
  // Graph chart of the unit 3-sphere over its equatorial ball.
  auto metric = [](const Vec& y) {
    const double w = 1.0 - y.squaredNorm();
    return Mat(Mat::Identity(3, 3) + y * y.transpose() / w);
  };
  Vec y(3);
  y << 0.1, -0.2, 0.15;
  Vec e1 = Vec::Unit(3, 0);
  Vec e2 = Vec::Unit(3, 1);
  const double fd = fd_sectional_curvature(metric, y, e1, e2);

  Ambient sphere = Ambient::space_form(3, 1.0);
  Vec p(4);
  p << y, std::sqrt(1.0 - y.squaredNorm());
  // Push the chart directions forward to the embedding: d/dy_i (y, sqrt(1 - |y|^2)).
  auto push = [&](const Vec& v) {
    Vec out(4);
    out << v, -y.dot(v) / p(3);
    return out;
  };
  const double analytic = sphere.sectional(p, push(e1), push(e2));
  if (std::abs(fd - 1.0) > 1e-4 || std::abs(analytic - 1.0) > 1e-12) {
    std::fprintf(stderr, "curvature convention check failed: fd %.12g analytic %.12g\n", fd, analytic);
    std::abort();
  }
}

}  // namespace tubecomp
