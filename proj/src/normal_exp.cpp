#include "tubecomp/normal_exp.hpp"

#include <algorithm>
#include <cmath>

#include "tubecomp/errors.hpp"
#include "tubecomp/linalg.hpp"

namespace tubecomp {

namespace {

// Ambient components of the g-orthonormal tangent basis in frame(p).
Mat tangent_frame_components(const Ambient& M, const ShapeData& sd) {
  Mat F = M.frame(sd.point);
  Mat E = sd.tangents * sd.tangent_basis;
  Mat B(M.dim(), sd.n());
  for (int i = 0; i < sd.n(); ++i) B.col(i) = M.frame_components(sd.point, F, E.col(i));
  return B;
}

Mat second_along(const ShapeData& sd, const Vec& coeffs) {
  Mat S = Mat::Zero(sd.n(), sd.n());
  for (int a = 0; a < sd.m(); ++a) S += coeffs(a) * sd.second_orthonormal(a);
  return S;
}

void check_normal_point(const ImmersionChart& chart, const NormalPoint& np) {
  if (np.x.size() != chart.n() || np.y.size() != chart.m())
    throw DimensionError("normal point needs n parameter and m normal coefficients");
}

Vec gradient_at(const Mat& tangents, const Mat& metric, const Vec& x, const ScalarField& u) {
  if (u.is_zero()) return Vec::Zero(tangents.rows());
  double value;
  Vec grad;
  Mat hess;
  u.evaluate(x, value, grad, hess);
  return tangents * metric.ldlt().solve(grad);
}

}  // namespace

Vec NormalPoint::xi() const {
  const double len = y.norm();
  if (len == 0.0) throw DomainError("normal direction is undefined at y = 0");
  return y / len;
}

Vec gradient_vector(const ShapeData& sd, const ScalarField& u) {
  return gradient_at(sd.tangents, sd.metric, sd.x, u);
}

Mat covariant_hessian(const ShapeData& sd, const ScalarField& u) {
  const int n = sd.n();
  if (u.is_zero()) return Mat::Zero(n, n);
  double value;
  Vec grad;
  Mat hess;
  u.evaluate(sd.x, value, grad, hess);
  Mat D = hess;
  for (int k = 0; k < n; ++k) D -= grad(k) * sd.christoffel[k];
  return sd.tangent_basis.transpose() * D * sd.tangent_basis;
}

Vec phi(const ImmersionChart& chart, const NormalPoint& np, const ScalarField& u) {
  check_normal_point(chart, np);
  ShapeData sd = shape_data(chart, np.x, false);
  return chart.ambient().exp_map(sd.point, gradient_vector(sd, u) + sd.normal_vector(np.y));
}

Mat q_matrix(const ImmersionChart& chart, const NormalPoint& np, const ScalarField& u) {
  check_normal_point(chart, np);
  const Ambient& M = chart.ambient();
  ShapeData sd = shape_data(chart, np.x, false);
  const Vec V = gradient_vector(sd, u) + sd.normal_vector(np.y);
  Mat B = tangent_frame_components(M, sd);
  Mat Q = B.transpose() * M.hessian_distance_squared_toward(sd.point, V) * B - second_along(sd, np.y) +
          covariant_hessian(sd, u);
  return 0.5 * (Q + Q.transpose());
}

double jacobian_via_q(const ImmersionChart& chart, const NormalPoint& np, const ScalarField& u) {
  check_normal_point(chart, np);
  ShapeData sd = shape_data(chart, np.x, false);
  const Vec V = gradient_vector(sd, u) + sd.normal_vector(np.y);
  return chart.ambient().exp_differential_det(sd.point, V) * std::abs(q_matrix(chart, np, u).determinant());
}

FdDifferential differential_fd(const ImmersionChart& chart, const NormalPoint& np, const ScalarField& u, double h,
                               TransportSign sign) {
  check_normal_point(chart, np);
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  const Ambient& M = chart.ambient();
  const int n = chart.n(), m = chart.m();
  ShapeData sd = shape_data(chart, np.x, true);
  const double s_sign = sign == TransportSign::Minus ? -1.0 : 1.0;

  auto image = [&](const Vec& x, const Vec& y) {
    try {
      LocalFrame fr = local_frame(chart, x, sd.normal_seeds);
      return M.exp_map(fr.point, gradient_at(fr.tangents, fr.metric, x, u) + fr.normals * y);
    } catch (const Error& e) {
      throw StencilError(std::string("stencil point could not be evaluated: ") + e.what());
    }
  };

  FdDifferential out;
  out.image = M.exp_map(sd.point, gradient_vector(sd, u) + sd.normal_vector(np.y));
  out.columns.resize(M.coord_dim(), n + m);
  for (int j = 0; j < n; ++j) {
    const Vec dir = sd.tangent_basis.col(j);
    Mat gamma = Mat::Zero(m, m);
    for (int i = 0; i < n; ++i) gamma += dir(i) * sd.normal_connection[i];
    const Vec dy = s_sign * gamma * np.y;
    Vec d = (image(np.x + h * dir, np.y + h * dy) - image(np.x - h * dir, np.y - h * dy)) / (2.0 * h);
    out.columns.col(j) = M.project_tangent(out.image, d);
  }
  for (int a = 0; a < m; ++a) {
    Vec e = Vec::Zero(m);
    e(a) = h;
    Vec d = (image(np.x, np.y + e) - image(np.x, np.y - e)) / (2.0 * h);
    out.columns.col(n + a) = M.project_tangent(out.image, d);
  }
  return out;
}

namespace {

Mat gram(const Ambient& M, const FdDifferential& d) {
  const Eigen::Index c = d.columns.cols();
  Mat G(c, c);
  for (Eigen::Index a = 0; a < c; ++a)
    for (Eigen::Index b = a; b < c; ++b) {
      G(a, b) = M.inner(d.image, d.columns.col(a), d.columns.col(b));
      G(b, a) = G(a, b);
    }
  return G;
}

double gram_det_root(const Mat& G) { return std::sqrt(std::max(0.0, G.determinant())); }

}  // namespace

FdJacobian jacobian_fd(const ImmersionChart& chart, const NormalPoint& np, const ScalarField& u, double h,
                       TransportSign sign) {
  const Ambient& M = chart.ambient();
  const double coarse = gram_det_root(gram(M, differential_fd(chart, np, u, h, sign)));
  const double fine = gram_det_root(gram(M, differential_fd(chart, np, u, 0.5 * h, sign)));
  FdJacobian out;
  out.value = (4.0 * fine - coarse) / 3.0;
  out.error_estimate = std::abs(fine - coarse);
  if (!std::isfinite(out.value)) throw StencilError("finite-difference Jacobian is not finite");
  return out;
}

TMatrix t_matrix(const ImmersionChart& chart, const Vec& x, const Vec& xi, double t) {
  if (!(t >= 0.0)) throw DomainError("t must be nonnegative");
  const Ambient& M = chart.ambient();
  ShapeData sd = shape_data(chart, x, false);
  if (xi.size() != sd.m() || std::abs(xi.norm() - 1.0) > 1e-10) throw DomainError("xi must be a unit normal");
  Mat B = tangent_frame_components(M, sd);
  const Mat hxi = second_along(sd, xi);
  TMatrix out;
  out.t = t;
  if (t == 0.0) {
    out.T = Mat::Identity(sd.n(), sd.n());
    return out;
  }
  const Vec w = t * sd.normal_vector(xi);
  out.T = B.transpose() * M.hessian_distance_squared_toward(sd.point, w) * B - t * hxi;
  out.A = B.transpose() * M.hessian_distance_toward(sd.point, w) * B - hxi;
  out.T = 0.5 * (out.T + out.T.transpose());
  out.A = 0.5 * (out.A + out.A.transpose());
  return out;
}

FocalRadius focal_radius(const ImmersionChart& chart, const Vec& x, const Vec& xi, double t_max) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("t_max must be positive and finite");
  const Ambient& M = chart.ambient();
  ShapeData sd = shape_data(chart, x, false);
  if (xi.size() != sd.m() || std::abs(xi.norm() - 1.0) > 1e-10) throw DomainError("xi must be a unit normal");
  const Vec p = sd.point;
  const Vec v = sd.normal_vector(xi);
  const double mu = M.cut_distance(p, v / M.norm(p, v));
  const double window = std::min(t_max, mu);

  std::vector<double> grid;
  for (int j = 1; j < 256; ++j) grid.push_back(window * j / 256.0);
  if (window == t_max && t_max < mu) grid.push_back(t_max);
  for (int j = 1; j <= 40; ++j) grid.push_back(window * std::ldexp(1.0, -j));
  std::sort(grid.begin(), grid.end());

  // lambda_min of T_t; NaN once the geodesic leaves the evaluable region.
  auto lambda = [&](double t) {
    try {
      return min_eigenvalue(t_matrix(chart, x, xi, t).T);
    } catch (const CutLocusError&) {
      return std::numeric_limits<double>::quiet_NaN();
    } catch (const ApexError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  FocalRadius out;
  double prev = 0.0;
  for (double t : grid) {
    const double l = lambda(t);
    if (std::isnan(l)) {
      out.searched_to = prev;
      return out;
    }
    if (l <= 0.0) {
      double lo = prev, hi = t;
      while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        const double lm = lambda(mid);
        if (!std::isnan(lm) && lm > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      out.radius = 0.5 * (lo + hi);
      out.searched_to = out.radius;
      out.found = true;
      return out;
    }
    prev = t;
  }
  out.searched_to = window;
  return out;
}

TildeTau tilde_tau(const ImmersionChart& chart, const Vec& x, const Vec& xi, double t_max) {
  const Ambient& M = chart.ambient();
  ShapeData sd = shape_data(chart, x, false);
  const Vec v = sd.normal_vector(xi);
  TildeTau out;
  out.mu = M.cut_distance(sd.point, v / M.norm(sd.point, v));
  out.rho = focal_radius(chart, x, xi, t_max);
  out.value = std::min(out.mu, out.rho.radius);
  return out;
}

Mat pullback_metric_fd(const ImmersionChart& chart, const NormalPoint& np, double h, TransportSign sign) {
  return gram(chart.ambient(), differential_fd(chart, np, ScalarField{}, h, sign));
}

Mat equality_case_metric(const ImmersionChart& chart, const NormalPoint& np, EqualityMode mode) {
  check_normal_point(chart, np);
  ShapeData sd = shape_data(chart, np.x, false);
  const int n = sd.n(), m = sd.m();
  Mat G = Mat::Identity(n + m, n + m);
  if (mode == EqualityMode::ChernLashof) {
    HRank hr = h_rank_and_xi(sd);
    if (hr.rank != 1)
      throw RankError("Chern-Lashof equality metric needs h of rank 1, found rank " + std::to_string(hr.rank));
    Eigen::SelfAdjointEigenSolver<Mat> es(weingarten(sd, hr.xi));
    const double t = hr.xi.dot(np.y);
    for (int i = 0; i < n; ++i) {
      const double kappa = es.eigenvalues()(i);
      const Vec P = es.eigenvectors().col(i);
      G.topLeftCorner(n, n) += ((1.0 + kappa * t) * (1.0 + kappa * t) - 1.0) * P * P.transpose();
    }
  } else {
    if (sd.mean_coeffs.norm() <= 1e-12) throw MinimalError("Willmore equality metric needs H != 0");
    const double s = 1.0 - sd.mean_coeffs.dot(np.y);
    G.topLeftCorner(n, n) *= s * s;
  }
  return G;
}

}  // namespace tubecomp
