#include "tubecomp/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tubecomp/errors.hpp"
#include "tubecomp/model_functions.hpp"

namespace tubecomp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHypothesisTol = 1e-8;
constexpr double kRhsFloor = 1e-12;
constexpr int kHypothesisNodes = 16;
constexpr int kFramesPerNode = 4;

void check_grid(const std::vector<double>& t_grid, double horizon, const char* what) {
  if (t_grid.empty()) throw DomainError("t grid is empty");
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    if (!(t_grid[j] > 0.0)) throw DomainError("t grid must be positive");
    if (j > 0 && !(t_grid[j] > t_grid[j - 1])) throw DomainError("t grid must be strictly increasing");
  }
  if (!(t_grid.back() < horizon))
    throw DomainError(std::string("t grid must stay below ") + what + " = " + std::to_string(horizon));
}

Vec unit(const Ambient& M, const Vec& p, const Vec& v) {
  const Vec w = M.project_tangent(p, v);
  const double len = M.norm(p, w);
  if (!(len > 0.0)) throw DomainError("direction must be a nonzero tangent vector");
  return w / len;
}

// Orthonormal tangent vectors at p orthogonal to `fixed` (if given), drawn from Gaussian coordinates.
Mat random_orthonormal(const Ambient& M, const Vec& p, const Vec* fixed, int count, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Mat out(M.coord_dim(), count);
  int have = 0;
  while (have < count) {
    Vec w(M.coord_dim());
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = gauss(rng);
    // Two passes restore orthogonality lost to rounding at points with large coordinates.
    for (int pass = 0; pass < 2; ++pass) {
      w = M.project_tangent(p, w);
      if (fixed) w -= M.inner(p, w, *fixed) * *fixed;
      for (int j = 0; j < have; ++j) w -= M.inner(p, w, out.col(j)) * out.col(j);
    }
    const double len = M.norm(p, w);
    if (len < 1e-6) continue;
    out.col(have++) = w / len;
  }
  return out;
}

std::vector<std::size_t> hypothesis_nodes(std::size_t count) {
  std::vector<std::size_t> idx;
  const std::size_t stride = std::max<std::size_t>(1, count / kHypothesisNodes);
  for (std::size_t j = 0; j < count; j += stride) idx.push_back(j);
  if (idx.back() != count - 1) idx.push_back(count - 1);
  return idx;
}

// Samples Ric_l(sigma'(t)) - l delta (and, for a few random directions, Ric_l(u) - l delta) along
// the unit-speed geodesic from p in direction v. l = 1 samples sectional curvature.
HypothesisCheck sample_ric(const Ambient& M, const Vec& p, const Vec& v, int l, double delta,
                           const std::vector<double>& t_grid) {
  HypothesisCheck out;
  out.description = l == 1 ? "sectional - delta" : "Ric_" + std::to_string(l) + " - " + std::to_string(l) + " delta";
  std::mt19937_64 rng(0x5eedULL + static_cast<unsigned>(l));
  std::vector<double> times{0.0};
  for (std::size_t j : hypothesis_nodes(t_grid.size())) times.push_back(t_grid[j]);
  for (double t : times) {
    const GeodesicState g = M.geodesic(p, v, t);
    const Vec q = g.point;
    const Vec dir = unit(M, q, g.velocity);
    for (int f = 0; f < kFramesPerNode; ++f) {
      Vec u = dir;
      if (f % 2 == 1) u = random_orthonormal(M, q, nullptr, 1, rng).col(0);
      const Mat plane = random_orthonormal(M, q, &u, l, rng);
      out.sampled_min = std::min(out.sampled_min, M.ric_k(q, u, plane) - l * delta);
      double size = u.squaredNorm();
      for (Eigen::Index i = 0; i < plane.cols(); ++i) size += plane.col(i).squaredNorm();
      out.rounding = std::max(out.rounding, 16.0 * std::numeric_limits<double>::epsilon() * size * l * std::max(1.0, std::abs(M.curvature())));
      ++out.samples;
    }
  }
  return out;
}

void require(const HypothesisCheck& h) {
  if (!h.satisfied(kHypothesisTol))
    throw HypothesisError("hypothesis violated by sampling: " + h.description + " reached " +
                          std::to_string(h.sampled_min));
}

// Fills ratio, violation, margin and ratio monotonicity from lhs and rhs.
void finish(ComparisonSample& s) {
  const std::size_t N = s.t.size();
  s.ratio.assign(N, kNaN);
  s.violation.assign(N, false);
  s.margin = kInf;
  for (std::size_t j = 0; j < N; ++j) {
    if (std::abs(s.rhs[j]) >= kRhsFloor) s.ratio[j] = s.lhs[j] / s.rhs[j];
    const double gap = s.rhs[j] - s.lhs[j];
    s.margin = std::min(s.margin, gap);
    s.violation[j] = !(gap >= -s.tol_report * std::max(1.0, std::abs(s.rhs[j])));
  }
  s.ratio_nonincreasing = true;
  for (std::size_t j = 1; j < N; ++j) {
    if (std::isnan(s.ratio[j]) || std::isnan(s.ratio[j - 1])) continue;
    if (s.ratio[j] > s.ratio[j - 1] + s.ratio_slack) s.ratio_nonincreasing = false;
  }
}

struct Ray {
  Vec p;
  Vec v;
  double mu;
};

Ray ambient_ray(const Ambient& M, const Vec& p, const Vec& v) {
  M.check_point(p);
  Ray r{p, unit(M, p, v), 0.0};
  r.mu = M.cut_distance(p, r.v);
  return r;
}

double hessian_sum(const Ambient& M, const Ray& ray, const Mat& W, double t) {
  const Mat H = M.hessian_distance_toward(ray.p, t * ray.v);
  return (W.transpose() * H * W).trace();
}

Mat family_or_throw(const Ambient& M, const Ray& ray, int l) {
  if (l < 1 || l > M.dim() - 1) throw DomainError("l must satisfy 1 <= l <= k - 1");
  return orthonormal_family(M, ray.p, ray.v, l);
}

}  // namespace

bool ComparisonSample::any_violation() const {
  return std::any_of(violation.begin(), violation.end(), [](bool b) { return b; }) ||
         std::any_of(derivative_violation.begin(), derivative_violation.end(), [](bool b) { return b; });
}

bool ComparisonSample::passed() const {
  return !any_violation() && ratio_nonincreasing && derivative_negative && tilde_tau_ordered &&
         std::all_of(hypotheses.begin(), hypotheses.end(), [](const HypothesisCheck& h) { return h.satisfied(); });
}

void ComparisonSample::set_tol_report(double tol) {
  if (!(tol > 0.0)) throw DomainError("tol_report must be positive");
  tol_report = tol;
  finish(*this);
}

ModelData ModelData::principal(double delta, Vec kappa) {
  std::sort(kappa.data(), kappa.data() + kappa.size());
  ModelData m;
  m.delta = delta;
  m.mode = ComparisonMode::Principal;
  m.kappa = std::move(kappa);
  return m;
}

ModelData ModelData::umbilic(double delta, double mean_pairing) {
  ModelData m;
  m.delta = delta;
  m.mode = ComparisonMode::Umbilic;
  m.mean_pairing = mean_pairing;
  return m;
}

ModelData ModelData::self(const ShapeData& sd, const Vec& xi, double delta, ComparisonMode mode) {
  if (mode == ComparisonMode::Principal) return principal(delta, principal_curvatures(sd, xi));
  return umbilic(delta, sd.mean_coeffs.dot(xi));
}

std::vector<double> uniform_t_grid(double upper, int nodes) {
  if (!(upper > 0.0) || nodes < 1) throw DomainError("uniform grid needs upper > 0 and nodes >= 1");
  std::vector<double> g(nodes);
  for (int j = 0; j < nodes; ++j) g[j] = upper * (j + 1) / nodes;
  return g;
}

std::vector<double> log_t_grid(double cap, int nodes) {
  if (!(cap > 0.0) || !std::isfinite(cap) || nodes < 2) throw DomainError("log grid needs a finite cap > 0 and nodes >= 2");
  const double lo = std::log(1e-3 * cap), hi = std::log(0.95 * cap);
  std::vector<double> g(nodes);
  for (int j = 0; j < nodes; ++j) g[j] = std::exp(lo + (hi - lo) * j / (nodes - 1));
  return g;
}

Mat orthonormal_family(const Ambient& M, const Vec& p, const Vec& v, int l) {
  const int k = M.dim();
  if (l < 0 || l > k - 1) throw DomainError("family size must be at most k - 1");
  const Mat F = M.frame(p);
  Vec e = M.frame_components(p, F, v);
  e.normalize();
  Mat basis(k, k);
  basis.col(0) = e;
  int have = 1;
  for (int i = 0; i < k && have < k; ++i) {
    Vec w = Vec::Unit(k, i);
    for (int j = 0; j < have; ++j) w -= w.dot(basis.col(j)) * basis.col(j);
    if (w.norm() < 1e-3) continue;
    basis.col(have++) = w.normalized();
  }
  return basis.block(0, 1, k, l);
}

double model_tilde_tau(const ModelData& model) {
  const double d = model.delta;
  const double mu = d > 0.0 ? M_PI / std::sqrt(d) : kInf;
  // The model T_t is diagonal with entries t (c/s + kappa); the first zero over all kappa.
  auto focal = [&](double kappa) {
    if (d > 0.0) return (0.5 * M_PI - std::atan(-kappa / std::sqrt(d))) / std::sqrt(d);
    if (d == 0.0) return kappa < 0.0 ? -1.0 / kappa : kInf;
    const double r = std::sqrt(-d);
    return kappa < -r ? std::atanh(-r / kappa) / r : kInf;
  };
  double rho = kInf;
  if (model.mode == ComparisonMode::Principal) {
    for (Eigen::Index i = 0; i < model.kappa.size(); ++i) rho = std::min(rho, focal(model.kappa(i)));
  } else {
    rho = focal(-model.mean_pairing);
  }
  return std::min(mu, rho);
}

ComparisonSample hessian_bound_check(const Ambient& M, const Vec& p, const Vec& v, int l, double delta,
                                     const std::vector<double>& t_grid) {
  const Ray ray = ambient_ray(M, p, v);
  check_grid(t_grid, ray.mu, "mu");
  const Mat W = family_or_throw(M, ray, l);
  ComparisonSample s;
  s.check = "hessian_bound";
  s.hypotheses.push_back(sample_ric(M, ray.p, ray.v, l, delta, t_grid));
  require(s.hypotheses.back());
  s.t = t_grid;
  for (double t : t_grid) {
    s.lhs.push_back(hessian_sum(M, ray, W, t));
    s.rhs.push_back(l * cot_delta(delta, t));
  }
  finish(s);
  return s;
}

ComparisonSample monotonicity_check_thm17(const Ambient& M, const Vec& p, const Vec& v, int l, double delta,
                                          const std::vector<double>& t_grid) {
  if (t_grid.size() < 3) throw DomainError("monotonicity check needs at least 3 grid nodes");
  const double dt = t_grid[1] - t_grid[0];
  for (std::size_t j = 1; j < t_grid.size(); ++j)
    if (std::abs(t_grid[j] - t_grid[j - 1] - dt) > 1e-9 * std::max(1.0, dt))
      throw DomainError("monotonicity check needs a uniform grid");
  ComparisonSample s = hessian_bound_check(M, p, v, l, delta, t_grid);
  s.check = "hessian_monotonicity";
  const std::size_t N = t_grid.size();
  s.lhs_derivative.resize(N);
  s.rhs_derivative.resize(N);
  s.derivative_violation.assign(N, false);
  s.derivative_negative = true;
  for (std::size_t j = 0; j < N; ++j) {
    double d;
    if (j == 0) {
      d = (-3.0 * s.lhs[0] + 4.0 * s.lhs[1] - s.lhs[2]) / (2.0 * dt);
    } else if (j == N - 1) {
      d = (3.0 * s.lhs[j] - 4.0 * s.lhs[j - 1] + s.lhs[j - 2]) / (2.0 * dt);
    } else {
      d = (s.lhs[j + 1] - s.lhs[j - 1]) / (2.0 * dt);
    }
    const double t = t_grid[j];
    const double sd = s_delta(delta, t);
    const double rhs_d = -l / (sd * sd);
    s.lhs_derivative[j] = d;
    s.rhs_derivative[j] = rhs_d;
    // Truncation scale of an l c/s profile: its third derivative grows like |d/dt (l c/s)| / t^2.
    const double scale = std::max(1.0, std::abs(rhs_d) / (t * t));
    s.derivative_violation[j] = d > rhs_d + 10.0 * dt * dt * scale;
    if (!(rhs_d < 0.0)) s.derivative_negative = false;
  }
  return s;
}

ComparisonSample wedge_bound_check(const Ambient& M, const Vec& p, const Vec& v, int l, double delta,
                                   const std::vector<double>& t_grid) {
  const Ray ray = ambient_ray(M, p, v);
  check_grid(t_grid, kInf, "infinity");
  const Mat W = family_or_throw(M, ray, l);
  const double T = t_grid.back();
  std::vector<double> times;
  for (double t : t_grid) times.push_back(t / T);
  const Mat zero = Mat::Zero(M.dim(), l);
  const std::vector<JacobiSample> js = M.jacobi_fields(ray.p, T * ray.v, zero, T * W, times);

  ComparisonSample s;
  s.check = "wedge_bound";
  s.hypotheses.push_back(sample_ric(M, ray.p, ray.v, l, delta, t_grid));
  require(s.hypotheses.back());
  s.t = t_grid;
  const double base = std::sqrt((W.transpose() * W).determinant());
  for (std::size_t j = 0; j < js.size(); ++j) {
    const Mat& Y = js[j].fields;
    const Mat G = Y.transpose() * Y;
    const double det = G.determinant();
    if (!(det > 0.0) || std::sqrt(det) <= 1e-9 * std::pow(std::max(1.0, t_grid[j]), l))
      throw ConjugateError("Jacobi fields degenerate at t = " + std::to_string(t_grid[j]));
    s.lhs.push_back(std::sqrt(det) / base);
    s.rhs.push_back(std::pow(s_delta(delta, t_grid[j]), l));
  }
  finish(s);
  return s;
}

namespace {

struct ChartRay {
  ShapeData sd;
  Vec kappa;
  double pairing;
  Ray ray;
};

ChartRay chart_ray(const ImmersionChart& chart, const Vec& x, const Vec& xi) {
  ShapeData sd = shape_data(chart, x, false);
  if (xi.size() != sd.m() || std::abs(xi.norm() - 1.0) > 1e-10) throw DomainError("xi must be a unit normal");
  const Ambient& M = chart.ambient();
  ChartRay cr{sd, principal_curvatures(sd, xi), sd.mean_coeffs.dot(xi), ambient_ray(M, sd.point, sd.normal_vector(xi))};
  return cr;
}

void check_model(const ModelData& model, int n) {
  if (model.mode == ComparisonMode::Principal && model.kappa.size() != n)
    throw DimensionError("model principal curvatures need n = " + std::to_string(n) + " entries");
}

// Records and enforces the per-mode hypotheses shared by the det T and Jacobian comparisons.
void shape_hypotheses(ComparisonSample& s, const Ambient& M, const ChartRay& cr, const ModelData& model,
                      const std::vector<double>& t_grid) {
  const int n = cr.sd.n();
  HypothesisCheck shape;
  if (model.mode == ComparisonMode::Principal) {
    s.hypotheses.push_back(sample_ric(M, cr.ray.p, cr.ray.v, 1, model.delta, t_grid));
    shape.description = "model kappa - kappa";
    for (int i = 0; i < n; ++i) shape.sampled_min = std::min(shape.sampled_min, model.kappa(i) - cr.kappa(i));
    shape.samples = n;
  } else {
    s.hypotheses.push_back(sample_ric(M, cr.ray.p, cr.ray.v, std::min(n, M.dim() - 1), model.delta, t_grid));
    shape.description = "<H, xi> - model <H, xi>";
    shape.sampled_min = cr.pairing - model.mean_pairing;
    shape.samples = 1;
  }
  s.hypotheses.push_back(shape);
  for (const HypothesisCheck& h : s.hypotheses) require(h);
}

}  // namespace

ComparisonSample det_t_comparison_thm38(const ImmersionChart& chart, const Vec& x, const Vec& xi,
                                        const ModelData& model, const std::vector<double>& t_grid) {
  const Ambient& M = chart.ambient();
  const ChartRay cr = chart_ray(chart, x, xi);
  const int n = cr.sd.n();
  check_model(model, n);
  check_grid(t_grid, cr.ray.mu, "mu");
  ComparisonSample s;
  s.check = "det_t";
  shape_hypotheses(s, M, cr, model, t_grid);

  s.t = t_grid;
  for (double t : t_grid) {
    s.lhs.push_back(std::abs(t_matrix(chart, x, xi, t).T.determinant()));
    const double ct = t * cot_delta(model.delta, t);
    double rhs = 1.0;
    if (model.mode == ComparisonMode::Principal) {
      for (int i = 0; i < n; ++i) rhs *= ct + t * model.kappa(i);
    } else {
      rhs = std::pow(ct - t * model.mean_pairing, n);
    }
    s.rhs.push_back(std::abs(rhs));
  }
  finish(s);

  s.model_tilde_tau = model_tilde_tau(model);
  if (std::isfinite(s.model_tilde_tau)) {
    const FocalRadius fr = focal_radius(chart, x, xi, s.model_tilde_tau * (1.0 + 1e-6));
    s.tilde_tau = std::min(cr.ray.mu, fr.radius);
    s.tilde_tau_ordered = s.tilde_tau <= s.model_tilde_tau * (1.0 + 1e-6);
  }
  return s;
}

ComparisonSample jacobian_comparison_thm57(const ImmersionChart& chart, const Vec& x, const Vec& xi,
                                           const ModelData& model, const std::vector<double>& t_grid,
                                           double eq_tol) {
  const Ambient& M = chart.ambient();
  const ChartRay cr = chart_ray(chart, x, xi);
  const int n = cr.sd.n(), m = cr.sd.m();
  check_model(model, n);
  check_grid(t_grid, cr.ray.mu, "mu");
  ComparisonSample s;
  s.check = "jacobian";
  shape_hypotheses(s, M, cr, model, t_grid);

  s.t = t_grid;
  for (double t : t_grid) {
    s.lhs.push_back(jacobian_via_q(chart, NormalPoint{x, t * xi}));
    const double sv = s_delta(model.delta, t), cv = c_delta(model.delta, t);
    double rhs = std::pow(sv / t, m - 1);
    if (model.mode == ComparisonMode::Principal) {
      for (int i = 0; i < n; ++i) rhs *= cv + sv * model.kappa(i);
    } else {
      rhs *= std::pow(cv - sv * model.mean_pairing, n);
    }
    s.rhs.push_back(std::abs(rhs));
  }
  finish(s);

  // Finite-difference cross-check of the Q-form at the first, middle and last nodes.
  s.fd_crosscheck_gap = 0.0;
  for (std::size_t j : {std::size_t{0}, t_grid.size() / 2, t_grid.size() - 1}) {
    const FdJacobian fd = jacobian_fd(chart, NormalPoint{x, t_grid[j] * xi});
    s.fd_crosscheck_gap = std::max(s.fd_crosscheck_gap, std::abs(s.lhs[j] - fd.value) / std::abs(fd.value));
  }

  s.equality_gap = 0.0;
  for (std::size_t j = 0; j < t_grid.size(); ++j)
    s.equality_gap = std::max(s.equality_gap, std::abs(s.lhs[j] - s.rhs[j]) / std::abs(s.rhs[j]));
  s.equality = s.equality_gap <= eq_tol;
  if (s.equality) {
    // Rigidity: sectional curvature delta on planes containing sigma', and kappa equal to the model.
    s.rigidity_checked = true;
    double worst = 0.0;
    std::mt19937_64 rng(0xe9a1ULL);
    for (std::size_t j : hypothesis_nodes(t_grid.size())) {
      const GeodesicState g = M.geodesic(cr.ray.p, cr.ray.v, t_grid[j]);
      const Vec dir = unit(M, g.point, g.velocity);
      for (int f = 0; f < kFramesPerNode; ++f) {
        const Vec w = random_orthonormal(M, g.point, &dir, 1, rng).col(0);
        worst = std::max(worst, std::abs(M.sectional(g.point, dir, w) - model.delta));
      }
    }
    for (int i = 0; i < n; ++i) {
      const double target = model.mode == ComparisonMode::Principal ? model.kappa(i) : -model.mean_pairing;
      worst = std::max(worst, std::abs(cr.kappa(i) - target) / std::max(1.0, std::abs(target)));
    }
    s.rigidity_holds = worst <= eq_tol;
  }
  return s;
}

}  // namespace tubecomp
