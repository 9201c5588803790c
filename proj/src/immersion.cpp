#include "tubecomp/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "tubecomp/errors.hpp"
#include "tubecomp/text.hpp"

namespace tubecomp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Hyperspherical coordinates (phi_1..phi_{n-1}, theta) -> unit vector in R^{n+1}.
template <typename T>
void hypersphere(const T* x, int n, T* out) {
  using std::cos;
  using std::sin;
  T prod(1.0);
  for (int i = 0; i < n - 1; ++i) {
    out[i] = prod * cos(x[i]);
    prod = prod * sin(x[i]);
  }
  out[n - 1] = prod * cos(x[n - 1]);
  out[n] = prod * sin(x[n - 1]);
}

std::vector<Axis> hypersphere_axes(int n) {
  std::vector<Axis> axes(n - 1, Axis{0.0, std::numbers::pi, false});
  axes.push_back(Axis{0.0, kTwoPi, true});
  return axes;
}

std::vector<int> hypersphere_nodes(int n) {
  std::vector<int> nodes(n - 1, 32);
  nodes.push_back(64);
  return nodes;
}

template <typename F>
ImmersionChart make_chart(const Ambient& ambient, std::string name, std::vector<Axis> axes, std::vector<int> nodes,
                          F f) {
  return ImmersionChart(
      ambient, std::move(name), std::move(axes), std::move(nodes), [f](const double* x, double* out) { f(x, out); },
      [f](const Jet2* x, Jet2* out) { f(x, out); });
}

std::string chart_label(const std::string& name, const std::vector<double>& params) {
  std::string s = name + "(";
  for (std::size_t i = 0; i < params.size(); ++i) s += (i ? "," : "") + format_number(params[i]);
  return s + ")";
}

int as_count(double v, const std::string& what) {
  if (v != std::floor(v) || v < 1) throw DomainError(what + " must be a positive integer, got " + format_number(v));
  return static_cast<int>(v);
}

void require_dimension(const std::string& label, int chart_k, const Ambient& ambient) {
  if (chart_k != ambient.dim()) {
    throw DimensionError("chart " + label + " has n + m = " + std::to_string(chart_k) + " but ambient " +
                         ambient.describe() + " has k = " + std::to_string(ambient.dim()));
  }
}

void require_kind(const std::string& label, const Ambient& ambient, AmbientKind kind, const std::string& kind_name) {
  if (ambient.kind() != kind) throw DomainError("chart " + label + " needs a " + kind_name + " ambient, got " + ambient.describe());
}

}  // namespace

ImmersionChart::ImmersionChart(Ambient ambient, std::string name, std::vector<Axis> axes,
                               std::vector<int> default_nodes, PointMap point_map, JetMap jet_map)
    : ambient_(std::move(ambient)),
      name_(std::move(name)),
      axes_(std::move(axes)),
      default_nodes_(std::move(default_nodes)),
      point_map_(std::move(point_map)),
      jet_map_(std::move(jet_map)) {
  const int n = static_cast<int>(axes_.size());
  if (n < 1 || n > Jet2::kJetVars) throw DomainError("chart dimension must be between 1 and 4");
  if (n >= ambient_.dim()) {
    throw DimensionError("chart " + name_ + " has n = " + std::to_string(n) + ", which leaves no normal directions in " +
                         ambient_.describe() + " (k = " + std::to_string(ambient_.dim()) + ")");
  }
  if (default_nodes_.empty()) {
    for (const Axis& a : axes_) default_nodes_.push_back(a.periodic ? 64 : 32);
  }
  if (default_nodes_.size() != axes_.size()) throw DimensionError("one default node count per axis is required");
}

ImmersionChart ImmersionChart::from_expression(const Ambient& ambient, const std::string& source,
                                               std::vector<Axis> axes, std::vector<int> default_nodes) {
  const int n = static_cast<int>(axes.size());
  auto expr = std::make_shared<ExpressionList>(ExpressionList::parse(source, n, ambient.coord_dim()));
  return ImmersionChart(
      ambient, source, std::move(axes), std::move(default_nodes),
      [expr](const double* x, double* out) { expr->evaluate(x, out); },
      [expr](const Jet2* x, Jet2* out) { expr->evaluate(x, out); });
}

std::vector<std::string> ImmersionChart::builtin_names() {
  return {"sphere", "circle3", "torus_rev", "flat_torus4", "great_subsphere", "small_subsphere", "cone_cross_section"};
}

ImmersionChart ImmersionChart::builtin(const std::string& name, const std::vector<double>& params,
                                       const Ambient& ambient) {
  const std::string label = chart_label(name, params);
  auto need = [&](std::size_t count) {
    if (params.size() != count)
      throw ArityError("chart " + name + " takes " + std::to_string(count) + " parameters, got " +
                       std::to_string(params.size()));
  };
  const int N = ambient.coord_dim();
  if (name == "sphere") {
    need(2);
    const int n = as_count(params[0], "sphere dimension");
    const double R = params[1];
    require_kind(label, ambient, AmbientKind::Euclidean, "euclidean");
    if (ambient.dim() < n + 1)
      throw DimensionError("chart " + label + " needs k >= n + 1 = " + std::to_string(n + 1) + " but ambient " +
                           ambient.describe() + " has k = " + std::to_string(ambient.dim()));
    if (n > Jet2::kJetVars) throw DomainError("sphere dimension above 4 is not supported");
    return make_chart(ambient, label, hypersphere_axes(n), hypersphere_nodes(n), [n, R, N](const auto* x, auto* out) {
      using T = std::remove_cvref_t<decltype(x[0])>;
      for (int i = 0; i < N; ++i) out[i] = T(0.0);
      hypersphere(x, n, out);
      for (int i = 0; i <= n; ++i) out[i] = out[i] * T(R);
    });
  }
  if (name == "circle3") {
    need(1);
    const double R = params[0];
    require_kind(label, ambient, AmbientKind::Euclidean, "euclidean");
    require_dimension(label, 3, ambient);
    return make_chart(ambient, label, {Axis{0.0, kTwoPi, true}}, {256}, [R](const auto* x, auto* out) {
      using std::cos;
      using std::sin;
      using T = std::remove_cvref_t<decltype(x[0])>;
      out[0] = T(R) * cos(x[0]);
      out[1] = T(R) * sin(x[0]);
      out[2] = T(0.0);
    });
  }
  if (name == "torus_rev") {
    need(2);
    const double R = params[0], r = params[1];
    require_kind(label, ambient, AmbientKind::Euclidean, "euclidean");
    require_dimension(label, 3, ambient);
    if (!(r > 0.0 && R > r)) throw DomainError("torus_rev needs R > r > 0");
    return make_chart(ambient, label, {Axis{0.0, kTwoPi, true}, Axis{0.0, kTwoPi, true}}, {64, 512},
                      [R, r](const auto* x, auto* out) {
                        using std::cos;
                        using std::sin;
                        using T = std::remove_cvref_t<decltype(x[0])>;
                        T ring = T(R) + T(r) * cos(x[1]);
                        out[0] = ring * cos(x[0]);
                        out[1] = ring * sin(x[0]);
                        out[2] = T(r) * sin(x[1]);
                      });
  }
  if (name == "flat_torus4") {
    need(2);
    const double a = params[0], b = params[1];
    require_kind(label, ambient, AmbientKind::Euclidean, "euclidean");
    require_dimension(label, 4, ambient);
    return make_chart(ambient, label, {Axis{0.0, kTwoPi, true}, Axis{0.0, kTwoPi, true}}, {64, 64},
                      [a, b](const auto* x, auto* out) {
                        using std::cos;
                        using std::sin;
                        using T = std::remove_cvref_t<decltype(x[0])>;
                        out[0] = T(a) * cos(x[0]);
                        out[1] = T(a) * sin(x[0]);
                        out[2] = T(b) * cos(x[1]);
                        out[3] = T(b) * sin(x[1]);
                      });
  }
  if (name == "great_subsphere" || name == "small_subsphere") {
    const bool small = name == "small_subsphere";
    need(small ? 3 : 2);
    const int n = as_count(params[0], "subsphere dimension");
    const int m = as_count(params[1], "subsphere codimension");
    require_kind(label, ambient, AmbientKind::SpaceForm, "space form");
    require_dimension(label, n + m, ambient);
    if (n > Jet2::kJetVars) throw DomainError("subsphere dimension above 4 is not supported");
    const double R = ambient.radius();
    const double delta = ambient.curvature();
    if (!small && delta < 0.0) throw DomainError("great_subsphere needs a positively curved space form");
    double scale = R;
    double height = 0.0;
    if (small) {
      const double r = params[2];
      if (!(r > 0.0) || (delta > 0.0 && r >= std::numbers::pi * R))
        throw DomainError("small_subsphere radius must lie in (0, pi/sqrt(delta))");
      scale = delta > 0.0 ? R * std::sin(r / R) : R * std::sinh(r / R);
      height = delta > 0.0 ? R * std::cos(r / R) : R * std::cosh(r / R);
    }
    return make_chart(ambient, label, hypersphere_axes(n), hypersphere_nodes(n),
                      [n, N, scale, height](const auto* x, auto* out) {
                        using T = std::remove_cvref_t<decltype(x[0])>;
                        for (int i = 0; i < N; ++i) out[i] = T(0.0);
                        hypersphere(x, n, out);
                        for (int i = 0; i <= n; ++i) out[i] = out[i] * T(scale);
                        out[N - 1] = out[N - 1] + T(height);
                      });
  }
  if (name == "cone_cross_section") {
    need(3);
    const int k = as_count(params[0], "cone dimension");
    const double a = params[1], t0 = params[2];
    require_kind(label, ambient, AmbientKind::WarpedCone, "cone");
    require_dimension(label, k, ambient);
    if (std::abs(a - ambient.cone_parameter()) > 1e-12)
      throw DomainError("chart " + label + " cone parameter differs from ambient " + ambient.describe());
    if (!(t0 > Ambient::kApexCutoff)) throw DomainError("cross-section radius must exceed the apex cutoff");
    const int n = k - 1;
    if (n > Jet2::kJetVars) throw DomainError("cross-section dimension above 4 is not supported");
    return make_chart(ambient, label, hypersphere_axes(n), hypersphere_nodes(n), [n, t0](const auto* x, auto* out) {
      using T = std::remove_cvref_t<decltype(x[0])>;
      hypersphere(x, n, out);
      for (int i = 0; i <= n; ++i) out[i] = out[i] * T(t0);
    });
  }
  throw DomainError("unknown chart '" + name + "'");
}

Vec ImmersionChart::point(const Vec& x) const {
  if (x.size() != n()) throw DimensionError("parameter point has the wrong dimension");
  Vec out(ambient_.coord_dim());
  point_map_(x.data(), out.data());
  return out;
}

Vec ImmersionChart::wrap(const Vec& x) const {
  Vec y = x;
  for (int i = 0; i < n(); ++i) {
    if (!axes_[i].periodic) continue;
    const double period = axes_[i].upper - axes_[i].lower;
    y(i) = axes_[i].lower + std::fmod(std::fmod(y(i) - axes_[i].lower, period) + period, period);
  }
  return y;
}

ChartJet ImmersionChart::jet(const Vec& x) const {
  const int n_ = n();
  const int N = ambient_.coord_dim();
  if (x.size() != n_) throw DimensionError("parameter point has the wrong dimension");
  ChartJet out;
  out.value.resize(N);
  out.jacobian.resize(N, n_);
  out.hessians.assign(N, Mat(n_, n_));
  if (mode_ == DerivativeMode::Dual) {
    std::vector<Jet2> in(n_), res(N);
    for (int i = 0; i < n_; ++i) in[i] = Jet2::variable(x(i), i);
    jet_map_(in.data(), res.data());
    for (int a = 0; a < N; ++a) {
      out.value(a) = res[a].v;
      for (int i = 0; i < n_; ++i) {
        out.jacobian(a, i) = res[a].g[i];
        for (int j = 0; j < n_; ++j) out.hessians[a](i, j) = res[a].h[i][j];
      }
    }
    return out;
  }
  const double h = fd_step_;
  const double h2 = 10.0 * fd_step_;
  out.value = point(x);
  for (int i = 0; i < n_; ++i) {
    Vec e = Vec::Zero(n_);
    e(i) = h;
    out.jacobian.col(i) = (point(x + e) - point(x - e)) / (2.0 * h);
  }
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) {
      Vec ei = Vec::Zero(n_), ej = Vec::Zero(n_);
      ei(i) = h2;
      ej(j) = h2;
      Vec d2;
      if (i == j) {
        d2 = (point(x + ei) - 2.0 * out.value + point(x - ei)) / (h2 * h2);
      } else {
        d2 = (point(x + ei + ej) - point(x + ei - ej) - point(x - ei + ej) + point(x - ei - ej)) / (4.0 * h2 * h2);
      }
      for (int a = 0; a < N; ++a) {
        out.hessians[a](i, j) = d2(a);
        out.hessians[a](j, i) = d2(a);
      }
    }
  return out;
}

ScalarField ScalarField::from_expression(const std::string& source, int variables) {
  ScalarField f;
  f.expr_ = std::make_shared<ExpressionList>(ExpressionList::parse(source, variables, 1));
  return f;
}

const std::string& ScalarField::source() const {
  static const std::string zero = "0";
  return expr_ ? expr_->source() : zero;
}

void ScalarField::evaluate(const Vec& x, double& value, Vec& gradient, Mat& hessian) const {
  const int n = static_cast<int>(x.size());
  gradient = Vec::Zero(n);
  hessian = Mat::Zero(n, n);
  value = 0.0;
  if (!expr_) return;
  std::vector<Jet2> in(n);
  for (int i = 0; i < n; ++i) in[i] = Jet2::variable(x(i), i);
  Jet2 out;
  expr_->evaluate(in.data(), &out);
  value = out.v;
  for (int i = 0; i < n; ++i) {
    gradient(i) = out.g[i];
    for (int j = 0; j < n; ++j) hessian(i, j) = out.h[i][j];
  }
}

Mat ShapeData::second_orthonormal(int alpha) const {
  return tangent_basis.transpose() * second[alpha] * tangent_basis;
}

Vec ShapeData::normal_coefficients(const Ambient& ambient, const Vec& v) const {
  Vec c(m());
  for (int a = 0; a < m(); ++a) c(a) = ambient.inner(point, normals.col(a), v);
  return c;
}

namespace {

struct Frame {
  Vec point;
  Mat tangents;
  Mat metric;
  Mat chol;
  Mat basis;
  Mat normals;
};

Frame build_frame(const ImmersionChart& chart, const ChartJet& jet, const std::vector<int>* fixed_seeds,
                  std::vector<int>* chosen) {
  const Ambient& M = chart.ambient();
  const int n = chart.n();
  const int N = M.coord_dim();
  Frame fr;
  fr.point = jet.value;
  fr.tangents = jet.jacobian;
  const Vec& p = fr.point;
  fr.metric.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) fr.metric(i, j) = M.inner(p, fr.tangents.col(i), fr.tangents.col(j));
  const double min_eig = min_eigenvalue(fr.metric);
  if (!(min_eig > 1e-16)) throw DegenerateError("immersion is degenerate at this parameter point");
  Eigen::LLT<Mat> llt(fr.metric);
  fr.chol = llt.matrixL();
  fr.basis = fr.chol.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  Mat ortho = fr.tangents * fr.basis;
  Mat seeds = Mat::Identity(N, N);
  for (int c = 0; c < N; ++c) seeds.col(c) = M.project_tangent(p, seeds.col(c));
  auto ip = [&](const Vec& a, const Vec& b) { return M.inner(p, a, b); };
  fr.normals = fixed_seeds ? orthonormal_completion_fixed(ortho, seeds, *fixed_seeds, ip)
                           : orthonormal_completion(ortho, seeds, chart.m(), ip, chosen);
  return fr;
}

}  // namespace

ShapeData shape_data(const ImmersionChart& chart, const Vec& x, bool with_normal_connection) {
  const Ambient& M = chart.ambient();
  const int n = chart.n();
  const int m = chart.m();
  ChartJet jet = chart.jet(x);
  M.check_point(jet.value);
  ShapeData sd;
  sd.x = x;
  Frame fr = build_frame(chart, jet, nullptr, &sd.normal_seeds);
  sd.point = fr.point;
  sd.tangents = fr.tangents;
  sd.metric = fr.metric;
  sd.metric_inv = fr.metric.inverse();
  sd.metric_chol = fr.chol;
  sd.tangent_basis = fr.basis;
  sd.normals = fr.normals;
  sd.volume_density = std::sqrt(fr.metric.determinant());
  const Vec& p = sd.point;
  const int N = M.coord_dim();

  // Ambient covariant second derivatives D_i d_j f = d_ij f + Gamma(d_i f, d_j f).
  std::vector<std::vector<Vec>> cov(n, std::vector<Vec>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec d2(N);
      for (int a = 0; a < N; ++a) d2(a) = jet.hessians[a](i, j);
      cov[i][j] = d2 + M.connection(p, sd.tangents.col(i), sd.tangents.col(j));
    }
  sd.second.assign(m, Mat(n, n));
  for (int al = 0; al < m; ++al)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sd.second[al](i, j) = M.inner(p, cov[i][j], sd.normals.col(al));
  for (int al = 0; al < m; ++al) sd.second[al] = 0.5 * (sd.second[al] + sd.second[al].transpose());

  sd.christoffel.assign(n, Mat(n, n));
  Mat lowered(n, n);
  for (int l = 0; l < n; ++l) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lowered(i, j) = M.inner(p, cov[i][j], sd.tangents.col(l));
    for (int k = 0; k < n; ++k) {
      if (l == 0) sd.christoffel[k].setZero();
      sd.christoffel[k] += sd.metric_inv(k, l) * lowered;
    }
  }

  sd.mean_coeffs.resize(m);
  for (int al = 0; al < m; ++al) sd.mean_coeffs(al) = (sd.metric_inv.cwiseProduct(sd.second[al])).sum() / n;
  sd.mean_curvature = sd.normals * sd.mean_coeffs;

  if (with_normal_connection) {
    const double h = 1e-5;
    sd.normal_connection.assign(n, Mat(m, m));
    for (int i = 0; i < n; ++i) {
      Vec e = Vec::Zero(n);
      e(i) = h;
      Frame plus = build_frame(chart, chart.jet(x + e), &sd.normal_seeds, nullptr);
      Frame minus = build_frame(chart, chart.jet(x - e), &sd.normal_seeds, nullptr);
      for (int al = 0; al < m; ++al) {
        Vec dnu = (plus.normals.col(al) - minus.normals.col(al)) / (2.0 * h);
        dnu += M.connection(p, sd.tangents.col(i), sd.normals.col(al));
        for (int be = 0; be < m; ++be) sd.normal_connection[i](be, al) = M.inner(p, dnu, sd.normals.col(be));
      }
    }
    sd.has_normal_connection = true;
  }
  return sd;
}

LocalFrame local_frame(const ImmersionChart& chart, const Vec& x, const std::vector<int>& seeds) {
  Frame fr = build_frame(chart, chart.jet(x), &seeds, nullptr);
  return {fr.point, fr.tangents, fr.metric, fr.normals};
}

Mat weingarten(const ShapeData& sd, const Vec& xi) {
  if (xi.size() != sd.m()) throw DimensionError("normal direction has the wrong number of components");
  Mat B = Mat::Zero(sd.n(), sd.n());
  for (int al = 0; al < sd.m(); ++al) B -= xi(al) * sd.second_orthonormal(al);
  return 0.5 * (B + B.transpose());
}

Vec principal_curvatures(const ShapeData& sd, const Vec& xi) {
  if (std::abs(xi.norm() - 1.0) > 1e-10) throw DomainError("normal direction is not a unit vector");
  return symmetric_eigenvalues(weingarten(sd, xi));
}

namespace {

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, Jet2::kJetVars, Jet2::kJetVars>;

double small_det(const SmallMat& S) {
  switch (S.rows()) {
    case 1:
      return S(0, 0);
    case 2:
      return S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
    case 3:
      return Eigen::Matrix3d(S).determinant();
    default:
      return Eigen::Matrix4d(S).determinant();
  }
}

const Rule1D& unit_gauss_legendre(int q) {
  thread_local std::map<int, Rule1D> cache;
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, gauss_legendre(q, 0.0, 1.0)).first;
  return it->second;
}

// Integral of |f| over [0, 2 pi), split at the sign changes of f so every arc integrand is smooth.
template <typename F>
double circle_abs_integral(const F& f, int nodes) {
  std::vector<double> vals(nodes + 1);
  double scale = 0.0;
  for (int j = 0; j < nodes; ++j) {
    vals[j] = f(kTwoPi * j / nodes);
    scale = std::max(scale, std::abs(vals[j]));
  }
  // Reuse f(0) at 2 pi so rounding cannot hide a sign change at the seam.
  vals[nodes] = vals[0];
  if (scale == 0.0) return 0.0;
  std::vector<double> breaks;
  for (int j = 0; j < nodes; ++j) {
    const double a = kTwoPi * j / nodes, b = kTwoPi * (j + 1) / nodes;
    if (vals[j] == 0.0) {
      breaks.push_back(a);
    } else if (vals[j] * vals[j + 1] < 0.0) {
      double lo = a, hi = b, flo = vals[j];
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      breaks.push_back(0.5 * (lo + hi));
    }
  }
  if (breaks.empty()) {
    std::vector<double> terms(nodes);
    for (int j = 0; j < nodes; ++j) terms[j] = std::abs(vals[j]) * kTwoPi / nodes;
    return pairwise_sum(terms);
  }
  std::vector<double> terms;
  for (std::size_t b = 0; b < breaks.size(); ++b) {
    const double lo = breaks[b];
    const double hi = b + 1 < breaks.size() ? breaks[b + 1] : breaks[0] + kTwoPi;
    if (hi - lo <= 0.0) continue;
    const int q = std::max(8, static_cast<int>(std::ceil(nodes * (hi - lo) / kTwoPi)));
    const Rule1D& gl = unit_gauss_legendre(q);
    for (int i = 0; i < q; ++i) terms.push_back(gl.weights[i] * (hi - lo) * std::abs(f(lo + (hi - lo) * gl.nodes[i])));
  }
  return pairwise_sum(terms);
}

// Integral over the unit sphere of |det(base + scale * sum_i w_i A_i)| with w running over
// S^{d} in span(A[first..]). Outer polar angles use adaptive Gauss-Legendre, and the last
// circle resolves the sign changes exactly.
class AbsDetSphereIntegral {
 public:
  AbsDetSphereIntegral(const std::vector<SmallMat>& A, const NormalSphereRule& rule)
      : A_(A), rule_(rule), unit_(gauss_legendre(8, 0.0, 1.0)) {}

  double operator()(const SmallMat& base, double scale, std::size_t first) const {
    const std::size_t left = A_.size() - first;
    if (left == 1) return std::abs(small_det(base + scale * A_[first])) + std::abs(small_det(base - scale * A_[first]));
    if (left == 2) {
      const SmallMat& P = A_[first];
      const SmallMat& Q = A_[first + 1];
      SmallMat S;
      return circle_abs_integral(
          [&](double th) {
            S = base + (scale * std::cos(th)) * P + (scale * std::sin(th)) * Q;
            return small_det(S);
          },
          rule_.circle_nodes);
    }
    const int d = static_cast<int>(left) - 1;
    auto level = [&](double phi) {
      const double s = std::sin(phi);
      SmallMat b = base + (scale * std::cos(phi)) * A_[first];
      return std::pow(s, d - 1) * (*this)(b, scale * s, first + 1);
    };
    const int panels = std::max(1, rule_.polar_panels);
    const double width = std::numbers::pi / panels;
    std::vector<double> coarse(panels);
    for (int i = 0; i < panels; ++i) coarse[i] = panel(level, i * width, (i + 1) * width);
    const double estimate = std::abs(pairwise_sum(coarse));
    if (estimate == 0.0) return 0.0;
    const double tol = rule_.relative_tolerance * estimate / panels;
    std::vector<double> terms(panels);
    for (int i = 0; i < panels; ++i) terms[i] = adapt(level, i * width, (i + 1) * width, coarse[i], tol, 0);
    return pairwise_sum(terms);
  }

 private:
  template <typename F>
  double panel(const F& f, double a, double b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < unit_.nodes.size(); ++i) s += unit_.weights[i] * f(a + (b - a) * unit_.nodes[i]);
    return s * (b - a);
  }

  template <typename F>
  double adapt(const F& f, double a, double b, double whole, double tol, int depth) const {
    const double mid = 0.5 * (a + b);
    const double l = panel(f, a, mid);
    const double r = panel(f, mid, b);
    if (depth >= 20 || std::abs(l + r - whole) <= tol) return l + r;
    return adapt(f, a, mid, l, 0.5 * tol, depth + 1) + adapt(f, mid, b, r, 0.5 * tol, depth + 1);
  }

  const std::vector<SmallMat>& A_;
  const NormalSphereRule& rule_;
  Rule1D unit_;
};

}  // namespace

double k_star(const ShapeData& sd, const NormalSphereRule& rule) {
  const int m = sd.m();
  std::vector<SmallMat> A;
  for (int al = 0; al < m; ++al) A.push_back(sd.second_orthonormal(al));
  if (m == 1) return 2.0 * std::abs(small_det(A[0]));
  AbsDetSphereIntegral integral(A, rule);
  return integral(SmallMat::Zero(sd.n(), sd.n()), 1.0, 0);
}

NormalClassification classify_normal(const ShapeData& sd, const Vec& xi, double eps_class) {
  const double k1 = principal_curvatures(sd, xi)(0);
  NormalClass label = k1 > eps_class ? NormalClass::L : (k1 < -eps_class ? NormalClass::N : NormalClass::M);
  return {label, k1, eps_class};
}

char normal_class_letter(NormalClass c) {
  switch (c) {
    case NormalClass::L:
      return 'L';
    case NormalClass::M:
      return 'M';
    case NormalClass::N:
      return 'N';
  }
  return '?';
}

SigmaPlusProbe sigma_plus_probe(const ShapeData& sd, int samples, int ascent_steps, double eps_class) {
  const int m = sd.m();
  auto kappa1 = [&](const Vec& xi) { return symmetric_eigenvalues(weingarten(sd, xi))(0); };
  SigmaPlusProbe best;
  best.value = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec& xi) {
    const double v = kappa1(xi);
    if (v > best.value) {
      best.value = v;
      best.xi = xi;
    }
  };
  if (m == 1) {
    consider(Vec::Constant(1, 1.0));
    consider(Vec::Constant(1, -1.0));
    best.positive = best.value > eps_class;
    return best;
  }
  if (m == 2) {
    for (int j = 0; j < samples; ++j) {
      const double th = kTwoPi * j / samples;
      Vec xi(2);
      xi << std::cos(th), std::sin(th);
      consider(xi);
    }
  } else if (m == 3) {
    // Fibonacci lattice.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < samples; ++j) {
      const double z = 1.0 - 2.0 * (j + 0.5) / samples;
      const double rad = std::sqrt(1.0 - z * z);
      Vec xi(3);
      xi << rad * std::cos(golden * j), rad * std::sin(golden * j), z;
      consider(xi);
    }
  } else {
    std::mt19937_64 rng(0);
    std::normal_distribution<double> nd;
    for (int j = 0; j < samples; ++j) {
      Vec xi(m);
      for (int a = 0; a < m; ++a) xi(a) = nd(rng);
      consider(xi / xi.norm());
    }
  }
  // Projected ascent; kappa_1 is concave in xi (a minimum of linear functions).
  double step = 0.05;
  const double h = 1e-7;
  for (int it = 0; it < ascent_steps; ++it) {
    Vec grad(m);
    for (int a = 0; a < m; ++a) {
      Vec e = Vec::Zero(m);
      e(a) = h;
      grad(a) = (kappa1(best.xi + e) - kappa1(best.xi - e)) / (2.0 * h);
    }
    grad -= grad.dot(best.xi) * best.xi;
    if (grad.norm() < 1e-14) break;
    Vec trial = best.xi + step * grad / grad.norm();
    trial.normalize();
    const double v = kappa1(trial);
    if (v > best.value) {
      best.value = v;
      best.xi = trial;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  best.positive = best.value > eps_class;
  return best;
}

HRank h_rank_and_xi(const ShapeData& sd, double tol_rank) {
  const int n = sd.n(), m = sd.m();
  Mat H(m, n * (n + 1) / 2);
  for (int al = 0; al < m; ++al) {
    Mat A = sd.second_orthonormal(al);
    int c = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) H(al, c++) = i == j ? A(i, j) : std::sqrt(2.0) * A(i, j);
  }
  Eigen::JacobiSVD<Mat> svd(H, Eigen::ComputeThinU);
  HRank out;
  out.singular_values = svd.singularValues();
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i)
    if (out.singular_values(i) > tol_rank) ++out.rank;
  if (out.rank == 1) {
    Vec xi = svd.matrixU().col(0);
    xi.normalize();
    if (principal_curvatures(sd, xi)(0) > 0.0) {
      out.xi = xi;
    } else if (principal_curvatures(sd, -xi)(0) > 0.0) {
      out.xi = -xi;
    } else {
      throw AmbiguousOrientation("h has rank 1 but neither orientation of its image has kappa_1 > 0");
    }
  }
  return out;
}

}  // namespace tubecomp
