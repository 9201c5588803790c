#include "tubecomp/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tubecomp/comparison.hpp"
#include "tubecomp/errors.hpp"
#include "tubecomp/model_functions.hpp"

namespace tubecomp {

namespace {

constexpr double kTiny = 1e-300;
constexpr long kChunk = 4096;

std::vector<int> resolve_counts(const ImmersionChart& chart, const std::vector<int>& counts) {
  if (counts.empty()) return chart.default_nodes();
  if (static_cast<int>(counts.size()) != chart.n())
    throw DimensionError("quadrature needs one node count per parameter axis (n = " + std::to_string(chart.n()) + ")");
  for (int c : counts)
    if (c < 2) throw DomainError("quadrature node counts must be at least 2");
  return counts;
}

std::vector<int> halved(const std::vector<int>& counts) {
  std::vector<int> out;
  for (int c : counts) out.push_back(std::max(2, c / 2));
  return out;
}

double integrate_cache(const SigmaIntegralCache& cache, const SigmaIntegrand& integrand, Execution exec) {
  std::vector<double> terms(cache.shapes.size());
  parallel_for(terms.size(), exec, [&](std::size_t i) { terms[i] = cache.weights[i] * integrand(cache.shapes[i]); });
  return pairwise_sum(terms);
}

IntegralEstimate estimate(const ImmersionChart& chart, const SigmaIntegralCache& high, const SigmaIntegrand& integrand,
                          Execution exec) {
  IntegralEstimate out;
  out.counts = high.counts;
  out.value = integrate_cache(high, integrand, exec);
  const SigmaIntegralCache low = sigma_cache(chart, halved(high.counts), exec);
  out.low_order_counts = low.counts;
  out.low_order_value = integrate_cache(low, integrand, exec);
  out.error_estimate = std::abs(out.value - out.low_order_value) / std::max(std::abs(out.value), kTiny);
  return out;
}

void finish_report(InequalityReport& r, double eq_tol) {
  r.eq_tol = eq_tol;
  r.margin = r.integral - r.bound;
  r.relative_margin = r.margin / r.bound;
  r.equality = std::abs(r.margin) <= eq_tol * r.bound;
}

double mean_norm(const ShapeData& sd) { return sd.mean_coeffs.norm(); }

}  // namespace

double SigmaIntegralCache::volume() const { return pairwise_sum(weights); }

SigmaIntegralCache sigma_cache(const ImmersionChart& chart, const std::vector<int>& counts, Execution exec) {
  SigmaIntegralCache cache;
  cache.counts = resolve_counts(chart, counts);
  const ProductRule rule = product_rule(chart.axes(), cache.counts);
  const std::size_t N = rule.weights.size();
  cache.shapes.resize(N);
  cache.weights.resize(N);
  parallel_for(N, exec, [&](std::size_t i) {
    cache.shapes[i] = shape_data(chart, rule.nodes.row(static_cast<Eigen::Index>(i)).transpose(), false);
    cache.weights[i] = rule.weights[i] * cache.shapes[i].volume_density;
  });
  return cache;
}

IntegralEstimate integrate_over_sigma(const ImmersionChart& chart, const SigmaIntegrand& integrand,
                                      const std::vector<int>& counts, Execution exec) {
  return estimate(chart, sigma_cache(chart, counts, exec), integrand, exec);
}

InequalityReport chern_lashof(const ImmersionChart& chart, const FunctionalOptions& options) {
  const Ambient& M = chart.ambient();
  if (M.compact()) throw NotApplicableError("Chern-Lashof bound needs a noncompact ambient");
  InequalityReport r;
  r.functional = "chern-lashof";
  r.bound = 2.0 * M.avr() * sphere_area(M.dim());
  const NormalSphereRule sphere = options.sphere;
  const SigmaIntegralCache cache = sigma_cache(chart, options.counts, options.exec);
  r.history = estimate(chart, cache, [&](const ShapeData& sd) { return k_star(sd, sphere); }, options.exec);
  r.integral = r.history.value;
  finish_report(r, options.eq_tol);
  return r;
}

InequalityReport willmore_chen(const ImmersionChart& chart, const FunctionalOptions& options) {
  const Ambient& M = chart.ambient();
  const int n = chart.n();
  if (n < 2) throw DimensionError("Willmore-Chen bound needs n >= 2, got n = " + std::to_string(n));
  if (M.compact()) throw NotApplicableError("Willmore-Chen bound needs a noncompact ambient");
  InequalityReport r;
  r.functional = "willmore";
  r.bound = M.avr() * sphere_area(n + 1);
  const SigmaIntegralCache cache = sigma_cache(chart, options.counts, options.exec);
  r.history = estimate(chart, cache, [n](const ShapeData& sd) { return std::pow(mean_norm(sd), n); }, options.exec);
  r.integral = r.history.value;
  r.mean_curvature_min = std::numeric_limits<double>::infinity();
  r.mean_curvature_max = 0.0;
  for (const ShapeData& sd : cache.shapes) {
    r.mean_curvature_min = std::min(r.mean_curvature_min, mean_norm(sd));
    r.mean_curvature_max = std::max(r.mean_curvature_max, mean_norm(sd));
  }
  r.mean_curvature_constant = r.mean_curvature_max - r.mean_curvature_min <= 1e-8;
  finish_report(r, options.eq_tol);
  return r;
}

InequalityReport fenchel(const ImmersionChart& chart, const FunctionalOptions& options) {
  if (chart.n() != 1) throw DimensionError("Fenchel bound needs a curve (n = 1), got n = " + std::to_string(chart.n()));
  if (!chart.axes()[0].periodic) throw DomainError("Fenchel bound needs a closed curve (periodic parameter)");
  InequalityReport r;
  r.functional = "fenchel";
  r.bound = 2.0 * std::numbers::pi;
  // For a curve H is the curvature vector and sqrt det g dt is arclength.
  const SigmaIntegralCache cache = sigma_cache(chart, options.counts, options.exec);
  r.history = estimate(chart, cache, mean_norm, options.exec);
  r.integral = r.history.value;
  if (chart.m() == 2) {
    const NormalSphereRule sphere = options.sphere;
    r.k_star_integral = integrate_cache(cache, [&](const ShapeData& sd) { return k_star(sd, sphere); }, options.exec);
    r.k_star_gap = std::abs(r.k_star_integral - 4.0 * r.integral) / std::max(4.0 * r.integral, kTiny);
  }
  finish_report(r, options.eq_tol);
  return r;
}

TubeBound tube_bound_integral(const ImmersionChart& chart, double r0, const TubeBoundOptions& options) {
  if (!(r0 >= 0.0) || !std::isfinite(r0)) throw DomainError("tube radius must be finite and nonnegative");
  if (options.radial_nodes < 1) throw DomainError("radial node count must be positive");
  TubeBound out;
  if (r0 == 0.0) return out;
  const Ambient& M = chart.ambient();
  // Space forms use their exact Jacobian; the cone (sectional >= 0) uses the flat-model bound.
  const double delta = M.curvature();
  const int m = chart.m();
  SphereRule normals;
  if (m == 1) {
    normals = sphere_rule(0, 1);
  } else if (m == 2) {
    normals = sphere_rule(1, std::max(1, options.circle_nodes / 2));
  } else {
    normals = sphere_rule(m - 1, options.polar_nodes);
  }
  const Rule1D unit = gauss_legendre(options.radial_nodes, 0.0, 1.0);
  const SigmaIntegralCache cache = sigma_cache(chart, options.counts, options.exec);
  const std::size_t N = cache.shapes.size();
  std::vector<double> terms(N);
  std::vector<long> clamps(N, 0);
  std::vector<double> cutoffs(N, std::numeric_limits<double>::infinity());
  parallel_for(N, options.exec, [&](std::size_t i) {
    const ShapeData& sd = cache.shapes[i];
    std::vector<double> per_direction;
    for (Eigen::Index d = 0; d < normals.directions.cols(); ++d) {
      const Vec xi = normals.directions.col(d);
      const Vec kappa = principal_curvatures(sd, xi);
      const double mu = M.cut_distance(sd.point, sd.normal_vector(xi));
      const double rho = model_tilde_tau(ModelData::principal(delta, kappa));
      const double cutoff = std::min({r0, mu, rho});
      cutoffs[i] = std::min(cutoffs[i], cutoff);
      double radial = 0.0;
      for (std::size_t q = 0; q < unit.nodes.size(); ++q) {
        const double r = cutoff * unit.nodes[q];
        const double s = s_delta(delta, r), c = c_delta(delta, r);
        double jac = std::pow(s, m - 1);
        for (Eigen::Index a = 0; a < kappa.size(); ++a) jac *= c + s * kappa(a);
        if (jac < 0.0) {
          ++clamps[i];
          jac = 0.0;
        }
        radial += cutoff * unit.weights[q] * jac;
      }
      per_direction.push_back(normals.weights[d] * radial);
    }
    terms[i] = cache.weights[i] * pairwise_sum(per_direction);
  });
  out.value = pairwise_sum(terms);
  for (std::size_t i = 0; i < N; ++i) {
    out.clamp_events += clamps[i];
    out.min_cutoff = std::min(out.min_cutoff, cutoffs[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------

SigmaLocator::SigmaLocator(const ImmersionChart& chart, std::vector<int> counts, int refine_iters, double query_radius)
    : chart_(&chart),
      euclidean_(chart.ambient().kind() == AmbientKind::Euclidean),
      refine_iters_(refine_iters) {
  if (counts.empty()) {
    for (int c : chart.default_nodes()) counts.push_back(2 * c);
  }
  counts = resolve_counts(chart, counts);
  const int n = chart.n();
  const auto& axes = chart.axes();
  std::size_t total = 1;
  for (int c : counts) total *= static_cast<std::size_t>(c);
  params_.resize(static_cast<Eigen::Index>(total), n);
  std::vector<int> idx(n, 0);
  auto coordinate = [&](int axis, int j) {
    const Axis& a = axes[axis];
    return a.periodic ? a.lower + (a.upper - a.lower) * j / counts[axis]
                      : a.lower + (a.upper - a.lower) * j / (counts[axis] - 1);
  };
  for (std::size_t row = 0; row < total; ++row) {
    std::size_t rest = row;
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % counts[a]);
      rest /= counts[a];
    }
    for (int a = 0; a < n; ++a) params_(static_cast<Eigen::Index>(row), a) = coordinate(a, idx[a]);
  }
  const Ambient& M = chart.ambient();
  points_.resize(static_cast<Eigen::Index>(total), M.coord_dim());
  for (std::size_t row = 0; row < total; ++row)
    points_.row(static_cast<Eigen::Index>(row)) = chart.point(params_.row(static_cast<Eigen::Index>(row)).transpose()).transpose();

  // Largest image of a grid edge, scaled to a half-diagonal bound of a grid cell.
  double edge = 0.0;
  std::vector<std::size_t> stride(n, 1);
  for (int a = n - 2; a >= 0; --a) stride[a] = stride[a + 1] * counts[a + 1];
  for (std::size_t row = 0; row < total; ++row) {
    std::size_t rest = row;
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % counts[a]);
      rest /= counts[a];
    }
    for (int a = 0; a < n; ++a) {
      std::size_t next;
      if (idx[a] + 1 < counts[a]) {
        next = row + stride[a];
      } else if (axes[a].periodic) {
        next = row - static_cast<std::size_t>(idx[a]) * stride[a];
      } else {
        continue;
      }
      edge = std::max(edge, ambient_distance(points_.row(static_cast<Eigen::Index>(row)).transpose(),
                                             points_.row(static_cast<Eigen::Index>(next)).transpose()));
    }
  }
  resolution_ = edge * std::max(1.0, 0.65 * std::sqrt(static_cast<double>(n)));
  lower_ = points_.colwise().minCoeff().transpose();
  upper_ = points_.colwise().maxCoeff().transpose();
  const Vec radii = points_.rowwise().norm();
  min_radius_ = radii.minCoeff();
  max_radius_ = radii.maxCoeff();

  if (M.kind() != AmbientKind::SpaceForm) {
    // Cartesian charts: the cone metric a^2 I + (1 - a^2) u u^T lies between min(1, a^2) I and
    // max(1, a^2) I, so chart distances bound ambient distances from below up to min(1, a).
    hashed_ = true;
    proxy_ = M.kind() == AmbientKind::WarpedCone ? std::min(1.0, M.cone_parameter()) : 1.0;
    cell_ = std::max(query_radius + resolution_, 4.0 * resolution_) / proxy_;
    if (!(cell_ > 0.0)) cell_ = 1.0;
    cells_.reserve(total);
    for (std::size_t row = 0; row < total; ++row)
      cells_.emplace_back(cell_key(points_.row(static_cast<Eigen::Index>(row)).transpose()), row);
    std::sort(cells_.begin(), cells_.end());
  }
}

std::uint64_t SigmaLocator::cell_key(const Vec& p) const {
  std::uint64_t key = 0x9e3779b97f4a7c15ULL;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const auto c = static_cast<std::int64_t>(std::floor(p(i) / cell_));
    key ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + (key << 6) + (key >> 2);
  }
  return key;
}

double SigmaLocator::ambient_distance(const Vec& p, const Vec& q) const {
  if (euclidean_) return (p - q).norm();
  return chart_->ambient().distance(p, q).distance;
}

std::pair<std::size_t, double> SigmaLocator::coarse(const Vec& p, double good_enough, double give_up) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  if (hashed_) {
    const int k = static_cast<int>(p.size());
    std::vector<int> offset(k, -1);
    Vec probe(k);
    while (true) {
      for (int i = 0; i < k; ++i) probe(i) = p(i) + offset[i] * cell_;
      const std::uint64_t key = cell_key(probe);
      auto range = std::equal_range(cells_.begin(), cells_.end(), std::make_pair(key, std::size_t{0}),
                                    [](const auto& a, const auto& b) { return a.first < b.first; });
      for (auto it = range.first; it != range.second; ++it) {
        const auto row = points_.row(static_cast<Eigen::Index>(it->second));
        const double e = (row - p.transpose()).norm();
        if (proxy_ * e >= best_d) continue;
        const double d = euclidean_ ? e : ambient_distance(p, row.transpose());
        if (d < best_d) {
          best_d = d;
          best = it->second;
          if (best_d <= good_enough) return {best, best_d};
        }
      }
      int i = 0;
      while (i < k && offset[i] == 1) offset[i++] = -1;
      if (i == k) break;
      ++offset[i];
    }
    // Points outside the neighboring cells are at least one cell size away in the chart.
    const double reach = proxy_ * cell_;
    if (best_d <= reach) return {best, best_d};
    if (give_up <= reach) return {best, std::numeric_limits<double>::infinity()};
  }
  for (Eigen::Index row = 0; row < points_.rows(); ++row) {
    const double d = ambient_distance(p, points_.row(row).transpose());
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(row);
      if (best_d <= good_enough) break;
    }
  }
  return {best, best_d};
}

SigmaDistance SigmaLocator::refine(const Vec& p, std::size_t start) const {
  const ImmersionChart& chart = *chart_;
  const Ambient& M = chart.ambient();
  const auto& axes = chart.axes();
  const int n = chart.n();
  auto clamp = [&](Vec x) {
    x = chart.wrap(x);
    for (int a = 0; a < n; ++a)
      if (!axes[a].periodic) x(a) = std::clamp(x(a), axes[a].lower, axes[a].upper);
    return x;
  };
  auto objective = [&](const Vec& x) {
    const double d = ambient_distance(p, chart.point(x));
    return 0.5 * d * d;
  };
  Vec x = params_.row(static_cast<Eigen::Index>(start)).transpose();
  double value = objective(x);
  double lambda = 0.0;
  for (int it = 0; it < refine_iters_ && value > 0.0; ++it) {
    const ChartJet jet = chart.jet(x);
    Vec grad(n);
    Mat hess(n, n);
    if (euclidean_) {
      const Vec r = jet.value - p;
      grad = jet.jacobian.transpose() * r;
      hess = jet.jacobian.transpose() * jet.jacobian;
      for (Eigen::Index a = 0; a < r.size(); ++a) hess += r(a) * jet.hessians[a];
    } else {
      const Vec vel = M.distance(jet.value, p).velocity;
      for (int i = 0; i < n; ++i) {
        grad(i) = -M.inner(jet.value, vel, jet.jacobian.col(i));
        for (int j = 0; j <= i; ++j) hess(i, j) = hess(j, i) = M.inner(jet.value, jet.jacobian.col(i), jet.jacobian.col(j));
      }
    }
    if (grad.norm() <= 1e-15 * std::max(1.0, std::sqrt(value))) break;
    const double scale = std::max(hess.diagonal().cwiseAbs().maxCoeff(), 1e-12);
    bool improved = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      const Mat damped = hess + lambda * scale * Mat::Identity(n, n);
      Eigen::LDLT<Mat> ldlt(damped);
      Vec step;
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        step = -ldlt.solve(grad);
      } else {
        lambda = std::max(1e-3, 10.0 * lambda);
        continue;
      }
      const Vec trial = clamp(x + step);
      const double tv = objective(trial);
      if (tv < value) {
        x = trial;
        const bool tiny = value - tv <= 1e-16 * value;
        value = tv;
        lambda *= 0.1;
        if (lambda < 1e-12) lambda = 0.0;
        improved = !tiny;
        break;
      }
      lambda = std::max(1e-3, 10.0 * lambda);
    }
    if (!improved) break;
  }
  return {std::sqrt(2.0 * value), x};
}

SigmaDistance SigmaLocator::nearest(const Vec& p) const {
  const auto [start, d0] = coarse(p, 0.0, std::numeric_limits<double>::infinity());
  SigmaDistance out = refine(p, start);
  if (!(out.distance <= d0)) return {d0, params_.row(static_cast<Eigen::Index>(start)).transpose()};
  return out;
}

bool SigmaLocator::within(const Vec& p, double r) const {
  const auto [start, d0] = coarse(p, r, r + resolution_);
  if (d0 <= r) return true;
  if (d0 > r + resolution_) return false;
  return refine(p, start).distance <= r;
}

SigmaDistance distance_to_sigma(const ImmersionChart& chart, const Vec& p, const std::vector<int>& coarse_counts,
                                int refine_iters) {
  chart.ambient().check_point(p);
  return SigmaLocator(chart, coarse_counts, refine_iters).nearest(p);
}

TubeReport tube_volume_mc(const ImmersionChart& chart, double r0, const TubeMcOptions& options) {
  if (!(r0 >= 0.0) || !std::isfinite(r0)) throw DomainError("tube radius must be finite and nonnegative");
  if (options.samples < 1) throw DomainError("sample count must be positive");
  const Ambient& M = chart.ambient();
  if (M.kind() == AmbientKind::SpaceForm) throw NotApplicableError("Monte Carlo tube volume supports euclidean and cone ambients");
  TubeReport rep;
  rep.r0 = r0;
  rep.seed = options.seed;
  if (r0 == 0.0) return rep;
  rep.samples = options.samples;
  rep.bound_integral = tube_bound_integral(chart, r0, options.bound).value;

  const SigmaLocator locator(chart, {}, 40, r0);
  const double pad = 1.1 * r0 + locator.resolution();
  const double edge = 0.05 * r0;
  const int k = M.dim();
  const bool cone = M.kind() == AmbientKind::WarpedCone;

  Vec lo, hi;
  double shell_lo = 0.0, shell_hi = 0.0;
  if (cone) {
    shell_lo = std::max(2.0 * Ambient::kApexCutoff, locator.min_radius() - pad);
    shell_hi = locator.max_radius() + pad;
    rep.sampling_volume = std::pow(M.cone_parameter(), k - 1) * sphere_area(k) *
                          (std::pow(shell_hi, k) - std::pow(shell_lo, k)) / k;
  } else {
    if (options.box_lower.size() != 0 || options.box_upper.size() != 0) {
      if (options.box_lower.size() != k || options.box_upper.size() != k)
        throw DimensionError("bounding box needs k = " + std::to_string(k) + " coordinates per corner");
      lo = options.box_lower;
      hi = options.box_upper;
      if (!((hi - lo).minCoeff() > 0.0)) throw DomainError("bounding box must have positive extent");
    } else {
      lo = locator.lower().array() - pad;
      hi = locator.upper().array() + pad;
    }
    rep.sampling_volume = (hi - lo).prod();
  }

  const long chunks = (options.samples + kChunk - 1) / kChunk;
  std::vector<long> hits(static_cast<std::size_t>(chunks), 0);
  std::vector<char> touched(static_cast<std::size_t>(chunks), 0);
  parallel_for(static_cast<std::size_t>(chunks), options.exec, [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(static_cast<std::uint64_t>(c) >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> gauss;
    const long begin = static_cast<long>(c) * kChunk;
    const long end = std::min(options.samples, begin + kChunk);
    Vec p(k);
    for (long s = begin; s < end; ++s) {
      bool near_edge = false;
      if (cone) {
        Vec u(k);
        for (int i = 0; i < k; ++i) u(i) = gauss(rng);
        const double lo_k = std::pow(shell_lo, k), hi_k = std::pow(shell_hi, k);
        const double t = std::pow(lo_k + uniform(rng) * (hi_k - lo_k), 1.0 / k);
        p = t * u.normalized();
        near_edge = t > shell_hi - edge || t < shell_lo + edge;
      } else {
        for (int i = 0; i < k; ++i) {
          p(i) = lo(i) + uniform(rng) * (hi(i) - lo(i));
          near_edge = near_edge || p(i) < lo(i) + edge || p(i) > hi(i) - edge;
        }
      }
      if (locator.within(p, r0)) {
        ++hits[c];
        if (near_edge) touched[c] = 1;
      }
    }
  });
  if (std::any_of(touched.begin(), touched.end(), [](char t) { return t != 0; }))
    throw BoundingError("an accepted sample touches the boundary of the sampling region");
  for (long h : hits) rep.accepted += h;
  const double frac = static_cast<double>(rep.accepted) / static_cast<double>(rep.samples);
  rep.estimate = rep.sampling_volume * frac;
  rep.standard_error = rep.sampling_volume * std::sqrt(frac * (1.0 - frac) / static_cast<double>(rep.samples));
  return rep;
}

}  // namespace tubecomp
