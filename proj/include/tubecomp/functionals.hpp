#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tubecomp/immersion.hpp"
#include "tubecomp/parallel.hpp"

namespace tubecomp {

// Shape data at every node of a product rule on the parameter box, with volume weights
// (quadrature weight times sqrt det g).
struct SigmaIntegralCache {
  std::vector<int> counts;
  std::vector<ShapeData> shapes;
  std::vector<double> weights;

  double volume() const;
};
SigmaIntegralCache sigma_cache(const ImmersionChart& chart, const std::vector<int>& counts = {},
                               Execution exec = Execution::Parallel);

// Result at the requested orders together with a half-order refinement for an error estimate.
struct IntegralEstimate {
  double value = 0.0;
  double low_order_value = 0.0;
  std::vector<int> counts;
  std::vector<int> low_order_counts;
  double error_estimate = 0.0;  // |value - low_order_value| / max(|value|, tiny)
};

using SigmaIntegrand = std::function<double(const ShapeData&)>;

// Integral of the integrand against dvol_Sigma. Empty counts select the chart defaults.
IntegralEstimate integrate_over_sigma(const ImmersionChart& chart, const SigmaIntegrand& integrand,
                                      const std::vector<int>& counts = {}, Execution exec = Execution::Parallel);

struct InequalityReport {
  std::string functional;
  double integral = 0.0;
  double bound = 0.0;
  double margin = 0.0;           // integral - bound
  double relative_margin = 0.0;  // margin / bound
  double eq_tol = 1e-6;
  bool equality = false;
  IntegralEstimate history;

  // Willmore-Chen: spread of |H| over the nodes.
  double mean_curvature_min = std::numeric_limits<double>::quiet_NaN();
  double mean_curvature_max = std::numeric_limits<double>::quiet_NaN();
  bool mean_curvature_constant = false;

  // Fenchel with m = 2: integral of K* and its relative gap to 4 times the total curvature.
  double k_star_integral = std::numeric_limits<double>::quiet_NaN();
  double k_star_gap = std::numeric_limits<double>::quiet_NaN();

  // True when the integral falls below the bound by more than tol * bound.
  bool violated(double tol = 1e-7) const { return margin < -tol * bound; }
};

struct FunctionalOptions {
  std::vector<int> counts;  // Sigma rule per-axis node counts; empty = chart default
  NormalSphereRule sphere;
  double eq_tol = 1e-6;
  Execution exec = Execution::Parallel;
};

// Integral of K* against the bound 2 AVR |S^{n+m-1}|.
InequalityReport chern_lashof(const ImmersionChart& chart, const FunctionalOptions& options = {});
// Integral of |H|^n against the bound AVR |S^n|; n >= 2.
InequalityReport willmore_chen(const ImmersionChart& chart, const FunctionalOptions& options = {});
// Total absolute curvature of a closed curve against 2 pi.
InequalityReport fenchel(const ImmersionChart& chart, const FunctionalOptions& options = {});

struct TubeBoundOptions {
  std::vector<int> counts;
  int radial_nodes = 16;
  int circle_nodes = 256;  // m = 2 normal circle
  int polar_nodes = 32;    // m = 3: polar_nodes x 2 polar_nodes product rule
  Execution exec = Execution::Parallel;
};

struct TubeBound {
  double value = 0.0;
  // Nodes below the radial cutoff where the Jacobian product was negative and had to be clamped.
  long clamp_events = 0;
  double min_cutoff = std::numeric_limits<double>::infinity();  // smallest radial cutoff used
};

// Normal-bundle integral of s^{m-1} prod (c + s kappa_i) over radii below min(r0, mu, rho).
TubeBound tube_bound_integral(const ImmersionChart& chart, double r0, const TubeBoundOptions& options = {});

struct SigmaDistance {
  double distance = std::numeric_limits<double>::infinity();
  Vec x;
};

// Nearest point of f(Sigma): coarse search over a parameter grid, then damped Newton refinement.
class SigmaLocator {
 public:
  // Empty counts use twice the chart default per axis. `query_radius` tunes the spatial hash of
  // the Euclidean fast path and may be left at 0.
  SigmaLocator(const ImmersionChart& chart, std::vector<int> counts = {}, int refine_iters = 40,
               double query_radius = 0.0);

  SigmaDistance nearest(const Vec& p) const;
  // Whether d(p, f(Sigma)) <= r; refines only inside the grid-resolution band around r.
  bool within(const Vec& p, double r) const;

  // Upper bound on the distance from any point of f(Sigma) to the nearest grid point.
  double resolution() const { return resolution_; }
  // Componentwise bounds of the grid image (Euclidean and cone charts).
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  double min_radius() const { return min_radius_; }
  double max_radius() const { return max_radius_; }

 private:
  // Index of the nearest grid point and its distance; stops early below `good_enough` and
  // reports infinity once the nearest point is known to lie beyond `give_up`.
  std::pair<std::size_t, double> coarse(const Vec& p, double good_enough, double give_up) const;
  SigmaDistance refine(const Vec& p, std::size_t start) const;
  double ambient_distance(const Vec& p, const Vec& q) const;

  const ImmersionChart* chart_;
  bool euclidean_;
  int refine_iters_;
  Mat params_;  // row per grid node
  Mat points_;  // row per grid node
  double resolution_ = 0.0;
  Vec lower_, upper_;
  double min_radius_ = 0.0, max_radius_ = 0.0;
  // Spatial hash in chart coordinates (Cartesian charts): cell size, the factor by which chart
  // distances bound ambient distances from below, and sorted (cell key, node) pairs.
  bool hashed_ = false;
  double proxy_ = 1.0;
  double cell_ = 0.0;
  std::vector<std::pair<std::uint64_t, std::size_t>> cells_;
  std::uint64_t cell_key(const Vec& p) const;
};

SigmaDistance distance_to_sigma(const ImmersionChart& chart, const Vec& p, const std::vector<int>& coarse_counts = {},
                                int refine_iters = 40);

struct TubeReport {
  double r0 = 0.0;
  double estimate = 0.0;
  double standard_error = 0.0;
  double bound_integral = 0.0;
  long samples = 0;
  long accepted = 0;
  std::uint64_t seed = 0;
  double sampling_volume = 0.0;
  // estimate <= bound_integral + 3 standard errors
  bool within_bound() const { return estimate <= bound_integral + 3.0 * standard_error; }
};

struct TubeMcOptions {
  long samples = 1000000;
  std::uint64_t seed = 1;
  // Euclidean sampling box; empty = grid hull inflated by 1.1 r0 plus the grid resolution.
  Vec box_lower;
  Vec box_upper;
  TubeBoundOptions bound;
  Execution exec = Execution::Parallel;
};

// Monte Carlo volume of the tube {p : d(p, f(Sigma)) <= r0}. Samples are drawn in fixed-size
// chunks, each seeded from (seed, chunk index), so results do not depend on the thread count.
TubeReport tube_volume_mc(const ImmersionChart& chart, double r0, const TubeMcOptions& options = {});

}  // namespace tubecomp
