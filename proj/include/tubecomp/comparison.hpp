#pragma once

#include <limits>
#include <string>
#include <vector>

#include "tubecomp/normal_exp.hpp"

namespace tubecomp {

// Sampled verification of a curvature or shape hypothesis: the minimum of (value - bound).
struct HypothesisCheck {
  std::string description;
  double sampled_min = std::numeric_limits<double>::infinity();
  int samples = 0;
  double rounding = 0.0;  // floating-point error bound of the samples, added to the tolerance

  bool satisfied(double tol = 1e-8) const { return sampled_min >= -(tol + rounding); }
};

struct ComparisonSample {
  std::string check;
  std::vector<double> t;
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> ratio;  // lhs / rhs; NaN where rhs vanishes
  std::vector<bool> violation;
  double margin = std::numeric_limits<double>::infinity();  // min(rhs - lhs)
  double tol_report = 1e-7;
  double ratio_slack = 1e-8;
  bool ratio_nonincreasing = true;
  std::vector<HypothesisCheck> hypotheses;

  // Derivative inequality of the Hessian monotonicity check.
  std::vector<double> lhs_derivative;
  std::vector<double> rhs_derivative;
  std::vector<bool> derivative_violation;
  bool derivative_negative = true;

  // Focal ordering of the det T comparison.
  double tilde_tau = std::numeric_limits<double>::quiet_NaN();
  double model_tilde_tau = std::numeric_limits<double>::quiet_NaN();
  bool tilde_tau_ordered = true;

  // Equality detection of the Jacobian comparison.
  bool equality = false;
  double equality_gap = std::numeric_limits<double>::quiet_NaN();
  bool rigidity_checked = false;
  bool rigidity_holds = false;
  double fd_crosscheck_gap = std::numeric_limits<double>::quiet_NaN();

  bool any_violation() const;
  bool passed() const;
  // Replaces tol_report and recomputes the per-node violation flags.
  void set_tol_report(double tol);
};

enum class ComparisonMode { Principal, Umbilic };

// Comparison data in the model space form of curvature delta.
struct ModelData {
  double delta = 0.0;
  ComparisonMode mode = ComparisonMode::Principal;
  Vec kappa;                  // ascending model principal curvatures (principal mode)
  double mean_pairing = 0.0;  // <H, xi> of the model (umbilic mode)

  static ModelData principal(double delta, Vec kappa);
  static ModelData umbilic(double delta, double mean_pairing);
  // The model built from the submanifold's own data at (x, xi).
  static ModelData self(const ShapeData& sd, const Vec& xi, double delta, ComparisonMode mode);
};

// t_j = upper * j / nodes, j = 1..nodes.
std::vector<double> uniform_t_grid(double upper, int nodes);
// `nodes` log-spaced points in [1e-3 cap, 0.95 cap].
std::vector<double> log_t_grid(double cap, int nodes = 64);

// The first `l` vectors of an orthonormal completion of v, as components in frame(p).
Mat orthonormal_family(const Ambient& M, const Vec& p, const Vec& v, int l);

// Modified cut distance of the model: min of its cut distance and first focal time.
double model_tilde_tau(const ModelData& model);

ComparisonSample hessian_bound_check(const Ambient& M, const Vec& p, const Vec& v, int l, double delta,
                                     const std::vector<double>& t_grid);
ComparisonSample monotonicity_check_thm17(const Ambient& M, const Vec& p, const Vec& v, int l, double delta,
                                          const std::vector<double>& t_grid);
ComparisonSample wedge_bound_check(const Ambient& M, const Vec& p, const Vec& v, int l, double delta,
                                   const std::vector<double>& t_grid);
ComparisonSample det_t_comparison_thm38(const ImmersionChart& chart, const Vec& x, const Vec& xi,
                                        const ModelData& model, const std::vector<double>& t_grid);
ComparisonSample jacobian_comparison_thm57(const ImmersionChart& chart, const Vec& x, const Vec& xi,
                                           const ModelData& model, const std::vector<double>& t_grid,
                                           double eq_tol = 1e-6);

}  // namespace tubecomp
