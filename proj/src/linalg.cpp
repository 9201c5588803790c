#include "tubecomp/linalg.hpp"

namespace tubecomp {

Vec symmetric_eigenvalues(const Mat& a) {
  if (a.rows() == 0) return Vec();
  if (a.rows() == 1) return Vec::Constant(1, a(0, 0));
  Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double min_eigenvalue(const Mat& a) { return symmetric_eigenvalues(a)(0); }

double pairwise_sum(const double* values, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += values[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

}  // namespace tubecomp
