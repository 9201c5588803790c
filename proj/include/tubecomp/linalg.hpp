#pragma once

#include <Eigen/Dense>

#include <vector>

namespace tubecomp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Symmetric eigenvalues in ascending order.
Vec symmetric_eigenvalues(const Mat& a);

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Mat& a);

// Pairwise (cascade) summation; the result depends only on the order of `values`.
double pairwise_sum(const double* values, std::size_t count);
inline double pairwise_sum(const std::vector<double>& values) {
  return pairwise_sum(values.data(), values.size());
}

}  // namespace tubecomp
