#pragma once

#include <cmath>
#include <vector>

#include "tubecomp/errors.hpp"
#include "tubecomp/linalg.hpp"

namespace tubecomp {

namespace detail {

template <typename Inner>
Vec residual_against(const Mat& basis, int used, const Vec& v, Inner& inner) {
  Vec r = v;
  // Two passes keep the result orthogonal to working precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j < used; ++j) {
      Vec b = basis.col(j);
      r -= inner(r, b) * b;
    }
  }
  return r;
}

}  // namespace detail

template <typename Inner>
Mat orthonormal_completion(const Mat& basis, const Mat& candidates, int count, Inner&& inner,
                           std::vector<int>* chosen) {
  const int rows = static_cast<int>(candidates.rows());
  const int base = static_cast<int>(basis.cols());
  Mat all(rows, base + count);
  if (base > 0) all.leftCols(base) = basis;
  std::vector<bool> taken(candidates.cols(), false);
  if (chosen) chosen->clear();
  for (int n = 0; n < count; ++n) {
    const int used = base + n;
    std::vector<double> res(candidates.cols(), -1.0);
    std::vector<Vec> vecs(candidates.cols());
    double best = 0.0;
    for (int c = 0; c < candidates.cols(); ++c) {
      if (taken[c]) continue;
      vecs[c] = detail::residual_against(all, used, candidates.col(c), inner);
      res[c] = std::sqrt(std::max(0.0, inner(vecs[c], vecs[c])));
      best = std::max(best, res[c]);
    }
    if (best <= 1e-12) throw DegenerateError("orthonormal completion: candidates span too little");
    for (int c = 0; c < candidates.cols(); ++c) {
      if (!taken[c] && res[c] >= 0.5 * best) {
        taken[c] = true;
        all.col(used) = vecs[c] / res[c];
        if (chosen) chosen->push_back(c);
        break;
      }
    }
  }
  return all.rightCols(count);
}

template <typename Inner>
Mat orthonormal_completion_fixed(const Mat& basis, const Mat& candidates,
                                 const std::vector<int>& indices, Inner&& inner) {
  const int rows = static_cast<int>(candidates.rows());
  const int base = static_cast<int>(basis.cols());
  const int count = static_cast<int>(indices.size());
  Mat all(rows, base + count);
  if (base > 0) all.leftCols(base) = basis;
  for (int n = 0; n < count; ++n) {
    Vec r = detail::residual_against(all, base + n, candidates.col(indices[n]), inner);
    double len = std::sqrt(std::max(0.0, inner(r, r)));
    if (len <= 1e-12) throw DegenerateError("orthonormal completion: fixed candidate degenerate");
    all.col(base + n) = r / len;
  }
  return all.rightCols(count);
}

}  // namespace tubecomp
