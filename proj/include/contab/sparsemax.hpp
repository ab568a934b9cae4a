#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <functional>
#include <vector>

#include "contab/error.hpp"

namespace contab {

/// Euclidean projection of a vector onto the probability simplex.
///
/// Sort descending, take the largest support size K with 1 + K z_(K) > sum_{j<=K} z_(j),
/// set tau = (sum_{j<=K} z_(j) - 1) / K and return max(z - tau, 0). Entries flagged
/// in `exclude` are pinned to 0 and do not take part; if every entry is flagged the
/// flags are ignored.
template <class Derived, class MaskDerived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sparsemax_project(
    const Eigen::DenseBase<Derived>& z, const Eigen::DenseBase<MaskDerived>& exclude) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = z.size();
  if (n == 0) throw InputError("sparsemax: empty row");

  std::vector<Scalar> sorted;
  sorted.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!exclude(i)) sorted.push_back(z(i));
  }
  const bool use_mask = !sorted.empty();
  if (!use_mask) {
    for (Eigen::Index i = 0; i < n; ++i) sorted.push_back(z(i));
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<Scalar>());

  Scalar cumulative = 0;
  Scalar support_sum = 0;
  std::size_t support = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    if (Scalar(1) + Scalar(k + 1) * sorted[k] > cumulative) {
      support = k + 1;
      support_sum = cumulative;
    }
  }
  const Scalar tau = (support_sum - Scalar(1)) / Scalar(support);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) = (use_mask && exclude(i)) ? Scalar(0) : std::max(z(i) - tau, Scalar(0));
  }
  return out;
}

template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sparsemax_project(const Eigen::DenseBase<Derived>& z) {
  return sparsemax_project(z, Eigen::Array<bool, Eigen::Dynamic, 1>::Zero(z.size()));
}

/// Row-wise sparsemax of a matrix.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> sparsemax_rows(
    const Eigen::MatrixBase<Derived>& logits) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) out.row(r) = sparsemax_project(logits.row(r)).transpose();
  return out;
}

}  // namespace contab
