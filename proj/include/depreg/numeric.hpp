#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace depreg {

/// log(2 cosh m) written as |m| + log1p(exp(-2|m|)) so large |m| cannot overflow.
inline double log2cosh(double m) {
  const double a = std::abs(m);
  return a + std::log1p(std::exp(-2.0 * a));
}

template <typename Derived>
auto log2cosh(const Eigen::ArrayBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return m.abs() + (Scalar(-2) * m.abs()).exp().log1p();
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log(v.unaryExpr([top](Scalar x) { return std::exp(x - top); }).sum());
}

/// Max-subtracted softmax of a row or column vector.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p =
      (logits.array() - logits.maxCoeff()).exp().matrix().reshaped();
  p /= p.sum();
  return p;
}

inline double sign_with_tie_positive(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace depreg
