#pragma once

#include <Eigen/Core>

#include <vector>

#include "presym/expr.hpp"

namespace Eigen {

template <>
struct NumTraits<presym::Expr> : GenericNumTraits<presym::Expr> {
  using Real = presym::Expr;
  using NonInteger = presym::Expr;
  using Nested = presym::Expr;
  using Literal = presym::Expr;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 10,
    MulCost = 10
  };
};

template <>
struct NumTraits<presym::Rational> : GenericNumTraits<presym::Rational> {
  using Real = presym::Rational;
  using NonInteger = presym::Rational;
  using Nested = presym::Rational;
  using Literal = presym::Rational;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 3,
    MulCost = 3
  };
};

}  // namespace Eigen

namespace presym {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using ExprMatrix = DenseMatrix<Expr>;
using RationalMatrix = DenseMatrix<Rational>;

/// Rank over the fraction field of the scalar (exact, generic for Expr).
template <typename Derived>
int exact_rank(const Eigen::MatrixBase<Derived>& input)
{
  using Scalar = typename Derived::Scalar;
  DenseMatrix<Scalar> m = input;
  const Scalar zero(0);
  int rank = 0;
  for (Eigen::Index col = 0; col < m.cols() && rank < m.rows(); ++col) {
    Eigen::Index pivot = -1;
    for (Eigen::Index r = rank; r < m.rows(); ++r)
      if (!(m(r, col) == zero)) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    m.row(rank).swap(m.row(pivot));
    for (Eigen::Index r = rank + 1; r < m.rows(); ++r) {
      if (m(r, col) == zero) continue;
      Scalar f = m(r, col) / m(rank, col);
      for (Eigen::Index c = col; c < m.cols(); ++c) m(r, c) = m(r, c) - f * m(rank, c);
    }
    ++rank;
  }
  return rank;
}

/// Determinant by fraction-field elimination.
template <typename Derived>
typename Derived::Scalar exact_determinant(const Eigen::MatrixBase<Derived>& input)
{
  using Scalar = typename Derived::Scalar;
  DenseMatrix<Scalar> m = input;
  const Scalar zero(0);
  Scalar det(1);
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    Eigen::Index pivot = -1;
    for (Eigen::Index r = col; r < m.rows(); ++r)
      if (!(m(r, col) == zero)) {
        pivot = r;
        break;
      }
    if (pivot < 0) return zero;
    if (pivot != col) {
      m.row(col).swap(m.row(pivot));
      det = -det;
    }
    det = det * m(col, col);
    for (Eigen::Index r = col + 1; r < m.rows(); ++r) {
      if (m(r, col) == zero) continue;
      Scalar f = m(r, col) / m(col, col);
      for (Eigen::Index c = col; c < m.cols(); ++c) m(r, c) = m(r, c) - f * m(col, c);
    }
  }
  return det;
}

/// All maximal (cols x cols) minors of a matrix with rows >= cols.
template <typename Derived>
std::vector<typename Derived::Scalar> maximal_minors(const Eigen::MatrixBase<Derived>& m)
{
  using Scalar = typename Derived::Scalar;
  std::vector<Scalar> out;
  const Eigen::Index n = m.cols();
  if (m.rows() < n) return out;
  std::vector<Eigen::Index> pick(n);
  for (Eigen::Index i = 0; i < n; ++i) pick[i] = i;
  while (true) {
    DenseMatrix<Scalar> sub(n, n);
    for (Eigen::Index i = 0; i < n; ++i) sub.row(i) = m.row(pick[i]);
    out.push_back(exact_determinant(sub));
    Eigen::Index i = n - 1;
    while (i >= 0 && pick[i] == m.rows() - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (Eigen::Index j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

}  // namespace presym
