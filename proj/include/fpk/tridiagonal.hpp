#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "fpk/grid.hpp"

namespace fpk {

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row i reads sub[i-1] x[i-1] + diag[i] x[i] + super[i] x[i+1] = rhs_vec[i].
template <typename Scalar>
struct TridiagonalSystem {
  Vector<Scalar> sub;
  Vector<Scalar> diag;
  Vector<Scalar> super;
  Vector<Scalar> rhs_vec;
  // Column sums, when known exactly (diag is then implied by them).
  Vector<Scalar> column_sums;

  Index size() const { return diag.size(); }

  Matrix<Scalar> dense() const {
    const Index n = size();
    Matrix<Scalar> a = Matrix<Scalar>::Zero(n, n);
    for (Index i = 0; i < n; ++i) a(i, i) = diag[i];
    for (Index i = 0; i + 1 < n; ++i) {
      a(i + 1, i) = sub[i];
      a(i, i + 1) = super[i];
    }
    return a;
  }

  Vector<Scalar> apply(const Vector<Scalar>& x) const {
    const Index n = size();
    Vector<Scalar> y = diag.cwiseProduct(x);
    y.head(n - 1) += super.cwiseProduct(x.tail(n - 1));
    y.tail(n - 1) += sub.cwiseProduct(x.head(n - 1));
    return y;
  }
};

/**
 * Thomas algorithm. No pivoting: callers supply column diagonally dominant
 * matrices. Throws SingularSystemError if a pivot's magnitude drops below
 * 1e-300.
 */
template <typename Scalar>
Vector<Scalar> solve_tridiagonal(const Vector<Scalar>& sub, const Vector<Scalar>& diag, const Vector<Scalar>& super,
                                 const Vector<Scalar>& rhs) {
  using std::abs;
  const Index n = diag.size();
  if (n == 0 || sub.size() != n - 1 || super.size() != n - 1 || rhs.size() != n) {
    throw std::invalid_argument("solve_tridiagonal: inconsistent dimensions");
  }
  const Scalar min_pivot = Scalar(1e-300);
  Vector<Scalar> c_star(n);
  Vector<Scalar> x(n);

  Scalar pivot = diag[0];
  if (!(abs(pivot) >= min_pivot)) throw SingularSystemError("solve_tridiagonal: zero pivot in row 0");
  c_star[0] = n > 1 ? super[0] / pivot : Scalar(0);
  x[0] = rhs[0] / pivot;
  for (Index i = 1; i < n; ++i) {
    pivot = diag[i] - sub[i - 1] * c_star[i - 1];
    if (!(abs(pivot) >= min_pivot)) {
      throw SingularSystemError("solve_tridiagonal: zero pivot in row " + std::to_string(i));
    }
    c_star[i] = i + 1 < n ? super[i] / pivot : Scalar(0);
    x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / pivot;
  }
  for (Index i = n - 2; i >= 0; --i) x[i] -= c_star[i] * x[i + 1];
  return x;
}

/// Column-by-column solve for several right-hand sides.
template <typename Scalar>
Matrix<Scalar> solve_tridiagonal(const Vector<Scalar>& sub, const Vector<Scalar>& diag, const Vector<Scalar>& super,
                                 const Matrix<Scalar>& rhs) {
  Matrix<Scalar> x(rhs.rows(), rhs.cols());
  for (Index j = 0; j < rhs.cols(); ++j) x.col(j) = solve_tridiagonal<Scalar>(sub, diag, super, Vector<Scalar>(rhs.col(j)));
  return x;
}

/**
 * Elimination for M-matrices given by nonpositive off-diagonals and positive
 * column sums. The pivots are built from the column sums of the Schur
 * complements, so no step subtracts two positive numbers and the result is
 * accurate componentwise even when the diagonal nearly cancels against the
 * off-diagonals. A positive right-hand side gives a positive solution.
 */
template <typename Scalar>
Vector<Scalar> solve_m_matrix_tridiagonal(const Vector<Scalar>& sub, const Vector<Scalar>& super,
                                          const Vector<Scalar>& column_sums, const Vector<Scalar>& rhs) {
  const Index n = column_sums.size();
  if (n == 0 || sub.size() != n - 1 || super.size() != n - 1 || rhs.size() != n) {
    throw std::invalid_argument("solve_m_matrix_tridiagonal: inconsistent dimensions");
  }
  if (!((sub.array() <= Scalar(0)).all() && (super.array() <= Scalar(0)).all() &&
        (column_sums.array() > Scalar(0)).all())) {
    throw std::invalid_argument("solve_m_matrix_tridiagonal: not an M-matrix with positive column sums");
  }
  Vector<Scalar> ratio(n);  // -super[i] / pivot[i]
  Vector<Scalar> x(n);
  Scalar sigma = column_sums[0];
  for (Index i = 0;; ++i) {
    const Scalar inv_pivot = Scalar(1) / (i + 1 < n ? sigma - sub[i] : sigma);
    x[i] = (i == 0 ? rhs[0] : rhs[i] - sub[i - 1] * x[i - 1]) * inv_pivot;
    if (i + 1 == n) break;
    ratio[i] = -super[i] * inv_pivot;
    sigma = column_sums[i + 1] + ratio[i] * sigma;
  }
  for (Index i = n - 2; i >= 0; --i) x[i] += ratio[i] * x[i + 1];
  return x;
}

template <typename Scalar>
Vector<Scalar> solve_tridiagonal(const TridiagonalSystem<Scalar>& sys) {
  if (sys.column_sums.size() != 0) {
    return solve_m_matrix_tridiagonal<Scalar>(sys.sub, sys.super, sys.column_sums, sys.rhs_vec);
  }
  return solve_tridiagonal<Scalar>(sys.sub, sys.diag, sys.super, sys.rhs_vec);
}

}  // namespace fpk
