#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fpk/grid.hpp"
#include "fpk/tridiagonal.hpp"

namespace fpk {

/// dw * sum |a_i - b_i|
template <typename Scalar, typename A, typename B>
Scalar l1_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, Scalar dw) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: dimension mismatch");
  return dw * (a - b).cwiseAbs().sum();
}

/**
 * Natural cubic spline: C2 piecewise cubic through (knots, values) with zero
 * second derivative at both end knots. Stored as knot values plus second
 * derivatives at the knots.
 */
template <typename Scalar>
class CubicSpline {
 public:
  CubicSpline(Vector<Scalar> knots, Vector<Scalar> values) : x_(std::move(knots)), y_(std::move(values)) {
    const Index m = x_.size();
    if (m < 3) throw std::invalid_argument("CubicSpline: need at least 3 knots");
    if (y_.size() != m) throw std::invalid_argument("CubicSpline: knots and values differ in length");
    for (Index i = 0; i + 1 < m; ++i) {
      if (!(x_[i + 1] > x_[i])) throw std::invalid_argument("CubicSpline: knots must be strictly increasing");
    }
    const Vector<Scalar> h = x_.tail(m - 1) - x_.head(m - 1);
    const Vector<Scalar> slope = (y_.tail(m - 1) - y_.head(m - 1)).cwiseQuotient(h);

    // Interior unknowns M_1..M_{m-2}.
    const Index k = m - 2;
    Vector<Scalar> diag = Scalar(2) * (h.head(k) + h.tail(k));
    Vector<Scalar> off = h.segment(1, k - 1);
    Vector<Scalar> rhs = Scalar(6) * (slope.tail(k) - slope.head(k));
    m_ = Vector<Scalar>::Zero(m);
    m_.segment(1, k) = solve_tridiagonal<Scalar>(off, diag, off, rhs);
  }

  const Vector<Scalar>& knots() const { return x_; }
  const Vector<Scalar>& values() const { return y_; }
  const Vector<Scalar>& second_derivatives() const { return m_; }

  Scalar lower() const { return x_[0]; }
  Scalar upper() const { return x_[x_.size() - 1]; }

  /// Interval index i with x_i <= q <= x_{i+1}.
  Index interval(Scalar q) const {
    if (!(q >= lower() && q <= upper())) throw std::out_of_range("CubicSpline: query outside knot range");
    const auto* begin = x_.data();
    const auto* end = x_.data() + x_.size();
    Index i = static_cast<Index>(std::upper_bound(begin, end, q) - begin) - 1;
    return std::clamp<Index>(i, 0, x_.size() - 2);
  }

  Scalar operator()(Scalar q) const { return eval(q, 0); }
  Scalar derivative(Scalar q) const { return eval(q, 1); }
  Scalar second_derivative(Scalar q) const { return eval(q, 2); }

  /// Second derivative of the cubic on interval i at its ends.
  Scalar second_derivative_on(Index i, Scalar q) const { return eval_on(i, q, 2); }

  Vector<Scalar> operator()(const Vector<Scalar>& qs) const {
    Vector<Scalar> out(qs.size());
    for (Index j = 0; j < qs.size(); ++j) out[j] = (*this)(qs[j]);
    return out;
  }

 private:
  Scalar eval(Scalar q, int order) const { return eval_on(interval(q), q, order); }

  Scalar eval_on(Index i, Scalar q, int order) const {
    const Scalar h = x_[i + 1] - x_[i];
    const Scalar a = (x_[i + 1] - q) / h;
    const Scalar b = (q - x_[i]) / h;
    const Scalar mi = m_[i];
    const Scalar mj = m_[i + 1];
    switch (order) {
      case 0:
        return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * mi + (b * b * b - b) * mj) * h * h / Scalar(6);
      case 1:
        return (y_[i + 1] - y_[i]) / h - (Scalar(3) * a * a - Scalar(1)) * h / Scalar(6) * mi +
               (Scalar(3) * b * b - Scalar(1)) * h / Scalar(6) * mj;
      default:
        return a * mi + b * mj;
    }
  }

  Vector<Scalar> x_;
  Vector<Scalar> y_;
  Vector<Scalar> m_;
};

template <typename Scalar>
CubicSpline<Scalar> build_spline(const Vector<Scalar>& knots, const Vector<Scalar>& values) {
  return CubicSpline<Scalar>(knots, values);
}

/**
 * Samples a reference density, known at the centers of `fine`, at the centers
 * of `target` by natural cubic spline interpolation. Identical grids bypass the
 * spline.
 */
template <typename Scalar>
Vector<Scalar> restrict_reference(const Vector<Scalar>& reference, const Grid<Scalar>& fine,
                                  const Grid<Scalar>& target) {
  if (reference.size() != fine.size()) throw std::invalid_argument("restrict_reference: reference/grid mismatch");
  if (fine == target) return reference;
  const CubicSpline<Scalar> spline(fine.centers, reference);
  for (Index i = 0; i < target.size(); ++i) {
    const Scalar q = target.centers[i];
    if (!(q >= spline.lower() && q <= spline.upper())) {
      throw std::out_of_range("restrict_reference: target center outside the reference's center range");
    }
  }
  return spline(target.centers);
}

/// order_k = log(e_k / e_{k+1}) / log(ratio_k)
template <typename Scalar>
std::vector<Scalar> eoc(const std::vector<Scalar>& errors, const std::vector<Scalar>& ratios) {
  using std::log;
  if (errors.size() < 2 || ratios.size() + 1 != errors.size()) {
    throw std::invalid_argument("eoc: need n >= 2 errors and n - 1 ratios");
  }
  for (Scalar e : errors) {
    if (!(e > Scalar(0))) throw std::invalid_argument("eoc: errors must be positive");
  }
  std::vector<Scalar> orders(ratios.size());
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    if (!(ratios[k] > Scalar(0)) || ratios[k] == Scalar(1)) throw std::invalid_argument("eoc: invalid step ratio");
    orders[k] = log(errors[k] / errors[k + 1]) / log(ratios[k]);
  }
  return orders;
}

/// Snapshot errors of one run. Entries after a blow-up are +inf.
template <typename Scalar>
struct ErrorSeries {
  std::vector<Scalar> times;
  std::vector<Scalar> l1_errors;
  bool blowup = false;

  void push(Scalar t, Scalar e) {
    if (!times.empty() && !(t > times.back())) throw std::invalid_argument("ErrorSeries: times must increase");
    times.push_back(t);
    l1_errors.push_back(e);
  }
};

/// Mean of the stored snapshot errors; +inf once the run has diverged.
template <typename Scalar>
Scalar time_averaged_l1(const ErrorSeries<Scalar>& series) {
  if (series.l1_errors.empty()) throw std::invalid_argument("time_averaged_l1: empty series");
  if (series.times.size() != series.l1_errors.size()) throw std::invalid_argument("time_averaged_l1: length mismatch");
  Scalar sum = 0;
  for (Scalar e : series.l1_errors) {
    if (!std::isfinite(e)) return std::numeric_limits<Scalar>::infinity();
    sum += e;
  }
  if (series.blowup) return std::numeric_limits<Scalar>::infinity();
  return sum / static_cast<Scalar>(series.l1_errors.size());
}

}  // namespace fpk
