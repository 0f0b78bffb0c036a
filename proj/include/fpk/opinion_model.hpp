#pragma once

#include <cmath>
#include <stdexcept>

#include "fpk/grid.hpp"
#include "fpk/problem.hpp"

namespace fpk {

/// Discrete first moment dw * sum(w_i f_i).
template <typename Scalar, typename Derived>
Scalar first_moment(const Eigen::MatrixBase<Derived>& values, const Grid<Scalar>& grid) {
  return grid.dw * grid.centers.dot(values);
}

template <typename Scalar>
Scalar first_moment(const State<Scalar>& state, const Grid<Scalar>& grid) {
  return first_moment(state.values, grid);
}

/**
 * Alignment drift B[f](w) = int (w - v) f(v) dv evaluated with the midpoint
 * rule: B(w) = w * M0 - M1 with the discrete moments M0, M1 of f.
 */
template <typename Scalar>
Vector<Scalar> drift_at_interfaces(const Vector<Scalar>& values, const Grid<Scalar>& grid) {
  const Scalar m0 = total_mass(values, grid);
  const Scalar m1 = first_moment(values, grid);
  const Index n_iface = grid.interior_interfaces();
  return (grid.interfaces.segment(1, n_iface) * m0).array() - m1;
}

template <typename Scalar>
Vector<Scalar> drift_at_interfaces(const State<Scalar>& state, const Grid<Scalar>& grid) {
  return drift_at_interfaces(state.values, grid);
}

/// dB_k/df_j = dw (w_{k+1/2} - w_j), which has rank two.
template <typename Scalar>
LowRankFactors<Scalar> drift_jacobian(const Vector<Scalar>&, const Grid<Scalar>& grid) {
  const Index n = grid.size();
  LowRankFactors<Scalar> f;
  f.left.resize(n - 1, 2);
  f.left.col(0) = grid.interfaces.segment(1, n - 1);
  f.left.col(1).setConstant(Scalar(-1));
  f.right.resize(n, 2);
  f.right.col(0).setConstant(grid.dw);
  f.right.col(1) = grid.dw * grid.centers;
  return f;
}

/// Unnormalized double-Gaussian initial opinion profile.
template <typename Scalar>
Scalar initial_condition(Scalar w) {
  using std::exp;
  const Scalar a = w + Scalar(0.5);
  const Scalar b = w - Scalar(0.5);
  return exp(Scalar(-30) * a * a) + exp(Scalar(-30) * b * b);
}

template <typename Scalar>
struct StationarySolution {
  Scalar u_moment{};
  Scalar k_norm{};
  Vector<Scalar> values;
};

/**
 * Opinion formation model on [-1, 1] with D(w) = sigma^2/2 (1 - w^2)^2.
 */
template <typename Scalar>
struct OpinionModel {
  Scalar sigma2{Scalar(0.2)};
  Scalar lower{Scalar(-1)};
  Scalar upper{Scalar(1)};

  Scalar diffusion(Scalar w) const {
    const Scalar s = Scalar(1) - w * w;
    return sigma2 / Scalar(2) * s * s;
  }

  Scalar diffusion_derivative(Scalar w) const { return Scalar(-2) * sigma2 * w * (Scalar(1) - w * w); }

  ProblemSpec<Scalar> problem(const Grid<Scalar>& grid) const {
    if (!(sigma2 > Scalar(0))) throw std::invalid_argument("OpinionModel: sigma2 must be positive");
    DriftOperator<Scalar> drift{
        [](const Vector<Scalar>& f, const Grid<Scalar>& g) { return drift_at_interfaces(f, g); },
        [](const Vector<Scalar>& f, const Grid<Scalar>& g) { return drift_jacobian(f, g); }};
    const Scalar s2 = sigma2;
    return ProblemSpec<Scalar>(
        std::move(drift), [s2](Scalar w) { return OpinionModel{s2}.diffusion(w); },
        [s2](Scalar w) { return OpinionModel{s2}.diffusion_derivative(w); },
        [](Scalar w) { return initial_condition(w); }, grid);
  }
};

/**
 * log f_inf(w) up to the additive constant log K. Only valid for |w| < 1.
 */
template <typename Scalar>
Scalar log_stationary_unnormalized(Scalar w, Scalar u, Scalar sigma2) {
  using std::log;
  using std::log1p;
  const Scalar one_minus_w2 = (Scalar(1) - w) * (Scalar(1) + w);
  return Scalar(-2) * log(one_minus_w2) + u / (Scalar(2) * sigma2) * (log1p(w) - log1p(-w)) -
         (Scalar(1) - u * w) / (sigma2 * one_minus_w2);
}

/// Closed-form steady state sampled at the centers, normalized to unit discrete mass.
template <typename Scalar>
StationarySolution<Scalar> stationary_solution(const OpinionModel<Scalar>& model, const Grid<Scalar>& grid,
                                               Scalar u) {
  using std::exp;
  using std::log;
  const Index n = grid.size();
  if (!(grid.centers.cwiseAbs().maxCoeff() < Scalar(1))) {
    throw std::invalid_argument("stationary_solution: cell centers must lie strictly inside (-1, 1)");
  }
  Vector<Scalar> logs(n);
  for (Index i = 0; i < n; ++i) logs[i] = log_stationary_unnormalized(grid.centers[i], u, model.sigma2);
  const Scalar peak = logs.maxCoeff();
  if (!std::isfinite(peak)) throw std::runtime_error("stationary_solution: non-finite log density");

  StationarySolution<Scalar> s;
  s.u_moment = u;
  s.values = (logs.array() - peak).exp().matrix();
  const Scalar scaled_mass = total_mass(s.values, grid);
  s.values /= scaled_mass;
  s.k_norm = exp(-peak - log(scaled_mass));
  if (!s.values.allFinite()) throw std::runtime_error("stationary_solution: non-finite values");
  return s;
}

}  // namespace fpk
