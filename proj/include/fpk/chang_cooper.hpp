#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fpk/grid.hpp"
#include "fpk/problem.hpp"

namespace fpk {

/// Below this |lambda| the weight is evaluated from its Taylor series.
template <typename Scalar>
inline constexpr Scalar kDeltaSeriesThreshold = Scalar(1e-4);

/// Series branch of delta(lambda): 1/2 - lambda/12 + lambda^3/720.
template <typename Scalar>
Scalar delta_series(Scalar lambda) {
  const Scalar l2 = lambda * lambda;
  return Scalar(0.5) - lambda / Scalar(12) + lambda * l2 / Scalar(720);
}

/// Closed-form branch 1/(1 - e^lambda) + 1/lambda, written with expm1.
template <typename Scalar>
Scalar delta_direct(Scalar lambda) {
  using std::expm1;
  return Scalar(-1) / expm1(lambda) + Scalar(1) / lambda;
}

/**
 * Chang-Cooper weight delta(lambda) in (0, 1), decreasing in lambda with
 * delta(0) = 1/2. Overflow of e^lambda for large positive lambda drives the
 * first term to zero, leaving the 1/lambda asymptote; the result is clipped
 * into the open interval for extreme arguments.
 */
template <typename Scalar>
Scalar delta_of_lambda(Scalar lambda) {
  using std::abs;
  if (abs(lambda) < kDeltaSeriesThreshold<Scalar>) return delta_series(lambda);
  const Scalar d = delta_direct(lambda);
  constexpr Scalar tiny = std::numeric_limits<Scalar>::denorm_min();
  const Scalar below_one = Scalar(1) - std::numeric_limits<Scalar>::epsilon() / Scalar(2);
  return std::clamp(d, tiny, below_one);
}

/// d delta / d lambda = 1/(4 sinh^2(lambda/2)) - 1/lambda^2.
template <typename Scalar>
Scalar delta_derivative(Scalar lambda) {
  using std::abs;
  using std::sinh;
  if (abs(lambda) < Scalar(1e-2)) {
    const Scalar l2 = lambda * lambda;
    return Scalar(-1) / Scalar(12) + l2 / Scalar(240) - l2 * l2 / Scalar(6048);
  }
  const Scalar s = sinh(lambda / Scalar(2));
  return Scalar(1) / (Scalar(4) * s * s) - Scalar(1) / (lambda * lambda);
}

/// Per interior interface k (between cells k and k+1, 0-based).
template <typename Scalar>
struct FluxCoefficients {
  Vector<Scalar> d_iface;
  Vector<Scalar> d_prime;
  Vector<Scalar> drift_val;
  Vector<Scalar> lambda;
  Vector<Scalar> delta;
  Vector<Scalar> cc;

  Index size() const { return d_iface.size(); }
};

/// Coefficients for a given drift sample. C is formed as B + D' directly.
template <typename Scalar>
FluxCoefficients<Scalar> coefficients_from_drift(const Vector<Scalar>& drift, const ProblemSpec<Scalar>& spec) {
  const Scalar dw = spec.grid().dw;
  FluxCoefficients<Scalar> c;
  c.d_iface = spec.diffusion_at_interfaces();
  c.d_prime = spec.diffusion_derivative_at_interfaces();
  if (drift.size() != c.d_iface.size()) {
    throw std::invalid_argument("assemble_coefficients: drift operator returned the wrong number of values");
  }
  c.drift_val = drift;
  c.cc = c.drift_val + c.d_prime;
  c.lambda.resize(c.size());
  c.delta.resize(c.size());
  for (Index k = 0; k < c.size(); ++k) {
    if (!(c.d_iface[k] > Scalar(0))) {
      throw std::domain_error("assemble_coefficients: diffusion must be positive at interior interfaces");
    }
    c.lambda[k] = dw * c.cc[k] / c.d_iface[k];
    c.delta[k] = delta_of_lambda(c.lambda[k]);
  }
  return c;
}

template <typename Scalar>
FluxCoefficients<Scalar> assemble_coefficients(const Vector<Scalar>& values, const ProblemSpec<Scalar>& spec) {
  if (values.size() != spec.grid().size()) {
    throw std::invalid_argument("assemble_coefficients: state size does not match grid");
  }
  return coefficients_from_drift(spec.drift().at_interfaces(values, spec.grid()), spec);
}

template <typename Scalar>
FluxCoefficients<Scalar> assemble_coefficients(const State<Scalar>& state, const ProblemSpec<Scalar>& spec) {
  return assemble_coefficients(state.values, spec);
}

/// Numerical fluxes at all N+1 interfaces; the two boundary fluxes are zero.
template <typename Scalar>
Vector<Scalar> flux(const FluxCoefficients<Scalar>& c, const Vector<Scalar>& f, const Grid<Scalar>& grid) {
  const Index n = grid.size();
  if (f.size() != n || c.size() != n - 1) throw std::invalid_argument("flux: dimension mismatch");
  Vector<Scalar> F = Vector<Scalar>::Zero(n + 1);
  for (Index k = 0; k + 1 < n; ++k) {
    const Scalar blend = (Scalar(1) - c.delta[k]) * f[k + 1] + c.delta[k] * f[k];
    F[k + 1] = c.cc[k] * blend + c.d_iface[k] * (f[k + 1] - f[k]) / grid.dw;
  }
  return F;
}

template <typename Scalar>
Vector<Scalar> flux(const FluxCoefficients<Scalar>& c, const State<Scalar>& s, const Grid<Scalar>& grid) {
  return flux(c, s.values, grid);
}

/// Flux divergence (F_{i+1/2} - F_{i-1/2}) / dw.
template <typename Scalar>
Vector<Scalar> flux_divergence(const Vector<Scalar>& F, Scalar dw) {
  const Index n = F.size() - 1;
  return (F.tail(n) - F.head(n)) / dw;
}

/// Semidiscrete right-hand side of the Chang-Cooper scheme.
template <typename Scalar>
Vector<Scalar> rhs(const Vector<Scalar>& f, const ProblemSpec<Scalar>& spec) {
  const auto c = assemble_coefficients(f, spec);
  return flux_divergence(flux(c, f, spec.grid()), spec.grid().dw);
}

template <typename Scalar>
Vector<Scalar> rhs(const State<Scalar>& s, const ProblemSpec<Scalar>& spec) {
  return rhs(s.values, spec);
}

/**
 * Nearest-neighbour production rates of a conservative production-destruction
 * system. Destruction rates are the transposes, d_{i,j} = p_{j,i}, so each
 * rate is stored once.
 *
 *   p_super[k] = p_{k,k+1}   (gain of cell k from cell k+1)
 *   p_sub[k]   = p_{k+1,k}   (gain of cell k+1 from cell k)
 */
template <typename Scalar>
struct PdsMatrices {
  Vector<Scalar> p_super;
  Vector<Scalar> p_sub;

  Index size() const { return p_super.size() + 1; }

  /// P_i = sum_j p_{i,j}
  Vector<Scalar> production() const {
    const Index n = size();
    Vector<Scalar> P = Vector<Scalar>::Zero(n);
    P.head(n - 1) += p_super;
    P.tail(n - 1) += p_sub;
    return P;
  }

  /// D_i = sum_j d_{i,j} = sum_j p_{j,i}
  Vector<Scalar> destruction() const {
    const Index n = size();
    Vector<Scalar> D = Vector<Scalar>::Zero(n);
    D.head(n - 1) += p_sub;
    D.tail(n - 1) += p_super;
    return D;
  }

  Matrix<Scalar> production_matrix() const {
    const Index n = size();
    Matrix<Scalar> p = Matrix<Scalar>::Zero(n, n);
    for (Index k = 0; k + 1 < n; ++k) {
      p(k, k + 1) = p_super[k];
      p(k + 1, k) = p_sub[k];
    }
    return p;
  }

  Matrix<Scalar> destruction_matrix() const { return production_matrix().transpose(); }

  PdsMatrices& operator+=(const PdsMatrices& o) {
    p_super += o.p_super;
    p_sub += o.p_sub;
    return *this;
  }

  PdsMatrices& operator*=(Scalar s) {
    p_super *= s;
    p_sub *= s;
    return *this;
  }
};

/// Splits each interface flux by drift sign into two nonnegative transfer rates.
template <typename Scalar>
PdsMatrices<Scalar> pds_from_coefficients(const FluxCoefficients<Scalar>& c, const Vector<Scalar>& f, Scalar dw) {
  using std::max;
  using std::min;
  const Index n_iface = c.size();
  PdsMatrices<Scalar> m;
  m.p_super.resize(n_iface);
  m.p_sub.resize(n_iface);
  for (Index k = 0; k < n_iface; ++k) {
    const Scalar blend = (Scalar(1) - c.delta[k]) * f[k + 1] + c.delta[k] * f[k];
    const Scalar diff = c.d_iface[k] / dw;
    m.p_super[k] = (max(Scalar(0), c.cc[k]) * blend + diff * f[k + 1]) / dw;
    m.p_sub[k] = (-min(Scalar(0), c.cc[k]) * blend + diff * f[k]) / dw;
  }
  return m;
}

template <typename Scalar>
PdsMatrices<Scalar> assemble_pds(const Vector<Scalar>& f, const ProblemSpec<Scalar>& spec) {
  return pds_from_coefficients(assemble_coefficients(f, spec), f, spec.grid().dw);
}

template <typename Scalar>
PdsMatrices<Scalar> assemble_pds(const State<Scalar>& s, const ProblemSpec<Scalar>& spec) {
  return assemble_pds(s.values, spec);
}

}  // namespace fpk
