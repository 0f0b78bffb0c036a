#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "fpk/grid.hpp"

namespace fpk {

/// Factorization dB/df = left * right^T of the drift Jacobian, with left sized
/// (N-1) x r and right sized N x r.
template <typename Scalar>
struct LowRankFactors {
  Matrix<Scalar> left;
  Matrix<Scalar> right;
};

/**
 * Drift operator B[f] sampled at the N-1 interior interfaces.
 *
 * `jacobian` is optional. When present it lets implicit Euler build its Newton
 * matrix analytically; otherwise the drift Jacobian is differenced.
 */
template <typename Scalar>
struct DriftOperator {
  using Evaluate = std::function<Vector<Scalar>(const Vector<Scalar>&, const Grid<Scalar>&)>;
  using Jacobian = std::function<LowRankFactors<Scalar>(const Vector<Scalar>&, const Grid<Scalar>&)>;

  Evaluate at_interfaces;
  Jacobian jacobian;
};

template <typename Scalar>
using ScalarFunction = std::function<Scalar(Scalar)>;

/**
 * A one-dimensional Fokker-Planck problem
 *
 *   d/dt f = d/dw [ B[f] f + d/dw (D f) ]
 *
 * with no-flux boundaries. D and D' are sampled once at the interior
 * interfaces on construction; construction fails if D is not strictly positive
 * there or negative anywhere on the mesh.
 */
template <typename Scalar>
class ProblemSpec {
 public:
  ProblemSpec(DriftOperator<Scalar> drift, ScalarFunction<Scalar> diffusion,
              ScalarFunction<Scalar> diffusion_derivative, ScalarFunction<Scalar> initial,
              Grid<Scalar> grid)
      : drift_(std::move(drift)),
        diffusion_(std::move(diffusion)),
        diffusion_derivative_(std::move(diffusion_derivative)),
        initial_(std::move(initial)),
        grid_(std::move(grid)) {
    if (!drift_.at_interfaces || !diffusion_ || !diffusion_derivative_ || !initial_) {
      throw std::invalid_argument("ProblemSpec: all operator handles must be set");
    }
    const Index n_iface = grid_.interior_interfaces();
    d_iface_.resize(n_iface);
    d_prime_.resize(n_iface);
    for (Index k = 0; k < n_iface; ++k) {
      const Scalar w = grid_.interfaces[k + 1];
      d_iface_[k] = diffusion_(w);
      d_prime_[k] = diffusion_derivative_(w);
      if (!(d_iface_[k] > Scalar(0)) || !std::isfinite(d_iface_[k]) || !std::isfinite(d_prime_[k])) {
        throw std::invalid_argument("ProblemSpec: diffusion must be positive and finite at interior interface w = " +
                                    std::to_string(static_cast<double>(w)));
      }
    }
    for (Index i = 0; i <= grid_.size(); ++i) {
      if (diffusion_(grid_.interfaces[i]) < Scalar(0)) {
        throw std::invalid_argument("ProblemSpec: diffusion must be nonnegative on the domain");
      }
    }
  }

  const Grid<Scalar>& grid() const { return grid_; }
  const DriftOperator<Scalar>& drift() const { return drift_; }
  Scalar diffusion(Scalar w) const { return diffusion_(w); }
  Scalar diffusion_derivative(Scalar w) const { return diffusion_derivative_(w); }
  Scalar initial(Scalar w) const { return initial_(w); }

  /// D and D' at interior interfaces.
  const Vector<Scalar>& diffusion_at_interfaces() const { return d_iface_; }
  const Vector<Scalar>& diffusion_derivative_at_interfaces() const { return d_prime_; }

 private:
  DriftOperator<Scalar> drift_;
  ScalarFunction<Scalar> diffusion_;
  ScalarFunction<Scalar> diffusion_derivative_;
  ScalarFunction<Scalar> initial_;
  Grid<Scalar> grid_;
  Vector<Scalar> d_iface_;
  Vector<Scalar> d_prime_;
};

/**
 * Samples the initial density at the cell centers and rescales it to unit
 * discrete mass. Rejects nonpositive or non-finite samples.
 */
template <typename Scalar>
State<Scalar> discretize_initial(const ProblemSpec<Scalar>& spec) {
  const auto& grid = spec.grid();
  State<Scalar> s;
  s.values.resize(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Scalar v = spec.initial(grid.centers[i]);
    if (!std::isfinite(v) || !(v > Scalar(0))) {
      throw std::invalid_argument("discretize_initial: initial density must be positive and finite at w = " +
                                  std::to_string(static_cast<double>(grid.centers[i])));
    }
    s.values[i] = v;
  }
  s.values /= total_mass(s.values, grid);
  s.time = Scalar(0);
  return s;
}

}  // namespace fpk
