#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace fpk {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/**
 * Uniform cell-centered mesh on [lower, upper].
 *
 * Cell i (0-based) spans [interfaces[i], interfaces[i+1]] and has its node at
 * centers[i]. The two outermost interfaces coincide with the domain ends, which
 * is where the no-flux condition is imposed.
 */
template <typename Scalar>
struct Grid {
  Scalar lower{};
  Scalar upper{};
  Index n_cells{};
  Scalar dw{};
  Vector<Scalar> centers;     // N entries
  Vector<Scalar> interfaces;  // N + 1 entries

  Index size() const { return n_cells; }
  Index interior_interfaces() const { return n_cells - 1; }

  bool operator==(const Grid&) const = default;
};

/// Builds the mesh. Coordinates are generated symmetrically about the midpoint
/// so a symmetric domain yields exactly antisymmetric node positions.
template <typename Scalar>
Grid<Scalar> make_grid(Scalar lower, Scalar upper, Index n_cells) {
  if (n_cells < 2) {
    throw std::invalid_argument("make_grid: n_cells must be >= 2, got " + std::to_string(n_cells));
  }
  if (!(upper > lower) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw std::invalid_argument("make_grid: requires finite bounds with upper > lower");
  }
  Grid<Scalar> g;
  g.lower = lower;
  g.upper = upper;
  g.n_cells = n_cells;
  g.dw = (upper - lower) / static_cast<Scalar>(n_cells);

  const Scalar mid = (lower + upper) / Scalar(2);
  const Scalar half = static_cast<Scalar>(n_cells) / Scalar(2);
  g.centers.resize(n_cells);
  g.interfaces.resize(n_cells + 1);
  for (Index i = 0; i < n_cells; ++i) {
    g.centers[i] = mid + (static_cast<Scalar>(i) + Scalar(0.5) - half) * g.dw;
  }
  for (Index i = 0; i <= n_cells; ++i) {
    g.interfaces[i] = mid + (static_cast<Scalar>(i) - half) * g.dw;
  }
  g.interfaces[0] = lower;
  g.interfaces[n_cells] = upper;
  return g;
}

/// Density values at the cell centers at one time level.
template <typename Scalar>
struct State {
  Vector<Scalar> values;
  Scalar time{0};

  Index size() const { return values.size(); }
  bool all_finite() const { return values.allFinite(); }
  bool strictly_positive() const { return values.size() > 0 && (values.array() > Scalar(0)).all(); }
};

/// Midpoint-rule mass dw * sum(f).
template <typename Scalar, typename Derived>
Scalar total_mass(const Eigen::MatrixBase<Derived>& values, const Grid<Scalar>& grid) {
  if (values.size() != grid.size()) {
    throw std::invalid_argument("total_mass: state size does not match grid");
  }
  return grid.dw * values.sum();
}

template <typename Scalar>
Scalar total_mass(const State<Scalar>& state, const Grid<Scalar>& grid) {
  return total_mass(state.values, grid);
}

/// dw * sum |f|, the discrete L1 norm.
template <typename Scalar, typename Derived>
Scalar l1_norm(const Eigen::MatrixBase<Derived>& values, const Grid<Scalar>& grid) {
  return grid.dw * values.cwiseAbs().sum();
}

}  // namespace fpk
