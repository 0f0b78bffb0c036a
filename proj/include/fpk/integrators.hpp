#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/LU>

#include "fpk/chang_cooper.hpp"
#include "fpk/grid.hpp"
#include "fpk/problem.hpp"
#include "fpk/tridiagonal.hpp"

namespace fpk {

enum class SchemeId { MPE, MPRK, ExplicitEuler, Heun, ImplicitEuler };

inline constexpr SchemeId kAllSchemes[] = {SchemeId::MPE, SchemeId::MPRK, SchemeId::ImplicitEuler,
                                           SchemeId::ExplicitEuler, SchemeId::Heun};

inline std::string_view scheme_name(SchemeId s) {
  switch (s) {
    case SchemeId::MPE: return "mpe";
    case SchemeId::MPRK: return "mprk";
    case SchemeId::ExplicitEuler: return "explicit-euler";
    case SchemeId::Heun: return "heun";
    case SchemeId::ImplicitEuler: return "implicit-euler";
  }
  return "unknown";
}

/// Case-insensitive; accepts '_' in place of '-'.
inline std::optional<SchemeId> parse_scheme(std::string_view text) {
  std::string key;
  for (char ch : text) key.push_back(ch == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (key == "mpe") return SchemeId::MPE;
  if (key == "mprk") return SchemeId::MPRK;
  if (key == "explicit-euler" || key == "euler") return SchemeId::ExplicitEuler;
  if (key == "heun") return SchemeId::Heun;
  if (key == "implicit-euler") return SchemeId::ImplicitEuler;
  return std::nullopt;
}

/// Schemes that conserve the discrete mass to roundoff.
inline bool conserves_mass_exactly(SchemeId s) { return s != SchemeId::ImplicitEuler; }

// ---------------------------------------------------------------------------
// Patankar schemes
// ---------------------------------------------------------------------------

/**
 * Linear system of a modified Patankar step
 *
 *   x_i = b_i + dt (sum_j p_ij x_j / den_j - sum_j d_ij x_i / den_i).
 *
 * Diagonal 1 + dt D_i / den_i, off-diagonal -dt p_ij / den_j. For positive
 * denominators and rates this is an M-matrix whose columns sum to one, which
 * the solver uses in place of the rounded diagonal.
 */
template <typename Scalar>
TridiagonalSystem<Scalar> patankar_system(const PdsMatrices<Scalar>& rates, const Vector<Scalar>& denominators,
                                          const Vector<Scalar>& b, Scalar dt) {
  const Index n = b.size();
  TridiagonalSystem<Scalar> sys;
  const Vector<Scalar> scale = dt * denominators.cwiseInverse();
  sys.diag = (Scalar(1) + rates.destruction().array() * scale.array()).matrix();
  sys.super = -rates.p_super.cwiseProduct(scale.tail(n - 1));
  sys.sub = -rates.p_sub.cwiseProduct(scale.head(n - 1));
  sys.rhs_vec = b;
  sys.column_sums = Vector<Scalar>::Ones(n);
  return sys;
}

/// One MPE step for an arbitrary production-destruction system.
template <typename Scalar, typename Rates>
Vector<Scalar> mpe_update(const Vector<Scalar>& f, const Rates& rates_of, Scalar dt) {
  return solve_tridiagonal(patankar_system<Scalar>(rates_of(f), f, f, dt));
}

/// One MPRK step for an arbitrary production-destruction system.
template <typename Scalar, typename Rates>
Vector<Scalar> mprk_update(const Vector<Scalar>& f, const Rates& rates_of, Scalar dt) {
  PdsMatrices<Scalar> rates_n = rates_of(f);
  const Vector<Scalar> stage = solve_tridiagonal(patankar_system<Scalar>(rates_n, f, f, dt));
  rates_n += rates_of(stage);
  rates_n *= Scalar(0.5);
  return solve_tridiagonal(patankar_system<Scalar>(rates_n, stage, f, dt));
}

template <typename Scalar>
State<Scalar> step_mpe(const State<Scalar>& s, const ProblemSpec<Scalar>& spec, Scalar dt) {
  auto rates = [&spec](const Vector<Scalar>& v) { return assemble_pds(v, spec); };
  return {mpe_update(s.values, rates, dt), s.time + dt};
}

template <typename Scalar>
State<Scalar> step_mprk(const State<Scalar>& s, const ProblemSpec<Scalar>& spec, Scalar dt) {
  auto rates = [&spec](const Vector<Scalar>& v) { return assemble_pds(v, spec); };
  return {mprk_update(s.values, rates, dt), s.time + dt};
}

// ---------------------------------------------------------------------------
// Classical explicit schemes. No clipping: negative values are passed through.
// ---------------------------------------------------------------------------

template <typename Scalar>
State<Scalar> step_explicit_euler(const State<Scalar>& s, const ProblemSpec<Scalar>& spec, Scalar dt) {
  return {s.values + dt * rhs(s.values, spec), s.time + dt};
}

/// Two-stage SSP Runge-Kutta (Heun).
template <typename Scalar>
State<Scalar> step_heun(const State<Scalar>& s, const ProblemSpec<Scalar>& spec, Scalar dt) {
  const Vector<Scalar> k1 = rhs(s.values, spec);
  const Vector<Scalar> g = s.values + dt * k1;
  const Vector<Scalar> k2 = rhs(g, spec);
  return {s.values + (dt / Scalar(2)) * (k1 + k2), s.time + dt};
}

// ---------------------------------------------------------------------------
// Implicit Euler
// ---------------------------------------------------------------------------

enum class JacobianMode { FiniteDifferenceDense, AnalyticLowRank };

inline std::string_view jacobian_mode_name(JacobianMode m) {
  return m == JacobianMode::AnalyticLowRank ? "analytic-sparse-plus-rank-one" : "finite-difference-dense";
}

inline std::optional<JacobianMode> parse_jacobian_mode(std::string_view text) {
  if (text == "finite-difference-dense" || text == "fd") return JacobianMode::FiniteDifferenceDense;
  if (text == "analytic-sparse-plus-rank-one" || text == "analytic") return JacobianMode::AnalyticLowRank;
  return std::nullopt;
}

struct NewtonOptions {
  double residual_tol = 1e-10;
  int max_iters = 50;
  JacobianMode jacobian_mode = JacobianMode::FiniteDifferenceDense;
  double min_damping = 1.0 / 1024.0;
};

struct NewtonStats {
  long long steps = 0;
  long long total_iterations = 0;
  int max_iterations = 0;

  void record(int iterations) {
    ++steps;
    total_iterations += iterations;
    max_iterations = std::max(max_iterations, iterations);
  }
};

class NewtonFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves (I - dt J) y = b for the Newton correction at the current iterate.
template <typename Scalar>
using NewtonLinearSolve = std::function<Vector<Scalar>(const Vector<Scalar>&)>;

template <typename Scalar>
Matrix<Scalar> finite_difference_jacobian(const std::function<Vector<Scalar>(const Vector<Scalar>&)>& g,
                                          const Vector<Scalar>& x, const Vector<Scalar>& gx) {
  using std::abs;
  using std::max;
  using std::sqrt;
  const Scalar root_eps = sqrt(std::numeric_limits<Scalar>::epsilon());
  const Scalar floor = max(Scalar(1e-3) * x.cwiseAbs().maxCoeff(), std::numeric_limits<Scalar>::min());
  Matrix<Scalar> J(gx.size(), x.size());
  Vector<Scalar> xp = x;
  for (Index j = 0; j < x.size(); ++j) {
    const Scalar h = root_eps * max(abs(x[j]), floor);
    xp[j] = x[j] + h;
    const Scalar actual = xp[j] - x[j];
    J.col(j) = (g(xp) - gx) / actual;
    xp[j] = x[j];
  }
  return J;
}

/**
 * Damped Newton iteration for x - f_n - dt g(x) = 0, started from f_n.
 *
 * A trial step is halved while the residual max-norm does not decrease, down
 * to options.min_damping, at which point the step is taken anyway. Returns the
 * iterate and the number of Newton updates performed.
 */
template <typename Scalar>
std::pair<Vector<Scalar>, int> implicit_euler_solve(
    const Vector<Scalar>& f_n, Scalar dt, const std::function<Vector<Scalar>(const Vector<Scalar>&)>& g,
    const NewtonOptions& opts,
    const std::function<NewtonLinearSolve<Scalar>(const Vector<Scalar>&)>& linearize = {}) {
  if (!(opts.residual_tol > 0) || opts.max_iters < 1) throw std::invalid_argument("NewtonOptions: invalid settings");
  const Index n = f_n.size();
  const Scalar tol = Scalar(opts.residual_tol) * f_n.cwiseAbs().maxCoeff();

  Vector<Scalar> x = f_n;
  Vector<Scalar> gx = g(x);
  Vector<Scalar> R = x - f_n - dt * gx;
  Scalar norm = R.cwiseAbs().maxCoeff();
  int iter = 0;
  while (!(norm <= tol)) {
    if (iter >= opts.max_iters) {
      throw NewtonFailure("implicit Euler: Newton did not converge in " + std::to_string(opts.max_iters) +
                          " iterations (residual " + std::to_string(static_cast<double>(norm)) + ")");
    }
    Vector<Scalar> correction;
    if (linearize) {
      correction = linearize(x)(-R);
    } else {
      Matrix<Scalar> J = Matrix<Scalar>::Identity(n, n) - dt * finite_difference_jacobian<Scalar>(g, x, gx);
      correction = J.partialPivLu().solve(-R);
    }
    if (!correction.allFinite()) throw NewtonFailure("implicit Euler: singular Newton matrix");

    Scalar alpha = 1;
    while (true) {
      Vector<Scalar> x_try = x + alpha * correction;
      Vector<Scalar> g_try = g(x_try);
      Vector<Scalar> R_try = x_try - f_n - dt * g_try;
      const Scalar norm_try = R_try.allFinite() ? R_try.cwiseAbs().maxCoeff() : std::numeric_limits<Scalar>::infinity();
      if (norm_try < norm || alpha <= Scalar(opts.min_damping)) {
        if (!std::isfinite(norm_try)) throw NewtonFailure("implicit Euler: non-finite residual");
        x = std::move(x_try);
        gx = std::move(g_try);
        R = std::move(R_try);
        norm = norm_try;
        break;
      }
      alpha /= 2;
    }
    ++iter;
  }
  return {x, iter};
}

/**
 * Newton matrix I - dt J of the Chang-Cooper right-hand side, applied through
 * its structure: J = T + S (U V^T), where T is the tridiagonal Jacobian with the
 * drift frozen, S the bidiagonal sensitivity of the divergence to the drift at
 * each interface, and U V^T the drift Jacobian. Solved with the Woodbury
 * identity on top of the Thomas algorithm.
 */
template <typename Scalar>
NewtonLinearSolve<Scalar> structured_newton_solver(const Vector<Scalar>& x, const ProblemSpec<Scalar>& spec,
                                                   Scalar dt) {
  const auto& grid = spec.grid();
  const Index n = grid.size();
  const Scalar dw = grid.dw;
  const auto c = assemble_coefficients(x, spec);

  Vector<Scalar> a(n - 1), b(n - 1), g(n - 1);
  for (Index k = 0; k + 1 < n; ++k) {
    const Scalar diff = c.d_iface[k] / dw;
    a[k] = c.cc[k] * c.delta[k] - diff;
    b[k] = c.cc[k] * (Scalar(1) - c.delta[k]) + diff;
    const Scalar blend = (Scalar(1) - c.delta[k]) * x[k + 1] + c.delta[k] * x[k];
    g[k] = blend + c.cc[k] * (x[k] - x[k + 1]) * delta_derivative(c.lambda[k]) * dw / c.d_iface[k];
  }

  Vector<Scalar> diag = Vector<Scalar>::Ones(n);
  diag.head(n - 1) -= (dt / dw) * a;
  diag.tail(n - 1) += (dt / dw) * b;
  Vector<Scalar> super = -(dt / dw) * b;
  Vector<Scalar> sub = (dt / dw) * a;

  LowRankFactors<Scalar> drift;
  if (spec.drift().jacobian) {
    drift = spec.drift().jacobian(x, grid);
  } else {
    std::function<Vector<Scalar>(const Vector<Scalar>&)> at = [&](const Vector<Scalar>& v) {
      return spec.drift().at_interfaces(v, grid);
    };
    drift.left = finite_difference_jacobian<Scalar>(at, x, at(x));
    drift.right = Matrix<Scalar>::Identity(n, n);
  }
  const Index r = drift.left.cols();
  Matrix<Scalar> P = Matrix<Scalar>::Zero(n, r);
  for (Index k = 0; k + 1 < n; ++k) {
    P.row(k) += g[k] * drift.left.row(k);
    P.row(k + 1) -= g[k] * drift.left.row(k);
  }
  P *= -dt / dw;

  Matrix<Scalar> Z = solve_tridiagonal<Scalar>(sub, diag, super, P);
  Matrix<Scalar> capacitance = Matrix<Scalar>::Identity(r, r) + drift.right.transpose() * Z;
  return [sub, diag, super, Z, V = drift.right, lu = capacitance.partialPivLu()](const Vector<Scalar>& rhs_vec) {
    const Vector<Scalar> y = solve_tridiagonal<Scalar>(sub, diag, super, rhs_vec);
    const Vector<Scalar> w = lu.solve(V.transpose() * y);
    return Vector<Scalar>(y - Z * w);
  };
}

template <typename Scalar>
State<Scalar> step_implicit_euler(const State<Scalar>& s, const ProblemSpec<Scalar>& spec, Scalar dt,
                                  const NewtonOptions& opts = {}, NewtonStats* stats = nullptr) {
  std::function<Vector<Scalar>(const Vector<Scalar>&)> g = [&spec](const Vector<Scalar>& v) { return rhs(v, spec); };
  std::function<NewtonLinearSolve<Scalar>(const Vector<Scalar>&)> linearize;
  if (opts.jacobian_mode == JacobianMode::AnalyticLowRank) {
    linearize = [&spec, dt](const Vector<Scalar>& x) { return structured_newton_solver(x, spec, dt); };
  }
  auto [x, iters] = implicit_euler_solve<Scalar>(s.values, dt, g, opts, linearize);
  if (stats) stats->record(iters);
  return {std::move(x), s.time + dt};
}

// ---------------------------------------------------------------------------
// Time loop
// ---------------------------------------------------------------------------

template <typename Scalar>
State<Scalar> step(SchemeId scheme, const State<Scalar>& s, const ProblemSpec<Scalar>& spec, Scalar dt,
                   const NewtonOptions& newton = {}, NewtonStats* stats = nullptr) {
  switch (scheme) {
    case SchemeId::MPE: return step_mpe(s, spec, dt);
    case SchemeId::MPRK: return step_mprk(s, spec, dt);
    case SchemeId::ExplicitEuler: return step_explicit_euler(s, spec, dt);
    case SchemeId::Heun: return step_heun(s, spec, dt);
    case SchemeId::ImplicitEuler: return step_implicit_euler(s, spec, dt, newton, stats);
  }
  throw std::invalid_argument("step: unknown scheme");
}

struct IntegrateOptions {
  /// Blow-up is flagged once dw * sum|f| exceeds this multiple of the initial mass.
  double blowup_guard = 1e6;
  NewtonOptions newton;
};

template <typename Scalar>
struct IntegrationResult {
  State<Scalar> final_state;
  long long steps = 0;
  bool blowup = false;
  NewtonStats newton;
};

/// Step sizes for [0, t_end]: full steps of dt plus one shortened step if dt
/// does not divide t_end (to within 1e-9 dt).
template <typename Scalar>
std::pair<long long, Scalar> step_plan(Scalar dt, Scalar t_end) {
  using std::abs;
  using std::floor;
  using std::llround;
  const Scalar q = t_end / dt;
  const long long nearest = llround(q);
  if (nearest >= 1 && abs(static_cast<Scalar>(nearest) * dt - t_end) <= Scalar(1e-9) * dt) return {nearest, Scalar(0)};
  const long long full = static_cast<long long>(floor(q));
  return {full, t_end - static_cast<Scalar>(full) * dt};
}

/**
 * Fixed-step integration on [0, t_end]. The observer sees every accepted state.
 * Integration stops early with `blowup` set when the state turns non-finite or
 * its L1 norm exceeds the guard; that state is not passed to the observer.
 */
template <typename Scalar>
IntegrationResult<Scalar> integrate(const State<Scalar>& state0, const ProblemSpec<Scalar>& spec, SchemeId scheme,
                                    Scalar dt, Scalar t_end,
                                    const std::function<void(const State<Scalar>&)>& observer = {},
                                    const IntegrateOptions& options = {}) {
  if (!(dt > 0) || !(t_end > 0)) throw std::invalid_argument("integrate: dt and t_end must be positive");
  const auto& grid = spec.grid();
  const Scalar limit = Scalar(options.blowup_guard) * l1_norm(state0.values, grid);
  const auto [full_steps, remainder] = step_plan(dt, t_end);
  const long long total = full_steps + (remainder > 0 ? 1 : 0);

  IntegrationResult<Scalar> result;
  result.final_state = state0;
  for (long long k = 1; k <= total; ++k) {
    const bool last_partial = k > full_steps;
    const Scalar h = last_partial ? remainder : dt;
    State<Scalar> next = step(scheme, result.final_state, spec, h, options.newton, &result.newton);
    next.time = last_partial || k == total ? t_end : static_cast<Scalar>(k) * dt;
    if (!next.all_finite() || l1_norm(next.values, grid) > limit) {
      result.blowup = true;
      break;
    }
    result.final_state = std::move(next);
    result.steps = k;
    if (observer) observer(result.final_state);
  }
  return result;
}

}  // namespace fpk
