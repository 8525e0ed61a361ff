#pragma once

// Rescaled Euler-Poisson system with Boltzmann electrons:
//   d R     = (1/d)[A R_x - (R U)_x]
//   d U     = (1/d)[A U_x - U U_x - (2/3) Theta_x - (2/3)(Theta/R) R_x - Pi_x]
//   d Theta = (1/d)[A Theta_x - (2/3) Theta U_x - U Theta_x]
//   d Pi_xx = e^Pi - R
// with d the amplitude delta.

#include <kdvlab/error.hpp>
#include <kdvlab/grid.hpp>
#include <kdvlab/kdv.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace kdvlab {

struct FluidState {
  Field1D R, U, Theta, Pi;
  double time = 0.0;
};

enum class CflPolicy { Clamp, Strict };

struct EPParams {
  double delta = 0.1;
  SoundSpeed A{std::sqrt(8.0 / 3.0)};
  double poisson_tol = 1e-11;
  double dt = 1e-3;
  double cfl_number = 0.3;
  CflPolicy cfl = CflPolicy::Clamp;
  bool hyperviscosity = false;
  int max_newton = 50;
  std::ostream* newton_log = nullptr;  // per-iteration residuals when set
};

inline void validate(const EPParams& p) {
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw std::invalid_argument("EPParams: delta must lie in (0, 1)");
  if (!(p.poisson_tol > 0.0 && p.poisson_tol <= 1e-10))
    throw std::invalid_argument("EPParams: poisson_tol must lie in (0, 1e-10]");
  if (!(p.dt > 0.0)) throw std::invalid_argument("EPParams: dt must be positive");
  if (!(p.cfl_number > 0.0)) throw std::invalid_argument("EPParams: cfl_number must be positive");
}

// ---------------------------------------------------------------------------
// Poisson equation

struct PoissonSolution {
  Field1D Pi;
  std::vector<double> residuals;  // ||F||_inf before each Newton step and at exit
  int iterations = 0;
};

namespace detail {

inline Field1D poisson_residual(const Field1D& Pi, const Field1D& R, const SpatialGrid& grid, double delta) {
  return delta * spectral_derivative(Pi, grid, 2) - Pi.map([](double v) { return std::exp(v); }) + R;
}

// Solve (delta d_xx - diag(w)) s = b by the fixed-point iteration
// s <- s + P^{-1}(b - J s), P = delta d_xx - c with c the midrange of w.
inline Field1D newton_direction(const Field1D& w, const Field1D& b, const SpatialGrid& grid, double delta,
                                double tol) {
  const double c = 0.5 * (w.max() + w.min());
  auto precondition = [&](const Field1D& r) {
    return apply_symbol(r, grid, [&](double k, int) -> Complex { return 1.0 / (-delta * k * k - c); });
  };
  Field1D s = precondition(b);
  for (int it = 0; it < 500; ++it) {
    const Field1D res = b - (delta * spectral_derivative(s, grid, 2) - w * s);
    if (res.max_abs() <= tol) return s;
    s += precondition(res);
  }
  throw SolverError("solve_poisson: linear inner iteration did not converge");
}

}  // namespace detail

/// Newton iteration for delta Pi_xx - e^Pi + R = 0 with Armijo backtracking on ||F||_inf.
inline PoissonSolution solve_poisson_logged(const Field1D& R, const SpatialGrid& grid, const EPParams& params,
                                            const Field1D& guess) {
  detail::require_on_grid(R, grid, "solve_poisson");
  detail::require_on_grid(guess, grid, "solve_poisson");
  if (R.min() <= 0.0) throw SolverError("solve_poisson: density R must be positive, min R = " + std::to_string(R.min()));
  const double delta = params.delta;

  PoissonSolution out{guess, {}, 0};
  Field1D F = detail::poisson_residual(out.Pi, R, grid, delta);
  double norm = F.max_abs();
  out.residuals.push_back(norm);
  while (norm >= params.poisson_tol) {
    if (out.iterations == params.max_newton)
      throw SolverError("solve_poisson: Newton did not converge in " + std::to_string(params.max_newton) +
                        " iterations, residual " + std::to_string(norm));
    const Field1D w = out.Pi.map([](double v) { return std::exp(v); });
    // forcing term eta_k = min(1e-2, ||F||) keeps the outer convergence quadratic
    const double inner_tol = std::max(std::min(1e-2, norm) * norm, 1e-16 * std::max(1.0, R.max_abs()));
    const Field1D s = detail::newton_direction(w, -F, grid, delta, inner_tol);

    double lambda = 1.0;
    Field1D trial, F_trial;
    double trial_norm = 0.0;
    for (int bt = 0;; ++bt) {
      trial = out.Pi + lambda * s;
      F_trial = detail::poisson_residual(trial, R, grid, delta);
      trial_norm = F_trial.all_finite() ? F_trial.max_abs() : INFINITY;
      if (trial_norm <= (1.0 - 1e-4 * lambda) * norm || trial_norm < params.poisson_tol) break;
      if (bt == 30) throw SolverError("solve_poisson: line search failed");
      lambda *= 0.5;
    }
    out.Pi = std::move(trial);
    F = std::move(F_trial);
    norm = trial_norm;
    ++out.iterations;
    out.residuals.push_back(norm);
    if (params.newton_log)
      *params.newton_log << "newton " << out.iterations << " step " << lambda << " residual " << norm << '\n';
  }
  return out;
}

inline Field1D solve_poisson(const Field1D& R, const SpatialGrid& grid, const EPParams& params,
                             const Field1D& guess) {
  return solve_poisson_logged(R, grid, params, guess).Pi;
}

inline double poisson_residual_norm(const FluidState& s, const SpatialGrid& grid, double delta) {
  return detail::poisson_residual(s.Pi, s.R, grid, delta).max_abs();
}

// ---------------------------------------------------------------------------
// Tendencies

struct Tendencies {
  Field1D dR, dU, dTheta;
};

inline Tendencies ep_rhs(const FluidState& s, const SpatialGrid& grid, const EPParams& params) {
  detail::require_on_grid(s.R, grid, "ep_rhs");
  detail::require_on_grid(s.U, grid, "ep_rhs");
  detail::require_on_grid(s.Theta, grid, "ep_rhs");
  detail::require_on_grid(s.Pi, grid, "ep_rhs");
  if (s.R.min() <= 0.0) throw SolverError("ep_rhs: density R must be positive");
  const double a = params.A.value, inv = 1.0 / params.delta;
  auto d = [&](const Field1D& f) { return spectral_derivative(f, grid, 1); };
  auto mul = [&](const Field1D& f, const Field1D& g) { return dealiased_product(f, g, grid); };

  const Field1D R_x = d(s.R), U_x = d(s.U), T_x = d(s.Theta);
  Tendencies t;
  t.dR = inv * (a * R_x - d(mul(s.R, s.U)));
  t.dU = inv * (a * U_x - mul(s.U, U_x) - (2.0 / 3.0) * T_x - (2.0 / 3.0) * mul(s.Theta / s.R, R_x) - d(s.Pi));
  t.dTheta = inv * (a * T_x - (2.0 / 3.0) * mul(s.Theta, U_x) - mul(s.U, T_x));
  return t;
}

// ---------------------------------------------------------------------------
// Time stepping

/// Fluid state with Pi solved from R.
inline FluidState make_state(Field1D R, Field1D U, Field1D Theta, const SpatialGrid& grid, const EPParams& params,
                             double time = 0.0) {
  Field1D guess(R.size());
  Field1D Pi = solve_poisson(R, grid, params, guess);
  return {std::move(R), std::move(U), std::move(Theta), std::move(Pi), time};
}

/// Largest stable step: cfl_number * delta * dx / (A + max|U| + sqrt(max Theta)).
inline double cfl_limit(const FluidState& s, const SpatialGrid& grid, const EPParams& params) {
  const double speed = params.A.value + s.U.max_abs() + std::sqrt(std::max(s.Theta.max(), 0.0));
  return params.cfl_number * params.delta * grid.dx() / speed;
}

/// One classical RK4 step of size h (h may be negative); Pi is re-solved at
/// every stage with the previous stage's Pi as Newton guess.
inline FluidState ep_step(const FluidState& s, const SpatialGrid& grid, const EPParams& params, double h) {
  auto stage = [&](const FluidState& base, const Tendencies& k, double c, const Field1D& guess) {
    FluidState out{base.R + c * k.dR, base.U + c * k.dU, base.Theta + c * k.dTheta, {}, base.time + c};
    if (!out.R.all_finite() || !out.U.all_finite() || !out.Theta.all_finite())
      throw SolverError("ep_solve: non-finite state (blow-up) near t = " + std::to_string(base.time));
    if (out.R.min() <= 0.0 || out.Theta.min() <= 0.0)
      throw SolverError("ep_solve: R or Theta lost positivity near t = " + std::to_string(base.time));
    out.Pi = solve_poisson(out.R, grid, params, guess);
    return out;
  };
  const Tendencies k1 = ep_rhs(s, grid, params);
  const FluidState s2 = stage(s, k1, 0.5 * h, s.Pi);
  const Tendencies k2 = ep_rhs(s2, grid, params);
  const FluidState s3 = stage(s, k2, 0.5 * h, s2.Pi);
  const Tendencies k3 = ep_rhs(s3, grid, params);
  const FluidState s4 = stage(s, k3, h, s3.Pi);
  const Tendencies k4 = ep_rhs(s4, grid, params);
  const Tendencies combo{k1.dR + 2.0 * k2.dR + 2.0 * k3.dR + k4.dR, k1.dU + 2.0 * k2.dU + 2.0 * k3.dU + k4.dU,
                         k1.dTheta + 2.0 * k2.dTheta + 2.0 * k3.dTheta + k4.dTheta};
  FluidState out = stage(s, combo, h / 6.0, s4.Pi);
  out.time = s.time + h;
  return out;
}

struct EPRun {
  std::vector<FluidState> states;  // samples + 1 snapshots
  double dt_used = 0.0;            // smallest step taken
  int steps = 0;
  double filter_dissipation = 0.0;  // total loss of int R^2 due to the filter
};

namespace detail {

// exp(-nu k^8 h) with nu set so the top retained mode is damped by exp(-1e-3) per step.
inline Field1D hyperviscous_filter(const Field1D& f, const SpatialGrid& grid) {
  const double kc = grid.wavenumber(grid.dealias_cutoff());
  return apply_symbol(f, grid, [&](double k, int) -> Complex { return std::exp(-1e-3 * std::pow(k / kc, 8)); });
}

}  // namespace detail

/// Integrate to t_final, recording samples + 1 equally spaced snapshots.
/// The step inside each output interval is min(dt, CFL limit) rounded down
/// to divide the interval; the Strict policy rejects a user dt above the limit.
inline EPRun ep_solve(const FluidState& initial, const SpatialGrid& grid, const EPParams& params, double t_final,
                      int samples = 1) {
  validate(params);
  if (!(t_final > 0.0) || samples < 1) throw std::invalid_argument("ep_solve: t_final and samples must be positive");
  if (poisson_residual_norm(initial, grid, params.delta) >= params.poisson_tol)
    throw std::invalid_argument("ep_solve: initial state violates the Poisson invariant");

  EPRun run;
  run.states.push_back(initial);
  run.dt_used = params.dt;
  FluidState s = initial;
  const double interval = t_final / samples;
  for (int j = 0; j < samples; ++j) {
    const double limit = cfl_limit(s, grid, params);
    if (params.dt > limit && params.cfl == CflPolicy::Strict)
      throw SolverError("ep_solve: dt = " + std::to_string(params.dt) + " violates the CFL limit " +
                        std::to_string(limit));
    const double target = std::min(params.dt, limit);
    const int steps = static_cast<int>(std::ceil(interval / target - 1e-9));
    const double h = interval / steps;
    run.dt_used = std::min(run.dt_used, h);
    for (int i = 0; i < steps; ++i) {
      s = ep_step(s, grid, params, h);
      if (params.hyperviscosity) {
        const double before = integrate(s.R * s.R, grid);
        s.R = detail::hyperviscous_filter(s.R, grid);
        s.U = detail::hyperviscous_filter(s.U, grid);
        s.Theta = detail::hyperviscous_filter(s.Theta, grid);
        s.Pi = solve_poisson(s.R, grid, params, s.Pi);
        run.filter_dissipation += before - integrate(s.R * s.R, grid);
      }
      ++run.steps;
    }
    s.time = (j + 1) * interval;
    run.states.push_back(s);
  }
  return run;
}

/// Order-1 long-wave data (1 + d rho1, d A rho1, 3/2 + d rho1) with Pi from the
/// Poisson equation; with second_order the delta^2 fields of the expansion are added.
inline FluidState expansion_initial_state(const Field1D& rho1, const Field1D& rho2, const SpatialGrid& grid,
                                          const EPParams& params, bool second_order) {
  const double d = params.delta;
  const auto first = first_order_fields(rho1, params.A);
  Field1D R = 1.0 + d * rho1;
  Field1D U = d * first.u1_1;
  Field1D Theta = 1.5 + 1.5 * d * first.theta1;
  if (second_order) {
    const auto second = second_order_fields(rho1, rho2, grid, params.A);
    R += d * d * rho2;
    U += d * d * second.u1_2;
    Theta += 1.5 * d * d * second.theta2;
  }
  return make_state(std::move(R), std::move(U), std::move(Theta), grid, params);
}

}  // namespace kdvlab
