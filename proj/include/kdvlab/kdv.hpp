#pragma once

// KdV hierarchy of the long-wave expansion of the rescaled Euler-Poisson
// system: sound speed, KdV and linearized inhomogeneous KdV solvers, the
// order-1 and order-2 field relations and the cascade audits.
//
// Conventions: the expansion reads
//   R = 1 + d rho1 + d^2 rho2,  U = d u1 + d^2 u2,
//   Theta = 3/2 (1 + d theta1 + d^2 theta2),  Pi = d phi1 + d^2 phi2.
// The primitive h11 is fixed in the mean-zero gauge.

#include <kdvlab/error.hpp>
#include <kdvlab/grid.hpp>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kdvlab {

struct SoundSpeed {
  double value = 0.0;
};

/// Coefficient matrix of the order-delta system acting on
/// (d_x rho1, d_x u1, d_x theta1, d_x phi1).
inline Eigen::Matrix4d sound_speed_matrix(double A) {
  Eigen::Matrix4d m;
  // clang-format off
  m << -A,   1.0,       0.0,  0.0,
       1.0, -A,         1.0,  1.0,
       0.0,  2.0 / 3.0, -A,   0.0,
       1.0,  0.0,       0.0, -1.0;
  // clang-format on
  return m;
}

inline double sound_speed_determinant(double A, const std::array<double, 4>& row_scale = {1, 1, 1, 1}) {
  Eigen::Matrix4d m = sound_speed_matrix(A);
  for (int i = 0; i < 4; ++i) m.row(i) *= row_scale[i];
  return m.determinant();
}

/// Unique positive root of det(sound_speed_matrix(A)) = 0 in (0.5, 3).
inline SoundSpeed find_sound_speed(const std::array<double, 4>& row_scale = {1, 1, 1, 1}) {
  auto det = [&](double a) { return sound_speed_determinant(a, row_scale); };
  double lo = 0.5, hi = 3.0;
  const double flo = det(lo), fhi = det(hi);
  if (!(flo * fhi < 0.0))
    throw SolverError("find_sound_speed: determinant has no sign change on (0.5, 3)");
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(
      det, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  return {0.5 * (a + b)};
}

// ---------------------------------------------------------------------------
// KdV right-hand sides

/// d_t rho1 = -(1/2A) [ (58/9) rho1 d_x rho1 + d_x^3 rho1 ], nonlinearity in
/// conservative form (29/9) d_x(rho1^2) with 2/3-rule dealiasing.
inline Field1D kdv_rhs(const Field1D& rho1, const SpatialGrid& grid, SoundSpeed A) {
  detail::require_on_grid(rho1, grid, "kdv_rhs");
  const Field1D sq = dealiased_product(rho1, rho1, grid);
  Field1D out = (29.0 / 9.0) * spectral_derivative(sq, grid, 1) + spectral_derivative(rho1, grid, 3);
  return out *= -1.0 / (2.0 * A.value);
}

/// Directional derivative of kdv_rhs at rho1 along eta.
inline Field1D kdv_rhs_tangent(const Field1D& rho1, const Field1D& eta, const SpatialGrid& grid,
                               SoundSpeed A) {
  const Field1D prod = dealiased_product(rho1, eta, grid);
  Field1D out = (58.0 / 9.0) * spectral_derivative(prod, grid, 1) + spectral_derivative(eta, grid, 3);
  return out *= -1.0 / (2.0 * A.value);
}

// ---------------------------------------------------------------------------
// Order-1 and order-2 relations

struct FirstOrderFields {
  Field1D u1_1, theta1, phi1;
};

inline FirstOrderFields first_order_fields(const Field1D& rho1, SoundSpeed A) {
  if (!rho1.all_finite()) throw std::domain_error("first_order_fields: non-finite rho1");
  return {A.value * rho1, (2.0 / 3.0) * rho1, rho1};
}

/// h11 = -int^x [d_t rho1 + d_x(rho1 u1_1)], mean-zero gauge, d_t rho1 from kdv_rhs.
inline Field1D source_h11(const Field1D& rho1, const SpatialGrid& grid, SoundSpeed A) {
  Field1D integrand = kdv_rhs(rho1, grid, A) +
                      A.value * spectral_derivative(dealiased_product(rho1, rho1, grid), grid, 1);
  return spectral_antiderivative(-integrand, grid);
}

/// d_t h11 by the chain rule through the KdV flow, given rho1_t = d_t rho1.
inline Field1D source_h11_rate(const Field1D& rho1, const Field1D& rho1_t, const SpatialGrid& grid,
                               SoundSpeed A) {
  Field1D integrand = kdv_rhs_tangent(rho1, rho1_t, grid, A) +
                      2.0 * A.value * spectral_derivative(dealiased_product(rho1, rho1_t, grid), grid, 1);
  return spectral_antiderivative(-integrand, grid);
}

struct SecondOrderFields {
  Field1D u1_2, theta2, phi2;
};

inline SecondOrderFields second_order_fields(const Field1D& rho1, const Field1D& rho2,
                                             const SpatialGrid& grid, SoundSpeed A) {
  detail::require_on_grid(rho2, grid, "second_order_fields");
  const Field1D sq = rho1 * rho1;
  return {A.value * rho2 + source_h11(rho1, grid, A),
          (2.0 / 3.0) * rho2 - (1.0 / 9.0) * sq,
          rho2 + spectral_derivative(rho1, grid, 2) - 0.5 * sq};
}

/// Order-by-order fields of the expansion.
struct ExpansionProfile {
  Field1D rho1, u1_1, theta1, phi1;
  Field1D rho2, u1_2, theta2, phi2;
};

inline ExpansionProfile build_profile(const Field1D& rho1, const Field1D& rho2, const SpatialGrid& grid,
                                      SoundSpeed A) {
  auto first = first_order_fields(rho1, A);
  auto second = second_order_fields(rho1, rho2, grid, A);
  return {rho1, std::move(first.u1_1), std::move(first.theta1), std::move(first.phi1),
          rho2, std::move(second.u1_2), std::move(second.theta2), std::move(second.phi2)};
}

// ---------------------------------------------------------------------------
// Source of the linearized inhomogeneous KdV equation

struct KdV2SourceTerms {
  Field1D h11, h12, h13, g;
};

/// h12, h13 and g = h12 - h13/A, term by term.
inline KdV2SourceTerms kdv2_source_terms(const Field1D& rho1, const SpatialGrid& grid, SoundSpeed A) {
  detail::require_on_grid(rho1, grid, "kdv2_source_g");
  const double a = A.value;
  auto d = [&](const Field1D& f, int k = 1) { return derivative(f, grid, k); };

  const auto [u1, theta1, phi1] = first_order_fields(rho1, A);
  const Field1D rho1_t = kdv_rhs(rho1, grid, A);
  const Field1D h11 = source_h11(rho1, grid, A);
  const Field1D h11_t = source_h11_rate(rho1, rho1_t, grid, A);
  const Field1D sq = rho1 * rho1;
  const Field1D rho1_x = d(rho1);

  Field1D h12 = -a * sq * d(u1);
  h12 += rho1 * d(rho1 * theta1);
  h12 += sq * d(phi1);
  h12 += d((1.0 / 6.0) * phi1 * phi1 * phi1);
  h12 -= h11_t;
  h12 -= 2.0 * a * d(rho1 * h11);
  h12 += (1.0 / 9.0) * sq * rho1_x;
  h12 -= d(d(rho1, 2) - 0.5 * sq, 3);
  h12 += d(rho1 * d(rho1, 2));
  h12 -= d(rho1 * (0.5 * sq));

  Field1D h13 = -(2.0 / 3.0) * d(rho1 * h11);
  h13 -= (1.0 / 9.0) * (2.0 * rho1 * rho1_t);
  h13 += (4.0 / 9.0) * rho1 * d(h11);
  h13 -= (1.0 / 9.0) * (2.0 / 3.0) * a * sq * rho1_x;
  h13 -= a * rho1 * (1.0 / 9.0) * d(sq);
  h13 += (2.0 / 3.0) * h11 * rho1_x;

  Field1D g = h12 - (1.0 / a) * h13;
  return {h11, std::move(h12), std::move(h13), std::move(g)};
}

/// g(rho1) of 2A d_t rho2 + (58/9) d_x(rho1 rho2) + d_x^3 rho2 = g(rho1).
inline Field1D kdv2_source_g(const Field1D& rho1, const SpatialGrid& grid, SoundSpeed A) {
  return kdv2_source_terms(rho1, grid, A).g;
}

/// d_t rho2 from the linearized inhomogeneous KdV equation.
inline Field1D kdv2_rhs(const Field1D& rho1, const Field1D& rho2, const SpatialGrid& grid, SoundSpeed A,
                        const Field1D* g = nullptr) {
  const Field1D source = g ? *g : kdv2_source_g(rho1, grid, A);
  Field1D out = source - (58.0 / 9.0) * spectral_derivative(dealiased_product(rho1, rho2, grid), grid, 1) -
                spectral_derivative(rho2, grid, 3);
  return out *= 1.0 / (2.0 * A.value);
}

// ---------------------------------------------------------------------------
// Integrating-factor RK4 in Fourier space

struct KdVState {
  Field1D rho1;
  std::optional<Field1D> rho2;
  double time = 0.0;
};

using KdVTrajectory = std::vector<KdVState>;

struct KdVRunOptions {
  double t_final = 1.0;
  double dt = 1e-3;
  int samples = 1;  // number of equal output intervals on [0, t_final]
};

namespace detail {

// Exact propagator exp(L dt) of d_t rho = -(1/2A) d_x^3 rho, truncated to the
// dealiased band (modes above the cutoff are killed).
inline Spectrum airy_propagator(const SpatialGrid& grid, SoundSpeed A, double dt) {
  Spectrum e(static_cast<std::size_t>(grid.modes()));
  const int cutoff = grid.dealias_cutoff();
  for (int m = 0; m < grid.modes(); ++m) {
    const double k = grid.wavenumber(m);
    e[m] = m <= cutoff ? std::polar(1.0, k * k * k / (2.0 * A.value) * dt) : Complex(0.0);
  }
  return e;
}

inline Spectrum mul(const Spectrum& a, const Spectrum& b) {
  Spectrum out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline Spectrum axpy(const Spectrum& x, double s, const Spectrum& y) {
  Spectrum out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + s * y[i];
  return out;
}

// One IF-RK4 step for y_t = L y + N(y, t) with half-step propagator e_half.
template <class Nonlinear>
Spectrum ifrk4_step(const Spectrum& y, double t, double dt, const Spectrum& e_half, Nonlinear&& N) {
  const Spectrum e_full = mul(e_half, e_half);
  const Spectrum a = N(y, t);
  const Spectrum b = N(mul(e_half, axpy(y, 0.5 * dt, a)), t + 0.5 * dt);
  const Spectrum c = N(axpy(mul(e_half, y), 0.5 * dt, b), t + 0.5 * dt);
  const Spectrum d = N(axpy(mul(e_full, y), dt, mul(e_half, c)), t + dt);
  Spectrum out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = e_full[i] * y[i] + dt / 6.0 * (e_full[i] * a[i] + 2.0 * e_half[i] * (b[i] + c[i]) + d[i]);
  return out;
}

inline Spectrum truncated_spectrum(const Field1D& f, const SpatialGrid& grid) {
  Spectrum s = to_spectrum(f, grid);
  for (int m = grid.dealias_cutoff() + 1; m < grid.modes(); ++m) s[m] = 0.0;
  return s;
}

inline void require_finite(const Field1D& f, double t, const char* who) {
  if (!f.all_finite())
    throw SolverError(std::string(who) + ": non-finite value (blow-up) at t = " + std::to_string(t));
}

}  // namespace detail

/// Integrate the KdV equation from rho1(0) = initial; returns samples + 1
/// states at t = j t_final / samples. The step is reduced so that each
/// output interval holds an integer number of steps.
inline KdVTrajectory kdv_solve(const Field1D& initial, const SpatialGrid& grid, SoundSpeed A,
                               const KdVRunOptions& opt) {
  detail::require_on_grid(initial, grid, "kdv_solve");
  if (!(opt.t_final > 0.0) || !(opt.dt > 0.0) || opt.samples < 1)
    throw std::invalid_argument("kdv_solve: t_final, dt and samples must be positive");
  const double interval = opt.t_final / opt.samples;
  const int steps_per_sample = static_cast<int>(std::ceil(interval / opt.dt - 1e-9));
  const double h = interval / steps_per_sample;

  const Spectrum e_half = detail::airy_propagator(grid, A, 0.5 * h);
  const double coef = -29.0 / (18.0 * A.value);
  const int cutoff = grid.dealias_cutoff();
  auto nonlinear = [&](const Spectrum& y, double t) {
    const Field1D rho = from_spectrum(y, grid);
    const Field1D sq = rho * rho;
    detail::require_finite(sq, t, "kdv_solve");
    Spectrum s = to_spectrum(sq, grid);
    for (int m = 0; m < grid.modes(); ++m)
      s[m] = m <= cutoff ? coef * Complex(0.0, grid.wavenumber(m)) * s[m] : Complex(0.0);
    return s;
  };

  KdVTrajectory out;
  out.reserve(static_cast<std::size_t>(opt.samples) + 1);
  Spectrum y = detail::truncated_spectrum(initial, grid);
  out.push_back({from_spectrum(y, grid), std::nullopt, 0.0});
  for (int s = 0; s < opt.samples; ++s) {
    for (int j = 0; j < steps_per_sample; ++j) {
      const double t = s * interval + j * h;
      y = detail::ifrk4_step(y, t, h, e_half, nonlinear);
    }
    const double t = (s + 1) * interval;
    Field1D rho = from_spectrum(y, grid);
    detail::require_finite(rho, t, "kdv_solve");
    out.push_back({std::move(rho), std::nullopt, t});
  }
  return out;
}

/// Integrate the linearized inhomogeneous KdV equation for rho2 along a rho1
/// trajectory. The trajectory must be sampled every dt/2 so that the RK4
/// stage times are available; returns rho2 at t0 + j dt.
inline std::vector<Field1D> kdv2_solve(const KdVTrajectory& rho1_traj, const Field1D& rho2_initial,
                                       const SpatialGrid& grid, SoundSpeed A, double dt) {
  detail::require_on_grid(rho2_initial, grid, "kdv2_solve");
  if (rho1_traj.size() < 3 || rho1_traj.size() % 2 == 0)
    throw std::invalid_argument("kdv2_solve: trajectory must hold 2N+1 samples at spacing dt/2");
  const double t0 = rho1_traj.front().time;
  for (std::size_t i = 0; i < rho1_traj.size(); ++i) {
    const double expected = t0 + 0.5 * dt * static_cast<double>(i);
    if (std::abs(rho1_traj[i].time - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
      throw std::invalid_argument("kdv2_solve: trajectory time mismatch at sample " + std::to_string(i) +
                                  " (t = " + std::to_string(rho1_traj[i].time) + ", expected " +
                                  std::to_string(expected) + ")");
  }

  std::vector<std::optional<Spectrum>> source_cache(rho1_traj.size());
  auto source_at = [&](std::size_t i) -> const Spectrum& {
    if (!source_cache[i]) {
      Spectrum s = to_spectrum(kdv2_source_g(rho1_traj[i].rho1, grid, A), grid);
      for (auto& c : s) c *= 1.0 / (2.0 * A.value);
      source_cache[i] = std::move(s);
    }
    return *source_cache[i];
  };

  const Spectrum e_half = detail::airy_propagator(grid, A, 0.5 * dt);
  const double coef = -29.0 / (9.0 * A.value);
  const int cutoff = grid.dealias_cutoff();
  auto nonlinear = [&](const Spectrum& y, double t) {
    const auto idx = static_cast<std::size_t>(std::llround((t - t0) / (0.5 * dt)));
    const Field1D rho2 = from_spectrum(y, grid);
    const Field1D prod = dealias(rho1_traj[idx].rho1, grid) * rho2;
    detail::require_finite(prod, t, "kdv2_solve");
    Spectrum s = to_spectrum(prod, grid);
    const Spectrum& src = source_at(idx);
    for (int m = 0; m < grid.modes(); ++m)
      s[m] = m <= cutoff ? coef * Complex(0.0, grid.wavenumber(m)) * s[m] + src[m] : Complex(0.0);
    return s;
  };

  const std::size_t steps = (rho1_traj.size() - 1) / 2;
  std::vector<Field1D> out;
  out.reserve(steps + 1);
  Spectrum y = detail::truncated_spectrum(rho2_initial, grid);
  out.push_back(from_spectrum(y, grid));
  for (std::size_t j = 0; j < steps; ++j) {
    const double t = t0 + static_cast<double>(j) * dt;
    y = detail::ifrk4_step(y, t, dt, e_half, nonlinear);
    Field1D rho2 = from_spectrum(y, grid);
    detail::require_finite(rho2, t + dt, "kdv2_solve");
    out.push_back(std::move(rho2));
  }
  return out;
}

/// rho1 and rho2 together: KdV on the half-step grid, then the rho2 equation
/// on the full step. Returns samples + 1 states carrying both fields.
inline KdVTrajectory solve_hierarchy(const Field1D& rho1_initial, const Field1D& rho2_initial,
                                     const SpatialGrid& grid, SoundSpeed A, const KdVRunOptions& opt) {
  if (!(opt.t_final > 0.0) || !(opt.dt > 0.0) || opt.samples < 1)
    throw std::invalid_argument("solve_hierarchy: t_final, dt and samples must be positive");
  const double interval = opt.t_final / opt.samples;
  const int steps_per_sample = static_cast<int>(std::ceil(interval / opt.dt - 1e-9));
  const int steps = steps_per_sample * opt.samples;
  const double h = opt.t_final / steps;

  KdVTrajectory fine = kdv_solve(rho1_initial, grid, A, {opt.t_final, 0.5 * h, 2 * steps});
  const std::vector<Field1D> rho2 = kdv2_solve(fine, rho2_initial, grid, A, h);

  KdVTrajectory out;
  for (int s = 0; s <= opt.samples; ++s) {
    const std::size_t j = static_cast<std::size_t>(s) * steps_per_sample;
    out.push_back({fine[2 * j].rho1, rho2[j], fine[2 * j].time});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cascade audits

/// Time derivatives of the expansion fields that the cascade needs.
struct ProfileRates {
  Field1D rho1_t;
  Field1D rho2_t;  // may be empty when only order <= 2 is audited
};

struct CascadeResidual {
  std::array<FieldNorms, 4> lines{};

  double max_l2() const {
    double m = 0.0;
    for (const auto& l : lines) m = std::max(m, l.l2);
    return m;
  }
  double max_linf() const {
    double m = 0.0;
    for (const auto& l : lines) m = std::max(m, l.linf);
    return m;
  }
};

/// Evaluate each line of the order-1 (coefficients of delta) or order-2
/// (coefficients of delta^2) cascade with the given fields.
/// d_t u1_1 and d_t theta1 follow from rho1_t through the order-1 relations.
inline CascadeResidual cascade_residual(int order, const ExpansionProfile& p, const ProfileRates& rates,
                                        const SpatialGrid& grid, SoundSpeed A) {
  const double a = A.value;
  auto d = [&](const Field1D& f, int k = 1) { return derivative(f, grid, k); };
  std::array<Field1D, 4> r;
  if (order == 1) {
    r[0] = -a * d(p.rho1) + d(p.u1_1);
    r[1] = d(p.rho1) - a * d(p.u1_1) + d(p.theta1) + d(p.phi1);
    r[2] = (2.0 / 3.0) * d(p.u1_1) - a * d(p.theta1);
    r[3] = p.rho1 - p.phi1;
  } else if (order == 2) {
    const Field1D& rho1_t = rates.rho1_t;
    const Field1D u1_t = a * rho1_t;
    const Field1D theta1_t = (2.0 / 3.0) * rho1_t;
    r[0] = rho1_t - a * d(p.rho2) + d(p.u1_2) + d(p.rho1 * p.u1_1);
    r[1] = u1_t - a * d(p.u1_2) - a * p.rho1 * d(p.u1_1) + p.u1_1 * d(p.u1_1) + d(p.theta2) + d(p.rho2) +
           d(p.rho1 * p.theta1) + d(p.phi2) + p.rho1 * d(p.phi1);
    r[2] = theta1_t - a * d(p.theta2) + (2.0 / 3.0) * d(p.u1_2) + (2.0 / 3.0) * p.theta1 * d(p.u1_1) +
           p.u1_1 * d(p.theta1);
    r[3] = d(p.phi1, 2) - p.phi2 - 0.5 * p.phi1 * p.phi1 + p.rho2;
  } else {
    throw std::invalid_argument("cascade_residual: order must be 1 or 2");
  }
  CascadeResidual out;
  for (int i = 0; i < 4; ++i) out.lines[i] = field_norms(r[i], grid);
  return out;
}

/// Exact sech^2 traveling wave of the KdV equation with speed c:
/// a sech^2(k (x - x0 - c t)), a = 27 A c / 29, k = sqrt(A c / 2).
/// Evaluated with the periodic images closest to the window.
inline Field1D kdv_soliton(const SpatialGrid& grid, SoundSpeed A, double c, double x0, double t = 0.0) {
  const double amp = 27.0 * A.value * c / 29.0;
  const double k = std::sqrt(A.value * c / 2.0);
  const double L = grid.length();
  return Field1D::sample(grid, [&](double x) {
    double s = 0.0;
    for (int img = -2; img <= 2; ++img) {
      const double arg = k * (x - x0 - c * t + img * L);
      const double sech = 1.0 / std::cosh(arg);
      s += sech * sech;
    }
    return amp * s;
  });
}

}  // namespace kdvlab
