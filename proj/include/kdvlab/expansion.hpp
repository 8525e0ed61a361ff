#pragma once

// Background profiles built from the expansion, the remainders left when
// they are substituted into the rescaled Euler-Poisson system, and checks
// that those remainders stay bounded as delta shrinks.

#include <kdvlab/kdv.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace kdvlab {

struct BackgroundProfile {
  Field1D rho_bar, u_bar, theta_bar, phi_bar;
  double delta = 0.0;
};

inline BackgroundProfile build_background(const ExpansionProfile& p, double delta) {
  if (!(delta > 0.0 && delta <= 0.5)) throw std::invalid_argument("build_background: delta must lie in (0, 0.5]");
  const double d2 = delta * delta;
  BackgroundProfile b{1.0 + delta * p.rho1 + d2 * p.rho2, delta * p.u1_1 + d2 * p.u1_2,
                      1.5 + 1.5 * delta * p.theta1 + 1.5 * d2 * p.theta2, delta * p.phi1 + d2 * p.phi2, delta};
  if (b.rho_bar.min() <= 0.0)
    throw std::domain_error("build_background: rho_bar <= 0, amplitude too large for delta = " +
                            std::to_string(delta));
  return b;
}

/// 1 + z + z^2/2 - e^z without cancellation: Taylor series for |z| < 0.1,
/// direct evaluation through expm1 otherwise.
inline double exp_quadratic_remainder(double z) {
  if (std::abs(z) < 0.1) {
    // -(z^3/3! + z^4/4! + ...), 14 terms reach round-off at |z| = 0.1
    double term = z * z * z / 6.0, sum = 0.0;
    for (int k = 3; k < 17; ++k) {
      sum += term;
      term *= z / (k + 1);
    }
    return -sum;
  }
  return z + 0.5 * z * z - std::expm1(z);
}

struct RemainderSet {
  Field1D R1, R2, R3, R4;

  const Field1D& operator[](int i) const {
    switch (i) {
      case 0: return R1;
      case 1: return R2;
      case 2: return R3;
      default: return R4;
    }
  }
};

/// Time derivatives of the order-1 and order-2 fields from the hierarchy
/// flows and the chain rule.
struct ProfileTimeDerivatives {
  Field1D u1_1, u1_2, theta2;
};

inline ProfileTimeDerivatives profile_time_derivatives(const ExpansionProfile& p, const Field1D& rho1_t,
                                                       const Field1D& rho2_t, const SpatialGrid& grid,
                                                       SoundSpeed A) {
  return {A.value * rho1_t, A.value * rho2_t + source_h11_rate(p.rho1, rho1_t, grid, A),
          (2.0 / 3.0) * rho2_t - (2.0 / 9.0) * p.rho1 * rho1_t};
}

/// R1..R4, every sub-term assembled as written. The time derivative of
/// theta2 enters R3 with weight 3/2, the value that makes the temperature
/// line of the background identity exact for theta_bar = 3/2 (1 + ...).
inline RemainderSet compute_remainders(const ExpansionProfile& p, const Field1D& rho1_t, const Field1D& rho2_t,
                                       double delta, const SpatialGrid& grid, SoundSpeed A) {
  detail::require_on_grid(rho1_t, grid, "compute_remainders");
  detail::require_on_grid(rho2_t, grid, "compute_remainders");
  const double a = A.value, d = delta;
  auto dx = [&](const Field1D& f, int k = 1) { return derivative(f, grid, k); };
  const auto rates = profile_time_derivatives(p, rho1_t, rho2_t, grid, A);
  const Field1D& r1 = p.rho1;
  const Field1D& r2 = p.rho2;
  const Field1D& u1 = p.u1_1;
  const Field1D& u2 = p.u1_2;
  const Field1D u1x = dx(u1), u2x = dx(u2), u1u2 = u1 * u2;

  RemainderSet out;
  out.R1 = rho2_t + dx(r1 * u2) + dx(r2 * u1) + d * dx(r2 * u2);

  Field1D R2 = r1 * rates.u1_1 + rates.u1_2 - a * r2 * u1x - a * r1 * u2x + dx(u1u2) + r1 * u1 * u1x +
               dx(r1 * p.theta2) + dx(r2 * p.theta1) + r1 * dx(p.phi2) + r2 * dx(p.phi1);
  R2 += d * (r2 * rates.u1_1 + r1 * rates.u1_2 - a * r2 * u2x + u2 * u2x);
  R2 += d * (r1 * dx(u1u2) + r2 * u1 * u1x + dx(r2 * p.theta2) + r2 * dx(p.phi2));
  R2 += d * d * (r2 * rates.u1_2 + r1 * u2 * u2x + r2 * dx(u1u2));
  R2 += d * d * d * (r2 * u2 * u2x);
  out.R2 = std::move(R2);

  out.R3 = 1.5 * rates.theta2 + p.theta1 * u2x + p.theta2 * u1x + 1.5 * u1 * dx(p.theta2) + 1.5 * u2 * dx(p.theta1) +
           d * (p.theta2 * u2x + 1.5 * u2 * dx(p.theta2));

  Field1D series(p.phi1.size());
  const double d3 = d * d * d;
  for (std::size_t i = 0; i < series.size(); ++i)
    series[i] = exp_quadratic_remainder(d * p.phi1[i] + d * d * p.phi2[i]) / d3;
  out.R4 = dx(p.phi2, 2) - p.phi1 * p.phi2 - 0.5 * d * p.phi2 * p.phi2 + series;
  return out;
}

/// Remainders along the hierarchy flow: rho1_t from the KdV equation and
/// rho2_t from the linearized equation.
inline RemainderSet remainders_on_flow(const Field1D& rho1, const Field1D& rho2, double delta,
                                       const SpatialGrid& grid, SoundSpeed A) {
  const ExpansionProfile p = build_profile(rho1, rho2, grid, A);
  return compute_remainders(p, kdv_rhs(rho1, grid, A), kdv2_rhs(rho1, rho2, grid, A), delta, grid, A);
}

/// Sup norm of (left side of each background equation) - delta^2 R_i, and
/// for the Poisson line delta phi_xx - e^phi + rho - delta^3 R4.
inline std::array<double, 4> background_residuals(const ExpansionProfile& p, const Field1D& rho1_t,
                                                  const Field1D& rho2_t, double delta, const SpatialGrid& grid,
                                                  SoundSpeed A) {
  const double a = A.value, d = delta, inv = 1.0 / delta;
  auto dx = [&](const Field1D& f, int k = 1) { return derivative(f, grid, k); };
  const BackgroundProfile b = build_background(p, delta);
  const auto rates = profile_time_derivatives(p, rho1_t, rho2_t, grid, A);
  const RemainderSet R = compute_remainders(p, rho1_t, rho2_t, delta, grid, A);

  const Field1D rho_t = d * rho1_t + d * d * rho2_t;
  const Field1D u_t = d * rates.u1_1 + d * d * rates.u1_2;
  const Field1D theta_t = 1.5 * d * (2.0 / 3.0) * rho1_t + 1.5 * d * d * rates.theta2;
  const Field1D ux = dx(b.u_bar);

  std::array<double, 4> out{};
  out[0] = (rho_t - a * inv * dx(b.rho_bar) + inv * dx(b.rho_bar * b.u_bar) - d * d * R.R1).max_abs();
  out[1] = (b.rho_bar * u_t - a * inv * b.rho_bar * ux + inv * b.rho_bar * b.u_bar * ux +
            (2.0 / 3.0) * inv * dx(b.rho_bar * b.theta_bar) + inv * b.rho_bar * dx(b.phi_bar) - d * d * R.R2)
               .max_abs();
  out[2] = (theta_t - a * inv * dx(b.theta_bar) + (2.0 / 3.0) * inv * b.theta_bar * ux + inv * b.u_bar * dx(b.theta_bar) -
            d * d * R.R3)
               .max_abs();
  out[3] = (d * dx(b.phi_bar, 2) - b.phi_bar.map([](double v) { return std::exp(v); }) + b.rho_bar -
            d * d * d * R.R4)
               .max_abs();
  return out;
}

// ---------------------------------------------------------------------------
// delta-uniform bounds

struct RemainderNorms {
  double delta = 0.0;
  int k = 0;
  std::array<double, 4> norms{};  // H^k norms of R1..R4
};

inline RemainderNorms remainder_norms(const RemainderSet& r, double delta, int k, const SpatialGrid& grid) {
  if (k < 0 || k > 2) throw std::invalid_argument("remainder_norms: k must lie in 0..2");
  RemainderNorms out{delta, k, {}};
  for (int i = 0; i < 4; ++i) out.norms[i] = sobolev_norm(r[i], grid, k);
  return out;
}

struct RemainderBoundCheck {
  std::vector<RemainderNorms> table;
  std::array<double, 4> spread{};  // max/min over the sweep per remainder (1 when all zero)
  bool pass = false;
};

/// PASS when for each remainder the largest norm over the sweep is at most
/// `factor` times the smallest.
inline RemainderBoundCheck remainder_bound_check(std::vector<RemainderNorms> table, double factor = 3.0) {
  if (table.empty()) throw std::invalid_argument("remainder_bound_check: empty sweep");
  RemainderBoundCheck out;
  out.pass = true;
  for (int i = 0; i < 4; ++i) {
    double lo = INFINITY, hi = 0.0;
    for (const auto& row : table) {
      lo = std::min(lo, row.norms[i]);
      hi = std::max(hi, row.norms[i]);
    }
    out.spread[i] = hi == 0.0 ? 1.0 : (lo == 0.0 ? INFINITY : hi / lo);
    if (!(out.spread[i] <= factor)) out.pass = false;
  }
  out.table = std::move(table);
  return out;
}

}  // namespace kdvlab
