#pragma once

// Landau collision frequency sigma = Phi * mu for the Coulomb kernel
// Phi(z) = (I - z z^T/|z|^2)/|z|, the sigma-norm, the time-velocity weight,
// and the energy / dissipation functionals of the perturbation.

#include <kdvlab/error.hpp>
#include <kdvlab/grid.hpp>
#include <kdvlab/kinetic.hpp>

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace kdvlab {

// ---------------------------------------------------------------------------
// Collision frequency

/// Radial profiles of sigma(v) = lambda_par(|v|) vhat vhat^T + lambda_perp(|v|) (I - vhat vhat^T).
///
/// sigma is the Hessian of G(v) = int |v - w| mu(w) dw. Averaging |v - w| over
/// spheres |w| = s gives, with m(s) = 4 pi s^2 mu(s),
///   lambda_par(r)  = 2/(3 r^3) int_0^r m s^2 ds + 2/3 int_r^inf m/s ds
///   lambda_perp(r) = int_0^r m (1/r - s^2/(3 r^3)) ds + 2/3 int_r^inf m/s ds.
/// These are tabulated on xi = log(1 + r), r in [0, 30], and splined; past
/// r = 30 the Gaussian tail is below round-off and the exact far field
/// lambda_par = 2/r^3, lambda_perp = (1 - 1/r^2)/r is used.
class SigmaTable {
 public:
  static constexpr double r_max = 30.0;
  static constexpr int points = 4001;

  static const SigmaTable& instance() {
    static const SigmaTable table;
    return table;
  }

  double parallel(double r) const {
    if (r >= r_max) return 2.0 / (r * r * r);
    return par_spline_(std::log1p(r));
  }
  double perpendicular(double r) const {
    if (r >= r_max) return (1.0 - 1.0 / (r * r)) / r;
    return perp_spline_(std::log1p(r));
  }

  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& parallel_values() const { return par_; }
  const std::vector<double>& perpendicular_values() const { return perp_; }
  /// Largest disagreement between the table and its panel-doubled rebuild.
  double refinement_disagreement() const { return disagreement_; }

  /// Profiles computed directly by quadrature (no spline), `split` panels per table interval.
  static std::pair<std::vector<double>, std::vector<double>> quadrature_profiles(const std::vector<double>& r,
                                                                                 int split) {
    using Rule = boost::math::quadrature::gauss<double, 20>;
    const double c = std::sqrt(2.0 / std::numbers::pi);
    auto m = [&](double s) { return c * s * s * std::exp(-0.5 * s * s); };
    auto piece = [&](auto&& fn, double a, double b) {
      double sum = 0.0;
      const double h = (b - a) / split;
      for (int p = 0; p < split; ++p) sum += Rule::integrate(fn, a + p * h, a + (p + 1) * h);
      return sum;
    };
    // int_r^inf m/s = c e^{-r^2/2} is integrated numerically too, from the far end
    const double far = 40.0;
    std::vector<double> par(r.size()), perp(r.size());
    double P = 0.0, Q = 0.0;
    std::vector<double> J(r.size());
    double tail = piece([&](double s) { return c * s * std::exp(-0.5 * s * s); }, r.back(), far);
    for (std::size_t i = r.size(); i-- > 0;) {
      if (i + 1 < r.size()) tail += piece([&](double s) { return c * s * std::exp(-0.5 * s * s); }, r[i], r[i + 1]);
      J[i] = tail;
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i > 0) {
        P += piece([&](double s) { return m(s) * s * s; }, r[i - 1], r[i]);
        Q += piece(m, r[i - 1], r[i]);
      }
      const double x = r[i];
      if (x == 0.0) {
        par[i] = perp[i] = 2.0 / 3.0 * J[i];
      } else {
        par[i] = 2.0 * P / (3.0 * x * x * x) + 2.0 / 3.0 * J[i];
        perp[i] = Q / x - P / (3.0 * x * x * x) + 2.0 / 3.0 * J[i];
      }
    }
    return {par, perp};
  }

 private:
  SigmaTable() : radii_(points), xi_step_(std::log1p(r_max) / (points - 1)) {
    for (int i = 0; i < points; ++i) radii_[i] = std::expm1(i * xi_step_);
    std::tie(par_, perp_) = quadrature_profiles(radii_, 1);
    const auto [par2, perp2] = quadrature_profiles(radii_, 2);
    for (int i = 0; i < points; ++i)
      disagreement_ = std::max({disagreement_, std::abs(par_[i] - par2[i]), std::abs(perp_[i] - perp2[i])});
    if (disagreement_ > 1e-6)
      throw SolverError("SigmaTable: quadrature refinement disagreement " + std::to_string(disagreement_));
    par_spline_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(par_.begin(), par_.end(), 0.0, xi_step_,
                                                                              0.0);
    perp_spline_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(perp_.begin(), perp_.end(), 0.0,
                                                                               xi_step_, 0.0);
  }

  std::vector<double> radii_, par_, perp_;
  double xi_step_;
  double disagreement_ = 0.0;
  boost::math::interpolators::cardinal_cubic_b_spline<double> par_spline_, perp_spline_;
};

using SigmaTensor = Eigen::Matrix3d;

inline SigmaTensor collision_frequency(const Vec3& v) {
  const auto& table = SigmaTable::instance();
  const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  const double lp = table.parallel(r), lt = table.perpendicular(r);
  SigmaTensor s = lt * SigmaTensor::Identity();
  if (r > 0.0) {
    const Eigen::Vector3d n(v[0] / r, v[1] / r, v[2] / r);
    s += (lp - lt) * n * n.transpose();
  }
  return s;
}

// ---------------------------------------------------------------------------
// Velocity derivatives on a uniform grid

namespace detail {

inline void require_uniform(const VelocityGrid& vg, const char* who) {
  if (vg.rule() != VelocityGrid::Rule::Trapezoid)
    throw std::invalid_argument(std::string(who) + ": velocity derivatives need the uniform grid");
}

}  // namespace detail

/// Fourth-order centered difference along axis 0..2, zero outside [-vmax, vmax].
inline DistributionSlice velocity_derivative(const DistributionSlice& g, const VelocityGrid& vg, int axis) {
  detail::require_uniform(vg, "velocity_derivative");
  if (axis < 0 || axis > 2) throw std::invalid_argument("velocity_derivative: axis must lie in 0..2");
  const Eigen::Index m = vg.points_per_axis();
  const double h = vg.axis()[1] - vg.axis()[0];
  const Eigen::Index stride = axis == 0 ? m * m : (axis == 1 ? m : 1);
  DistributionSlice out(g.size());
  for (Eigen::Index n = 0; n < g.size(); ++n) {
    const Eigen::Index pos = (n / stride) % m;
    auto at = [&](Eigen::Index off) {
      const Eigen::Index p = pos + off;
      return (p < 0 || p >= m) ? 0.0 : g[n + off * stride];
    };
    out[n] = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h);
  }
  return out;
}

using MultiIndex = std::array<int, 3>;

inline int order(const MultiIndex& b) { return b[0] + b[1] + b[2]; }

inline DistributionSlice velocity_partial(DistributionSlice g, const VelocityGrid& vg, const MultiIndex& beta) {
  for (int a = 0; a < 3; ++a)
    for (int k = 0; k < beta[a]; ++k) g = velocity_derivative(g, vg, a);
  return g;
}

/// All beta with lo <= |beta| <= hi.
inline std::vector<MultiIndex> multi_indices(int lo, int hi) {
  std::vector<MultiIndex> out;
  for (int total = lo; total <= hi; ++total)
    for (int a = total; a >= 0; --a)
      for (int b = total - a; b >= 0; --b) out.push_back({a, b, total - a - b});
  return out;
}

// ---------------------------------------------------------------------------
// Weight function

struct WeightParams {
  int l = 2;
  double q1 = 0.1;
  double q2 = 1.0;

  void validate() const {
    if (l < 2) throw std::invalid_argument("WeightParams: l must be >= 2");
    if (!(q1 > 0.0 && q1 < 1.0)) throw std::invalid_argument("WeightParams: q1 must lie in (0, 1)");
    if (!(q2 > 0.0)) throw std::invalid_argument("WeightParams: q2 must be positive");
  }
};

inline double japanese_bracket(const Vec3& v) { return std::sqrt(1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

/// w(alpha, beta)(t, v) = <v>^{2(l - alpha - |beta|)} exp(q1 (1+t)^{-q2} <v>^2 / 2).
inline double weight_w(int alpha, int beta, double t, const Vec3& v, const WeightParams& p) {
  p.validate();
  if (alpha < 0 || beta < 0 || alpha + beta > p.l)
    throw std::invalid_argument("weight_w: need 0 <= alpha + |beta| <= l");
  if (!(t >= 0.0)) throw std::invalid_argument("weight_w: t must be non-negative");
  const double jb = japanese_bracket(v);
  return std::pow(jb, 2 * (p.l - alpha - beta)) * std::exp(p.q1 / std::pow(1.0 + t, p.q2) * jb * jb / 2.0);
}

/// d/dt [w^2] = -q1 q2 (1+t)^{-(1+q2)} <v>^2 w^2.
inline double weight_w2_rate(int alpha, int beta, double t, const Vec3& v, const WeightParams& p) {
  const double w = weight_w(alpha, beta, t, v, p);
  const double jb = japanese_bracket(v);
  return -p.q1 * p.q2 * std::pow(1.0 + t, -(1.0 + p.q2)) * jb * jb * w * w;
}

inline DistributionSlice weight_field(int alpha, int beta, double t, const VelocityGrid& vg, const WeightParams& p) {
  return vg.sample([&](const Vec3& v) { return weight_w(alpha, beta, t, v, p); });
}

// ---------------------------------------------------------------------------
// sigma-norm

/// sigma sampled on a velocity grid: lambda_par, lambda_perp and |v|.
struct SigmaField {
  DistributionSlice par, perp, speed;
  std::array<DistributionSlice, 3> vhat;
};

inline SigmaField sigma_field(const VelocityGrid& vg) {
  const auto& table = SigmaTable::instance();
  SigmaField s;
  s.speed = vg.sample([](const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); });
  s.par = s.speed.unaryExpr([&](double r) { return table.parallel(r); });
  s.perp = s.speed.unaryExpr([&](double r) { return table.perpendicular(r); });
  for (int a = 0; a < 3; ++a)
    s.vhat[a] = vg.sample([&](const Vec3& v) {
      const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      return r > 0.0 ? v[a] / r : 0.0;
    });
  return s;
}

/// |g|^2_{sigma,w} = int w^2 [sigma_ij d_i g d_j g + sigma_ij (v_i/2)(v_j/2) g^2] dv,
/// with sigma_ij v_i v_j = lambda_par |v|^2.
inline double sigma_norm_squared(const DistributionSlice& g, const VelocityGrid& vg, const SigmaField& s,
                                 const DistributionSlice* weight = nullptr) {
  std::array<DistributionSlice, 3> grad;
  for (int a = 0; a < 3; ++a) grad[a] = velocity_derivative(g, vg, a);
  const DistributionSlice radial = grad[0] * s.vhat[0] + grad[1] * s.vhat[1] + grad[2] * s.vhat[2];
  const DistributionSlice grad2 = grad[0].square() + grad[1].square() + grad[2].square();
  DistributionSlice density = s.perp * grad2 + (s.par - s.perp) * radial.square() + 0.25 * s.par * s.speed.square() * g.square();
  if (weight) density *= weight->square();
  const double value = integral(density, vg);
  if (value < -1e-12) throw std::domain_error("sigma_norm: negative quadratic form " + std::to_string(value));
  return std::max(value, 0.0);
}

inline double sigma_norm(const DistributionSlice& g, const VelocityGrid& vg, const DistributionSlice* weight = nullptr) {
  return std::sqrt(sigma_norm_squared(g, vg, sigma_field(vg), weight));
}

/// |w <v>^{-1/2} g|_2 + |w <v>^{-3/2} grad g . vhat|_2 + |w <v>^{-1/2} grad g x vhat|_2.
inline double sigma_three_term(const DistributionSlice& g, const VelocityGrid& vg,
                               const DistributionSlice* weight = nullptr) {
  std::array<DistributionSlice, 3> grad, vhat;
  for (int a = 0; a < 3; ++a) {
    grad[a] = velocity_derivative(g, vg, a);
    vhat[a] = vg.sample([&](const Vec3& v) {
      const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      return r > 0.0 ? v[a] / r : 0.0;
    });
  }
  const DistributionSlice jb = vg.sample([](const Vec3& v) { return japanese_bracket(v); });
  const DistributionSlice w = weight ? *weight : DistributionSlice::Ones(g.size());
  const DistributionSlice radial = grad[0] * vhat[0] + grad[1] * vhat[1] + grad[2] * vhat[2];
  const DistributionSlice c0 = grad[1] * vhat[2] - grad[2] * vhat[1];
  const DistributionSlice c1 = grad[2] * vhat[0] - grad[0] * vhat[2];
  const DistributionSlice c2 = grad[0] * vhat[1] - grad[1] * vhat[0];
  auto norm = [&](const DistributionSlice& f) { return std::sqrt(integral(f.square(), vg)); };
  const DistributionSlice cross = (c0.square() + c1.square() + c2.square()).sqrt();
  return norm(w * jb.pow(-0.5) * g) + norm(w * jb.pow(-1.5) * radial) + norm(w * jb.pow(-0.5) * cross);
}

// ---------------------------------------------------------------------------
// delta-epsilon window

struct WindowCheck {
  double lower = 0.0;  // eps^{2/3}
  double upper = 0.0;  // eps^{2/5} / C
  bool pass = false;
};

/// eps^{2/3} <= delta <= C^{-1} eps^{2/5}, with a 1e-12 relative slack for rounding of the powers.
inline WindowCheck window_check(double eps, double delta, double C = 1.0) {
  if (!(eps > 0.0) || !(delta > 0.0) || !(C > 0.0))
    throw std::invalid_argument("window_check: eps, delta and C must be positive");
  WindowCheck w{std::pow(eps, 2.0 / 3.0), std::pow(eps, 0.4) / C, false};
  w.pass = w.lower * (1.0 - 1e-12) <= delta && delta <= w.upper * (1.0 + 1e-12);
  return w;
}

// ---------------------------------------------------------------------------
// Energy and dissipation functionals

/// Perturbation at one time. Spatial derivatives are spectral on `grid`,
/// velocity derivatives fourth-order differences on the uniform `vgrid`.
/// f holds f(x_j, .) for each spatial node, or is empty for f = 0.
struct FunctionalInputs {
  const SpatialGrid* grid = nullptr;
  Field1D rho, u, theta, phi;
  const VelocityGrid* vgrid = nullptr;
  std::vector<DistributionSlice> f;
  double delta = 0.1;
  double eps = 0.01;
  double t = 0.0;
  WeightParams weight;
  bool strict_window = false;
  double window_constant = 1.0;
};

namespace detail {

inline void validate_inputs(const FunctionalInputs& in) {
  if (!in.grid) throw std::invalid_argument("functional: missing spatial grid");
  for (const Field1D* f : {&in.rho, &in.u, &in.theta, &in.phi}) require_on_grid(*f, *in.grid, "functional");
  if (!in.f.empty()) {
    if (!in.vgrid) throw std::invalid_argument("functional: microscopic data without a velocity grid");
    if (in.f.size() != static_cast<std::size_t>(in.grid->size()))
      throw std::invalid_argument("functional: f must hold one velocity slice per spatial node");
    for (const auto& s : in.f)
      if (s.size() != in.vgrid->size()) throw std::invalid_argument("functional: f slice size mismatch");
    require_uniform(*in.vgrid, "functional");
  }
  if (!(in.delta > 0.0) || !(in.eps > 0.0)) throw std::invalid_argument("functional: delta and eps must be positive");
  in.weight.validate();
  if (in.strict_window) {
    const auto w = window_check(in.eps, in.delta, in.window_constant);
    if (!w.pass)
      throw std::domain_error("functional: (eps, delta) = (" + std::to_string(in.eps) + ", " + std::to_string(in.delta) +
                              ") outside the window [" + std::to_string(w.lower) + ", " + std::to_string(w.upper) + "]");
  }
}

// ||d^a g||^2 over x for a spatial field
inline double sq_norm(const Field1D& g, const SpatialGrid& grid, int a) {
  const Field1D d = a == 0 ? g : derivative(g, grid, a);
  return std::pow(field_norms(d, grid).l2, 2);
}

// x-derivative of order a of f, column by column.
inline std::vector<DistributionSlice> x_derivative(const std::vector<DistributionSlice>& f, const SpatialGrid& grid,
                                                   int a) {
  if (a == 0) return f;
  const std::size_t n = f.size();
  const Eigen::Index size = f.front().size();
  std::vector<DistributionSlice> out(n, DistributionSlice(size));
  Field1D column(n);
  for (Eigen::Index k = 0; k < size; ++k) {
    for (std::size_t j = 0; j < n; ++j) column[j] = f[j][k];
    const Field1D d = derivative(column, grid, a);
    for (std::size_t j = 0; j < n; ++j) out[j][k] = d[j];
  }
  return out;
}

// Integral over x of a per-node velocity quantity.
template <class Fn>
double x_integral(const std::vector<DistributionSlice>& f, const SpatialGrid& grid, Fn&& per_node) {
  double s = 0.0;
  for (const auto& slice : f) s += per_node(slice);
  return s * grid.dx();
}

// Shared pieces of the functionals.
class FunctionalContext {
 public:
  explicit FunctionalContext(const FunctionalInputs& in) : in_(in) {
    validate_inputs(in);
    if (!in.f.empty())
      for (int a = 0; a <= 2; ++a) fx_[a] = x_derivative(in.f, *in.grid, a);
  }

  const FunctionalInputs& in() const { return in_; }
  bool has_f() const { return !in_.f.empty(); }

  // sum over (rho, u, theta) plus phi and delta-weighted d_x phi at x-order a
  double macro(int a, bool include_rut = true) const {
    const auto& g = *in_.grid;
    double s = sq_norm(in_.phi, g, a) + in_.delta * sq_norm(in_.phi, g, a + 1);
    if (include_rut) s += sq_norm(in_.rho, g, a) + sq_norm(in_.u, g, a) + sq_norm(in_.theta, g, a);
    return s;
  }

  // ||<v>^extra w d^a_beta f||^2 (w omitted when weighted = false)
  double l2(int a, const MultiIndex& beta, bool weighted, int extra = 0) const {
    if (!has_f()) return 0.0;
    const auto& vg = *in_.vgrid;
    DistributionSlice factor = DistributionSlice::Ones(vg.size());
    if (weighted) factor = weight_field(a, order(beta), in_.t, vg, in_.weight);
    if (extra) factor *= vg.sample([](const Vec3& v) { return japanese_bracket(v); });
    return x_integral(fx_[a], *in_.grid, [&](const DistributionSlice& s) {
      return integral((factor * velocity_partial(s, vg, beta)).square(), vg);
    });
  }

  // ||d^a_beta f||^2_{sigma,w} (w = 1 when weighted = false)
  double sigma(int a, const MultiIndex& beta, bool weighted) const {
    if (!has_f()) return 0.0;
    const auto& vg = *in_.vgrid;
    if (!sigma_) sigma_ = sigma_field(vg);
    std::optional<DistributionSlice> w;
    if (weighted) w = weight_field(a, order(beta), in_.t, vg, in_.weight);
    return x_integral(fx_[a], *in_.grid, [&](const DistributionSlice& s) {
      return sigma_norm_squared(velocity_partial(s, vg, beta), vg, *sigma_, w ? &*w : nullptr);
    });
  }

 private:
  const FunctionalInputs& in_;
  std::array<std::vector<DistributionSlice>, 3> fx_;
  mutable std::optional<SigmaField> sigma_;
};

inline constexpr MultiIndex no_beta{0, 0, 0};

}  // namespace detail

/// E_2: unweighted instant energy.
inline double energy_e2(const FunctionalInputs& in) {
  const detail::FunctionalContext c(in);
  double low = 0.0;
  for (int a = 0; a <= 1; ++a) low += c.macro(a) + c.l2(a, detail::no_beta, false);
  const double high = c.macro(2) + c.l2(2, detail::no_beta, false);
  return low + in.eps * in.eps / in.delta * high;
}

/// E_{2,l,q1}: E_2 plus the weighted norms of f and its mixed derivatives.
inline double energy_weighted(const FunctionalInputs& in) {
  const detail::FunctionalContext c(in);
  double s = energy_e2(in);
  for (int a = 0; a <= 1; ++a) s += c.l2(a, detail::no_beta, true);
  s += in.eps * in.eps * c.l2(2, detail::no_beta, true);
  for (int a = 0; a <= 1; ++a)
    for (const auto& beta : multi_indices(1, 2 - a)) s += c.l2(a, beta, true);
  return s;
}

/// D_2: unweighted dissipation rate.
inline double dissipation_d2(const FunctionalInputs& in) {
  const detail::FunctionalContext c(in);
  double macro = 0.0;
  for (int a = 1; a <= 2; ++a) macro += c.macro(a);
  double micro = 0.0;
  for (int a = 0; a <= 1; ++a) micro += c.sigma(a, detail::no_beta, false);
  micro += in.eps * in.eps / in.delta * c.sigma(2, detail::no_beta, false);
  return in.eps / std::sqrt(in.delta) * macro + micro / (std::pow(in.delta, 1.5) * in.eps);
}

/// D_{2,l,q1}: D_2 plus the (delta^{3/2} eps)^{-1}-scaled weighted sigma blocks.
inline double dissipation_weighted(const FunctionalInputs& in) {
  const detail::FunctionalContext c(in);
  double block = 0.0;
  for (int a = 0; a <= 1; ++a) block += c.sigma(a, detail::no_beta, true);
  block += in.eps * in.eps * c.sigma(2, detail::no_beta, true);
  for (int a = 0; a <= 1; ++a)
    for (const auto& beta : multi_indices(1, 2 - a)) block += c.sigma(a, beta, true);
  return dissipation_d2(in) + block / (std::pow(in.delta, 1.5) * in.eps);
}

/// H_{2,l,q1}: weighted norms of <v> f.
inline double h_functional(const FunctionalInputs& in) {
  const detail::FunctionalContext c(in);
  double s = 0.0;
  for (int a = 0; a <= 1; ++a) s += c.l2(a, detail::no_beta, true, 1);
  s += in.eps * in.eps * c.l2(2, detail::no_beta, true, 1);
  for (int a = 0; a <= 1; ++a)
    for (const auto& beta : multi_indices(1, 2 - a)) s += c.l2(a, beta, true, 1);
  return s;
}

}  // namespace kdvlab
