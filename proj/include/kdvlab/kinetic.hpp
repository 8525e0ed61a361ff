#pragma once

// Velocity-space toolkit: tensor quadrature on R^3, local Maxwellians,
// fluid moments, the orthonormal basis chi_0..chi_4, the macroscopic and
// microscopic projections and the Burnett polynomials.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace kdvlab {

/// Samples of a function of v on a VelocityGrid, flat index (i m + j) m + k.
using DistributionSlice = Eigen::ArrayXd;
using Vec3 = std::array<double, 3>;

inline constexpr double gas_constant_K = 2.0 / 3.0;

class VelocityGrid {
 public:
  enum class Rule { Trapezoid, GaussHermite };

  /// m equispaced points per axis on [-vmax, vmax] with trapezoid weights.
  static VelocityGrid uniform(int m, double vmax) {
    if (m < 4) throw std::invalid_argument("VelocityGrid: need at least 4 points per axis");
    if (!(vmax >= 8.0)) throw std::invalid_argument("VelocityGrid: vmax must be >= 8 to hold the Maxwellian tail");
    VelocityGrid g(m, vmax, Rule::Trapezoid);
    const double h = 2.0 * vmax / (m - 1);
    for (int i = 0; i < m; ++i) {
      g.axis_[i] = -vmax + i * h;
      g.axis_weights_[i] = (i == 0 || i == m - 1) ? 0.5 * h : h;
    }
    g.tabulate_weights();
    return g;
  }

  /// Gauss-Hermite nodes for the weight e^{-v^2/2} (Golub-Welsch), with the
  /// weights multiplied by e^{v^2/2} so that plain integrals are returned.
  static VelocityGrid gauss_hermite(int m) {
    if (m < 4 || m > 150) throw std::invalid_argument("VelocityGrid: Gauss-Hermite order must lie in 4..150");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    const double mass = std::sqrt(2.0 * std::numbers::pi);
    VelocityGrid g(m, 0.0, Rule::GaussHermite);
    for (int i = 0; i < m; ++i) {
      const double x = eig.eigenvalues()(i), v0 = eig.eigenvectors()(0, i);
      g.axis_[i] = x;
      g.axis_weights_[i] = mass * v0 * v0 * std::exp(0.5 * x * x);
      g.vmax_ = std::max(g.vmax_, std::abs(x));
    }
    g.tabulate_weights();
    return g;
  }

  int points_per_axis() const { return m_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(m_) * m_ * m_; }
  double vmax() const { return vmax_; }
  Rule rule() const { return rule_; }
  const std::vector<double>& axis() const { return axis_; }

  Vec3 point(Eigen::Index idx) const {
    const auto k = idx % m_, j = (idx / m_) % m_, i = idx / (static_cast<Eigen::Index>(m_) * m_);
    return {axis_[i], axis_[j], axis_[k]};
  }
  double weight(Eigen::Index idx) const {
    const auto k = idx % m_, j = (idx / m_) % m_, i = idx / (static_cast<Eigen::Index>(m_) * m_);
    return axis_weights_[i] * axis_weights_[j] * axis_weights_[k];
  }

  /// Tabulate fn(v) on the grid.
  template <class Fn>
  DistributionSlice sample(Fn&& fn) const {
    DistributionSlice out(size());
    for (Eigen::Index n = 0; n < size(); ++n) out[n] = fn(point(n));
    return out;
  }

  const DistributionSlice& weights() const { return weights_; }

 private:
  VelocityGrid(int m, double vmax, Rule rule)
      : m_(m), vmax_(vmax), rule_(rule), axis_(static_cast<std::size_t>(m)), axis_weights_(static_cast<std::size_t>(m)) {}

  void tabulate_weights() {
    weights_.resize(size());
    for (Eigen::Index n = 0; n < size(); ++n) weights_[n] = weight(n);
  }

  int m_;
  double vmax_;
  Rule rule_;
  std::vector<double> axis_, axis_weights_;
  DistributionSlice weights_;
};

/// Quadrature of a(v) b(v) over R^3.
inline double inner(const DistributionSlice& a, const DistributionSlice& b, const VelocityGrid& vg) {
  return (a * b * vg.weights()).sum();
}

inline double integral(const DistributionSlice& a, const VelocityGrid& vg) { return (a * vg.weights()).sum(); }

struct MaxwellianParams {
  double rho = 1.0;
  Vec3 u{0.0, 0.0, 0.0};
  double theta = 1.5;

  void validate() const {
    if (!(rho > 0.0) || !(theta > 0.0) || !std::isfinite(rho) || !std::isfinite(theta))
      throw std::invalid_argument("MaxwellianParams: rho and theta must be positive");
  }
};

/// M = rho (2 pi K theta)^{-3/2} exp(-|v - u|^2 / (2 K theta)).
inline DistributionSlice maxwellian(const MaxwellianParams& p, const VelocityGrid& vg) {
  p.validate();
  const double kt = gas_constant_K * p.theta;
  const double norm = p.rho / std::pow(2.0 * std::numbers::pi * kt, 1.5);
  return vg.sample([&](const Vec3& v) {
    double s = 0.0;
    for (int a = 0; a < 3; ++a) s += (v[a] - p.u[a]) * (v[a] - p.u[a]);
    return norm * std::exp(-0.5 * s / kt);
  });
}

/// The global Maxwellian M[1, 0, 3/2].
inline DistributionSlice global_maxwellian(const VelocityGrid& vg) { return maxwellian({1.0, {0, 0, 0}, 1.5}, vg); }

struct Moments {
  double rho = 0.0;
  Vec3 momentum{0.0, 0.0, 0.0};
  double energy = 0.0;  // int |v|^2/2 F = rho (theta + |u|^2/2)
};

inline Moments moments(const DistributionSlice& F, const VelocityGrid& vg) {
  if (!F.allFinite()) throw std::domain_error("moments: non-finite distribution values");
  Moments m;
  const auto& w = vg.weights();
  for (Eigen::Index n = 0; n < F.size(); ++n) {
    const Vec3 v = vg.point(n);
    const double f = F[n] * w[n];
    m.rho += f;
    for (int a = 0; a < 3; ++a) m.momentum[a] += v[a] * f;
    m.energy += 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * f;
  }
  return m;
}

/// Exact inversion of the moment map with E = theta.
inline MaxwellianParams fit_params(const Moments& m) {
  if (!(m.rho > 0.0)) throw std::domain_error("fit_params: non-positive density " + std::to_string(m.rho));
  MaxwellianParams p;
  p.rho = m.rho;
  double u2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    p.u[a] = m.momentum[a] / m.rho;
    u2 += p.u[a] * p.u[a];
  }
  p.theta = m.energy / m.rho - 0.5 * u2;
  if (!(p.theta > 0.0)) throw std::domain_error("fit_params: non-positive temperature");
  return p;
}

// ---------------------------------------------------------------------------
// Orthonormal basis and projections

/// chi_i and the polynomial ratios chi_i / M, which are formed directly.
struct ChiBasis {
  MaxwellianParams params;
  std::array<DistributionSlice, 5> chi;
  std::array<DistributionSlice, 5> ratio;
};

inline ChiBasis chi_basis(const MaxwellianParams& p, const VelocityGrid& vg) {
  const DistributionSlice M = maxwellian(p, vg);
  const double kt = gas_constant_K * p.theta;
  ChiBasis b{p, {}, {}};
  b.ratio[0] = DistributionSlice::Constant(vg.size(), 1.0 / std::sqrt(p.rho));
  for (int a = 0; a < 3; ++a) {
    const double s = 1.0 / std::sqrt(gas_constant_K * p.rho * p.theta);
    b.ratio[a + 1] = vg.sample([&](const Vec3& v) { return (v[a] - p.u[a]) * s; });
  }
  b.ratio[4] = vg.sample([&](const Vec3& v) {
    double s = 0.0;
    for (int a = 0; a < 3; ++a) s += (v[a] - p.u[a]) * (v[a] - p.u[a]);
    return (s / kt - 3.0) / std::sqrt(6.0 * p.rho);
  });
  for (int i = 0; i < 5; ++i) b.chi[i] = b.ratio[i] * M;
  return b;
}

/// G_ij = <chi_i, chi_j / M>.
inline Eigen::Matrix<double, 5, 5> gram_matrix(const ChiBasis& b, const VelocityGrid& vg) {
  Eigen::Matrix<double, 5, 5> g;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) g(i, j) = inner(b.chi[i], b.ratio[j], vg);
  return g;
}

/// P0 h = sum_i <h, chi_i / M> chi_i.
inline DistributionSlice project_p0(const DistributionSlice& h, const ChiBasis& b, const VelocityGrid& vg) {
  DistributionSlice out = DistributionSlice::Zero(h.size());
  for (int i = 0; i < 5; ++i) out += inner(h, b.ratio[i], vg) * b.chi[i];
  return out;
}

inline DistributionSlice project_p1(const DistributionSlice& h, const ChiBasis& b, const VelocityGrid& vg) {
  return h - project_p0(h, b, vg);
}

/// The collision invariants 1, v_1, v_2, v_3, |v|^2/2.
inline std::array<DistributionSlice, 5> collision_invariants(const VelocityGrid& vg) {
  std::array<DistributionSlice, 5> psi;
  psi[0] = DistributionSlice::Ones(vg.size());
  for (int a = 0; a < 3; ++a) psi[a + 1] = vg.sample([&](const Vec3& v) { return v[a]; });
  psi[4] = vg.sample([](const Vec3& v) { return 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); });
  return psi;
}

// ---------------------------------------------------------------------------
// Burnett polynomials, indices 1..3

inline void check_index(int i, const char* who) {
  if (i < 1 || i > 3) throw std::invalid_argument(std::string(who) + ": index must lie in 1..3");
}

/// A_j(w) = (|w|^2 - 5)/2 w_j.
inline double burnett_a(int j, const Vec3& w) {
  check_index(j, "burnett_a");
  return 0.5 * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2] - 5.0) * w[j - 1];
}

/// B_ij(w) = w_i w_j - delta_ij |w|^2 / 3.
inline double burnett_b(int i, int j, const Vec3& w) {
  check_index(i, "burnett_b");
  check_index(j, "burnett_b");
  const double s = i == j ? (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) / 3.0 : 0.0;
  return w[i - 1] * w[j - 1] - s;
}

struct P1IdentityErrors {
  double b_identity = 0.0;  // P1(v_1 v_j M) vs K theta B_1j((v-u)/sqrt(K theta)) M
  double a_identity = 0.0;  // P1((v_j |v|^2/2 - v_j u.v) M) vs (K theta)^{3/2} A_j(...) M
};

/// Relative L2 (quadrature) errors of the two P1 identities.
inline P1IdentityErrors p1_identity_check(const MaxwellianParams& p, const VelocityGrid& vg, int j) {
  check_index(j, "p1_identity_check");
  const ChiBasis basis = chi_basis(p, vg);
  const DistributionSlice M = maxwellian(p, vg);
  const double kt = gas_constant_K * p.theta, s = std::sqrt(kt);
  const int jj = j - 1;
  auto scaled = [&](const Vec3& v) { return Vec3{(v[0] - p.u[0]) / s, (v[1] - p.u[1]) / s, (v[2] - p.u[2]) / s}; };

  const DistributionSlice lhs_b = project_p1(vg.sample([&](const Vec3& v) { return v[0] * v[jj]; }) * M, basis, vg);
  const DistributionSlice rhs_b = vg.sample([&](const Vec3& v) { return kt * burnett_b(1, j, scaled(v)); }) * M;

  const DistributionSlice lhs_a = project_p1(vg.sample([&](const Vec3& v) {
                                               const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                                               const double uv = p.u[0] * v[0] + p.u[1] * v[1] + p.u[2] * v[2];
                                               return 0.5 * v[jj] * v2 - v[jj] * uv;
                                             }) * M,
                                             basis, vg);
  const DistributionSlice rhs_a = vg.sample([&](const Vec3& v) { return kt * s * burnett_a(j, scaled(v)); }) * M;

  auto rel = [&](const DistributionSlice& a, const DistributionSlice& b) {
    return std::sqrt(inner(a - b, a - b, vg) / inner(b, b, vg));
  };
  return {rel(lhs_b, rhs_b), rel(lhs_a, rhs_a)};
}

}  // namespace kdvlab
