#pragma once

// Measurement suites shared by the command-line tool and the acceptance
// binary. They report numbers; callers decide the tolerances.

#include <kdvlab/kinetic.hpp>
#include <kdvlab/landau.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace kdvlab {

/// Random smooth test function: cubic polynomial times a Gaussian envelope.
inline DistributionSlice random_smooth_slice(const VelocityGrid& vg, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::array<double, 8> c{};
  for (auto& x : c) x = n01(rng);
  return vg.sample([&](const Vec3& v) {
    const double poly = c[0] + c[1] * v[0] + c[2] * v[1] + c[3] * v[2] + c[4] * v[0] * v[1] + c[5] * v[2] * v[2] +
                        c[6] * v[0] * v[0] * v[0] + c[7] * v[1] * v[2] * v[0];
    return poly * std::exp(-0.4 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  });
}

struct KineticSuite {
  double gram = 0.0;            // max |G - I|
  double p0_idempotence = 0.0;  // max |P0 P0 h - P0 h| / max |h|
  double p1_microscopy = 0.0;   // max |<P1 h, psi_i>| / max |h|
  double burnett = 0.0;         // max over j of the two projection identities
};

inline KineticSuite kinetic_suite(const VelocityGrid& vg, const MaxwellianParams& p, unsigned seed = 1,
                                  int trials = 3) {
  KineticSuite s;
  const auto basis = chi_basis(p, vg);
  s.gram = (gram_matrix(basis, vg) - Eigen::Matrix<double, 5, 5>::Identity()).cwiseAbs().maxCoeff();
  const auto psi = collision_invariants(vg);
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const DistributionSlice h = random_smooth_slice(vg, rng);
    const double scale = h.abs().maxCoeff();
    const DistributionSlice p0 = project_p0(h, basis, vg);
    s.p0_idempotence = std::max(s.p0_idempotence, (project_p0(p0, basis, vg) - p0).abs().maxCoeff() / scale);
    const DistributionSlice p1 = project_p1(h, basis, vg);
    for (const auto& q : psi) s.p1_microscopy = std::max(s.p1_microscopy, std::abs(inner(p1, q, vg)) / scale);
  }
  for (int j = 1; j <= 3; ++j) {
    const auto e = p1_identity_check(p, vg, j);
    s.burnett = std::max({s.burnett, e.a_identity, e.b_identity});
  }
  return s;
}

/// Least-squares slope of log fn(r) against log r on [r0, r1].
template <class Fn>
double decay_exponent(Fn&& fn, double r0, double r1, int points = 31) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < points; ++i) {
    const double r = r0 * std::pow(r1 / r0, i / (points - 1.0));
    const double x = std::log(r), y = std::log(fn(r));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  return (points * sxy - sx * sy) / (points * sxx - sx * sx);
}

struct SigmaSuite {
  double refinement = 0.0;      // table vs panel-doubled rebuild
  double min_eigenvalue = 0.0;  // smallest eigenvalue over the samples
  int samples = 0;
  double par_exponent = 0.0, perp_exponent = 0.0;  // fitted on |v| in [5, 20]
  double weight_rate_error = 0.0;  // max relative gap between d/dt w^2 and central differences
  std::array<double, 3> three_term_ratio{};  // sqrt(mu), v1 sqrt(mu), <v>^-2 sqrt(mu)
};

/// `vg` must be a uniform grid (velocity differences are used).
inline SigmaSuite sigma_suite(const VelocityGrid& vg, unsigned seed = 1, int samples = 1000) {
  const auto& table = SigmaTable::instance();
  SigmaSuite s;
  s.refinement = table.refinement_disagreement();
  s.samples = samples;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> radius(0.0, 25.0);
  s.min_eigenvalue = INFINITY;
  for (int i = 0; i < samples; ++i) {
    Eigen::Vector3d v(n01(rng), n01(rng), n01(rng));
    v *= radius(rng) / v.norm();
    Eigen::SelfAdjointEigenSolver<SigmaTensor> eig(collision_frequency({v[0], v[1], v[2]}));
    s.min_eigenvalue = std::min(s.min_eigenvalue, eig.eigenvalues().minCoeff());
  }
  s.par_exponent = decay_exponent([&](double r) { return table.parallel(r); }, 5.0, 20.0);
  s.perp_exponent = decay_exponent([&](double r) { return table.perpendicular(r); }, 5.0, 20.0);

  std::uniform_real_distribution<double> u(-4.0, 4.0), tt(0.0, 5.0), qq(0.3, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const WeightParams p{2, 0.1, qq(rng)};
    const Vec3 v{u(rng), u(rng), u(rng)};
    const double t = tt(rng), h = 1e-4;
    const int a = trial % 3, b = (trial / 3) % (3 - a);
    auto w2 = [&](double x) { return std::pow(weight_w(a, b, x, v, p), 2); };
    const double exact = weight_w2_rate(a, b, t, v, p);
    s.weight_rate_error = std::max(s.weight_rate_error, std::abs((w2(t + h) - w2(t - h)) / (2.0 * h) - exact) / std::abs(exact));
  }

  const DistributionSlice root = global_maxwellian(vg).sqrt();
  const DistributionSlice v1 = vg.sample([](const Vec3& v) { return v[0]; });
  const DistributionSlice jb = vg.sample([](const Vec3& v) { return japanese_bracket(v); });
  const std::array<DistributionSlice, 3> family{root, v1 * root, jb.pow(-2.0) * root};
  for (int i = 0; i < 3; ++i) s.three_term_ratio[i] = sigma_norm(family[i], vg) / sigma_three_term(family[i], vg);
  return s;
}

}  // namespace kdvlab
