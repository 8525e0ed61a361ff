#include <kdvlab/landau.hpp>

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace kdvlab;

namespace {

// sigma is the Hessian of G(r) = (r + 1/r) erf(r/sqrt2) + sqrt(2/pi) e^{-r^2/2}:
// lambda_par = G'', lambda_perp = G'/r.
struct ClosedForm {
  long double par, perp;
};

ClosedForm closed_form(long double r) {
  const long double e = std::erf(r / std::sqrt(2.0L));
  const long double g = std::sqrt(2.0L / std::numbers::pi_v<long double>) * std::exp(-r * r / 2.0L);
  return {2.0L * e / (r * r * r) - 2.0L * g / (r * r), (1.0L - 1.0L / (r * r)) * e / r + g / (r * r)};
}

// sigma(v) = int s (I - w w^T) mu(v - s w) ds dw in spherical coordinates around v.
SigmaTensor brute_force_sigma(const Vec3& v) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const double pi = std::numbers::pi;
  const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  const int n_phi = 64;
  const double s_max = r + 13.0;
  const int panels = static_cast<int>(std::ceil(s_max / 0.5));
  SigmaTensor out = SigmaTensor::Zero();
  const auto& cos_nodes = boost::math::quadrature::gauss<double, 40>::abscissa();
  const auto& cos_weights = boost::math::quadrature::gauss<double, 40>::weights();
  for (std::size_t ic = 0; ic < cos_nodes.size(); ++ic) {
    for (int sign : {1, -1}) {
      if (ic == 0 && sign == -1 && cos_nodes[0] == 0.0) continue;
      const double ct = sign * cos_nodes[ic], st = std::sqrt(1.0 - ct * ct);
      for (int ip = 0; ip < n_phi; ++ip) {
        const double phi = 2.0 * pi * ip / n_phi;
        const Eigen::Vector3d w(st * std::cos(phi), st * std::sin(phi), ct);
        const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - w * w.transpose();
        double radial = 0.0;
        for (int p = 0; p < panels; ++p) {
          radial += Rule::integrate(
              [&](double s) {
                const double a = v[0] - s * w[0], b = v[1] - s * w[1], c = v[2] - s * w[2];
                return s * std::exp(-0.5 * (a * a + b * b + c * c));
              },
              p * 0.5, (p + 1) * 0.5);
        }
        out += cos_weights[ic] * (2.0 * pi / n_phi) * radial * proj;
      }
    }
  }
  return out * std::pow(2.0 * pi, -1.5);
}

const VelocityGrid& vgrid() {
  static const VelocityGrid g = VelocityGrid::uniform(48, 10.0);
  return g;
}

}  // namespace

TEST(SigmaTable, MatchesClosedForm) {
  const auto& t = SigmaTable::instance();
  EXPECT_NEAR(t.parallel(0.0), 2.0 / 3.0 * std::sqrt(2.0 / std::numbers::pi), 1e-12);
  EXPECT_NEAR(t.perpendicular(0.0), 2.0 / 3.0 * std::sqrt(2.0 / std::numbers::pi), 1e-12);
  double worst = 0.0;
  for (double r = 0.05; r < 45.0; r *= 1.07) {
    const auto cf = closed_form(r);
    worst = std::max(worst, std::abs(t.parallel(r) - static_cast<double>(cf.par)) / static_cast<double>(cf.par));
    worst = std::max(worst, std::abs(t.perpendicular(r) - static_cast<double>(cf.perp)) / static_cast<double>(cf.perp));
  }
  EXPECT_LT(worst, 1e-9);
  EXPECT_LT(t.refinement_disagreement(), 1e-10);
}

TEST(SigmaTable, ContinuousAcrossTableEnd) {
  const auto& t = SigmaTable::instance();
  const double r = SigmaTable::r_max;
  EXPECT_NEAR(t.parallel(r - 1e-9) / t.parallel(r), 1.0, 1e-8);
  EXPECT_NEAR(t.perpendicular(r - 1e-9) / t.perpendicular(r), 1.0, 1e-8);
}

TEST(CollisionFrequency, MatchesBruteForceQuadrature) {
  for (const Vec3& v : {Vec3{0.0, 0.0, 0.0}, Vec3{0.3, -0.2, 0.5}, Vec3{1.5, 0.0, -1.0}, Vec3{-2.0, 3.0, 1.0}}) {
    const SigmaTensor ref = brute_force_sigma(v);
    const SigmaTensor got = collision_frequency(v);
    EXPECT_LT((got - ref).cwiseAbs().maxCoeff(), 1e-8 * ref.cwiseAbs().maxCoeff())
        << v[0] << " " << v[1] << " " << v[2];
  }
}

TEST(CollisionFrequency, DecayExponents) {
  // least-squares slope of log lambda against log r over [5, 20]
  auto slope = [](auto&& fn) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = 31;
    for (int i = 0; i < n; ++i) {
      const double r = 5.0 * std::pow(4.0, i / (n - 1.0));
      const double x = std::log(r), y = std::log(fn(r));
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  const auto& t = SigmaTable::instance();
  EXPECT_NEAR(slope([&](double r) { return t.parallel(r); }), -3.0, 0.3);
  EXPECT_NEAR(slope([&](double r) { return t.perpendicular(r); }), -1.0, 0.3);
}

TEST(CollisionFrequency, PositiveDefiniteAndSymmetric) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> radius(0.0, 25.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::Vector3d dir(n01(rng), n01(rng), n01(rng));
    dir *= radius(rng) / dir.norm();
    const SigmaTensor s = collision_frequency({dir[0], dir[1], dir[2]});
    ASSERT_LT((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<SigmaTensor> eig(s);
    ASSERT_GT(eig.eigenvalues().minCoeff(), 0.0) << "|v| = " << dir.norm();
  }
}

TEST(CollisionFrequency, RotationEquivariant) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Matrix3d R =
        Eigen::Quaterniond(Eigen::Vector4d(n01(rng), n01(rng), n01(rng), n01(rng)).normalized()).toRotationMatrix();
    const Eigen::Vector3d v(2.0 * n01(rng), 2.0 * n01(rng), 2.0 * n01(rng));
    const Eigen::Vector3d rv = R * v;
    const SigmaTensor lhs = collision_frequency({rv[0], rv[1], rv[2]});
    const SigmaTensor rhs = R * collision_frequency({v[0], v[1], v[2]}) * R.transpose();
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(VelocityDerivative, FourthOrderOnGaussian) {
  const auto& g = vgrid();
  const auto f = g.sample([](const Vec3& v) { return std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])); });
  for (int a = 0; a < 3; ++a) {
    const auto exact = g.sample([&](const Vec3& v) {
      return -v[a] * std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    });
    EXPECT_LT((velocity_derivative(f, g, a) - exact).abs().maxCoeff(), 1e-2);
  }
  // halving h cuts the error about 16x
  const auto g2 = VelocityGrid::uniform(95, 10.0);
  auto err = [](const VelocityGrid& grid) {
    const auto f = grid.sample([](const Vec3& v) { return std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])); });
    const auto exact = grid.sample([](const Vec3& v) {
      return -v[1] * std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    });
    return (velocity_derivative(f, grid, 1) - exact).abs().maxCoeff();
  };
  const double ratio = err(g) / err(g2);
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
  EXPECT_THROW(velocity_derivative(f, VelocityGrid::gauss_hermite(8), 0), std::invalid_argument);
  EXPECT_THROW(velocity_derivative(f, g, 3), std::invalid_argument);
}

TEST(MultiIndices, Counts) {
  EXPECT_EQ(multi_indices(1, 1).size(), 3u);
  EXPECT_EQ(multi_indices(1, 2).size(), 9u);
  EXPECT_EQ(multi_indices(0, 0).size(), 1u);
}

TEST(SigmaNorm, ZeroAndScaling) {
  const auto& g = vgrid();
  EXPECT_EQ(sigma_norm(DistributionSlice::Zero(g.size()), g), 0.0);
  const auto mu = global_maxwellian(g);
  const DistributionSlice h = mu.sqrt();
  EXPECT_NEAR(sigma_norm(DistributionSlice(3.0 * h), g), 3.0 * sigma_norm(h, g), 1e-12);
}

TEST(SigmaNorm, SqrtMuOracle) {
  // g = sqrt(mu): grad g = -v g/2, so |g|_sigma^2 = 2 int lambda_par |v|^2/4 g^2 dv
  //               = (1/2) int 4 pi r^4 lambda_par(r) mu(r) dr
  const auto& g = vgrid();
  const DistributionSlice h = global_maxwellian(g).sqrt();
  const double pi = std::numbers::pi;
  double ref = 0.0;
  using Rule = boost::math::quadrature::gauss<double, 20>;
  for (int p = 0; p < 40; ++p)
    ref += Rule::integrate(
        [&](double r) {
          const double lp = r == 0.0 ? 0.0 : static_cast<double>(closed_form(r).par);
          return 0.5 * 4.0 * pi * std::pow(r, 4) * lp * std::pow(2.0 * pi, -1.5) * std::exp(-0.5 * r * r);
        },
        p * 0.25, (p + 1) * 0.25);
  const double got = std::pow(sigma_norm(h, g), 2);
  EXPECT_NEAR(got, ref, 2e-3 * ref);
}

TEST(SigmaNorm, ThreeTermCharacterization) {
  const auto& g = vgrid();
  const DistributionSlice root = global_maxwellian(g).sqrt();
  const DistributionSlice v1 = g.sample([](const Vec3& v) { return v[0]; });
  const DistributionSlice jb = g.sample([](const Vec3& v) { return japanese_bracket(v); });
  const DistributionSlice w = weight_field(0, 0, 0.0, g, {2, 0.1, 1.0});
  for (const DistributionSlice& h : {DistributionSlice(root), DistributionSlice(v1 * root),
                                     DistributionSlice(jb.pow(-2.0) * root)}) {
    for (const DistributionSlice* weight : {static_cast<const DistributionSlice*>(nullptr), &w}) {
      const double ratio = sigma_norm(h, g, weight) / sigma_three_term(h, g, weight);
      EXPECT_GE(ratio, 1.0 / 20.0);
      EXPECT_LE(ratio, 20.0);
    }
  }
}

TEST(Weight, ValuesAndMonotonicity) {
  const WeightParams p{3, 0.1, 1.0};
  EXPECT_NEAR(weight_w(0, 0, 0.0, {0, 0, 0}, p), std::exp(0.05), 1e-15);
  // <v>^2 = 4, exponent q1/2 * 4/2
  EXPECT_NEAR(weight_w(1, 1, 1.0, {1, 1, 1}, p), 4.0 * std::exp(0.1), 1e-12);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 v{u(rng), u(rng), u(rng)};
    for (int total = 0; total < p.l; ++total)
      EXPECT_GE(weight_w(total, 0, 0.5, v, p), weight_w(total + 1, 0, 0.5, v, p));
    EXPECT_DOUBLE_EQ(weight_w(1, 0, 0.5, v, p), weight_w(0, 1, 0.5, v, p));
  }
}

TEST(Weight, RateMatchesFiniteDifference) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-4.0, 4.0), tt(0.0, 5.0), qq(0.3, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const WeightParams p{2, 0.1, qq(rng)};
    const Vec3 v{u(rng), u(rng), u(rng)};
    const double t = tt(rng);
    const int a = trial % 3, b = (trial / 3) % (3 - a);
    const double h = 1e-4;
    auto w2 = [&](double s) { return std::pow(weight_w(a, b, s, v, p), 2); };
    const double fd = (w2(t + h) - w2(t - h)) / (2.0 * h);
    const double exact = weight_w2_rate(a, b, t, v, p);
    EXPECT_NEAR(fd, exact, 1e-6 * std::abs(exact));
  }
}

TEST(Weight, RejectsBadParameters) {
  EXPECT_THROW(weight_w(0, 0, 0.0, {0, 0, 0}, {1, 0.1, 1.0}), std::invalid_argument);
  EXPECT_THROW(weight_w(0, 0, 0.0, {0, 0, 0}, {2, 1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(weight_w(0, 0, 0.0, {0, 0, 0}, {2, 0.1, 0.0}), std::invalid_argument);
  EXPECT_THROW(weight_w(2, 1, 0.0, {0, 0, 0}, {2, 0.1, 1.0}), std::invalid_argument);
  EXPECT_THROW(weight_w(0, 0, -1.0, {0, 0, 0}, {2, 0.1, 1.0}), std::invalid_argument);
}

TEST(Window, Examples) {
  EXPECT_TRUE(window_check(1e-3, 1e-2).pass);
  EXPECT_FALSE(window_check(1e-3, 1e-5).pass);
  EXPECT_FALSE(window_check(1e-3, 0.1).pass);
  EXPECT_TRUE(window_check(1e-3, std::pow(1e-3, 0.4)).pass);
  EXPECT_FALSE(window_check(1e-3, 1e-2, 10.0).pass);
  EXPECT_THROW(window_check(0.0, 1e-2), std::invalid_argument);
}

namespace {

// Microscopic and macroscopic data on a small grid pair.
struct Sample {
  SpatialGrid grid{8, 2.0 * std::numbers::pi};
  VelocityGrid vg = VelocityGrid::uniform(16, 8.0);
  FunctionalInputs in;

  explicit Sample(double scale = 1.0) {
    in.grid = &grid;
    in.vgrid = &vg;
    in.delta = 1e-2;
    in.eps = 1e-3;
    in.t = 0.5;
    in.rho = scale * Field1D::sample(grid, [](double x) { return std::sin(x); });
    in.u = scale * Field1D::sample(grid, [](double x) { return 0.5 * std::cos(2.0 * x); });
    in.theta = scale * Field1D::sample(grid, [](double x) { return 0.2 * std::sin(x + 0.3); });
    in.phi = scale * Field1D::sample(grid, [](double x) { return 0.3 * std::cos(x); });
    const DistributionSlice root = global_maxwellian(vg).sqrt();
    const DistributionSlice shape = vg.sample([](const Vec3& v) { return v[0] - 0.5 * v[1] * v[2]; }) * root;
    for (int j = 0; j < grid.size(); ++j)
      in.f.push_back(scale * (std::sin(grid.node(j)) * root + 0.3 * std::cos(grid.node(j)) * shape));
  }
};

}  // namespace

TEST(Functionals, ZeroInputGivesZero) {
  Sample s(0.0);
  EXPECT_EQ(energy_e2(s.in), 0.0);
  EXPECT_EQ(energy_weighted(s.in), 0.0);
  EXPECT_EQ(dissipation_d2(s.in), 0.0);
  EXPECT_EQ(dissipation_weighted(s.in), 0.0);
  EXPECT_EQ(h_functional(s.in), 0.0);
}

TEST(Functionals, QuadraticScaling) {
  Sample one(1.0), two(2.0);
  for (auto fn : {energy_e2, energy_weighted, dissipation_d2, dissipation_weighted, h_functional}) {
    const double a = fn(one.in), b = fn(two.in);
    EXPECT_GT(a, 0.0);
    EXPECT_NEAR(b, 4.0 * a, 1e-12 * b);
  }
}

TEST(Functionals, WeightedDominatesUnweighted) {
  Sample s;
  EXPECT_GE(energy_weighted(s.in), energy_e2(s.in));
  EXPECT_GE(dissipation_weighted(s.in), dissipation_d2(s.in));
}

TEST(Functionals, SingleModeEnergyByHand) {
  // rho = a sin x, phi = b cos x, f = c sin x sqrt(mu); u = theta = 0
  Sample s(0.0);
  const double a = 0.7, b = -0.4, c = 0.25, d = s.in.delta, e = s.in.eps;
  s.in.rho = Field1D::sample(s.grid, [&](double x) { return a * std::sin(x); });
  s.in.phi = Field1D::sample(s.grid, [&](double x) { return b * std::cos(x); });
  const DistributionSlice root = global_maxwellian(s.vg).sqrt();
  for (int j = 0; j < s.grid.size(); ++j) s.in.f[j] = c * std::sin(s.grid.node(j)) * root;
  const double mu_mass = integral(global_maxwellian(s.vg), s.vg);

  double low = 0.0, high = 0.0;
  for (int j = 0; j < s.grid.size(); ++j) {
    const double x = s.grid.node(j), sn = std::sin(x), cs = std::cos(x);
    // order 0 and 1: rho, phi, delta phi', f
    low += a * a * sn * sn + b * b * cs * cs + d * b * b * sn * sn + c * c * sn * sn * mu_mass;
    low += a * a * cs * cs + b * b * sn * sn + d * b * b * cs * cs + c * c * cs * cs * mu_mass;
    // order 2
    high += a * a * sn * sn + b * b * cs * cs + d * b * b * sn * sn + c * c * sn * sn * mu_mass;
  }
  const double expected = (low + e * e / d * high) * s.grid.dx();
  EXPECT_NEAR(energy_e2(s.in), expected, 1e-10 * expected);
}

TEST(Functionals, StrictWindow) {
  Sample s;
  s.in.strict_window = true;
  EXPECT_NO_THROW(energy_e2(s.in));
  s.in.delta = 1e-5;
  EXPECT_THROW(energy_e2(s.in), std::domain_error);
  s.in.strict_window = false;
  EXPECT_NO_THROW(energy_e2(s.in));
}

TEST(Functionals, RejectsInconsistentData) {
  {
    Sample s;
    s.in.f.pop_back();
    EXPECT_THROW(energy_e2(s.in), std::invalid_argument);
  }
  {
    Sample s;
    s.in.vgrid = nullptr;
    EXPECT_THROW(energy_e2(s.in), std::invalid_argument);
  }
  {
    Sample s;
    s.in.grid = nullptr;
    EXPECT_THROW(energy_e2(s.in), std::invalid_argument);
  }
  {
    Sample s;
    const auto gh = VelocityGrid::gauss_hermite(16);
    s.in.vgrid = &gh;
    EXPECT_THROW(energy_e2(s.in), std::invalid_argument);
  }
  {
    Sample s;
    s.in.weight.l = 1;
    EXPECT_THROW(energy_weighted(s.in), std::invalid_argument);
  }
}
