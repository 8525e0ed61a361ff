#include <kdvlab/grid.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace kdvlab;

namespace {

constexpr double pi = std::numbers::pi;

double max_diff(const Field1D& a, const Field1D& b) { return (a - b).max_abs(); }

// Random real trigonometric polynomial with modes 1..kmax (zero mean).
Field1D random_band_limited(const SpatialGrid& grid, std::mt19937_64& rng, int kmax) {
  std::normal_distribution<double> coef(0.0, 1.0);
  std::vector<double> a(kmax + 1), b(kmax + 1);
  for (int m = 1; m <= kmax; ++m) {
    a[m] = coef(rng) / m;
    b[m] = coef(rng) / m;
  }
  return Field1D::sample(grid, [&](double x) {
    double s = 0.0;
    for (int m = 1; m <= kmax; ++m) {
      const double k = 2.0 * pi * m / grid.length();
      s += a[m] * std::cos(k * x) + b[m] * std::sin(k * x);
    }
    return s;
  });
}

}  // namespace

TEST(SpatialGrid, RejectsInvalidSizes) {
  EXPECT_THROW(SpatialGrid(4, 1.0), std::invalid_argument);
  EXPECT_THROW(SpatialGrid(12, 1.0), std::invalid_argument);
  EXPECT_THROW(SpatialGrid(64, 0.0), std::invalid_argument);
  EXPECT_THROW(SpatialGrid(64, -2.0), std::invalid_argument);
  EXPECT_NO_THROW(SpatialGrid(8, 1.0));
}

TEST(SpatialGrid, WavenumbersAreSymmetric) {
  const SpatialGrid grid(16, 2.0 * pi);
  const auto k = grid.wavenumbers();
  EXPECT_DOUBLE_EQ(k[0], 0.0);
  for (int m = 1; m < 8; ++m) EXPECT_DOUBLE_EQ(k[m], -k[16 - m]);
  EXPECT_DOUBLE_EQ(k[1], 1.0);
  EXPECT_DOUBLE_EQ(grid.dx(), 2.0 * pi / 16);
}

TEST(SpectralDerivative, SingleModeIsExact) {
  const double L = 3.7;
  const SpatialGrid grid(64, L);
  const double k = 2.0 * pi / L;
  const auto f = Field1D::sample(grid, [&](double x) { return std::sin(k * x); });
  const auto exact = Field1D::sample(grid, [&](double x) { return k * std::cos(k * x); });
  EXPECT_LT(max_diff(spectral_derivative(f, grid, 1), exact), 1e-12);
}

TEST(SpectralDerivative, ConstantHasZeroDerivative) {
  const SpatialGrid grid(32, 5.0);
  const Field1D f(32, 2.5);
  EXPECT_LT(spectral_derivative(f, grid, 1).max_abs(), 1e-14);
}

TEST(SpectralDerivative, ThirdDerivativeOfTwoModes) {
  const double L = 10.0;
  const SpatialGrid grid(64, L);
  const double k1 = 2.0 * pi / L, k3 = 6.0 * pi / L;
  const auto f = Field1D::sample(grid, [&](double x) { return std::sin(k1 * x) + 0.3 * std::sin(k3 * x); });
  // analytic third derivative
  const auto exact = Field1D::sample(grid, [&](double x) {
    return -std::pow(k1, 3) * std::cos(k1 * x) - 0.3 * std::pow(k3, 3) * std::cos(k3 * x);
  });
  EXPECT_LT(max_diff(spectral_derivative(f, grid, 3), exact), 1e-11);
}

TEST(SpectralDerivative, RejectsBadInput) {
  const SpatialGrid grid(16, 1.0);
  Field1D f(16, 1.0);
  EXPECT_THROW(spectral_derivative(f, grid, 0), std::invalid_argument);
  EXPECT_THROW(spectral_derivative(f, grid, 5), std::invalid_argument);
  f[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(spectral_derivative(f, grid, 1), std::domain_error);
  EXPECT_THROW(spectral_derivative(Field1D(8), grid, 1), std::invalid_argument);
}

TEST(SpectralDerivative, NyquistDroppedForOddOrders) {
  const SpatialGrid grid(16, 2.0 * pi);
  const auto f = Field1D::sample(grid, [](double x) { return std::cos(8.0 * x); });
  EXPECT_LT(spectral_derivative(f, grid, 1).max_abs(), 1e-13);
  EXPECT_LT(spectral_derivative(f, grid, 3).max_abs(), 1e-10);
  EXPECT_NEAR(spectral_derivative(f, grid, 2)[0], -64.0, 1e-10);
}

TEST(SpectralAntiderivative, SingleMode) {
  const double L = 7.0;
  const SpatialGrid grid(64, L);
  const double k = 2.0 * pi / L;
  const auto f = Field1D::sample(grid, [&](double x) { return std::cos(k * x); });
  const auto exact = Field1D::sample(grid, [&](double x) { return std::sin(k * x) / k; });
  EXPECT_LT(max_diff(spectral_antiderivative(f, grid), exact), 1e-13);
  EXPECT_EQ(spectral_antiderivative(Field1D(64), grid).max_abs(), 0.0);
}

TEST(SpectralAntiderivative, RecoversMeanZeroFunction) {
  const double L = 2.0 * pi;
  const SpatialGrid grid(128, L);
  Field1D g = Field1D::sample(grid, [](double x) { return std::exp(std::sin(x)); });
  g += -g.mean();
  const Field1D f = spectral_derivative(g, grid, 1);
  EXPECT_LT(max_diff(spectral_antiderivative(f, grid), g), 1e-10);
}

TEST(SpectralAntiderivative, RejectsNonzeroMean) {
  const SpatialGrid grid(32, 1.0);
  const auto f = Field1D::sample(grid, [](double x) { return 1.0 + std::cos(2.0 * pi * x); });
  EXPECT_THROW(spectral_antiderivative(f, grid), std::domain_error);
}

TEST(FieldNorms, Examples) {
  const SpatialGrid grid(64, 2.0 * pi);
  auto one = field_norms(Field1D(64, 1.0), grid);
  EXPECT_NEAR(one.l2, std::sqrt(2.0 * pi), 1e-13);
  EXPECT_DOUBLE_EQ(one.linf, 1.0);
  auto s = field_norms(Field1D::sample(grid, [](double x) { return std::sin(x); }), grid);
  EXPECT_NEAR(s.l2, std::sqrt(pi), 1e-13);
  auto z = field_norms(Field1D(64), grid);
  EXPECT_EQ(z.l2, 0.0);
  EXPECT_EQ(z.linf, 0.0);
}

TEST(GridProperties, DerivativeInvertsAntiderivative) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 20; ++trial) {
    const SpatialGrid grid(128, 1.0 + trial);
    const Field1D f = random_band_limited(grid, rng, 40);
    const Field1D back = spectral_derivative(spectral_antiderivative(f, grid), grid, 1);
    EXPECT_LT(max_diff(back, f), 1e-10 * f.max_abs()) << "trial " << trial;
  }
}

TEST(GridProperties, DerivativeIsLinear) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const SpatialGrid grid(64, 9.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Field1D f = random_band_limited(grid, rng, 20), g = random_band_limited(grid, rng, 20);
    const double a = u(rng), b = u(rng);
    for (int order = 1; order <= 4; ++order) {
      const Field1D lhs = spectral_derivative(a * f + b * g, grid, order);
      const Field1D rhs = a * spectral_derivative(f, grid, order) + b * spectral_derivative(g, grid, order);
      EXPECT_LT(max_diff(lhs, rhs), 1e-12 * std::max(1.0, rhs.max_abs()));
    }
  }
}

TEST(GridProperties, ParsevalHolds) {
  std::mt19937_64 rng(99);
  const SpatialGrid grid(256, 13.0);
  for (int trial = 0; trial < 20; ++trial) {
    Field1D f = random_band_limited(grid, rng, 100);
    f += 0.3 * trial;
    const double physical = field_norms(f, grid).l2;
    EXPECT_NEAR(spectral_l2(f, grid), physical, 1e-12 * physical);
  }
}

TEST(Dealias, ProductOfResolvedModesIsExact) {
  const SpatialGrid grid(64, 2.0 * pi);
  const auto f = Field1D::sample(grid, [](double x) { return std::sin(3.0 * x); });
  const auto g = Field1D::sample(grid, [](double x) { return std::cos(5.0 * x); });
  EXPECT_LT(max_diff(dealiased_product(f, g, grid), f * g), 1e-14);
  // modes above n/3 are removed
  const auto high = Field1D::sample(grid, [](double x) { return std::cos(25.0 * x); });
  EXPECT_LT(dealias(high, grid).max_abs(), 1e-14);
}
