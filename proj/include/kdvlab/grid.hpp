#pragma once

// Periodic 1-D grids, sampled fields and Fourier-spectral calculus.

#include <kdvlab/detail/fft.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kdvlab {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

/// Uniform periodic grid on [0, length) with n nodes.
class SpatialGrid {
 public:
  SpatialGrid(int n, double length) : n_(n), length_(length) {
    if (n < 8 || n % 2 != 0 || (n & (n - 1)) != 0)
      throw std::invalid_argument("SpatialGrid: n must be a power of two >= 8, got " +
                                  std::to_string(n));
    if (!(length > 0.0) || !std::isfinite(length))
      throw std::invalid_argument("SpatialGrid: length must be positive and finite");
  }

  int size() const { return n_; }
  double length() const { return length_; }
  double dx() const { return length_ / n_; }
  double node(int j) const { return j * dx(); }

  std::vector<double> nodes() const {
    std::vector<double> x(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) x[j] = node(j);
    return x;
  }

  /// Number of non-negative modes stored by a real transform (n/2 + 1).
  int modes() const { return n_ / 2 + 1; }

  /// Angular wavenumber of non-negative mode m (0 <= m <= n/2).
  double wavenumber(int m) const { return 2.0 * std::numbers::pi * m / length_; }

  /// Full wavenumber array in FFT ordering: 0, 1, ..., n/2-1, -n/2, ..., -1.
  std::vector<double> wavenumbers() const {
    std::vector<double> k(static_cast<std::size_t>(n_));
    for (int m = 0; m < n_; ++m) k[m] = wavenumber(m <= n_ / 2 - 1 ? m : m - n_);
    return k;
  }

  /// Largest mode index kept by the 2/3 dealiasing rule.
  int dealias_cutoff() const { return n_ / 3; }

  double max_wavenumber() const { return wavenumber(n_ / 2); }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

 private:
  int n_;
  double length_;
};

/// Real samples of a function on the nodes of a SpatialGrid.
class Field1D {
 public:
  Field1D() = default;
  explicit Field1D(std::size_t n, double value = 0.0) : v_(n, value) {}
  explicit Field1D(std::vector<double> values) : v_(std::move(values)) {}

  template <class Fn>
  static Field1D sample(const SpatialGrid& grid, Fn&& fn) {
    Field1D f(static_cast<std::size_t>(grid.size()));
    for (int j = 0; j < grid.size(); ++j) f[j] = fn(grid.node(j));
    return f;
  }

  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  auto begin() { return v_.begin(); }
  auto end() { return v_.end(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }
  std::span<double> span() { return v_; }
  std::span<const double> span() const { return v_; }
  const std::vector<double>& values() const { return v_; }

  bool all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
  }
  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  double min() const { return *std::min_element(v_.begin(), v_.end()); }
  double max() const { return *std::max_element(v_.begin(), v_.end()); }
  double mean() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return v_.empty() ? 0.0 : s / static_cast<double>(v_.size());
  }

  template <class Fn>
  Field1D map(Fn&& fn) const {
    Field1D out(v_.size());
    for (std::size_t i = 0; i < v_.size(); ++i) out[i] = fn(v_[i]);
    return out;
  }

  Field1D& operator+=(const Field1D& o) {
    check_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Field1D& operator-=(const Field1D& o) {
    check_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Field1D& operator*=(const Field1D& o) {
    check_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] *= o.v_[i];
    return *this;
  }
  Field1D& operator+=(double s) {
    for (double& x : v_) x += s;
    return *this;
  }
  Field1D& operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
  }

  friend Field1D operator+(Field1D a, const Field1D& b) { return a += b; }
  friend Field1D operator-(Field1D a, const Field1D& b) { return a -= b; }
  friend Field1D operator*(Field1D a, const Field1D& b) { return a *= b; }
  friend Field1D operator*(Field1D a, double s) { return a *= s; }
  friend Field1D operator*(double s, Field1D a) { return a *= s; }
  friend Field1D operator+(Field1D a, double s) { return a += s; }
  friend Field1D operator+(double s, Field1D a) { return a += s; }
  friend Field1D operator-(Field1D a, double s) { return a += -s; }
  friend Field1D operator-(double s, Field1D a) { return (a *= -1.0) += s; }
  friend Field1D operator-(Field1D a) { return a *= -1.0; }
  friend Field1D operator/(Field1D a, const Field1D& b) {
    a.check_same(b);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] /= b[i];
    return a;
  }

  friend bool operator==(const Field1D&, const Field1D&) = default;

 private:
  void check_same(const Field1D& o) const {
    if (o.v_.size() != v_.size()) throw std::invalid_argument("Field1D: size mismatch");
  }
  std::vector<double> v_;
};

namespace detail {

inline void require_on_grid(const Field1D& f, const SpatialGrid& grid, const char* who) {
  if (f.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument(std::string(who) + ": field has " + std::to_string(f.size()) +
                                " samples, grid has " + std::to_string(grid.size()));
  if (!f.all_finite()) throw std::domain_error(std::string(who) + ": non-finite field values");
}

}  // namespace detail

/// Unnormalized real FFT of f (n/2+1 coefficients).
inline Spectrum to_spectrum(const Field1D& f, const SpatialGrid& grid) {
  detail::require_on_grid(f, grid, "to_spectrum");
  Spectrum s(static_cast<std::size_t>(grid.modes()));
  detail::RealFft::get(grid.size()).forward(f.span(), s);
  return s;
}

inline Field1D from_spectrum(const Spectrum& s, const SpatialGrid& grid) {
  Field1D f(static_cast<std::size_t>(grid.size()));
  detail::RealFft::get(grid.size()).inverse(s, f.span());
  return f;
}

/// Multiply the spectrum of f by symbol(k, m) for each non-negative mode m.
template <class Symbol>
Field1D apply_symbol(const Field1D& f, const SpatialGrid& grid, Symbol&& symbol) {
  Spectrum s = to_spectrum(f, grid);
  for (int m = 0; m < grid.modes(); ++m) s[m] *= symbol(grid.wavenumber(m), m);
  return from_spectrum(s, grid);
}

/// Spectral derivative of order 1..4: multiplication by (ik)^order.
/// The Nyquist mode is dropped for odd orders.
inline Field1D spectral_derivative(const Field1D& f, const SpatialGrid& grid, int order = 1) {
  if (order < 1 || order > 4)
    throw std::invalid_argument("spectral_derivative: order must be in 1..4, got " +
                                std::to_string(order));
  const int nyquist = grid.size() / 2;
  return apply_symbol(f, grid, [&](double k, int m) -> Complex {
    if (m == nyquist && order % 2 == 1) return 0.0;
    switch (order) {
      case 1: return {0.0, k};
      case 2: return -k * k;
      case 3: return {0.0, -k * k * k};
      default: return k * k * k * k;
    }
  });
}

/// Shorthand for repeated differentiation beyond order 4.
inline Field1D derivative(const Field1D& f, const SpatialGrid& grid, int order = 1) {
  if (order <= 4) return spectral_derivative(f, grid, order);
  return spectral_derivative(spectral_derivative(f, grid, 4), grid, order - 4);
}

/// Mean-zero periodic primitive of f. f must have (numerically) zero mean,
/// otherwise no periodic primitive exists.
inline Field1D spectral_antiderivative(const Field1D& f, const SpatialGrid& grid,
                                       double mean_tolerance = 1e-10) {
  detail::require_on_grid(f, grid, "spectral_antiderivative");
  const double scale = f.max_abs();
  if (scale == 0.0) return Field1D(f.size());
  const double mean = f.mean();
  if (std::abs(mean) > mean_tolerance * scale)
    throw std::domain_error("spectral_antiderivative: integrand mean " + std::to_string(mean) +
                            " exceeds tolerance; no periodic primitive exists");
  const int nyquist = grid.size() / 2;
  return apply_symbol(f, grid, [&](double k, int m) -> Complex {
    if (m == 0 || m == nyquist) return 0.0;
    return 1.0 / Complex(0.0, k);
  });
}

/// Zero all modes above the 2/3-rule cutoff.
inline Field1D dealias(const Field1D& f, const SpatialGrid& grid) {
  const int cutoff = grid.dealias_cutoff();
  return apply_symbol(f, grid, [&](double, int m) -> Complex { return m <= cutoff ? 1.0 : 0.0; });
}

/// Product of two fields with both factors and the result truncated by the 2/3 rule.
inline Field1D dealiased_product(const Field1D& a, const Field1D& b, const SpatialGrid& grid) {
  return dealias(dealias(a, grid) * dealias(b, grid), grid);
}

struct FieldNorms {
  double l2 = 0.0;
  double linf = 0.0;
};

/// Discrete L2 (uniform trapezoid on the periodic grid) and max norms.
inline FieldNorms field_norms(const Field1D& f, const SpatialGrid& grid) {
  detail::require_on_grid(f, grid, "field_norms");
  double sum = 0.0;
  for (double v : f) sum += v * v;
  return {std::sqrt(sum * grid.dx()), f.max_abs()};
}

/// L2 norm computed from Fourier coefficients (Parseval).
inline double spectral_l2(const Field1D& f, const SpatialGrid& grid) {
  const Spectrum s = to_spectrum(f, grid);
  const int n = grid.size();
  double sum = std::norm(s[0]);
  for (int m = 1; m < n / 2; ++m) sum += 2.0 * std::norm(s[m]);
  sum += std::norm(s[n / 2]);
  return std::sqrt(sum * grid.length()) / n;
}

/// Sobolev norm (sum_{j<=k} ||d^j f||^2)^{1/2}.
inline double sobolev_norm(const Field1D& f, const SpatialGrid& grid, int k) {
  double sum = std::pow(field_norms(f, grid).l2, 2);
  for (int j = 1; j <= k; ++j) sum += std::pow(field_norms(derivative(f, grid, j), grid).l2, 2);
  return std::sqrt(sum);
}

/// Trapezoid integral over one period.
inline double integrate(const Field1D& f, const SpatialGrid& grid) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * grid.dx();
}

}  // namespace kdvlab
