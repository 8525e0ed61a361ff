#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace kdvlab::detail {

// Real-to-complex / complex-to-real plan pair for one transform length.
// Plans are created once per length and shared; fftw_execute_dft_* on an
// existing plan is thread-safe, plan creation is not, hence the mutex.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    std::vector<double> real(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(n / 2 + 1));
    auto* c = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c_1d(n, real.data(), c, flags);
    inverse_ = fftw_plan_dft_c2r_1d(n, c, real.data(), flags);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  int size() const { return n_; }

  // Unnormalized forward transform, out has n/2+1 entries.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }

  // Inverse transform scaled by 1/n so that inverse(forward(f)) == f.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
    // c2r overwrites its input
    std::vector<std::complex<double>> scratch(in.begin(), in.end());
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
    const double scale = 1.0 / n_;
    std::for_each(out.begin(), out.end(), [scale](double& v) { v *= scale; });
  }

  static const RealFft& get(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<RealFft>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<RealFft>(n);
    return *slot;
  }

 private:
  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace kdvlab::detail
