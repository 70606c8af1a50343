#pragma once

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "sfnls/grid.hpp"

namespace sfnls {

/// In-place complex FFT plans for one (n, N) shape.
///
/// Plans are built once with FFTW_ESTIMATE | FFTW_UNALIGNED and shared
/// between threads. FFTW planning is not thread-safe, so creation happens
/// under a global mutex; the new-array execute calls used by forward()
/// and backward() are.
class FftPlan {
public:
  FftPlan(int n, int N) {
    std::vector<cplx> scratch(n == 1 ? N : static_cast<std::size_t>(N) * N);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (n == 1) {
      fwd_ = fftw_plan_dft_1d(N, buf, buf, FFTW_FORWARD, flags);
      bwd_ = fftw_plan_dft_1d(N, buf, buf, FFTW_BACKWARD, flags);
    } else {
      fwd_ = fftw_plan_dft_2d(N, N, buf, buf, FFTW_FORWARD, flags);
      bwd_ = fftw_plan_dft_2d(N, N, buf, buf, FFTW_BACKWARD, flags);
    }
    if (!fwd_ || !bwd_) throw Error("FFTW failed to create a plan");
  }
  ~FftPlan() {
    std::lock_guard lock(mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  /// Unnormalized forward transform, in place.
  void forward(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(fwd_, p, p);
  }
  /// Unnormalized backward transform, in place (no 1/N^n factor).
  void backward(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(bwd_, p, p);
  }

  static std::shared_ptr<const FftPlan> get(const GridSpec& g) {
    std::lock_guard lock(mutex());
    static std::map<std::pair<int, int>, std::shared_ptr<const FftPlan>> cache;
    auto key = std::make_pair(g.n, g.N);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto plan = std::shared_ptr<const FftPlan>(new FftPlan(g.n, g.N));
    cache.emplace(key, plan);
    return plan;
  }

private:
  static std::recursive_mutex& mutex() {
    static std::recursive_mutex m;
    return m;
  }

  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

} // namespace sfnls
