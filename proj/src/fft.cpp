#include <gcftrack/fft.hpp>

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace gcftrack {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// Plans live for the lifetime of the process; FFTW planning is not
// thread-safe, execution with fftw_execute_dft_* is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(Index n) {
  static std::map<Index, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  double* real = fftw_alloc_real(static_cast<size_t>(n));
  fftw_complex* cplx = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, cplx, flags);
  p.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real, flags | FFTW_DESTROY_INPUT);
  fftw_free(real);
  fftw_free(cplx);
  if (!p.forward || !p.inverse) throw std::runtime_error("FFTW planning failed");
  cache.emplace(n, p);
  return p;
}

}  // namespace

RealFft::RealFft(Index size) : size_(size) {
  require(size >= 2 && (size & (size - 1)) == 0, "FFT size must be a power of two >= 2");
  PlanPair p = plans_for(size);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  require(static_cast<Index>(in.size()) == size_ && static_cast<Index>(out.size()) == bins(),
          "RealFft::forward: buffer size mismatch");
  // r2c never writes its input, but the interface takes a non-const pointer.
  std::vector<double> scratch(in.begin(), in.end());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), scratch.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  require(static_cast<Index>(in.size()) == bins() && static_cast<Index>(out.size()) == size_,
          "RealFft::inverse: buffer size mismatch");
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(size_);
  std::transform(out.begin(), out.end(), out.begin(), [scale](double v) { return v * scale; });
}

}  // namespace gcftrack
