#pragma once

#include <gcftrack/common.hpp>

#include <complex>
#include <span>

namespace gcftrack {

/// Real-input DFT of a fixed power-of-two size backed by FFTW. Plans are
/// created once per size (under a global lock) and executed with the
/// new-array interface, so one instance may be shared between threads.
class RealFft {
 public:
  explicit RealFft(Index size);

  Index size() const { return size_; }
  Index bins() const { return size_ / 2 + 1; }

  /// Unnormalized forward transform: X[k] = sum_n x[n] e^{-2 pi i k n / N}.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;

  /// Inverse of the one-sided spectrum including the 1/N factor.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  Index size_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace gcftrack
