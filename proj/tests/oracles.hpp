#pragma once

// Reference computations used only by tests. Deliberately naive: direct
// O(N^2) transforms and time-domain sums, no FFTW.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

inline Eigen::VectorXcd dft(const Eigen::VectorXd& x) {
  const auto n = x.size();
  Eigen::VectorXcd out(n / 2 + 1);
  for (Eigen::Index k = 0; k <= n / 2; ++k) {
    std::complex<double> acc{};
    for (Eigen::Index t = 0; t < n; ++t) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x(t) * std::complex<double>(std::cos(a), std::sin(a));
    }
    out(k) = acc;
  }
  return out;
}

// Real signal of length n from a one-sided spectrum (Hermitian extension).
inline Eigen::VectorXd inverse_dft(const Eigen::VectorXcd& half, Eigen::Index n) {
  Eigen::VectorXd out(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    std::complex<double> acc{};
    for (Eigen::Index k = 0; k < n; ++k) {
      const std::complex<double> xk = k <= n / 2 ? half(k) : std::conj(half(n - k));
      const double a = 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += xk * std::complex<double>(std::cos(a), std::sin(a));
    }
    out(t) = acc.real() / static_cast<double>(n);
  }
  return out;
}

// Circular cross-correlation r[k] = sum_n a[n] b[n + k], k in [-max_lag, max_lag].
inline Eigen::VectorXd circular_xcorr(const Eigen::VectorXd& a, const Eigen::VectorXd& b, Eigen::Index max_lag) {
  const auto n = a.size();
  Eigen::VectorXd r(2 * max_lag + 1);
  for (Eigen::Index k = -max_lag; k <= max_lag; ++k) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) acc += a(t) * b(((t + k) % n + n) % n);
    r(k + max_lag) = acc;
  }
  return r;
}

// Spectrum divided by its magnitude bin by bin.
inline Eigen::VectorXcd whiten(const Eigen::VectorXcd& s) {
  Eigen::VectorXcd out(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) out(k) = std::abs(s(k)) > 0 ? s(k) / std::abs(s(k)) : 0.0;
  return out;
}

inline double distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace oracle
