#pragma once

#include <gcftrack/common.hpp>

#include <Eigen/Core>

#include <cmath>
#include <optional>

namespace gcftrack {

inline constexpr double kPhatEpsilon = 1e-12;

/// Real correlation sampled at the integer lags [-max_lag, max_lag];
/// `values(lag + max_lag)` holds lag `lag`.
struct GccCorrelation {
  Index max_lag = 0;
  Eigen::VectorXd values;

  double at_lag(Index lag) const { return values(lag + max_lag); }
  /// Lag of the maximum; the most negative lag wins ties.
  Index peak_lag() const;
  double peak_value() const { return values.maxCoeff(); }
};

struct GccFrame {
  Index pair_index = 0;
  double timestamp = 0.0;
  GccCorrelation correlation;
};

/// GCC-PHAT of two one-sided spectra of the same real window length.
/// The cross-spectrum conj(A) * B is whitened bin by bin (bins with
/// |A * B| < epsilon are zeroed) and inverse transformed, so a `b` that
/// lags `a` by d samples peaks at lag +d. An identical pair peaks at 1.
GccCorrelation gcc_phat(const Eigen::Ref<const Eigen::VectorXcd>& spec_a,
                        const Eigen::Ref<const Eigen::VectorXcd>& spec_b, Index max_lag,
                        double epsilon = kPhatEpsilon);

/// Linear interpolation at a fractional lag given in samples. The caller
/// guarantees |lag| <= max_lag.
inline double interpolate_lag(const GccCorrelation& corr, double lag) {
  const double pos = lag + static_cast<double>(corr.max_lag);
  const auto lo = static_cast<Index>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= corr.values.size()) return corr.values(lo);
  return corr.values(lo) + frac * (corr.values(lo + 1) - corr.values(lo));
}

/// Correlation at time difference `tau` (seconds); nullopt when
/// |tau * sample_rate| exceeds the stored lag range.
std::optional<double> correlation_at(const GccCorrelation& corr, double tau, double sample_rate);

/// Physically admissible lag bound for a pair: ceil(distance / c * fs) + 2.
Index max_lag_for(double distance, double sample_rate, double speed_of_sound = kSpeedOfSound);

}  // namespace gcftrack
