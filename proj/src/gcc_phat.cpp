#include <gcftrack/fft.hpp>
#include <gcftrack/gcc_phat.hpp>

#include <span>
#include <vector>

namespace gcftrack {

Index GccCorrelation::peak_lag() const {
  Index best = 0;
  values.maxCoeff(&best);
  return best - max_lag;
}

GccCorrelation gcc_phat(const Eigen::Ref<const Eigen::VectorXcd>& spec_a,
                        const Eigen::Ref<const Eigen::VectorXcd>& spec_b, Index max_lag, double epsilon) {
  require(spec_a.size() == spec_b.size(), "gcc_phat: spectrum lengths differ");
  require(spec_a.size() >= 2, "gcc_phat: spectrum too short");
  require(epsilon > 0.0, "gcc_phat: epsilon must be positive");
  const Index n = 2 * (spec_a.size() - 1);
  require(max_lag >= 0 && max_lag < n / 2, "gcc_phat: max_lag must be below window_length / 2");

  std::vector<std::complex<double>> cross(static_cast<size_t>(spec_a.size()));
  for (Index k = 0; k < spec_a.size(); ++k) {
    const std::complex<double> c = std::conj(spec_a(k)) * spec_b(k);
    const double mag = std::abs(c);
    cross[static_cast<size_t>(k)] = mag < epsilon ? std::complex<double>{} : c / mag;
  }

  std::vector<double> circular(static_cast<size_t>(n));
  RealFft(n).inverse(cross, circular);

  GccCorrelation out;
  out.max_lag = max_lag;
  out.values.resize(2 * max_lag + 1);
  for (Index lag = -max_lag; lag <= max_lag; ++lag) {
    out.values(lag + max_lag) = circular[static_cast<size_t>((lag + n) % n)];
  }
  return out;
}

std::optional<double> correlation_at(const GccCorrelation& corr, double tau, double sample_rate) {
  const double lag = tau * sample_rate;
  if (!(std::abs(lag) <= static_cast<double>(corr.max_lag))) return std::nullopt;
  return interpolate_lag(corr, lag);
}

Index max_lag_for(double distance, double sample_rate, double speed_of_sound) {
  return static_cast<Index>(std::ceil(distance / speed_of_sound * sample_rate)) + 2;
}

}  // namespace gcftrack
