#include <gcftrack/front_back.hpp>

#include <cmath>
#include <limits>

namespace gcftrack {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// First maximum over [begin, end], skipping NaN entries.
std::optional<Index> argmax(const Eigen::VectorXd& v, Index begin, Index end) {
  std::optional<Index> best;
  for (Index i = begin; i <= end; ++i) {
    if (std::isnan(v(i))) continue;
    if (!best || v(i) > v(*best)) best = i;
  }
  return best;
}

}  // namespace

PeakAverages peak_averages(std::span<const double> peaks) {
  require(!peaks.empty(), "peak_averages: empty input");
  const auto n = static_cast<Index>(peaks.size());
  PeakAverages avg{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    sum += peaks[static_cast<size_t>(i)];
    avg.forward(i) = sum / static_cast<double>(i + 1);
  }
  sum = 0.0;
  for (Index i = n - 1; i >= 0; --i) {
    sum += peaks[static_cast<size_t>(i)];
    avg.backward(i) = sum / static_cast<double>(n - i);
  }
  return avg;
}

TurningDecision detect_turning(std::span<const double> peaks, Index t0, double kappa) {
  const auto n = static_cast<Index>(peaks.size());
  require(n >= 2, "detect_turning: need at least two frames");
  require(t0 >= 1 && 2 * t0 < n, "detect_turning: window (t0, T - t0) is degenerate");
  const PeakAverages avg = peak_averages(peaks);

  TurningDecision d;
  d.ratio_front_back.resize(n);
  d.ratio_back_front.resize(n);
  for (Index i = 0; i < n; ++i) {
    const bool defined = avg.backward(i) > 0.0 && avg.forward(i) > 0.0;
    d.ratio_front_back(i) = defined ? avg.forward(i) / avg.backward(i) : kNaN;
    d.ratio_back_front(i) = defined ? 1.0 / d.ratio_front_back(i) : kNaN;
  }

  // 1-based t in (t0, T - t0) is 0-based i in [t0, T - t0 - 2].
  const Index begin = t0;
  const Index end = n - t0 - 2;
  if (end < begin) return d;
  const auto front = argmax(d.ratio_front_back, begin, end);
  const auto back = argmax(d.ratio_back_front, begin, end);
  const double fb = front ? d.ratio_front_back(*front) : -1.0;
  const double bf = back ? d.ratio_back_front(*back) : -1.0;

  if (front && fb >= kappa && fb > bf) {
    d.kind = TurningKind::kFrontToBack;
    d.frame = front;
  } else if (back && bf >= kappa && bf > fb) {
    d.kind = TurningKind::kBackToFront;
    d.frame = back;
  }
  return d;
}

Index default_turning_margin(Index frame_count, double fraction) {
  return std::max<Index>(1, static_cast<Index>(std::llround(fraction * static_cast<double>(frame_count))));
}

Trajectory apply_correction(const Trajectory& traj, const TurningDecision& decision) {
  Trajectory out = traj;
  if (decision.kind == TurningKind::kNone || !decision.frame) return out;
  const Index turn = *decision.frame;
  for (Index k = 0; k < out.size(); ++k) {
    const bool flip = decision.kind == TurningKind::kFrontToBack ? k >= turn : k < turn;
    if (flip) out.positions(1, k) = -out.positions(1, k);
  }
  return out;
}

}  // namespace gcftrack
