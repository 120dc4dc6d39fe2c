#pragma once

#include <gcftrack/common.hpp>
#include <gcftrack/trajectory.hpp>

#include <Eigen/Core>

#include <optional>
#include <span>

namespace gcftrack {

/// Running means of the frame peaks: forward(i) averages peaks[0..i],
/// backward(i) averages peaks[i..T-1] (both inclusive).
struct PeakAverages {
  Eigen::VectorXd forward;
  Eigen::VectorXd backward;
};

PeakAverages peak_averages(std::span<const double> peaks);

enum class TurningKind { kNone, kFrontToBack, kBackToFront };

/// Frame indices are 0-based; `frame` is the first frame on the far side of
/// the crossing. Ratio curves hold NaN where the denominator average is zero.
struct TurningDecision {
  TurningKind kind = TurningKind::kNone;
  std::optional<Index> frame;
  Eigen::VectorXd ratio_front_back;  // forward / backward
  Eigen::VectorXd ratio_back_front;  // backward / forward
};

/// Looks for a single crossing inside the open 1-based window (t0, T - t0),
/// i.e. 0-based indices t0 .. T - t0 - 2. A crossing is reported when the
/// larger of the two ratio maxima reaches `kappa`.
TurningDecision detect_turning(std::span<const double> peaks, Index t0, double kappa);

/// max(1, round(fraction * T)).
Index default_turning_margin(Index frame_count, double fraction = 0.1);

/// Negates y from `frame` on (front to back) or before `frame` (back to
/// front). Input must be array-local.
Trajectory apply_correction(const Trajectory& traj, const TurningDecision& decision);

}  // namespace gcftrack
