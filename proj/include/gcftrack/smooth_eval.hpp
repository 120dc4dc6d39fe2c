#pragma once

#include <gcftrack/common.hpp>
#include <gcftrack/trajectory.hpp>

#include <Eigen/Core>
#include <json.hpp>

#include <cmath>
#include <iosfwd>
#include <numbers>
#include <vector>

namespace gcftrack {

/// Largest ||p_k - p_{k-1}|| / (t_k - t_{k-1}) over the trajectory.
double max_speed(const Trajectory& traj);

struct SmoothResult {
  Trajectory trajectory;
  bool converged = false;
  Index iterations = 0;
  std::vector<bool> replaced;  // entries overwritten by interpolation in any iteration
};

/// Velocity-gated outlier removal. Each iteration takes the earliest entry k
/// whose speed exceeds `v_max`, discards entries k-1 .. k+2 and refills them
/// by linear interpolation in time between the nearest kept neighbours (or
/// holds the single available neighbour at the ends). Stops once the maximum
/// speed is within `v_max` or after `max_iterations` replacements.
SmoothResult smooth_outliers(const Trajectory& traj, double v_max, Index max_iterations = 15);

struct Angles {
  double azimuth = 0.0;    // degrees, 0 at +y (broadside), positive toward +x
  double elevation = 0.0;  // degrees above the x-y plane
};

template <typename Derived>
Angles to_angles(const Eigen::MatrixBase<Derived>& direction) {
  using Scalar = typename Derived::Scalar;
  const Scalar x = direction(0), y = direction(1), z = direction(2);
  if (x == Scalar(0) && y == Scalar(0) && z == Scalar(0)) throw InputError("to_angles: zero vector");
  constexpr double deg = 180.0 / std::numbers::pi;
  return {static_cast<double>(std::atan2(x, y)) * deg,
          static_cast<double>(std::atan2(z, std::sqrt(x * x + y * y))) * deg};
}

/// Absolute azimuth difference wrapped into [0, 180].
inline double azimuth_error(double a, double b) { return std::abs(std::remainder(a - b, 360.0)); }

struct EvalReport {
  double mae_3d = 0.0;         // m
  double mae_azimuth = 0.0;    // deg
  double mae_elevation = 0.0;  // deg
  Index active_frame_count = 0;
};

/// Mean errors over the active truth entries. Each active truth timestamp
/// inside the estimate's time span is matched to the nearest estimate, which
/// must lie within half an estimate frame period. Angles are taken about
/// `reference`.
EvalReport evaluate(const Trajectory& estimate, const Trajectory& truth, const std::vector<bool>& active,
                    const Vec3& reference = Vec3::Zero());

nlohmann::json to_json(const EvalReport& report);
void print_report(std::ostream& out, const EvalReport& report);

}  // namespace gcftrack
