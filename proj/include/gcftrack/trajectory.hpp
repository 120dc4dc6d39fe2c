#pragma once

#include <gcftrack/common.hpp>
#include <gcftrack/geometry.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace gcftrack {

enum class CoordinateFrame { kArrayLocal, kWorld };

/// Timestamped 3D positions; column k of `positions` belongs to timestamps[k].
struct Trajectory {
  std::vector<double> timestamps;
  Eigen::Matrix3Xd positions;
  CoordinateFrame frame = CoordinateFrame::kArrayLocal;

  Index size() const { return static_cast<Index>(timestamps.size()); }
  bool empty() const { return timestamps.empty(); }
  Vec3 position(Index k) const { return positions.col(k); }

  static Trajectory with_size(Index n, CoordinateFrame frame = CoordinateFrame::kArrayLocal);
};

/// Ground truth: a trajectory plus a per-entry voice-activity flag.
struct GroundTruth {
  Trajectory trajectory;
  std::vector<bool> active;
};

/// `timestamp_s,x_m,y_m,z_m` with six decimals.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory load_trajectory_csv(const std::filesystem::path& path);

/// `timestamp_s,x_m,y_m,z_m,active`.
void save_ground_truth_csv(const std::filesystem::path& path, const GroundTruth& truth);
/// Reads the ground-truth layout; a file without the `active` column marks
/// every entry active.
GroundTruth load_ground_truth_csv(const std::filesystem::path& path);

/// `timestamp_s,active`.
void save_activity_csv(const std::filesystem::path& path, const std::vector<double>& timestamps,
                       const std::vector<bool>& active);
/// Replaces truth.active with the flag of the nearest activity row.
void apply_activity_csv(const std::filesystem::path& path, GroundTruth& truth);

/// Re-expresses a trajectory in the array-local or world frame using the
/// geometry's per-timestamp rigid transforms.
Trajectory to_frame(const Trajectory& traj, CoordinateFrame target, const MicArrayGeometry& geom);

}  // namespace gcftrack
