#pragma once

#include <gcftrack/common.hpp>

#include <Eigen/Core>
#include <json.hpp>

#include <filesystem>
#include <vector>

namespace gcftrack {

/// world = rotation * local + translation, valid from `time` onwards.
struct RigidTransform {
  double time = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_world(const Vec3& local) const { return rotation * local + translation; }
  Vec3 to_local(const Vec3& world) const { return rotation.transpose() * (world - translation); }
};

struct MicPair {
  Index first = 0;
  Index second = 0;
  friend bool operator==(const MicPair&, const MicPair&) = default;
};

struct MicArrayGeometry {
  Eigen::Matrix3Xd mics;            // array-local positions, one column per microphone
  std::vector<int> ids;             // external microphone ids, same order as `mics`
  std::vector<MicPair> pairs;       // indices into `mics`
  bool planar = false;              // enables front-back correction
  Vec3 reference = Vec3::Zero();    // origin for azimuth/elevation
  std::vector<RigidTransform> transforms;  // sorted by time; empty = static array at the world origin

  Index mic_count() const { return mics.cols(); }
  Index pair_count() const { return static_cast<Index>(pairs.size()); }
  double pair_distance(Index pair) const;

  /// Transform in force at time t (zero-order hold, first row before its time).
  RigidTransform transform_at(double t) const;
  /// Microphone positions in world coordinates at time t.
  Eigen::Matrix3Xd mics_at(double t) const;

  /// Throws InputError when pair indices are out of range, repeated within a
  /// pair, or select coincident microphones.
  void validate() const;
};

MicArrayGeometry geometry_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MicArrayGeometry& geom);
MicArrayGeometry load_geometry(const std::filesystem::path& path);
void save_geometry(const std::filesystem::path& path, const MicArrayGeometry& geom);

/// 15-microphone planar array in the y = 0 plane: a harmonically nested
/// horizontal line (4/8/16/32 cm spacings, 1.92 m outer span) at height
/// `height` plus two microphones 0.32 m above the outermost ones. Default
/// pairs: the four outer 32 cm horizontal pairs and the two vertical pairs.
MicArrayGeometry dicit_like_geometry(double height = 1.0);

}  // namespace gcftrack
