#pragma once

#include <gcftrack/common.hpp>
#include <gcftrack/gcf_map.hpp>
#include <gcftrack/trajectory.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace gcftrack {

struct TrackerConfig {
  Index particles = 100;
  Vec3 propagation_variance{0.1, 0.1, 0.005};  // diagonal of the random-walk covariance, m^2
  double likelihood_std = 0.2;                 // m
  double alpha = 0.2;                          // confident-frame fraction of gamma
  double beta = 0.1;                           // usable-frame fraction of gamma
  std::uint64_t seed = 1;

  void validate() const;
};

struct ParticleSet {
  Eigen::Matrix3Xd states;
  Eigen::VectorXd weights;
  bool degenerate = false;

  Index size() const { return states.cols(); }
};

/// Which likelihood a frame uses, decided from the frame's map peak alone.
enum class LikelihoodBranch {
  kPeakGaussian,  // peak >= alpha * gamma: Gaussian around the map peak
  kMapValue,      // peak >= beta * gamma: field value at the particle
  kUniform,       // otherwise: no information, pure prediction
};

LikelihoodBranch select_branch(double frame_peak, double gamma, double alpha, double beta);

/// Uniform draw over the grid's bounding box with weights 1/N.
ParticleSet initialize_particles(Index count, const Grid3D& grid, Rng& rng);

/// Random-walk step with independent zero-mean Gaussian increments of the
/// given per-axis variances; states are clamped to the grid box.
void propagate(ParticleSet& particles, const Vec3& variance, const Grid3D& grid, Rng& rng);

/// Field value at a grid point index, for the current frame.
using MapAccess = std::function<double(Index)>;

/// Applies the selective likelihood and normalizes the weights to sum 1.
/// Gaussian weights are computed relative to the best particle so that
/// distant particle clouds do not underflow to zero. When every weight
/// vanishes the set falls back to uniform weights and is flagged degenerate.
LikelihoodBranch update_weights(ParticleSet& particles, const GcfFrame& frame, const MapAccess& map_value,
                                const Grid3D& grid, double gamma, const TrackerConfig& config);

struct PointEstimate {
  Vec3 position = Vec3::Zero();
  bool degenerate = false;
};

/// Weighted mean of the states; unweighted mean when all weights are zero.
PointEstimate estimate(const ParticleSet& particles);

/// Indices drawn by systematic resampling with the comb (offset + i) / N,
/// offset in [0, 1).
std::vector<Index> systematic_resample_indices(const Eigen::VectorXd& weights, double offset);

/// SIR step: systematic resampling with a random offset, weights reset to 1/N.
void resample_sir(ParticleSet& particles, Rng& rng);

struct TrackResult {
  Trajectory trajectory;
  std::vector<LikelihoodBranch> branches;
  Index degenerate_frames = 0;
};

/// Field value at (frame index, grid point index).
using FrameMapAccess = std::function<double(Index, Index)>;

/// Particle filter over a sequence of map peaks: initialize uniformly, then
/// per frame propagate, weight, estimate and resample.
TrackResult track(std::span<const GcfFrame> frames, const FrameMapAccess& map_value, const Grid3D& grid,
                  double gamma, const TrackerConfig& config);

}  // namespace gcftrack
