#include <gcftrack/tracker.hpp>

#include <algorithm>
#include <cmath>

namespace gcftrack {

void TrackerConfig::validate() const {
  require(particles >= 1, "tracker: need at least one particle");
  require((propagation_variance.array() > 0.0).all(), "tracker: propagation variances must be positive");
  require(likelihood_std > 0.0, "tracker: likelihood std must be positive");
  require(alpha > beta && beta > 0.0 && alpha <= 1.0, "tracker: require 0 < beta < alpha <= 1");
}

LikelihoodBranch select_branch(double frame_peak, double gamma, double alpha, double beta) {
  if (frame_peak >= alpha * gamma) return LikelihoodBranch::kPeakGaussian;
  if (frame_peak >= beta * gamma) return LikelihoodBranch::kMapValue;
  return LikelihoodBranch::kUniform;
}

ParticleSet initialize_particles(Index count, const Grid3D& grid, Rng& rng) {
  ParticleSet set;
  set.states.resize(3, count);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index n = 0; n < count; ++n) {
    for (int a = 0; a < 3; ++a) {
      set.states(a, n) = grid.lo()(a) + unit(rng) * (grid.hi()(a) - grid.lo()(a));
    }
  }
  set.weights = Eigen::VectorXd::Constant(count, 1.0 / static_cast<double>(count));
  return set;
}

void propagate(ParticleSet& particles, const Vec3& variance, const Grid3D& grid, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vec3 std_dev = variance.cwiseSqrt();
  for (Index n = 0; n < particles.size(); ++n) {
    Vec3 step;
    for (int a = 0; a < 3; ++a) step(a) = std_dev(a) * normal(rng);
    particles.states.col(n) = grid.clamp(particles.states.col(n) + step);
  }
}

LikelihoodBranch update_weights(ParticleSet& particles, const GcfFrame& frame, const MapAccess& map_value,
                                const Grid3D& grid, double gamma, const TrackerConfig& config) {
  if (!(gamma > 0.0)) throw InputError("update_weights: gamma must be positive");
  const Index count = particles.size();
  const LikelihoodBranch branch = select_branch(frame.peak_value, gamma, config.alpha, config.beta);
  particles.degenerate = false;
  Eigen::VectorXd& w = particles.weights;
  w.resize(count);

  switch (branch) {
    case LikelihoodBranch::kPeakGaussian: {
      const double inv_two_var = 1.0 / (2.0 * config.likelihood_std * config.likelihood_std);
      Eigen::VectorXd log_w =
          -(particles.states.colwise() - frame.peak_position).colwise().squaredNorm().transpose() * inv_two_var;
      w = (log_w.array() - log_w.maxCoeff()).exp();
      break;
    }
    case LikelihoodBranch::kMapValue:
      for (Index n = 0; n < count; ++n) {
        w(n) = std::max(0.0, map_value(grid.nearest_index(particles.states.col(n))));
      }
      break;
    case LikelihoodBranch::kUniform:
      w.setConstant(1.0 / static_cast<double>(count));
      return branch;
  }

  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    w.setConstant(1.0 / static_cast<double>(count));
    particles.degenerate = true;
    return branch;
  }
  w /= total;
  return branch;
}

PointEstimate estimate(const ParticleSet& particles) {
  require(particles.size() > 0, "estimate: empty particle set");
  const double total = particles.weights.sum();
  if (!(total > 0.0)) return {particles.states.rowwise().mean(), true};
  return {particles.states * particles.weights / total, false};
}

std::vector<Index> systematic_resample_indices(const Eigen::VectorXd& weights, double offset) {
  const Index count = weights.size();
  require(count > 0, "resample: no weights");
  require(offset >= 0.0 && offset < 1.0, "resample: offset must lie in [0, 1)");
  require((weights.array() >= 0.0).all(), "resample: negative weight");
  const double total = weights.sum();
  if (!(total > 0.0)) throw DegenerateError("resample: all weights are zero");

  Index last_positive = count - 1;
  while (weights(last_positive) <= 0.0) --last_positive;

  std::vector<Index> picks(static_cast<size_t>(count));
  double cumulative = weights(0) / total;
  Index j = 0;
  for (Index i = 0; i < count; ++i) {
    const double u = (offset + static_cast<double>(i)) / static_cast<double>(count);
    while (cumulative <= u && j < last_positive) {
      ++j;
      cumulative += weights(j) / total;
    }
    picks[static_cast<size_t>(i)] = j;
  }
  return picks;
}

void resample_sir(ParticleSet& particles, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double offset = unit(rng);
  const std::vector<Index> picks = systematic_resample_indices(particles.weights, offset);
  Eigen::Matrix3Xd states(3, particles.size());
  for (Index i = 0; i < particles.size(); ++i) states.col(i) = particles.states.col(picks[static_cast<size_t>(i)]);
  particles.states = std::move(states);
  particles.weights.setConstant(1.0 / static_cast<double>(particles.size()));
}

TrackResult track(std::span<const GcfFrame> frames, const FrameMapAccess& map_value, const Grid3D& grid,
                  double gamma, const TrackerConfig& config) {
  require(!frames.empty(), "track: no frames");
  config.validate();
  Rng rng(config.seed);
  ParticleSet particles = initialize_particles(config.particles, grid, rng);

  TrackResult result;
  result.trajectory = Trajectory::with_size(static_cast<Index>(frames.size()));
  for (size_t k = 0; k < frames.size(); ++k) {
    const auto frame_index = static_cast<Index>(k);
    propagate(particles, config.propagation_variance, grid, rng);
    const LikelihoodBranch branch = update_weights(
        particles, frames[k], [&](Index point) { return map_value(frame_index, point); }, grid, gamma, config);
    if (particles.degenerate) ++result.degenerate_frames;
    const PointEstimate est = estimate(particles);
    result.trajectory.timestamps[k] = frames[k].timestamp;
    result.trajectory.positions.col(frame_index) = est.position;
    result.branches.push_back(branch);
    resample_sir(particles, rng);
  }
  return result;
}

}  // namespace gcftrack
