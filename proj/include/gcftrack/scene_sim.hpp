#pragma once

#include <gcftrack/audio_io.hpp>
#include <gcftrack/common.hpp>
#include <gcftrack/geometry.hpp>
#include <gcftrack/trajectory.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gcftrack {

enum class SourceKind { kWhiteNoise, kSpeechLike, kFile };

struct SourceKnot {
  double time = 0.0;
  Vec3 position = Vec3::Zero();  // world frame
};

/// Free-field scene: one point source moving piecewise-linearly between
/// knots, observed by a (possibly moving) microphone array.
struct SceneSpec {
  MicArrayGeometry geometry;
  std::vector<SourceKnot> trajectory;
  SourceKind source = SourceKind::kWhiteNoise;
  std::filesystem::path source_file;
  double source_std = 0.3;              // RMS of the dry source before 1/r spreading
  std::optional<double> snr_db = 30.0;  // nullopt renders without noise
  double back_attenuation = 1.0;        // gain while the source is behind the array (local y < 0)
  double speed_of_sound = kSpeedOfSound;
  double duration = 5.0;                // s
  double sample_rate = 48000.0;
  double truth_rate = 10.0;             // Hz
  std::uint64_t seed = 1;

  void validate() const;
};

struct SceneOutput {
  AudioClip audio;
  GroundTruth truth;  // world frame, sampled at truth_rate
};

/// Source position at time t by linear interpolation between knots (held
/// constant outside the knot span).
Vec3 source_position(const SceneSpec& spec, double t);

/// The dry source signal at the spec's sample rate together with the
/// activity intervals of speech-like sources.
struct DrySource {
  Eigen::VectorXd samples;
  std::vector<std::pair<double, double>> active_intervals;  // [begin, end) seconds
};
DrySource make_source(const SceneSpec& spec);

/// Renders every microphone as
///   gain(t) * s(t - d_i(t) / c) / max(d_i(t), 0.1) + noise
/// with s(tau) = 0 for tau < 0, the fractional delay realized by a 31-tap
/// Hann-windowed sinc, and white Gaussian noise scaled against the loudest
/// channel's RMS.
SceneOutput render(const SceneSpec& spec);

SceneSpec scene_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const SceneSpec& spec);
SceneSpec load_scene(const std::filesystem::path& path);

/// Writes audio.wav, truth.csv, activity.csv and geometry.json into `dir`.
void write_scene(const SceneOutput& out, const SceneSpec& spec, const std::filesystem::path& dir);

}  // namespace gcftrack
