#pragma once

#include <gcftrack/audio_io.hpp>
#include <gcftrack/common.hpp>
#include <gcftrack/front_back.hpp>
#include <gcftrack/gcc_phat.hpp>
#include <gcftrack/gcf_map.hpp>
#include <gcftrack/geometry.hpp>
#include <gcftrack/smooth_eval.hpp>
#include <gcftrack/tracker.hpp>
#include <gcftrack/trajectory.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gcftrack {

enum class Mode { kStatic, kTracking };

struct GridSpec {
  Vec3 lo{-3.0, -0.1, 1.3};
  Vec3 hi{3.0, 4.0, 1.75};
  double step = 0.02;

  Grid3D grid() const { return {lo, hi, step}; }
};

struct PipelineConfig {
  Mode mode = Mode::kTracking;
  Index window_length = 4096;
  WindowKind window_kind = WindowKind::kBlackman;
  double output_rate = 10.0;  // Hz
  GridSpec grid;
  std::vector<MicPair> pairs;  // empty: use the geometry's pair list
  CoordinateFrame grid_frame = CoordinateFrame::kArrayLocal;
  double speed_of_sound = kSpeedOfSound;
  double phat_epsilon = kPhatEpsilon;
  TrackerConfig tracker;
  bool front_back = true;
  double turning_margin_fraction = 0.1;
  double kappa = 1.9;
  bool smoothing = true;
  double v_max = 2.0;  // m/s
  Index max_smoothing_iterations = 15;
  double boundary_trim = 0.0;  // s, excluded from evaluation at both ends

  /// 2^14-sample windows for static sources, 2^12 for tracking.
  static PipelineConfig defaults(Mode mode);
  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

/// Everything the tracking pass needs from the audio: per-frame map peaks
/// and the per-pair correlations they came from.
struct PeakCache {
  double sample_rate = 0.0;
  std::vector<GcfFrame> peaks;                     // no maps
  std::vector<std::vector<GccCorrelation>> gcc;    // [frame][pair]
  std::vector<double> dropped;                     // timestamps without a full window
  double gcf_seconds = 0.0;                        // lookup build + map evaluation, summed over frames

  /// Largest frame peak over the recording; 0 for an empty cache.
  double gamma() const;
};

/// Pass 1: frames -> GCC-PHAT per pair -> GCF peak, parallel over frames.
/// Results do not depend on `threads`.
PeakCache compute_peaks(const PipelineConfig& config, const AudioClip& clip, const MicArrayGeometry& geom,
                        int threads = 1);

/// Binary cache; doubles are stored verbatim so a reload is bit-exact.
void save_peak_cache(const std::filesystem::path& path, const PeakCache& cache);
PeakCache load_peak_cache(const std::filesystem::path& path);

/// Pair list in force (config override or geometry).
std::vector<MicPair> effective_pairs(const PipelineConfig& config, const MicArrayGeometry& geom);

/// Microphone positions in the grid's frame at time t.
Eigen::Matrix3Xd mics_in_grid_frame(const PipelineConfig& config, const MicArrayGeometry& geom, double t);

/// Full map of one cached frame.
GcfFrame recompute_map(const PipelineConfig& config, const MicArrayGeometry& geom, const PeakCache& cache,
                       Index frame_index, int threads = 1);

struct StaticResult {
  Vec3 position = Vec3::Zero();
  Angles angles;
  PeakCache cache;
  std::vector<std::string> warnings;
  bool degenerate = false;
};

StaticResult run_static(const PipelineConfig& config, const AudioClip& clip, const MicArrayGeometry& geom,
                        int threads = 1);
/// Mode of the cached peaks, for callers that already ran pass 1.
StaticResult run_static(const PipelineConfig& config, PeakCache cache, const MicArrayGeometry& geom);

struct TrackingResult {
  Trajectory raw;        // tracker output
  Trajectory corrected;  // after front-back correction
  Trajectory trajectory; // final (smoothed) output
  TrackResult tracker;
  std::optional<TurningDecision> turning;
  std::optional<SmoothResult> smoothing;
  std::optional<EvalReport> report;
  double gamma = 0.0;
  std::vector<std::string> warnings;
  bool degenerate = false;
};

/// Pass 2 over cached peaks: track, correct front-back ambiguity (planar
/// arrays only), smooth, and evaluate when ground truth is given.
TrackingResult run_tracking(const PipelineConfig& config, const PeakCache& cache, const MicArrayGeometry& geom,
                            const GroundTruth* truth = nullptr);

TrackingResult run_tracking(const PipelineConfig& config, const AudioClip& clip, const MicArrayGeometry& geom,
                            const GroundTruth* truth = nullptr, int threads = 1);

}  // namespace gcftrack
