#include <gcftrack/pipeline.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstring>
#include <fstream>
#include <thread>

namespace gcftrack {
namespace {

constexpr double kSilentGamma = 1e-12;

std::string mode_name(Mode m) { return m == Mode::kStatic ? "static" : "tracking"; }
Mode parse_mode(const std::string& s) {
  if (s == "static") return Mode::kStatic;
  if (s == "tracking") return Mode::kTracking;
  throw InputError("unknown mode: " + s);
}
std::string frame_name(CoordinateFrame f) { return f == CoordinateFrame::kWorld ? "world" : "array_local"; }
CoordinateFrame parse_frame(const std::string& s) {
  if (s == "world") return CoordinateFrame::kWorld;
  if (s == "array_local") return CoordinateFrame::kArrayLocal;
  throw InputError("unknown coordinate frame: " + s);
}

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec_from(const nlohmann::json& j) {
  require(j.is_array() && j.size() == 3, "expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

bool moving_grid(const PipelineConfig& config, const MicArrayGeometry& geom) {
  return config.grid_frame == CoordinateFrame::kWorld && !geom.transforms.empty();
}

// Binary helpers; values are written in host byte order.
template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InputError("truncated peak cache");
  return v;
}
constexpr char kCacheMagic[8] = {'G', 'C', 'F', 'P', 'E', 'A', 'K', '1'};

}  // namespace

PipelineConfig PipelineConfig::defaults(Mode mode) {
  PipelineConfig c;
  c.mode = mode;
  c.window_length = mode == Mode::kStatic ? 16384 : 4096;
  return c;
}

void PipelineConfig::validate() const {
  require(is_power_of_two(window_length) && window_length >= 16, "config: window length must be a power of two");
  require(output_rate > 0.0, "config: output rate must be positive");
  require(grid.step > 0.0 && (grid.hi.array() > grid.lo.array()).all(), "config: invalid grid");
  require(speed_of_sound > 0.0 && phat_epsilon > 0.0, "config: speed of sound and epsilon must be positive");
  tracker.validate();
  require(turning_margin_fraction > 0.0 && turning_margin_fraction < 0.5, "config: turning margin must lie in (0, 0.5)");
  require(kappa > 0.0 && v_max > 0.0, "config: kappa and v_max must be positive");
  require(max_smoothing_iterations >= 0 && boundary_trim >= 0.0, "config: negative smoothing cap or trim");
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const MicPair& p : c.pairs) pairs.push_back({p.first, p.second});
  return {
      {"mode", mode_name(c.mode)},
      {"window_length", c.window_length},
      {"window_kind", to_string(c.window_kind)},
      {"output_rate_hz", c.output_rate},
      {"grid", {{"lo", vec_json(c.grid.lo)}, {"hi", vec_json(c.grid.hi)}, {"step", c.grid.step}}},
      {"pairs", pairs},
      {"grid_frame", frame_name(c.grid_frame)},
      {"speed_of_sound", c.speed_of_sound},
      {"phat_epsilon", c.phat_epsilon},
      {"tracker",
       {{"particles", c.tracker.particles},
        {"propagation_variance", vec_json(c.tracker.propagation_variance)},
        {"likelihood_std", c.tracker.likelihood_std},
        {"alpha", c.tracker.alpha},
        {"beta", c.tracker.beta},
        {"seed", c.tracker.seed}}},
      {"front_back", c.front_back},
      {"turning_margin_fraction", c.turning_margin_fraction},
      {"kappa", c.kappa},
      {"smoothing", c.smoothing},
      {"v_max", c.v_max},
      {"max_smoothing_iterations", c.max_smoothing_iterations},
      {"boundary_trim_s", c.boundary_trim},
  };
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  try {
    const Mode mode = j.contains("mode") ? parse_mode(j.at("mode").get<std::string>()) : Mode::kTracking;
    PipelineConfig c = PipelineConfig::defaults(mode);
    c.window_length = j.value("window_length", c.window_length);
    if (j.contains("window_kind")) c.window_kind = parse_window_kind(j.at("window_kind").get<std::string>());
    c.output_rate = j.value("output_rate_hz", c.output_rate);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.contains("lo")) c.grid.lo = vec_from(g.at("lo"));
      if (g.contains("hi")) c.grid.hi = vec_from(g.at("hi"));
      c.grid.step = g.value("step", c.grid.step);
    }
    if (j.contains("pairs")) {
      for (const auto& p : j.at("pairs")) c.pairs.push_back({p.at(0).get<Index>(), p.at(1).get<Index>()});
    }
    if (j.contains("grid_frame")) c.grid_frame = parse_frame(j.at("grid_frame").get<std::string>());
    c.speed_of_sound = j.value("speed_of_sound", c.speed_of_sound);
    c.phat_epsilon = j.value("phat_epsilon", c.phat_epsilon);
    if (j.contains("tracker")) {
      const auto& t = j.at("tracker");
      c.tracker.particles = t.value("particles", c.tracker.particles);
      if (t.contains("propagation_variance")) c.tracker.propagation_variance = vec_from(t.at("propagation_variance"));
      c.tracker.likelihood_std = t.value("likelihood_std", c.tracker.likelihood_std);
      c.tracker.alpha = t.value("alpha", c.tracker.alpha);
      c.tracker.beta = t.value("beta", c.tracker.beta);
      c.tracker.seed = t.value("seed", c.tracker.seed);
    }
    c.front_back = j.value("front_back", c.front_back);
    c.turning_margin_fraction = j.value("turning_margin_fraction", c.turning_margin_fraction);
    c.kappa = j.value("kappa", c.kappa);
    c.smoothing = j.value("smoothing", c.smoothing);
    c.v_max = j.value("v_max", c.v_max);
    c.max_smoothing_iterations = j.value("max_smoothing_iterations", c.max_smoothing_iterations);
    c.boundary_trim = j.value("boundary_trim_s", c.boundary_trim);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed config JSON: ") + e.what());
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config file is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const PipelineConfig& config) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_json(config).dump(2) << '\n';
}

double PeakCache::gamma() const {
  double g = 0.0;
  for (const GcfFrame& f : peaks) g = std::max(g, f.peak_value);
  return g;
}

std::vector<MicPair> effective_pairs(const PipelineConfig& config, const MicArrayGeometry& geom) {
  std::vector<MicPair> pairs = config.pairs.empty() ? geom.pairs : config.pairs;
  MicArrayGeometry check = geom;
  check.pairs = pairs;
  check.validate();
  return pairs;
}

Eigen::Matrix3Xd mics_in_grid_frame(const PipelineConfig& config, const MicArrayGeometry& geom, double t) {
  return moving_grid(config, geom) ? geom.mics_at(t) : geom.mics;
}

PeakCache compute_peaks(const PipelineConfig& config, const AudioClip& clip, const MicArrayGeometry& geom,
                        int threads) {
  config.validate();
  const std::vector<MicPair> pairs = effective_pairs(config, geom);
  require(clip.channel_count() >= geom.mic_count(), "audio has fewer channels than the geometry has microphones");
  require(config.window_length <= clip.length(), "window is longer than the clip");

  const Grid3D grid = config.grid.grid();
  const double fs = clip.sample_rate;
  std::vector<Index> max_lags;
  for (const MicPair& p : pairs) {
    const double d = (geom.mics.col(p.first) - geom.mics.col(p.second)).norm();
    max_lags.push_back(max_lag_for(d, fs, config.speed_of_sound));
    require(max_lags.back() < config.window_length / 2, "pair spacing exceeds the window's lag range");
  }

  PeakCache cache;
  cache.sample_rate = fs;
  std::vector<std::pair<double, Index>> frames;
  for (const double t : output_timestamps(clip.duration(), config.output_rate)) {
    if (const auto start = window_start(t, fs, config.window_length, clip.length())) {
      frames.emplace_back(t, *start);
    } else {
      cache.dropped.push_back(t);
    }
  }
  require(!frames.empty(), "no output timestamp has a full window inside the clip");

  std::optional<TdoaLookup> shared_lookup;
  if (!moving_grid(config, geom)) {
    const auto t0 = std::chrono::steady_clock::now();
    shared_lookup = build_tdoa_lookup(grid, geom.mics, pairs, max_lags, fs, config.speed_of_sound);
    cache.gcf_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  const Eigen::VectorXd window = make_window(config.window_kind, config.window_length);
  cache.peaks.resize(frames.size());
  cache.gcc.resize(frames.size());
  std::vector<double> gcf_time(frames.size(), 0.0);

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < frames.size(); i = next++) {
      const auto [t, start] = frames[i];
      const Eigen::MatrixXcd spectra = transform_window(clip, start, window);
      std::vector<GccCorrelation> gcc;
      gcc.reserve(pairs.size());
      for (size_t m = 0; m < pairs.size(); ++m) {
        // Second microphone as reference: positive lag when the first hears later.
        gcc.push_back(gcc_phat(spectra.col(pairs[m].second), spectra.col(pairs[m].first), max_lags[m],
                               config.phat_epsilon));
      }
      const auto t0 = std::chrono::steady_clock::now();
      if (shared_lookup) {
        cache.peaks[i] = gcf_frame(gcc, *shared_lookup, grid, t);
      } else {
        const TdoaLookup lookup =
            build_tdoa_lookup(grid, geom.mics_at(t), pairs, max_lags, fs, config.speed_of_sound);
        cache.peaks[i] = gcf_frame(gcc, lookup, grid, t);
      }
      gcf_time[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      cache.gcc[i] = std::move(gcc);
    }
  };
  const int workers = std::clamp<int>(threads, 1, static_cast<int>(frames.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const double s : gcf_time) cache.gcf_seconds += s;
  return cache;
}

void save_peak_cache(const std::filesystem::path& path, const PeakCache& cache) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(kCacheMagic, sizeof kCacheMagic);
  put<double>(out, cache.sample_rate);
  put<std::uint64_t>(out, cache.dropped.size());
  for (const double t : cache.dropped) put<double>(out, t);
  put<std::uint64_t>(out, cache.peaks.size());
  put<std::uint64_t>(out, cache.gcc.empty() ? 0 : cache.gcc.front().size());
  for (size_t i = 0; i < cache.peaks.size(); ++i) {
    const GcfFrame& f = cache.peaks[i];
    put<double>(out, f.timestamp);
    put<std::int64_t>(out, f.peak_index);
    for (int a = 0; a < 3; ++a) put<double>(out, f.peak_position(a));
    put<double>(out, f.peak_value);
    for (const GccCorrelation& c : cache.gcc[i]) {
      put<std::int64_t>(out, c.max_lag);
      out.write(reinterpret_cast<const char*>(c.values.data()),
                static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(c.values.size())));
    }
  }
  if (!out) throw InputError("failed writing " + path.string());
}

PeakCache load_peak_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open peak cache: " + path.string());
  char magic[sizeof kCacheMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) throw InputError("not a peak cache: " + path.string());
  PeakCache cache;
  cache.sample_rate = get<double>(in);
  const auto dropped = get<std::uint64_t>(in);
  for (std::uint64_t k = 0; k < dropped; ++k) cache.dropped.push_back(get<double>(in));
  const auto frames = get<std::uint64_t>(in);
  const auto pairs = get<std::uint64_t>(in);
  cache.peaks.resize(frames);
  cache.gcc.resize(frames);
  for (std::uint64_t i = 0; i < frames; ++i) {
    GcfFrame& f = cache.peaks[i];
    f.timestamp = get<double>(in);
    f.peak_index = get<std::int64_t>(in);
    for (int a = 0; a < 3; ++a) f.peak_position(a) = get<double>(in);
    f.peak_value = get<double>(in);
    for (std::uint64_t m = 0; m < pairs; ++m) {
      GccCorrelation c;
      c.max_lag = get<std::int64_t>(in);
      if (c.max_lag < 0 || c.max_lag > (1 << 24)) throw InputError("corrupt peak cache");
      c.values.resize(2 * c.max_lag + 1);
      in.read(reinterpret_cast<char*>(c.values.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(c.values.size())));
      if (!in) throw InputError("truncated peak cache");
      cache.gcc[i].push_back(std::move(c));
    }
  }
  return cache;
}

GcfFrame recompute_map(const PipelineConfig& config, const MicArrayGeometry& geom, const PeakCache& cache,
                       Index frame_index, int threads) {
  require(frame_index >= 0 && frame_index < static_cast<Index>(cache.peaks.size()), "frame index out of range");
  const std::vector<MicPair> pairs = effective_pairs(config, geom);
  const auto& gcc = cache.gcc[static_cast<size_t>(frame_index)];
  require(gcc.size() == pairs.size(), "cache pair count differs from the configured pairs");
  std::vector<Index> max_lags;
  for (const GccCorrelation& c : gcc) max_lags.push_back(c.max_lag);
  const double t = cache.peaks[static_cast<size_t>(frame_index)].timestamp;
  const Grid3D grid = config.grid.grid();
  const TdoaLookup lookup = build_tdoa_lookup(grid, mics_in_grid_frame(config, geom, t), pairs, max_lags,
                                              cache.sample_rate, config.speed_of_sound);
  return gcf_frame(gcc, lookup, grid, t, {.keep_map = true, .threads = threads});
}

StaticResult run_static(const PipelineConfig& config, PeakCache cache, const MicArrayGeometry& geom) {
  require(!cache.peaks.empty(), "run_static: no frames");
  StaticResult result;
  result.position = static_estimate(cache.peaks);
  if (cache.gamma() <= kSilentGamma) {
    result.degenerate = true;
    result.warnings.push_back("all frames are silent (maximum GCF peak is zero); the estimate is arbitrary");
  }
  Vec3 local = result.position;
  if (moving_grid(config, geom)) local = geom.transform_at(cache.peaks.front().timestamp).to_local(local);
  const Vec3 direction = local - geom.reference;
  if (direction.norm() > 0.0) result.angles = to_angles(direction);
  result.cache = std::move(cache);
  return result;
}

StaticResult run_static(const PipelineConfig& config, const AudioClip& clip, const MicArrayGeometry& geom,
                        int threads) {
  return run_static(config, compute_peaks(config, clip, geom, threads), geom);
}

TrackingResult run_tracking(const PipelineConfig& config, const PeakCache& cache, const MicArrayGeometry& geom,
                            const GroundTruth* truth) {
  config.validate();
  require(!cache.peaks.empty(), "run_tracking: no frames");
  const std::vector<MicPair> pairs = effective_pairs(config, geom);
  const Grid3D grid = config.grid.grid();
  TrackingResult result;

  result.gamma = cache.gamma();
  double gamma = result.gamma;
  if (!(gamma > kSilentGamma)) {
    result.degenerate = true;
    result.warnings.push_back("all frames are silent (gamma = 0); particles only diffuse");
    gamma = 1.0;
  }

  const bool moving = moving_grid(config, geom);
  std::vector<Eigen::Matrix3Xd> frame_mics;
  if (moving) {
    for (const GcfFrame& f : cache.peaks) frame_mics.push_back(geom.mics_at(f.timestamp));
  }
  const FrameMapAccess map_value = [&](Index frame, Index point) {
    const Eigen::Matrix3Xd& mics = moving ? frame_mics[static_cast<size_t>(frame)] : geom.mics;
    return gcf_value(cache.gcc[static_cast<size_t>(frame)], mics, pairs, grid.point(point), cache.sample_rate,
                     config.speed_of_sound);
  };

  result.tracker = track(cache.peaks, map_value, grid, gamma, config.tracker);
  result.tracker.trajectory.frame = config.grid_frame;
  if (result.tracker.degenerate_frames > 0) {
    result.warnings.push_back(std::to_string(result.tracker.degenerate_frames) +
                              " frame(s) had all-zero likelihoods and fell back to uniform weights");
  }
  result.raw = result.tracker.trajectory;

  Trajectory local = to_frame(result.raw, CoordinateFrame::kArrayLocal, geom);
  const auto frame_count = static_cast<Index>(cache.peaks.size());
  if (config.front_back && geom.planar) {
    const Index t0 = default_turning_margin(frame_count, config.turning_margin_fraction);
    if (2 * t0 < frame_count) {
      std::vector<double> peaks;
      for (const GcfFrame& f : cache.peaks) peaks.push_back(f.peak_value);
      result.turning = detect_turning(peaks, t0, config.kappa);
      local = apply_correction(local, *result.turning);
    } else {
      result.warnings.push_back("too few frames for front-back detection");
    }
  }
  result.corrected = to_frame(local, config.grid_frame, geom);

  result.trajectory = result.corrected;
  if (config.smoothing && result.corrected.size() >= 4) {
    result.smoothing = smooth_outliers(result.corrected, config.v_max, config.max_smoothing_iterations);
    result.trajectory = result.smoothing->trajectory;
    if (!result.smoothing->converged) {
      result.warnings.push_back("outlier smoothing stopped at the iteration cap with speeds above v_max");
    }
  }

  if (truth) {
    const Trajectory truth_local = to_frame(truth->trajectory, CoordinateFrame::kArrayLocal, geom);
    std::vector<bool> active = truth->active;
    if (!truth_local.empty()) {
      const double lo = truth_local.timestamps.front() + config.boundary_trim;
      const double hi = truth_local.timestamps.back() - config.boundary_trim;
      for (size_t k = 0; k < active.size(); ++k) {
        if (truth_local.timestamps[k] < lo || truth_local.timestamps[k] > hi) active[k] = false;
      }
    }
    result.report = evaluate(to_frame(result.trajectory, CoordinateFrame::kArrayLocal, geom), truth_local, active,
                             geom.reference);
  }
  return result;
}

TrackingResult run_tracking(const PipelineConfig& config, const AudioClip& clip, const MicArrayGeometry& geom,
                            const GroundTruth* truth, int threads) {
  return run_tracking(config, compute_peaks(config, clip, geom, threads), geom, truth);
}

}  // namespace gcftrack
