#include <gcftrack/scene_sim.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace gcftrack {
namespace {

constexpr int kHalfTaps = 15;           // 31 taps
constexpr double kWindowHalfWidth = 16;  // Hann support in samples
constexpr double kMinDistance = 0.1;
constexpr double kPlausibleExtent = 100.0;

// Hann-windowed sinc interpolation of `s` at fractional sample position x.
// sin(pi (f - k)) = (-1)^k sin(pi f) so one sine covers all taps.
class SincInterpolator {
 public:
  SincInterpolator() {
    for (int k = -kHalfTaps; k <= kHalfTaps; ++k) {
      const double a = std::numbers::pi * k / kWindowHalfWidth;
      cos_k_[static_cast<size_t>(k + kHalfTaps)] = std::cos(a);
      sin_k_[static_cast<size_t>(k + kHalfTaps)] = std::sin(a);
    }
  }

  double operator()(const Eigen::VectorXd& s, double x) const {
    const double base = std::floor(x);
    const auto i0 = static_cast<Index>(base);
    const double frac = x - base;
    if (frac == 0.0) return i0 >= 0 && i0 < s.size() ? s(i0) : 0.0;
    const double sin_pf = std::sin(std::numbers::pi * frac);
    const double cw = std::cos(std::numbers::pi * frac / kWindowHalfWidth);
    const double sw = std::sin(std::numbers::pi * frac / kWindowHalfWidth);
    double acc = 0.0;
    for (int k = -kHalfTaps; k <= kHalfTaps; ++k) {
      const Index i = i0 + k;
      if (i < 0 || i >= s.size()) continue;
      const auto idx = static_cast<size_t>(k + kHalfTaps);
      const double u = frac - k;
      const double sinc = ((k & 1) ? -sin_pf : sin_pf) / (std::numbers::pi * u);
      // cos(pi u / W) = cos(pi f / W) cos(pi k / W) + sin(pi f / W) sin(pi k / W)
      const double window = 0.5 * (1.0 + cw * cos_k_[idx] + sw * sin_k_[idx]);
      acc += s(i) * sinc * window;
    }
    return acc;
  }

 private:
  std::array<double, 2 * kHalfTaps + 1> cos_k_{};
  std::array<double, 2 * kHalfTaps + 1> sin_k_{};
};

bool is_active(const DrySource& src, double t) {
  return std::any_of(src.active_intervals.begin(), src.active_intervals.end(),
                     [t](const auto& iv) { return t >= iv.first && t < iv.second; });
}

std::string kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::kWhiteNoise:
      return "white_noise";
    case SourceKind::kSpeechLike:
      return "speech_like";
    case SourceKind::kFile:
      return "file";
  }
  return "white_noise";
}

}  // namespace

void SceneSpec::validate() const {
  geometry.validate();
  require(duration > 0.0, "scene: duration must be positive");
  require(sample_rate > 0.0 && truth_rate > 0.0, "scene: rates must be positive");
  require(speed_of_sound > 0.0, "scene: speed of sound must be positive");
  require(back_attenuation > 0.0 && back_attenuation <= 1.0, "scene: back attenuation must lie in (0, 1]");
  require(source_std > 0.0, "scene: source level must be positive");
  require(!trajectory.empty(), "scene: empty source trajectory");
  for (size_t i = 0; i < trajectory.size(); ++i) {
    require(trajectory[i].position.allFinite() &&
                trajectory[i].position.cwiseAbs().maxCoeff() <= kPlausibleExtent,
            "scene: source trajectory outside plausible bounds");
    if (i > 0) require(trajectory[i].time > trajectory[i - 1].time, "scene: knot times must increase");
  }
  if (trajectory.size() > 1) {
    require(trajectory.front().time <= 0.0 && trajectory.back().time >= duration,
            "scene: trajectory knots must cover [0, duration]");
  }
  if (source == SourceKind::kFile) require(!source_file.empty(), "scene: file source without a path");
}

Vec3 source_position(const SceneSpec& spec, double t) {
  const auto& k = spec.trajectory;
  if (t <= k.front().time) return k.front().position;
  if (t >= k.back().time) return k.back().position;
  auto it = std::upper_bound(k.begin(), k.end(), t, [](double v, const SourceKnot& s) { return v < s.time; });
  const SourceKnot& b = *it;
  const SourceKnot& a = *std::prev(it);
  const double w = (t - a.time) / (b.time - a.time);
  return a.position + w * (b.position - a.position);
}

DrySource make_source(const SceneSpec& spec) {
  const auto length = static_cast<Index>(std::ceil(spec.duration * spec.sample_rate)) + 1;
  DrySource src;
  src.samples = Eigen::VectorXd::Zero(length);
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  switch (spec.source) {
    case SourceKind::kWhiteNoise:
      for (Index n = 0; n < length; ++n) src.samples(n) = spec.source_std * normal(rng);
      src.active_intervals.emplace_back(0.0, spec.duration + 1.0);
      break;
    case SourceKind::kSpeechLike: {
      // Talk spurts with a 4 Hz raised-cosine envelope, separated by silence.
      std::uniform_real_distribution<double> spurt(0.8, 2.0);
      std::uniform_real_distribution<double> gap(0.2, 0.6);
      double t = 0.1;
      while (t < spec.duration) {
        const double end = std::min(t + spurt(rng), spec.duration + 1.0);
        src.active_intervals.emplace_back(t, end);
        t = end + gap(rng);
      }
      // sqrt(8/3) restores unit RMS under the raised-cosine envelope.
      const double scale = spec.source_std * std::sqrt(8.0 / 3.0);
      for (Index n = 0; n < length; ++n) {
        const double tn = static_cast<double>(n) / spec.sample_rate;
        const double noise = normal(rng);
        for (const auto& [b, e] : src.active_intervals) {
          if (tn >= b && tn < e) {
            const double env = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * 4.0 * (tn - b)));
            src.samples(n) = scale * env * noise;
            break;
          }
        }
      }
      break;
    }
    case SourceKind::kFile: {
      const AudioClip clip = load_audio(spec.source_file);
      require(std::abs(clip.sample_rate - spec.sample_rate) < 1e-9, "scene: source file sample rate differs");
      const Index n = std::min(length, clip.length());
      src.samples.head(n) = clip.samples.col(0).head(n);
      src.active_intervals.emplace_back(0.0, spec.duration + 1.0);
      break;
    }
  }
  return src;
}

SceneOutput render(const SceneSpec& spec) {
  spec.validate();
  const DrySource dry = make_source(spec);
  const auto length = static_cast<Index>(std::llround(spec.duration * spec.sample_rate));
  const Index mics = spec.geometry.mic_count();
  const SincInterpolator interp;

  SceneOutput out;
  out.audio.sample_rate = spec.sample_rate;
  out.audio.samples = Eigen::MatrixXd::Zero(length, mics);

  const bool moving_array = !spec.geometry.transforms.empty();
  Eigen::Matrix3Xd mic_world = spec.geometry.mics_at(0.0);
  for (Index n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) / spec.sample_rate;
    const Vec3 src = source_position(spec, t);
    const RigidTransform tr = spec.geometry.transform_at(t);
    if (moving_array) mic_world = spec.geometry.mics_at(t);
    const double gain = tr.to_local(src).y() < 0.0 ? spec.back_attenuation : 1.0;
    for (Index m = 0; m < mics; ++m) {
      const double d = (src - mic_world.col(m)).norm();
      const double emitted = t - d / spec.speed_of_sound;
      if (emitted < 0.0) continue;
      out.audio.samples(n, m) = gain * interp(dry.samples, emitted * spec.sample_rate) / std::max(d, kMinDistance);
    }
  }

  if (spec.snr_db) {
    const double loudest = (out.audio.samples.colwise().squaredNorm() / static_cast<double>(length)).maxCoeff();
    const double noise_std = std::sqrt(loudest) / std::pow(10.0, *spec.snr_db / 20.0);
    Rng rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
    std::normal_distribution<double> normal(0.0, noise_std);
    for (Index m = 0; m < mics; ++m)
      for (Index n = 0; n < length; ++n) out.audio.samples(n, m) += normal(rng);
  }

  const std::vector<double> ts = output_timestamps(spec.duration, spec.truth_rate);
  out.truth.trajectory = Trajectory::with_size(static_cast<Index>(ts.size()), CoordinateFrame::kWorld);
  for (size_t k = 0; k < ts.size(); ++k) {
    out.truth.trajectory.timestamps[k] = ts[k];
    out.truth.trajectory.positions.col(static_cast<Index>(k)) = source_position(spec, ts[k]);
    out.truth.active.push_back(is_active(dry, ts[k]));
  }
  return out;
}

SceneSpec scene_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  SceneSpec s;
  try {
    if (j.contains("geometry")) {
      s.geometry = geometry_from_json(j.at("geometry"));
    } else if (j.contains("geometry_file")) {
      s.geometry = load_geometry(base_dir / j.at("geometry_file").get<std::string>());
    } else {
      s.geometry = dicit_like_geometry();
    }
    for (const auto& row : j.at("trajectory")) {
      require(row.size() == 4, "scene: trajectory rows must be [t, x, y, z]");
      s.trajectory.push_back({row[0].get<double>(), Vec3(row[1].get<double>(), row[2].get<double>(), row[3].get<double>())});
    }
    if (j.contains("signal")) {
      const auto& sig = j.at("signal");
      const std::string kind = sig.is_string() ? sig.get<std::string>() : sig.at("kind").get<std::string>();
      if (kind == "white_noise") {
        s.source = SourceKind::kWhiteNoise;
      } else if (kind == "speech_like") {
        s.source = SourceKind::kSpeechLike;
      } else if (kind == "file") {
        s.source = SourceKind::kFile;
        s.source_file = base_dir / sig.at("path").get<std::string>();
      } else {
        throw InputError("scene: unknown signal kind " + kind);
      }
    }
    s.source_std = j.value("source_std", s.source_std);
    if (j.contains("snr_db")) {
      s.snr_db = j.at("snr_db").is_null() ? std::nullopt : std::optional<double>(j.at("snr_db").get<double>());
    }
    s.back_attenuation = j.value("back_attenuation", s.back_attenuation);
    s.speed_of_sound = j.value("speed_of_sound", s.speed_of_sound);
    s.duration = j.at("duration_s").get<double>();
    s.sample_rate = j.value("sample_rate", s.sample_rate);
    s.truth_rate = j.value("truth_rate_hz", s.truth_rate);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed scene JSON: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const SceneSpec& spec) {
  nlohmann::json j;
  j["geometry"] = to_json(spec.geometry);
  j["trajectory"] = nlohmann::json::array();
  for (const SourceKnot& k : spec.trajectory) {
    j["trajectory"].push_back({k.time, k.position.x(), k.position.y(), k.position.z()});
  }
  if (spec.source == SourceKind::kFile) {
    j["signal"] = {{"kind", "file"}, {"path", spec.source_file.string()}};
  } else {
    j["signal"] = kind_name(spec.source);
  }
  j["source_std"] = spec.source_std;
  j["snr_db"] = spec.snr_db ? nlohmann::json(*spec.snr_db) : nlohmann::json(nullptr);
  j["back_attenuation"] = spec.back_attenuation;
  j["speed_of_sound"] = spec.speed_of_sound;
  j["duration_s"] = spec.duration;
  j["sample_rate"] = spec.sample_rate;
  j["truth_rate_hz"] = spec.truth_rate;
  j["seed"] = spec.seed;
  return j;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scene file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("scene file is not valid JSON: " + std::string(e.what()));
  }
  return scene_from_json(j, path.parent_path());
}

void write_scene(const SceneOutput& out, const SceneSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_wav(dir / "audio.wav", out.audio, SampleFormat::kFloat32);
  save_ground_truth_csv(dir / "truth.csv", out.truth);
  save_activity_csv(dir / "activity.csv", out.truth.trajectory.timestamps, out.truth.active);
  save_geometry(dir / "geometry.json", spec.geometry);
}

}  // namespace gcftrack
