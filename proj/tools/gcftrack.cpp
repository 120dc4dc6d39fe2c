// gcftrack: localize and track a sound source from microphone-array audio.
//
//   gcftrack localize --audio a.wav --geometry g.json [--config c.json] --out est.json
//   gcftrack track    --audio a.wav --geometry g.json [--config c.json] --out traj.csv
//                     [--truth gt.csv --activity act.csv --report report.json]
//   gcftrack simulate --scene scene.json --out-dir dir/
//   gcftrack dump-map --frame-index k --z 1.5 --out slice.csv (--cache p.bin | --audio a.wav) --geometry g.json
//   gcftrack default-config --mode tracking
//
// Exit codes: 0 success, 2 bad input, 3 degenerate result.

#include <gcftrack/pipeline.hpp>
#include <gcftrack/scene_sim.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

using namespace gcftrack;

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitDegenerate = 3;

struct CommonArgs {
  std::string audio;
  std::string geometry;
  std::string config;
  std::string cache;
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

PipelineConfig resolve_config(const CommonArgs& a, Mode mode) {
  PipelineConfig c = a.config.empty() ? PipelineConfig::defaults(mode) : load_config(a.config);
  c.mode = mode;
  if (a.seed) c.tracker.seed = *a.seed;
  return c;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

PeakCache peaks_for(const CommonArgs& a, const PipelineConfig& config, const MicArrayGeometry& geom) {
  if (!a.cache.empty() && a.audio.empty()) return load_peak_cache(a.cache);
  if (a.audio.empty()) throw InputError("either --audio or --cache is required");
  const AudioClip clip = load_audio(a.audio);
  PeakCache cache = compute_peaks(config, clip, geom, a.threads);
  if (!cache.dropped.empty()) {
    std::cerr << "note: " << cache.dropped.size() << " timestamp(s) dropped at the clip edges\n";
  }
  if (!a.cache.empty()) save_peak_cache(a.cache, cache);
  return cache;
}

int cmd_localize(const CommonArgs& a, const std::string& out_path) {
  const PipelineConfig config = resolve_config(a, Mode::kStatic);
  const MicArrayGeometry geom = load_geometry(a.geometry);
  StaticResult r = run_static(config, peaks_for(a, config, geom), geom);
  nlohmann::json peaks = nlohmann::json::array();
  for (const GcfFrame& f : r.cache.peaks) {
    peaks.push_back({{"timestamp_s", f.timestamp},
                     {"position_m", {f.peak_position.x(), f.peak_position.y(), f.peak_position.z()}},
                     {"value", f.peak_value}});
  }
  const nlohmann::json out = {{"position_m", {r.position.x(), r.position.y(), r.position.z()}},
                              {"azimuth_deg", r.angles.azimuth},
                              {"elevation_deg", r.angles.elevation},
                              {"gamma", r.cache.gamma()},
                              {"warnings", r.warnings},
                              {"frames", peaks}};
  std::ofstream f(out_path);
  if (!f) throw InputError("cannot write " + out_path);
  f << out.dump(2) << '\n';
  std::cout << std::fixed << std::setprecision(3) << "position  (" << r.position.x() << ", " << r.position.y()
            << ", " << r.position.z() << ") m\nazimuth   " << r.angles.azimuth << " deg\nelevation "
            << r.angles.elevation << " deg\n";
  print_warnings(r.warnings);
  return r.degenerate ? kExitDegenerate : 0;
}

int cmd_track(const CommonArgs& a, const std::string& out_path, const std::string& truth_path,
              const std::string& activity_path, const std::string& report_path, const std::string& ratios_path) {
  const PipelineConfig config = resolve_config(a, Mode::kTracking);
  const MicArrayGeometry geom = load_geometry(a.geometry);
  const PeakCache cache = peaks_for(a, config, geom);

  std::optional<GroundTruth> truth;
  if (!truth_path.empty()) {
    truth = load_ground_truth_csv(truth_path);
    if (!activity_path.empty()) apply_activity_csv(activity_path, *truth);
  }
  const TrackingResult r = run_tracking(config, cache, geom, truth ? &*truth : nullptr);
  save_trajectory_csv(out_path, r.trajectory);

  if (r.turning) {
    const char* kind = r.turning->kind == TurningKind::kFrontToBack   ? "front_to_back"
                       : r.turning->kind == TurningKind::kBackToFront ? "back_to_front"
                                                                      : "none";
    std::cout << "front-back: " << kind;
    if (r.turning->frame) std::cout << " at " << cache.peaks[static_cast<size_t>(*r.turning->frame)].timestamp << " s";
    std::cout << '\n';
    if (!ratios_path.empty()) {
      std::ofstream f(ratios_path);
      if (!f) throw InputError("cannot write " + ratios_path);
      f << "timestamp_s,peak,ratio_front_back,ratio_back_front\n" << std::fixed << std::setprecision(6);
      for (size_t k = 0; k < cache.peaks.size(); ++k) {
        f << cache.peaks[k].timestamp << ',' << cache.peaks[k].peak_value << ','
          << r.turning->ratio_front_back(static_cast<Index>(k)) << ','
          << r.turning->ratio_back_front(static_cast<Index>(k)) << '\n';
      }
    }
  }
  if (r.report) {
    std::cout << "evaluation:\n";
    print_report(std::cout, *r.report);
    if (!report_path.empty()) {
      std::ofstream f(report_path);
      if (!f) throw InputError("cannot write " + report_path);
      f << to_json(*r.report).dump(2) << '\n';
    }
  }
  print_warnings(r.warnings);
  return r.degenerate ? kExitDegenerate : 0;
}

int cmd_simulate(const std::string& scene_path, const std::string& out_dir) {
  const SceneSpec spec = load_scene(scene_path);
  const SceneOutput out = render(spec);
  write_scene(out, spec, out_dir);
  std::cout << "wrote " << out.audio.channel_count() << " channels, " << out.audio.duration() << " s to " << out_dir
            << '\n';
  return 0;
}

int cmd_dump_map(const CommonArgs& a, Index frame_index, double z, const std::string& out_path,
                 const std::string& mode) {
  const PipelineConfig config = resolve_config(a, mode == "static" ? Mode::kStatic : Mode::kTracking);
  const MicArrayGeometry geom = load_geometry(a.geometry);
  const PeakCache cache = peaks_for(a, config, geom);
  const GcfFrame frame = recompute_map(config, geom, cache, frame_index, a.threads);
  std::ofstream f(out_path);
  if (!f) throw InputError("cannot write " + out_path);
  write_map_slice(f, config.grid.grid(), *frame.map, z);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GCF-based sound source localization and particle-filter tracking"};
  app.require_subcommand(1);

  CommonArgs common;
  auto add_common = [&](CLI::App* sub, bool audio_required) {
    auto* audio = sub->add_option("--audio", common.audio, "multichannel WAV file")->check(CLI::ExistingFile);
    if (audio_required) audio->required();
    sub->add_option("--geometry", common.geometry, "microphone geometry JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--config", common.config, "pipeline configuration JSON")->check(CLI::ExistingFile);
    sub->add_option("--threads", common.threads, "worker threads for pass 1")->check(CLI::Range(1, 1024));
  };

  std::string out_path;
  auto* localize = app.add_subcommand("localize", "static source position (mode of per-frame GCF peaks)");
  add_common(localize, false);
  localize->add_option("--cache", common.cache, "peak cache to write (or read when --audio is absent)");
  localize->add_option("--out", out_path, "estimate JSON")->required();

  std::string truth, activity, report, ratios;
  std::uint64_t seed = 0;
  auto* trk = app.add_subcommand("track", "particle-filter trajectory of a moving source");
  add_common(trk, false);
  trk->add_option("--cache", common.cache, "peak cache to write (or read when --audio is absent)");
  trk->add_option("--out", out_path, "trajectory CSV")->required();
  trk->add_option("--truth", truth, "ground-truth CSV")->check(CLI::ExistingFile);
  trk->add_option("--activity", activity, "voice-activity CSV overriding the truth's flags")->check(CLI::ExistingFile);
  trk->add_option("--report", report, "evaluation report JSON");
  trk->add_option("--ratios", ratios, "front-back ratio curves CSV");
  auto* seed_opt = trk->add_option("--seed", seed, "particle filter seed");

  std::string scene, out_dir;
  auto* sim = app.add_subcommand("simulate", "render a synthetic free-field scene");
  sim->add_option("--scene", scene, "scene JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--out-dir", out_dir, "output directory")->required();

  Index frame_index = 0;
  double z = 1.5;
  std::string map_mode = "tracking";
  auto* dump = app.add_subcommand("dump-map", "write an x-y slice of one frame's GCF map");
  add_common(dump, false);
  dump->add_option("--cache", common.cache, "peak cache to read (or write when --audio is given)");
  dump->add_option("--frame-index", frame_index, "frame index")->required();
  dump->add_option("--z", z, "slice height in meters");
  dump->add_option("--mode", map_mode, "default-config mode")->check(CLI::IsMember({"static", "tracking"}));
  dump->add_option("--out", out_path, "slice CSV")->required();

  std::string default_mode = "tracking";
  auto* defaults = app.add_subcommand("default-config", "print the default configuration");
  defaults->add_option("--mode", default_mode, "static or tracking")->check(CLI::IsMember({"static", "tracking"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }

  try {
    if (seed_opt->count() > 0) common.seed = seed;
    if (localize->parsed()) return cmd_localize(common, out_path);
    if (trk->parsed()) return cmd_track(common, out_path, truth, activity, report, ratios);
    if (sim->parsed()) return cmd_simulate(scene, out_dir);
    if (dump->parsed()) return cmd_dump_map(common, frame_index, z, out_path, map_mode);
    if (defaults->parsed()) {
      std::cout << to_json(PipelineConfig::defaults(default_mode == "static" ? Mode::kStatic : Mode::kTracking)).dump(2)
                << '\n';
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const DegenerateError& e) {
    std::cerr << "degenerate: " << e.what() << '\n';
    return kExitDegenerate;
  }
  return 0;
}
