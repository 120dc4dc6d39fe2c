#include <gcftrack/audio_io.hpp>
#include <gcftrack/pipeline.hpp>

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gcftrack;
namespace fs = std::filesystem;

namespace {

const fs::path kData = GCFTRACK_DATA_DIR;

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "gcftrack_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + GCFTRACK_CLI + "\" " + args + " >\"" +
                          (work_dir() / "stdout.txt").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Tracking defaults on a coarser grid so the end-to-end runs stay quick.
fs::path quick_config(Mode mode) {
  PipelineConfig c = PipelineConfig::defaults(mode);
  c.grid.step = 0.05;
  const fs::path p = work_dir() / (mode == Mode::kStatic ? "static.json" : "tracking.json");
  save_config(p, c);
  return p;
}

}  // namespace

TEST_CASE("simulate then localize a static source") {
  const fs::path out = work_dir() / "static";
  REQUIRE(run("simulate --scene \"" + (kData / "scene_static.json").string() + "\" --out-dir \"" + out.string() + "\"") == 0);
  REQUIRE(fs::exists(out / "audio.wav"));
  const fs::path est = out / "est.json";
  REQUIRE(run("localize --audio \"" + (out / "audio.wav").string() + "\" --geometry \"" + (out / "geometry.json").string() +
              "\" --config \"" + quick_config(Mode::kStatic).string() + "\" --cache \"" + (out / "peaks.bin").string() +
              "\" --out \"" + est.string() + "\"") == 0);
  const auto j = nlohmann::json::parse(slurp(est));
  const Vec3 p(j["position_m"][0], j["position_m"][1], j["position_m"][2]);
  CHECK((p - Vec3(0.45, 1.8, 1.5)).norm() < 0.1);

  // Re-running from the cache alone gives the same estimate.
  const fs::path again = out / "again.json";
  REQUIRE(run("localize --cache \"" + (out / "peaks.bin").string() + "\" --geometry \"" + (out / "geometry.json").string() +
              "\" --config \"" + quick_config(Mode::kStatic).string() + "\" --out \"" + again.string() + "\"") == 0);
  CHECK(nlohmann::json::parse(slurp(again))["position_m"] == j["position_m"]);

  const fs::path slice = out / "slice.csv";
  REQUIRE(run("dump-map --cache \"" + (out / "peaks.bin").string() + "\" --geometry \"" + (out / "geometry.json").string() +
              "\" --config \"" + quick_config(Mode::kStatic).string() + "\" --frame-index 5 --z 1.5 --out \"" +
              slice.string() + "\"") == 0);
  CHECK(slurp(slice).rfind("x_m,y_m,value\n", 0) == 0);
}

TEST_CASE("simulate then track a moving source with evaluation") {
  const fs::path out = work_dir() / "moving";
  REQUIRE(run("simulate --scene \"" + (kData / "scene_moving.json").string() + "\" --out-dir \"" + out.string() + "\"") == 0);
  const fs::path traj = out / "est.csv", report = out / "report.json", ratios = out / "ratios.csv";
  REQUIRE(run("track --audio \"" + (out / "audio.wav").string() + "\" --geometry \"" + (out / "geometry.json").string() +
              "\" --config \"" + quick_config(Mode::kTracking).string() + "\" --truth \"" + (out / "truth.csv").string() +
              "\" --activity \"" + (out / "activity.csv").string() + "\" --report \"" + report.string() +
              "\" --ratios \"" + ratios.string() + "\" --seed 3 --out \"" + traj.string() + "\"") == 0);
  const Trajectory t = load_trajectory_csv(traj);
  CHECK(t.size() > 50);
  const auto r = nlohmann::json::parse(slurp(report));
  CHECK(r["mae_3d_m"].get<double>() < 0.3);
  CHECK(slurp(ratios).rfind("timestamp_s,peak,ratio_front_back,ratio_back_front\n", 0) == 0);
}

TEST_CASE("bad input exits with 2") {
  CHECK(run("localize --audio /nonexistent.wav --geometry /nonexistent.json --out x.json") == 2);
  CHECK(run("frobnicate") == 2);
  const fs::path junk = work_dir() / "junk.wav";
  std::ofstream(junk) << "RIFF but not really";
  CHECK(run("localize --audio \"" + junk.string() + "\" --geometry \"" + (kData / "dicit_like_geometry.json").string() +
            "\" --out \"" + (work_dir() / "junk.json").string() + "\"") == 2);
  const fs::path bad_config = work_dir() / "bad_config.json";
  std::ofstream(bad_config) << R"({"window_length": 1000})";
  AudioClip clip;
  clip.sample_rate = 48000;
  clip.samples = Eigen::MatrixXd::Random(48000, 15) * 0.1;
  save_wav(work_dir() / "noise.wav", clip);
  CHECK(run("track --audio \"" + (work_dir() / "noise.wav").string() + "\" --geometry \"" +
            (kData / "dicit_like_geometry.json").string() + "\" --config \"" + bad_config.string() + "\" --out \"" +
            (work_dir() / "x.csv").string() + "\"") == 2);
}

TEST_CASE("silent recording exits with 3") {
  AudioClip clip;
  clip.sample_rate = 48000;
  clip.samples = Eigen::MatrixXd::Zero(48000, 15);
  const fs::path wav = work_dir() / "silence.wav";
  save_wav(wav, clip, SampleFormat::kPcm16);
  CHECK(run("localize --audio \"" + wav.string() + "\" --geometry \"" + (kData / "dicit_like_geometry.json").string() +
            "\" --config \"" + quick_config(Mode::kStatic).string() + "\" --out \"" + (work_dir() / "s.json").string() +
            "\"") == 3);
  CHECK(run("track --audio \"" + wav.string() + "\" --geometry \"" + (kData / "dicit_like_geometry.json").string() +
            "\" --config \"" + quick_config(Mode::kTracking).string() + "\" --out \"" + (work_dir() / "s.csv").string() +
            "\"") == 3);
}

TEST_CASE("default-config prints a loadable configuration") {
  REQUIRE(run("default-config --mode static") == 0);
  const auto j = nlohmann::json::parse(slurp(work_dir() / "stdout.txt"));
  CHECK(config_from_json(j).window_length == 16384);
}
