#include <gcftrack/audio_io.hpp>
#include <gcftrack/scene_sim.hpp>

#include <doctest.h>

#include "oracles.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace gcftrack;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("gcftrack_test_" + name); }

// Hand-assembled 16-bit PCM file, independent of save_wav.
void write_pcm16(const fs::path& path, int channels, int rate, const std::vector<int16_t>& interleaved,
                 uint16_t format_tag = 1, uint16_t bits = 16) {
  auto u32 = [](std::ofstream& o, uint32_t v) { o.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [](std::ofstream& o, uint16_t v) { o.write(reinterpret_cast<const char*>(&v), 2); };
  std::ofstream o(path, std::ios::binary);
  const uint32_t data = static_cast<uint32_t>(interleaved.size() * 2);
  o.write("RIFF", 4);
  u32(o, 36 + data);
  o.write("WAVE", 4);
  o.write("fmt ", 4);
  u32(o, 16);
  u16(o, format_tag);
  u16(o, static_cast<uint16_t>(channels));
  u32(o, static_cast<uint32_t>(rate));
  u32(o, static_cast<uint32_t>(rate * channels * bits / 8));
  u16(o, static_cast<uint16_t>(channels * bits / 8));
  u16(o, bits);
  o.write("data", 4);
  u32(o, data);
  o.write(reinterpret_cast<const char*>(interleaved.data()), data);
}

AudioClip noise_clip(Index length, Index channels, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 0.2);
  AudioClip c;
  c.sample_rate = 16000;
  c.samples.resize(length, channels);
  for (Index i = 0; i < c.samples.size(); ++i) c.samples.data()[i] = n(rng);
  return c;
}

}  // namespace

TEST_CASE("load_audio: all-zero 16-bit stereo") {
  const auto path = temp_path("zeros.wav");
  write_pcm16(path, 2, 22050, std::vector<int16_t>(2 * 100, 0));
  const AudioClip clip = load_audio(path);
  CHECK(clip.channel_count() == 2);
  CHECK(clip.length() == 100);
  CHECK(clip.sample_rate == 22050);
  CHECK(clip.samples.isZero(0.0));
}

TEST_CASE("load_audio: full-scale int16 maps to ~1") {
  const auto path = temp_path("fullscale.wav");
  write_pcm16(path, 2, 48000, std::vector<int16_t>(2 * 64, 32767));
  const AudioClip clip = load_audio(path);
  CHECK((clip.samples.array() - 1.0).abs().maxCoeff() < 1e-4);
}

TEST_CASE("load_audio: rejects mono, unsupported encodings and missing files") {
  const auto mono = temp_path("mono.wav");
  write_pcm16(mono, 1, 8000, std::vector<int16_t>(10, 0));
  CHECK_THROWS_AS(load_audio(mono), InputError);

  const auto alaw = temp_path("alaw.wav");
  write_pcm16(alaw, 2, 8000, std::vector<int16_t>(10, 0), 6);
  CHECK_THROWS_AS(load_audio(alaw), InputError);

  CHECK_THROWS_AS(load_audio(temp_path("does_not_exist.wav")), InputError);

  const auto junk = temp_path("junk.wav");
  std::ofstream(junk) << "not a wav file at all";
  CHECK_THROWS_AS(load_audio(junk), InputError);
}

TEST_CASE("save_wav/load_audio: every supported sample format") {
  AudioClip clip = noise_clip(256, 3, 1);
  clip.samples = clip.samples.cwiseMax(-0.99).cwiseMin(0.99);
  const std::pair<SampleFormat, double> formats[] = {{SampleFormat::kPcm16, 1.0 / 32768},
                                                     {SampleFormat::kPcm24, 1.0 / 8388608},
                                                     {SampleFormat::kPcm32, 1e-9},
                                                     {SampleFormat::kFloat32, 1e-7}};
  for (const auto& [format, tol] : formats) {
    const auto path = temp_path("fmt.wav");
    save_wav(path, clip, format);
    const AudioClip back = load_audio(path);
    REQUIRE(back.channel_count() == 3);
    REQUIRE(back.length() == 256);
    CHECK((back.samples - clip.samples).cwiseAbs().maxCoeff() <= tol);
  }
}

TEST_CASE("load_audio: 15-channel scene_sim output, header read back") {
  SceneSpec spec;
  spec.geometry = dicit_like_geometry();
  spec.trajectory = {{0.0, Vec3(0.3, 1.5, 1.5)}};
  spec.duration = 0.25;
  const SceneOutput out = render(spec);
  const auto path = temp_path("scene15.wav");
  save_wav(path, out.audio);

  std::ifstream raw(path, std::ios::binary);
  char header[44];
  raw.read(header, 44);
  uint16_t channels;
  uint32_t rate;
  std::memcpy(&channels, header + 22, 2);
  std::memcpy(&rate, header + 24, 4);
  CHECK(channels == 15);
  CHECK(rate == 48000);

  const AudioClip clip = load_audio(path);
  CHECK(clip.channel_count() == 15);
  CHECK(clip.length() == out.audio.length());
  CHECK(clip.sample_rate == 48000);
}

TEST_CASE("frame_and_transform: zero clip gives zero spectra") {
  AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples = Eigen::MatrixXd::Zero(4096, 2);
  const std::vector<double> ts = {0.1, 0.2, 0.3};
  const FrameSeries fsr = frame_and_transform(clip, 512, ts);
  REQUIRE(fsr.frames.size() == 3);
  for (const auto& f : fsr.frames) {
    CHECK(f.spectra.rows() == 257);
    CHECK(f.spectra.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("frame_and_transform: bin-centred sinusoid with rectangular taper") {
  const Index n = 256;
  const Index bin = 17;
  AudioClip clip;
  clip.sample_rate = 1000;
  clip.samples.resize(2048, 2);
  for (Index t = 0; t < 2048; ++t) {
    const double v = std::sin(2.0 * std::numbers::pi * static_cast<double>(bin * t) / static_cast<double>(n));
    clip.samples(t, 0) = v;
    clip.samples(t, 1) = v;
  }
  const std::vector<double> ts = {1.0};
  const FrameSeries fsr = frame_and_transform(clip, n, ts, WindowKind::kRectangular);
  const Eigen::VectorXd mag = fsr.frames.front().spectra.col(0).cwiseAbs();
  Index peak = 0;
  mag.maxCoeff(&peak);
  CHECK(peak == bin);
  CHECK(mag(bin) / mag(bin + 1) > 100.0);
  CHECK(mag(bin) / mag(bin - 1) > 100.0);
}

TEST_CASE("frame_and_transform: Blackman taper on a centred impulse matches a direct DFT") {
  const Index n = 128;
  AudioClip clip;
  clip.sample_rate = 1000;
  clip.samples = Eigen::MatrixXd::Zero(1000, 2);
  clip.samples(500, 0) = 1.0;  // timestamp 0.5 s -> window start 436, impulse at offset 64
  const std::vector<double> ts = {0.5};
  const FrameSeries fsr = frame_and_transform(clip, n, ts, WindowKind::kBlackman);

  const Eigen::VectorXd w = make_window(WindowKind::kBlackman, n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(n / 2) = w(n / 2);
  const Eigen::VectorXcd expected = oracle::dft(x);
  const Eigen::VectorXcd got = fsr.frames.front().spectra.col(0);
  CHECK((got.cwiseAbs() - expected.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((got.cwiseAbs().array() - w(n / 2)).abs().maxCoeff() < 1e-9);
}

TEST_CASE("frame_and_transform: Parseval per frame and channel") {
  const AudioClip clip = noise_clip(8192, 3, 7);
  const Index n = 1024;
  const std::vector<double> ts = {0.05, 0.1, 0.2, 0.3, 0.45};
  const FrameSeries fsr = frame_and_transform(clip, n, ts, WindowKind::kHann);
  const Eigen::VectorXd w = make_window(WindowKind::kHann, n);
  for (const auto& f : fsr.frames) {
    const Index start = *window_start(f.timestamp, clip.sample_rate, n, clip.length());
    for (Index c = 0; c < 3; ++c) {
      const double time_energy = clip.samples.col(c).segment(start, n).cwiseProduct(w).squaredNorm();
      // Two-sided sum from the one-sided spectrum: interior bins count twice.
      const Eigen::VectorXd p = f.spectra.col(c).cwiseAbs2();
      const double two_sided = p(0) + p(n / 2) + 2.0 * p.segment(1, n / 2 - 1).sum();
      CHECK(std::abs(time_energy - two_sided / static_cast<double>(n)) <= 1e-6 * time_energy);
    }
  }
}

TEST_CASE("frame_and_transform: deterministic and insensitive to uncovered samples") {
  AudioClip clip = noise_clip(4000, 2, 3);
  const std::vector<double> ts = {0.03, 0.06, 0.09, 0.12, 0.15, 0.18, 0.21, 0.24};
  const FrameSeries a = frame_and_transform(clip, 256, ts);
  const FrameSeries b = frame_and_transform(clip, 256, ts);
  REQUIRE(a.frames.size() == b.frames.size());
  for (size_t i = 0; i < a.frames.size(); ++i) CHECK((a.frames[i].spectra.array() == b.frames[i].spectra.array()).all());

  AudioClip shorter = clip;
  shorter.samples.conservativeResize(clip.length() - 1, Eigen::NoChange);
  const FrameSeries c = frame_and_transform(shorter, 256, ts);
  for (const auto& f : c.frames) {
    const Index start = *window_start(f.timestamp, clip.sample_rate, 256, shorter.length());
    REQUIRE(start + 256 <= shorter.length());
    const auto it = std::find_if(a.frames.begin(), a.frames.end(), [&](const auto& g) { return g.timestamp == f.timestamp; });
    REQUIRE(it != a.frames.end());
    CHECK((it->spectra.array() == f.spectra.array()).all());
  }
}

TEST_CASE("frame_and_transform: edge frames dropped and reported; errors") {
  AudioClip clip = noise_clip(1600, 2, 5);  // 0.1 s at 16 kHz
  const std::vector<double> ts = {0.0, 0.05, 0.1};
  const FrameSeries fsr = frame_and_transform(clip, 512, ts);
  REQUIRE(fsr.frames.size() == 1);
  CHECK(fsr.frames.front().timestamp == 0.05);
  CHECK(fsr.dropped == std::vector<double>{0.0, 0.1});

  CHECK_THROWS_AS(frame_and_transform(clip, 512, std::vector<double>{}), InputError);
  CHECK_THROWS_AS(frame_and_transform(clip, 2048, ts), InputError);
  CHECK_THROWS_AS(frame_and_transform(clip, 500, ts), InputError);
  CHECK_THROWS_AS(frame_and_transform(clip, 512, std::vector<double>{0.05, 0.05}), InputError);
}

TEST_CASE("output_timestamps spans the clip at the requested rate") {
  const auto ts = output_timestamps(1.0, 10.0);
  REQUIRE(ts.size() == 11);
  CHECK(ts.front() == 0.0);
  CHECK(ts.back() == doctest::Approx(1.0));
  CHECK_THROWS_AS(output_timestamps(1.0, 0.0), InputError);
}
