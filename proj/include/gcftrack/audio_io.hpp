#pragma once

#include <gcftrack/common.hpp>

#include <Eigen/Core>

#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gcftrack {

/// Multichannel audio. `samples` holds one column per channel so that every
/// channel is contiguous in memory.
struct AudioClip {
  Eigen::MatrixXd samples;
  double sample_rate = 0.0;

  Index channel_count() const { return samples.cols(); }
  Index length() const { return samples.rows(); }
  double duration() const { return static_cast<double>(length()) / sample_rate; }
};

enum class SampleFormat { kPcm16, kPcm24, kPcm32, kFloat32 };

/// Reads a RIFF/WAVE file (PCM 16/24/32-bit or IEEE float 32/64-bit,
/// WAVE_FORMAT_EXTENSIBLE accepted). Integer samples are divided by the
/// type's max magnitude. Throws InputError on unreadable or unsupported data
/// and on single-channel files.
AudioClip load_audio(const std::filesystem::path& path);

void save_wav(const std::filesystem::path& path, const AudioClip& clip,
              SampleFormat format = SampleFormat::kFloat32);

enum class WindowKind { kRectangular, kHann, kBlackman };

WindowKind parse_window_kind(const std::string& name);
std::string to_string(WindowKind kind);

/// Symmetric-in-period ("DFT-even") taper of the given length.
Eigen::VectorXd make_window(WindowKind kind, Index length);

struct SpectralFrame {
  double timestamp = 0.0;
  // One-sided spectra, window_length/2 + 1 bins per column (channel).
  Eigen::MatrixXcd spectra;
};

struct FrameSeries {
  std::vector<SpectralFrame> frames;
  Index window_length = 0;
  WindowKind window_kind = WindowKind::kBlackman;
  // Requested timestamps whose centered window would overrun the clip.
  std::vector<double> dropped;
};

bool is_power_of_two(Index n);

/// First sample of the window centered on `timestamp`, or nullopt when the
/// window does not fit inside a clip of `clip_length` samples.
std::optional<Index> window_start(double timestamp, double sample_rate, Index window_length,
                                  Index clip_length);

/// Windows each channel of `clip` around `start` and returns the one-sided
/// spectra (bins x channels).
Eigen::MatrixXcd transform_window(const AudioClip& clip, Index start, const Eigen::VectorXd& window);

FrameSeries frame_and_transform(const AudioClip& clip, Index window_length,
                                std::span<const double> timestamps,
                                WindowKind window_kind = WindowKind::kBlackman);

/// Timestamps k / rate for k = 0, 1, ... up to the clip duration.
std::vector<double> output_timestamps(double duration, double rate_hz);

}  // namespace gcftrack
