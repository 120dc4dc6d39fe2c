#include <gcftrack/audio_io.hpp>
#include <gcftrack/fft.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

namespace gcftrack {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t read_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xFF));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
}
void put_tag(std::vector<uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

struct WavFormat {
  uint16_t tag = 0;
  uint16_t channels = 0;
  uint32_t rate = 0;
  uint16_t bits = 0;
  uint16_t block_align = 0;
};

double decode_sample(const uint8_t* p, const WavFormat& fmt) {
  if (fmt.tag == kFormatFloat) {
    if (fmt.bits == 32) {
      float v;
      std::memcpy(&v, p, 4);
      return v;
    }
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }
  switch (fmt.bits) {
    case 16:
      return static_cast<int16_t>(read_u16(p)) / 32768.0;
    case 24: {
      int32_t v = static_cast<int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<int32_t>(read_u32(p)) / 2147483648.0;
  }
}

}  // namespace

AudioClip load_audio(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open audio file: " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw InputError("not a RIFF/WAVE file: " + path.string());
  }

  std::optional<WavFormat> fmt;
  const uint8_t* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    const size_t size = read_u32(chunk + 4);
    const size_t body = pos + 8;
    const size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw InputError("truncated fmt chunk");
      const uint8_t* f = bytes.data() + body;
      WavFormat w;
      w.tag = read_u16(f);
      w.channels = read_u16(f + 2);
      w.rate = read_u32(f + 4);
      w.block_align = read_u16(f + 12);
      w.bits = read_u16(f + 14);
      if (w.tag == kFormatExtensible) {
        if (avail < 26) throw InputError("truncated WAVE_FORMAT_EXTENSIBLE header");
        w.tag = read_u16(f + 24);
      }
      fmt = w;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1);
  }

  if (!fmt) throw InputError("missing fmt chunk: " + path.string());
  if (!data) throw InputError("missing data chunk: " + path.string());
  const bool pcm_ok = fmt->tag == kFormatPcm && (fmt->bits == 16 || fmt->bits == 24 || fmt->bits == 32);
  const bool float_ok = fmt->tag == kFormatFloat && (fmt->bits == 32 || fmt->bits == 64);
  if (!pcm_ok && !float_ok) {
    throw InputError("unsupported WAV encoding (tag " + std::to_string(fmt->tag) + ", " +
                     std::to_string(fmt->bits) + " bits)");
  }
  if (fmt->channels < 2) throw InputError("audio must have at least two channels");
  if (fmt->rate == 0) throw InputError("sample rate is zero");
  const size_t bytes_per_sample = fmt->bits / 8;
  if (fmt->block_align != bytes_per_sample * fmt->channels) throw InputError("inconsistent block alignment");

  const Index frames = static_cast<Index>(data_size / fmt->block_align);
  AudioClip clip;
  clip.sample_rate = fmt->rate;
  clip.samples.resize(frames, fmt->channels);
  for (Index n = 0; n < frames; ++n) {
    const uint8_t* frame = data + static_cast<size_t>(n) * fmt->block_align;
    for (Index c = 0; c < fmt->channels; ++c) {
      clip.samples(n, c) = decode_sample(frame + c * bytes_per_sample, *fmt);
    }
  }
  return clip;
}

void save_wav(const std::filesystem::path& path, const AudioClip& clip, SampleFormat format) {
  require(clip.channel_count() >= 1 && clip.sample_rate > 0, "save_wav: empty clip");
  const uint16_t bits = format == SampleFormat::kPcm16 ? 16 : format == SampleFormat::kPcm24 ? 24 : 32;
  const uint16_t tag = format == SampleFormat::kFloat32 ? kFormatFloat : kFormatPcm;
  const auto channels = static_cast<uint16_t>(clip.channel_count());
  const uint16_t block_align = static_cast<uint16_t>(channels * bits / 8);
  const auto rate = static_cast<uint32_t>(std::lround(clip.sample_rate));
  const auto data_size = static_cast<uint32_t>(clip.length() * block_align);

  std::vector<uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * block_align);
  put_u16(out, block_align);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);

  for (Index n = 0; n < clip.length(); ++n) {
    for (Index c = 0; c < clip.channel_count(); ++c) {
      const double v = clip.samples(n, c);
      if (format == SampleFormat::kFloat32) {
        const float f = static_cast<float>(v);
        uint32_t u;
        std::memcpy(&u, &f, 4);
        put_u32(out, u);
        continue;
      }
      const double clipped = std::clamp(v, -1.0, 1.0);
      if (format == SampleFormat::kPcm16) {
        put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(std::lround(std::min(clipped * 32768.0, 32767.0)))));
      } else if (format == SampleFormat::kPcm24) {
        const auto s = static_cast<int32_t>(std::lround(std::min(clipped * 8388608.0, 8388607.0)));
        const auto u = static_cast<uint32_t>(s);
        out.push_back(static_cast<uint8_t>(u & 0xFF));
        out.push_back(static_cast<uint8_t>((u >> 8) & 0xFF));
        out.push_back(static_cast<uint8_t>((u >> 16) & 0xFF));
      } else {
        const auto s = static_cast<int64_t>(std::llround(clipped * 2147483648.0));
        put_u32(out, static_cast<uint32_t>(static_cast<int32_t>(std::min<int64_t>(s, 2147483647))));
      }
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

WindowKind parse_window_kind(const std::string& name) {
  if (name == "rectangular") return WindowKind::kRectangular;
  if (name == "hann") return WindowKind::kHann;
  if (name == "blackman") return WindowKind::kBlackman;
  throw InputError("unknown window kind: " + name);
}

std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::kRectangular:
      return "rectangular";
    case WindowKind::kHann:
      return "hann";
    case WindowKind::kBlackman:
      return "blackman";
  }
  return "blackman";
}

Eigen::VectorXd make_window(WindowKind kind, Index length) {
  Eigen::VectorXd w(length);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(length);
  for (Index n = 0; n < length; ++n) {
    const double a = step * static_cast<double>(n);
    switch (kind) {
      case WindowKind::kRectangular:
        w(n) = 1.0;
        break;
      case WindowKind::kHann:
        w(n) = 0.5 - 0.5 * std::cos(a);
        break;
      case WindowKind::kBlackman:
        w(n) = 0.42 - 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a);
        break;
    }
  }
  return w;
}

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

std::optional<Index> window_start(double timestamp, double sample_rate, Index window_length,
                                  Index clip_length) {
  const auto center = static_cast<Index>(std::llround(timestamp * sample_rate));
  const Index start = center - window_length / 2;
  if (start < 0 || start + window_length > clip_length) return std::nullopt;
  return start;
}

Eigen::MatrixXcd transform_window(const AudioClip& clip, Index start, const Eigen::VectorXd& window) {
  const Index n = window.size();
  const RealFft fft(n);
  Eigen::MatrixXcd spectra(fft.bins(), clip.channel_count());
  Eigen::VectorXd buf(n);
  for (Index c = 0; c < clip.channel_count(); ++c) {
    buf = clip.samples.col(c).segment(start, n).cwiseProduct(window);
    fft.forward(std::span<const double>(buf.data(), static_cast<size_t>(n)),
                std::span<std::complex<double>>(spectra.col(c).data(), static_cast<size_t>(fft.bins())));
  }
  return spectra;
}

FrameSeries frame_and_transform(const AudioClip& clip, Index window_length,
                                std::span<const double> timestamps, WindowKind window_kind) {
  require(!timestamps.empty(), "frame_and_transform: empty timestamp list");
  require(is_power_of_two(window_length) && window_length >= 2, "window length must be a power of two");
  require(window_length <= clip.length(), "window is longer than the clip");
  require(std::adjacent_find(timestamps.begin(), timestamps.end(), std::greater_equal<>()) == timestamps.end(),
          "timestamps must be strictly increasing");

  FrameSeries series;
  series.window_length = window_length;
  series.window_kind = window_kind;
  const Eigen::VectorXd window = make_window(window_kind, window_length);
  for (const double t : timestamps) {
    const auto start = window_start(t, clip.sample_rate, window_length, clip.length());
    if (!start) {
      series.dropped.push_back(t);
      continue;
    }
    series.frames.push_back({t, transform_window(clip, *start, window)});
  }
  return series;
}

std::vector<double> output_timestamps(double duration, double rate_hz) {
  require(rate_hz > 0.0, "output rate must be positive");
  std::vector<double> ts;
  for (Index k = 0;; ++k) {
    const double t = static_cast<double>(k) / rate_hz;
    if (t > duration) break;
    ts.push_back(t);
  }
  return ts;
}

}  // namespace gcftrack
