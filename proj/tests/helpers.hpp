#pragma once

#include <gcftrack/audio_io.hpp>
#include <gcftrack/gcc_phat.hpp>
#include <gcftrack/geometry.hpp>
#include <gcftrack/scene_sim.hpp>

#include <vector>

namespace testing {

using namespace gcftrack;

// Per-pair GCC-PHAT of one centred window, first microphone lagging positive.
inline std::vector<GccCorrelation> frame_gcc(const AudioClip& clip, const MicArrayGeometry& geom, double t,
                                             Index window_length, WindowKind kind = WindowKind::kBlackman) {
  const Index start = *window_start(t, clip.sample_rate, window_length, clip.length());
  const Eigen::MatrixXcd spectra = transform_window(clip, start, make_window(kind, window_length));
  std::vector<GccCorrelation> out;
  for (Index m = 0; m < geom.pair_count(); ++m) {
    const MicPair& p = geom.pairs[static_cast<size_t>(m)];
    out.push_back(gcc_phat(spectra.col(p.second), spectra.col(p.first),
                           max_lag_for(geom.pair_distance(m), clip.sample_rate)));
  }
  return out;
}

inline SceneSpec static_scene(const Vec3& source, double duration, std::optional<double> snr_db,
                              std::uint64_t seed = 1) {
  SceneSpec spec;
  spec.geometry = dicit_like_geometry();
  spec.trajectory = {{0.0, source}};
  spec.duration = duration;
  spec.snr_db = snr_db;
  spec.seed = seed;
  return spec;
}

}  // namespace testing
