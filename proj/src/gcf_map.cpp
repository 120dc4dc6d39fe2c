#include <gcftrack/gcf_map.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>
#include <unordered_map>

namespace gcftrack {
namespace {

inline double lag_samples(const Vec3& point, const Eigen::Matrix3Xd& mics, const MicPair& pair,
                          double sample_rate, double speed_of_sound) {
  return tdoa(point, mics.col(pair.first), mics.col(pair.second), speed_of_sound) * sample_rate;
}

inline double pair_contribution(const GccCorrelation& corr, double lag) {
  if (!(std::abs(lag) <= static_cast<double>(corr.max_lag))) return 0.0;
  return interpolate_lag(corr, lag);
}

void check_pairs(std::span<const GccCorrelation> gcc, const TdoaLookup& lookup) {
  require(!gcc.empty(), "gcf: empty pair set");
  require(static_cast<Index>(gcc.size()) == lookup.pair_count(), "gcf: pair count differs from lookup");
}

struct ChunkPeak {
  Index index = 0;
  double value = -std::numeric_limits<double>::infinity();
};

// Evaluates [begin, end) pair by pair into `out` (which may alias a map
// segment) and returns the first maximum.
ChunkPeak evaluate_range(std::span<const GccCorrelation> gcc, const TdoaLookup& lookup, Index begin, Index end,
                         double* out) {
  const Index n = end - begin;
  std::fill(out, out + n, 0.0);
  for (size_t m = 0; m < gcc.size(); ++m) {
    const GccCorrelation& corr = gcc[m];
    const Eigen::VectorXd& lags = lookup.lags[m];
    const std::vector<bool>& usable = lookup.usable[m];
    for (Index i = 0; i < n; ++i) {
      const Index p = begin + i;
      if (usable[static_cast<size_t>(p)]) out[i] += interpolate_lag(corr, lags(p));
    }
  }
  const auto pairs = static_cast<double>(gcc.size());
  ChunkPeak peak;
  for (Index i = 0; i < n; ++i) {
    out[i] /= pairs;
    if (out[i] > peak.value) peak = {begin + i, out[i]};
  }
  return peak;
}

}  // namespace

Grid3D::Grid3D(const Vec3& lo, const Vec3& hi, double step) : lo_(lo), hi_(hi), step_(step) {
  require(step > 0.0, "grid step must be positive");
  for (int a = 0; a < 3; ++a) {
    require(hi(a) > lo(a), "grid ranges must be non-degenerate");
    counts_[static_cast<size_t>(a)] = static_cast<Index>(std::floor((hi(a) - lo(a)) / step + 1e-9)) + 1;
  }
}

Index Grid3D::nearest_index(const Vec3& p) const {
  std::array<Index, 3> idx{};
  for (int a = 0; a < 3; ++a) {
    const auto k = static_cast<Index>(std::llround((p(a) - lo_(a)) / step_));
    idx[static_cast<size_t>(a)] = std::clamp<Index>(k, 0, counts_[static_cast<size_t>(a)] - 1);
  }
  return index_of(idx[0], idx[1], idx[2]);
}

TdoaLookup build_tdoa_lookup(const Grid3D& grid, const Eigen::Matrix3Xd& mics, std::span<const MicPair> pairs,
                             std::span<const Index> max_lags, double sample_rate, double speed_of_sound) {
  require(pairs.size() == max_lags.size(), "build_tdoa_lookup: one max lag per pair required");
  require(sample_rate > 0.0 && speed_of_sound > 0.0, "build_tdoa_lookup: rates must be positive");
  TdoaLookup lookup;
  lookup.sample_rate = sample_rate;
  lookup.max_lags.assign(max_lags.begin(), max_lags.end());
  const Index n = grid.size();
  for (size_t m = 0; m < pairs.size(); ++m) {
    const MicPair& pair = pairs[m];
    require((mics.col(pair.first) - mics.col(pair.second)).norm() > 0.0, "build_tdoa_lookup: zero-distance pair");
    Eigen::VectorXd lags(n);
    std::vector<bool> usable(static_cast<size_t>(n));
    const auto bound = static_cast<double>(max_lags[m]);
    for (Index p = 0; p < n; ++p) {
      lags(p) = lag_samples(grid.point(p), mics, pair, sample_rate, speed_of_sound);
      usable[static_cast<size_t>(p)] = std::abs(lags(p)) <= bound;
    }
    lookup.lags.push_back(std::move(lags));
    lookup.usable.push_back(std::move(usable));
  }
  return lookup;
}

TdoaLookup build_tdoa_lookup(const Grid3D& grid, const MicArrayGeometry& geom, double sample_rate,
                             double speed_of_sound) {
  std::vector<Index> max_lags;
  for (Index m = 0; m < geom.pair_count(); ++m) {
    max_lags.push_back(max_lag_for(geom.pair_distance(m), sample_rate, speed_of_sound));
  }
  return build_tdoa_lookup(grid, geom.mics, geom.pairs, max_lags, sample_rate, speed_of_sound);
}

GcfFrame gcf_frame(std::span<const GccCorrelation> gcc, const TdoaLookup& lookup, const Grid3D& grid,
                   double timestamp, const GcfOptions& options) {
  check_pairs(gcc, lookup);
  for (size_t m = 0; m < gcc.size(); ++m) {
    require(gcc[m].max_lag >= lookup.max_lags[m], "gcf: correlation shorter than the lookup's lag bound");
  }
  const Index n = grid.size();
  require(n > 0 && lookup.lags.front().size() == n, "gcf: lookup does not match grid");

  constexpr Index kChunk = 8192;
  const Index chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkPeak> peaks(static_cast<size_t>(chunks));
  Eigen::VectorXd map;
  if (options.keep_map) map.resize(n);

  auto work = [&](Index first_chunk, Index stride) {
    std::vector<double> scratch(options.keep_map ? 0 : static_cast<size_t>(kChunk));
    for (Index c = first_chunk; c < chunks; c += stride) {
      const Index begin = c * kChunk;
      const Index end = std::min(n, begin + kChunk);
      double* out = options.keep_map ? map.data() + begin : scratch.data();
      peaks[static_cast<size_t>(c)] = evaluate_range(gcc, lookup, begin, end, out);
    }
  };

  const Index threads = std::clamp<Index>(options.threads, 1, chunks);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (Index t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  ChunkPeak best = peaks.front();
  for (const ChunkPeak& p : peaks) {
    if (p.value > best.value) best = p;
  }

  GcfFrame frame;
  frame.timestamp = timestamp;
  frame.peak_index = best.index;
  frame.peak_position = grid.point(best.index);
  frame.peak_value = best.value;
  if (options.keep_map) frame.map = std::move(map);
  return frame;
}

double gcf_value(std::span<const GccCorrelation> gcc, const TdoaLookup& lookup, Index point) {
  check_pairs(gcc, lookup);
  double sum = 0.0;
  for (size_t m = 0; m < gcc.size(); ++m) {
    if (lookup.usable[m][static_cast<size_t>(point)]) sum += interpolate_lag(gcc[m], lookup.lags[m](point));
  }
  return sum / static_cast<double>(gcc.size());
}

double gcf_value(std::span<const GccCorrelation> gcc, const Eigen::Matrix3Xd& mics, std::span<const MicPair> pairs,
                 const Vec3& position, double sample_rate, double speed_of_sound) {
  require(!gcc.empty() && gcc.size() == pairs.size(), "gcf: one correlation per pair required");
  double sum = 0.0;
  for (size_t m = 0; m < gcc.size(); ++m) {
    sum += pair_contribution(gcc[m], lag_samples(position, mics, pairs[m], sample_rate, speed_of_sound));
  }
  return sum / static_cast<double>(gcc.size());
}

Vec3 static_estimate(std::span<const GcfFrame> peaks) {
  require(!peaks.empty(), "static_estimate: no frames");
  // Keyed by exact position so frames from different grids still compare.
  struct Tally {
    size_t first = 0;
    size_t count = 0;
  };
  std::vector<std::pair<Vec3, Tally>> tallies;
  for (size_t i = 0; i < peaks.size(); ++i) {
    auto it = std::find_if(tallies.begin(), tallies.end(),
                           [&](const auto& t) { return t.first == peaks[i].peak_position; });
    if (it == tallies.end()) {
      tallies.push_back({peaks[i].peak_position, {i, 1}});
    } else {
      ++it->second.count;
    }
  }
  const auto best = std::max_element(tallies.begin(), tallies.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count < b.second.count;
    return a.second.first > b.second.first;
  });
  return best->first;
}

void write_map_slice(std::ostream& out, const Grid3D& grid, const Eigen::VectorXd& map, double z) {
  require(map.size() == grid.size(), "map size does not match grid");
  const auto iz = static_cast<Index>(
      std::clamp<long long>(std::llround((z - grid.lo().z()) / grid.step()), 0, grid.count(2) - 1));
  out << "x_m,y_m,value\n" << std::fixed << std::setprecision(6);
  for (Index iy = 0; iy < grid.count(1); ++iy) {
    for (Index ix = 0; ix < grid.count(0); ++ix) {
      const Index i = grid.index_of(ix, iy, iz);
      const Vec3 p = grid.point(i);
      out << p.x() << ',' << p.y() << ',' << map(i) << '\n';
    }
  }
}

}  // namespace gcftrack
