#pragma once

#include <gcftrack/common.hpp>
#include <gcftrack/gcc_phat.hpp>
#include <gcftrack/geometry.hpp>

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace gcftrack {

/// Regular lattice over an axis-aligned box, enumerated x fastest, then y,
/// then z. The last point along an axis is the largest lo + k * step <= hi.
class Grid3D {
 public:
  Grid3D() = default;
  Grid3D(const Vec3& lo, const Vec3& hi, double step);

  const Vec3& lo() const { return lo_; }
  const Vec3& hi() const { return hi_; }
  double step() const { return step_; }
  Index count(int axis) const { return counts_[static_cast<size_t>(axis)]; }
  Index size() const { return counts_[0] * counts_[1] * counts_[2]; }

  Vec3 point(Index index) const {
    const Index ix = index % counts_[0];
    const Index iy = (index / counts_[0]) % counts_[1];
    const Index iz = index / (counts_[0] * counts_[1]);
    return {lo_.x() + step_ * static_cast<double>(ix), lo_.y() + step_ * static_cast<double>(iy),
            lo_.z() + step_ * static_cast<double>(iz)};
  }
  Index index_of(Index ix, Index iy, Index iz) const { return ix + counts_[0] * (iy + counts_[1] * iz); }
  Index nearest_index(const Vec3& p) const;
  /// Clamps to the bounding box [lo, hi].
  Vec3 clamp(const Vec3& p) const { return p.cwiseMax(lo_).cwiseMin(hi_); }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo_.array()).all() && (p.array() <= hi_.array()).all();
  }

 private:
  Vec3 lo_ = Vec3::Zero();
  Vec3 hi_ = Vec3::Zero();
  double step_ = 1.0;
  std::array<Index, 3> counts_{0, 0, 0};
};

/// Time difference of arrival of `first` relative to `second`: positive when
/// the source is closer to `second`.
template <typename Derived1, typename Derived2, typename Derived3>
typename Derived1::Scalar tdoa(const Eigen::MatrixBase<Derived1>& point, const Eigen::MatrixBase<Derived2>& first,
                               const Eigen::MatrixBase<Derived3>& second, typename Derived1::Scalar c) {
  return ((point - first).norm() - (point - second).norm()) / c;
}

/// Per-pair TDOA table over a grid, stored as fractional lags in samples.
struct TdoaLookup {
  double sample_rate = 0.0;
  std::vector<Index> max_lags;              // per pair
  std::vector<Eigen::VectorXd> lags;        // per pair, one entry per grid point
  std::vector<std::vector<bool>> usable;    // false where |lag| > max_lag

  Index pair_count() const { return static_cast<Index>(lags.size()); }
  double tau(Index pair, Index point) const { return lags[static_cast<size_t>(pair)](point) / sample_rate; }
};

TdoaLookup build_tdoa_lookup(const Grid3D& grid, const Eigen::Matrix3Xd& mics, std::span<const MicPair> pairs,
                             std::span<const Index> max_lags, double sample_rate,
                             double speed_of_sound = kSpeedOfSound);

/// Uses the static array-local microphone positions and the physical lag
/// bound of every pair.
TdoaLookup build_tdoa_lookup(const Grid3D& grid, const MicArrayGeometry& geom, double sample_rate,
                             double speed_of_sound = kSpeedOfSound);

struct GcfFrame {
  double timestamp = 0.0;
  Index peak_index = 0;
  Vec3 peak_position = Vec3::Zero();
  double peak_value = 0.0;
  std::optional<Eigen::VectorXd> map;
};

struct GcfOptions {
  bool keep_map = false;
  int threads = 1;
};

/// Global coherence field: mean over pairs of each pair's correlation at the
/// point's TDOA. Unusable (point, pair) entries contribute zero. The peak is
/// the first maximum in enumeration order, independent of `threads`.
GcfFrame gcf_frame(std::span<const GccCorrelation> gcc, const TdoaLookup& lookup, const Grid3D& grid,
                   double timestamp = 0.0, const GcfOptions& options = {});

/// Field value at one grid point, bit-identical to the corresponding entry of
/// gcf_frame's map.
double gcf_value(std::span<const GccCorrelation> gcc, const TdoaLookup& lookup, Index point);

/// Field value at an arbitrary position for microphones given directly,
/// using the same lag arithmetic as build_tdoa_lookup.
double gcf_value(std::span<const GccCorrelation> gcc, const Eigen::Matrix3Xd& mics,
                 std::span<const MicPair> pairs, const Vec3& position, double sample_rate,
                 double speed_of_sound = kSpeedOfSound);

/// Most frequent peak position; ties go to the earliest first occurrence.
Vec3 static_estimate(std::span<const GcfFrame> peaks);

/// Writes `x,y,value` rows of the map plane nearest to height z.
void write_map_slice(std::ostream& out, const Grid3D& grid, const Eigen::VectorXd& map, double z);

}  // namespace gcftrack
