#include <gcftrack/smooth_eval.hpp>

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace gcftrack {
namespace {

double speed_at(const Trajectory& traj, Index k) {
  const double dt = traj.timestamps[static_cast<size_t>(k)] - traj.timestamps[static_cast<size_t>(k - 1)];
  return (traj.position(k) - traj.position(k - 1)).norm() / dt;
}

}  // namespace

double max_speed(const Trajectory& traj) {
  double v = 0.0;
  for (Index k = 1; k < traj.size(); ++k) v = std::max(v, speed_at(traj, k));
  return v;
}

SmoothResult smooth_outliers(const Trajectory& traj, double v_max, Index max_iterations) {
  require(traj.size() >= 4, "smooth_outliers: need at least four entries");
  require(v_max > 0.0, "smooth_outliers: v_max must be positive");
  require(max_iterations >= 0, "smooth_outliers: negative iteration cap");

  SmoothResult result{traj, false, 0, std::vector<bool>(static_cast<size_t>(traj.size()), false)};
  Trajectory& t = result.trajectory;
  const Index n = t.size();

  while (true) {
    Index offender = -1;
    for (Index k = 1; k < n; ++k) {
      if (speed_at(t, k) > v_max) {
        offender = k;
        break;
      }
    }
    if (offender < 0) {
      result.converged = true;
      break;
    }
    if (result.iterations >= max_iterations) break;

    const Index first = std::max<Index>(0, offender - 1);
    const Index last = std::min<Index>(n - 1, offender + 2);
    const Index left = first - 1;
    const Index right = last + 1;
    if (left < 0 && right >= n) break;

    for (Index k = first; k <= last; ++k) {
      if (left < 0) {
        t.positions.col(k) = t.position(right);
      } else if (right >= n) {
        t.positions.col(k) = t.position(left);
      } else {
        const double tl = t.timestamps[static_cast<size_t>(left)];
        const double tr = t.timestamps[static_cast<size_t>(right)];
        const double a = (t.timestamps[static_cast<size_t>(k)] - tl) / (tr - tl);
        t.positions.col(k) = t.position(left) + a * (t.position(right) - t.position(left));
      }
      result.replaced[static_cast<size_t>(k)] = true;
    }
    ++result.iterations;
  }
  return result;
}

EvalReport evaluate(const Trajectory& estimate, const Trajectory& truth, const std::vector<bool>& active,
                    const Vec3& reference) {
  require(!estimate.empty(), "evaluate: empty estimate");
  require(active.size() == truth.timestamps.size(), "evaluate: activity flags must match truth");

  double half_period = 0.0;
  if (estimate.size() >= 2) {
    std::vector<double> gaps;
    for (size_t k = 1; k < estimate.timestamps.size(); ++k)
      gaps.push_back(estimate.timestamps[k] - estimate.timestamps[k - 1]);
    std::nth_element(gaps.begin(), gaps.begin() + static_cast<long>(gaps.size() / 2), gaps.end());
    half_period = 0.5 * gaps[gaps.size() / 2];
  }
  const double tolerance = half_period + 1e-9;
  const double span_lo = estimate.timestamps.front() - tolerance;
  const double span_hi = estimate.timestamps.back() + tolerance;

  EvalReport report;
  const auto& ets = estimate.timestamps;
  for (Index k = 0; k < truth.size(); ++k) {
    if (!active[static_cast<size_t>(k)]) continue;
    const double t = truth.timestamps[static_cast<size_t>(k)];
    if (t < span_lo || t > span_hi) continue;
    auto it = std::lower_bound(ets.begin(), ets.end(), t);
    auto j = static_cast<Index>(it - ets.begin());
    if (j == static_cast<Index>(ets.size())) {
      --j;
    } else if (j > 0 && t - ets[static_cast<size_t>(j - 1)] <= ets[static_cast<size_t>(j)] - t) {
      --j;
    }
    if (std::abs(ets[static_cast<size_t>(j)] - t) > tolerance) {
      throw InputError("evaluate: no estimate within half a frame of truth timestamp " + std::to_string(t));
    }
    const Vec3 est = estimate.position(j);
    const Vec3 ref = truth.position(k);
    const Angles ae = to_angles(est - reference);
    const Angles ar = to_angles(ref - reference);
    report.mae_3d += (est - ref).norm();
    report.mae_azimuth += azimuth_error(ae.azimuth, ar.azimuth);
    report.mae_elevation += std::abs(ae.elevation - ar.elevation);
    ++report.active_frame_count;
  }
  if (report.active_frame_count == 0) throw InputError("evaluate: no active frames to evaluate");
  const auto count = static_cast<double>(report.active_frame_count);
  report.mae_3d /= count;
  report.mae_azimuth /= count;
  report.mae_elevation /= count;
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  return {{"mae_3d_m", report.mae_3d},
          {"mae_azimuth_deg", report.mae_azimuth},
          {"mae_elevation_deg", report.mae_elevation},
          {"active_frame_count", report.active_frame_count}};
}

void print_report(std::ostream& out, const EvalReport& report) {
  out << std::fixed << std::setprecision(3) << "  MAE 3D         " << std::setw(9) << report.mae_3d << " m\n"
      << "  MAE azimuth    " << std::setw(9) << report.mae_azimuth << " deg\n"
      << "  MAE elevation  " << std::setw(9) << report.mae_elevation << " deg\n"
      << "  active frames  " << std::setw(9) << report.active_frame_count << '\n';
}

}  // namespace gcftrack
