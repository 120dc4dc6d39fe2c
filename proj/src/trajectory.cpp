#include <gcftrack/trajectory.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace gcftrack {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad number '" + s + "' in " + path.string());
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != table.header.size()) throw InputError("ragged CSV row in " + path.string());
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_double(f, path));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Trajectory trajectory_from(const CsvTable& table, const std::filesystem::path& path) {
  const int ct = table.column("timestamp_s");
  const int cx = table.column("x_m");
  const int cy = table.column("y_m");
  const int cz = table.column("z_m");
  if (ct < 0 || cx < 0 || cy < 0 || cz < 0) {
    throw InputError("expected columns timestamp_s,x_m,y_m,z_m in " + path.string());
  }
  Trajectory traj = Trajectory::with_size(static_cast<Index>(table.rows.size()));
  for (size_t k = 0; k < table.rows.size(); ++k) {
    const auto& r = table.rows[k];
    traj.timestamps[k] = r[static_cast<size_t>(ct)];
    traj.positions.col(static_cast<Index>(k)) =
        Vec3(r[static_cast<size_t>(cx)], r[static_cast<size_t>(cy)], r[static_cast<size_t>(cz)]);
    if (k > 0 && !(traj.timestamps[k] > traj.timestamps[k - 1])) {
      throw InputError("timestamps must be strictly increasing in " + path.string());
    }
  }
  return traj;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

}  // namespace

Trajectory Trajectory::with_size(Index n, CoordinateFrame frame) {
  Trajectory t;
  t.timestamps.assign(static_cast<size_t>(n), 0.0);
  t.positions = Eigen::Matrix3Xd::Zero(3, n);
  t.frame = frame;
  return t;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "timestamp_s,x_m,y_m,z_m\n" << std::fixed << std::setprecision(6);
  for (Index k = 0; k < traj.size(); ++k) {
    out << traj.timestamps[static_cast<size_t>(k)] << ',' << traj.positions(0, k) << ',' << traj.positions(1, k)
        << ',' << traj.positions(2, k) << '\n';
  }
}

void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  write_trajectory_csv(out, traj);
}

Trajectory load_trajectory_csv(const std::filesystem::path& path) {
  return trajectory_from(read_csv(path), path);
}

void save_ground_truth_csv(const std::filesystem::path& path, const GroundTruth& truth) {
  require(truth.active.size() == truth.trajectory.timestamps.size(), "activity flags must match trajectory");
  auto out = open_out(path);
  const Trajectory& t = truth.trajectory;
  out << "timestamp_s,x_m,y_m,z_m,active\n" << std::fixed << std::setprecision(6);
  for (Index k = 0; k < t.size(); ++k) {
    out << t.timestamps[static_cast<size_t>(k)] << ',' << t.positions(0, k) << ',' << t.positions(1, k) << ','
        << t.positions(2, k) << ',' << (truth.active[static_cast<size_t>(k)] ? 1 : 0) << '\n';
  }
}

GroundTruth load_ground_truth_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  GroundTruth truth;
  truth.trajectory = trajectory_from(table, path);
  truth.trajectory.frame = CoordinateFrame::kWorld;
  const int ca = table.column("active");
  for (const auto& r : table.rows) truth.active.push_back(ca < 0 || r[static_cast<size_t>(ca)] != 0.0);
  return truth;
}

void save_activity_csv(const std::filesystem::path& path, const std::vector<double>& timestamps,
                       const std::vector<bool>& active) {
  require(timestamps.size() == active.size(), "activity flags must match timestamps");
  auto out = open_out(path);
  out << "timestamp_s,active\n" << std::fixed << std::setprecision(6);
  for (size_t k = 0; k < timestamps.size(); ++k) out << timestamps[k] << ',' << (active[k] ? 1 : 0) << '\n';
}

void apply_activity_csv(const std::filesystem::path& path, GroundTruth& truth) {
  const CsvTable table = read_csv(path);
  const int ct = table.column("timestamp_s");
  const int ca = table.column("active");
  if (ct < 0 || ca < 0) throw InputError("expected columns timestamp_s,active in " + path.string());
  if (table.rows.empty()) throw InputError("empty activity file: " + path.string());
  std::vector<double> ts;
  for (const auto& r : table.rows) ts.push_back(r[static_cast<size_t>(ct)]);
  for (size_t k = 0; k < truth.trajectory.timestamps.size(); ++k) {
    const double t = truth.trajectory.timestamps[k];
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    auto j = static_cast<size_t>(it - ts.begin());
    if (j == ts.size()) {
      j = ts.size() - 1;
    } else if (j > 0 && t - ts[j - 1] <= ts[j] - t) {
      --j;
    }
    truth.active[k] = table.rows[j][static_cast<size_t>(ca)] != 0.0;
  }
}

Trajectory to_frame(const Trajectory& traj, CoordinateFrame target, const MicArrayGeometry& geom) {
  if (traj.frame == target || geom.transforms.empty()) {
    Trajectory out = traj;
    out.frame = target;
    return out;
  }
  Trajectory out = traj;
  out.frame = target;
  for (Index k = 0; k < traj.size(); ++k) {
    const RigidTransform tr = geom.transform_at(traj.timestamps[static_cast<size_t>(k)]);
    out.positions.col(k) = target == CoordinateFrame::kWorld ? tr.to_world(traj.position(k))
                                                              : tr.to_local(traj.position(k));
  }
  return out;
}

}  // namespace gcftrack
