#include <gcftrack/geometry.hpp>

#include <algorithm>
#include <fstream>

namespace gcftrack {

double MicArrayGeometry::pair_distance(Index pair) const {
  const MicPair& p = pairs.at(static_cast<size_t>(pair));
  return (mics.col(p.first) - mics.col(p.second)).norm();
}

RigidTransform MicArrayGeometry::transform_at(double t) const {
  if (transforms.empty()) return RigidTransform{};
  auto it = std::upper_bound(transforms.begin(), transforms.end(), t,
                             [](double v, const RigidTransform& tr) { return v < tr.time; });
  if (it == transforms.begin()) return transforms.front();
  return *std::prev(it);
}

Eigen::Matrix3Xd MicArrayGeometry::mics_at(double t) const {
  if (transforms.empty()) return mics;
  const RigidTransform tr = transform_at(t);
  Eigen::Matrix3Xd world = tr.rotation * mics;
  world.colwise() += tr.translation;
  return world;
}

void MicArrayGeometry::validate() const {
  require(mic_count() >= 2, "geometry needs at least two microphones");
  require(!pairs.empty(), "geometry has no microphone pairs");
  for (const MicPair& p : pairs) {
    require(p.first >= 0 && p.first < mic_count() && p.second >= 0 && p.second < mic_count(),
            "pair index out of range");
    require(p.first != p.second, "pair uses the same microphone twice");
    require((mics.col(p.first) - mics.col(p.second)).norm() > 0.0, "pair microphones coincide");
  }
  for (size_t i = 1; i < transforms.size(); ++i) {
    require(transforms[i].time > transforms[i - 1].time, "transform times must be strictly increasing");
  }
}

MicArrayGeometry geometry_from_json(const nlohmann::json& j) {
  MicArrayGeometry g;
  try {
    const auto& mics = j.at("mics");
    g.mics.resize(3, static_cast<Index>(mics.size()));
    for (size_t i = 0; i < mics.size(); ++i) {
      const auto& m = mics[i];
      g.ids.push_back(m.value("id", static_cast<int>(i)));
      g.mics.col(static_cast<Index>(i)) = Vec3(m.at("x").get<double>(), m.at("y").get<double>(), m.at("z").get<double>());
    }
    if (j.contains("pairs")) {
      for (const auto& p : j.at("pairs")) {
        g.pairs.push_back({p.at(0).get<Index>(), p.at(1).get<Index>()});
      }
    } else {
      for (Index a = 0; a < g.mic_count(); ++a)
        for (Index b = a + 1; b < g.mic_count(); ++b) g.pairs.push_back({a, b});
    }
    g.planar = j.value("planar", false);
    if (j.contains("reference")) {
      const auto& r = j.at("reference");
      g.reference = Vec3(r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>());
    } else if (g.mic_count() > 0) {
      g.reference = g.mics.rowwise().mean();
    }
    if (j.contains("transforms")) {
      for (const auto& row : j.at("transforms")) {
        require(row.size() == 13, "transform rows must be t, tx, ty, tz, r11..r33");
        RigidTransform tr;
        tr.time = row[0].get<double>();
        tr.translation = Vec3(row[1].get<double>(), row[2].get<double>(), row[3].get<double>());
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) tr.rotation(r, c) = row[static_cast<size_t>(4 + 3 * r + c)].get<double>();
        g.transforms.push_back(tr);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed geometry JSON: ") + e.what());
  }
  g.validate();
  return g;
}

nlohmann::json to_json(const MicArrayGeometry& geom) {
  nlohmann::json j;
  j["mics"] = nlohmann::json::array();
  for (Index i = 0; i < geom.mic_count(); ++i) {
    j["mics"].push_back({{"id", geom.ids.empty() ? static_cast<int>(i) : geom.ids[static_cast<size_t>(i)]},
                         {"x", geom.mics(0, i)},
                         {"y", geom.mics(1, i)},
                         {"z", geom.mics(2, i)}});
  }
  j["pairs"] = nlohmann::json::array();
  for (const MicPair& p : geom.pairs) j["pairs"].push_back({p.first, p.second});
  j["planar"] = geom.planar;
  j["reference"] = {geom.reference.x(), geom.reference.y(), geom.reference.z()};
  if (!geom.transforms.empty()) {
    j["transforms"] = nlohmann::json::array();
    for (const RigidTransform& tr : geom.transforms) {
      nlohmann::json row = {tr.time, tr.translation.x(), tr.translation.y(), tr.translation.z()};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) row.push_back(tr.rotation(r, c));
      j["transforms"].push_back(row);
    }
  }
  return j;
}

MicArrayGeometry load_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open geometry file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("geometry file is not valid JSON: " + std::string(e.what()));
  }
  return geometry_from_json(j);
}

void save_geometry(const std::filesystem::path& path, const MicArrayGeometry& geom) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_json(geom).dump(2) << '\n';
}

MicArrayGeometry dicit_like_geometry(double height) {
  // Horizontal line, left to right.
  const std::vector<double> xs = {-0.96, -0.64, -0.32, -0.16, -0.08, -0.04, 0.0,
                                  0.04,  0.08,  0.16,  0.32,  0.64,  0.96};
  MicArrayGeometry g;
  g.mics.resize(3, 15);
  for (size_t i = 0; i < xs.size(); ++i) {
    g.mics.col(static_cast<Index>(i)) = Vec3(xs[i], 0.0, height);
    g.ids.push_back(static_cast<int>(i) + 1);
  }
  g.mics.col(13) = Vec3(-0.96, 0.0, height + 0.32);
  g.mics.col(14) = Vec3(0.96, 0.0, height + 0.32);
  g.ids.push_back(14);
  g.ids.push_back(15);
  g.pairs = {{0, 1}, {1, 2}, {10, 11}, {11, 12}, {0, 13}, {12, 14}};
  g.planar = true;
  g.reference = Vec3(0.0, 0.0, height);
  return g;
}

}  // namespace gcftrack
