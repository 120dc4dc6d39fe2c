#pragma once

#include <Eigen/Core>

#include <random>
#include <stdexcept>
#include <string>

namespace gcftrack {

using Vec3 = Eigen::Vector3d;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

inline constexpr double kSpeedOfSound = 343.0;

// Malformed or out-of-contract input (files, parameters). CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation whose result carries no information (all-silent input,
// zero particle weights). CLI exit code 3.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InputError(what);
}

}  // namespace gcftrack
