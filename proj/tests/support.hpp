#pragma once

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "phasekit/hilbert.hpp"

namespace testing {

inline double max_diff(const phasekit::Matrix& a, const phasekit::Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_diff(const phasekit::HilbertOperator& a, const phasekit::HilbertOperator& b) {
  return max_diff(a.matrix(), b.matrix());
}

/// Fresh directory under PHASEKIT_TEST_TMP (or the system temp dir).
inline std::string scratch_dir(const std::string& name) {
  const char* root = std::getenv("PHASEKIT_TEST_TMP");
  std::filesystem::path p = root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "phasekit_tests";
  p /= name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

/// Uniform point on the unit sphere as (theta, phi).
inline std::pair<double, double> random_direction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double z = 2.0 * u(rng) - 1.0;
  return {std::acos(z), 2.0 * 3.14159265358979323846 * u(rng)};
}

}  // namespace testing
