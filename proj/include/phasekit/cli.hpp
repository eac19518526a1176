#pragma once

// Command-line front end. Subcommands: verify, qpd, simulate, reconstruct,
// entropy, grid-export. Exit codes: 0 success, 1 tolerance failure,
// 2 usage or configuration error, 3 I/O error.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "phasekit/backend.hpp"
#include "phasekit/errors.hpp"

namespace phasekit::cli {

/// Invalid flag value or configuration file content.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { kOk = 0, kToleranceFailure = 1, kUsageError = 2, kIoError = 3 };

struct RunConfig {
  std::string group = "su2";  // "su2" or "hw"
  int two_j = 2;
  int n_max = 30;
  int level = 3;
  // Sphere grids with explicit resolution when n_theta > 0.
  int n_theta = 0;
  int sphere_n_phi = 0;
  // Planar alpha grid.
  double r_max = 7.0;
  int n_r = 96;
  int n_phi = 96;
  std::vector<double> s;
  std::string state;
  std::string ruler = "all";
  long long shots = 0;
  double eta = 1.0;
  std::uint64_t seed = 1;
  std::string output = ".";
  double tolerance = -1.0;  // negative means the command default
  int operators = 50;
  int group_elements = 20;
  int support = -1;
  std::string records;
  std::string truth;
  double kappa_floor = 1e-8;
};

/// Fields in snake_case; "output" is omitted since it does not affect results.
nlohmann::json to_json(const RunConfig& c);
/// Unknown keys and ill-typed values throw ConfigError.
RunConfig from_json(const nlohmann::json& j);

/// "3/2", "1.5" or "2" -> 2j. Throws ConfigError.
int parse_two_j(const std::string& text);

std::unique_ptr<Backend> make_backend(const RunConfig& c);

/// Runs the command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phasekit::cli
