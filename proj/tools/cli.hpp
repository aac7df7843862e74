#pragma once

// Command-line surface: validate | report | functional | verify-identities | flow | zoo.

#include <array>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "finsler/zoo.hpp"

namespace finsler::cli {

inline constexpr const char* kVersion = "0.1.0";

struct Tolerances {
  double homogeneity = 1e-8;
  double positivity = 1e-6;
  double reference = 1e-6;
  double variation = 1e-3;
  double functional = 1e-2;
  double adjointness = 1e-3;
};

struct RunConfig {
  std::string command;
  std::string action = "list";  // zoo only: list | check
  std::string metric = "euclidean";
  ZooParams params;
  std::array<int, 3> grid{32, 32, 32};  // base, base, fiber
  bool normalized = false;
  std::string stepper = "rk4";
  std::string diff = "spectral";       // flow base derivatives: spectral | fd4
  std::string base_mode = "analytic";  // report: analytic | fd
  double dt = 0.0;                     // 0: dt policy
  int steps = 10;
  double safety = 0.25;
  double noise_floor = -1.0;  // < 0: grid default
  std::vector<double> x{0.0, 0.0};
  double theta = 0.0;
  int samples = 64;
  std::string direction = "conformal";  // verify-identities: conformal | quadratic
  Tolerances tolerances;
  std::string out;  // empty: finsler-runs/<command>
  int threads = 0;  // 0: available parallelism
  int checkpoint_every = 0;
  std::string resume;  // checkpoint to continue a flow from
};

// Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.
// env is consulted for FINSLER_THREADS only.
int run_command(const std::vector<std::string>& argv, const std::map<std::string, std::string>& env,
                std::ostream& out, std::ostream& err);

}  // namespace finsler::cli
