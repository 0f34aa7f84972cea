#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "she/model.hpp"
#include "she/moments.hpp"

namespace she {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitBlowUp = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateTask {
  std::int64_t steps = 100;
  std::int64_t record_every = 10;
  std::uint32_t path = 0;
  friend bool operator==(const SimulateTask&, const SimulateTask&) = default;
};

struct MomentsTask {
  std::vector<double> ps{2.0};
  std::int64_t paths = 1000;
  std::int64_t steps = 100;
  int stride = 1;
  int probe = 0;
  /// Also emit the exact second-moment recursion (linear sigma only).
  bool exact = true;
  friend bool operator==(const MomentsTask&, const MomentsTask&) = default;
};

struct RenewalTask {
  double lambda = 1.0;
  double j0 = 1.0;
  int n = 4;
  std::optional<double> zeta;
  /// Step sizes for the discrete root; empty means continuous only.
  std::vector<double> taus;
  friend bool operator==(const RenewalTask&, const RenewalTask&) = default;
};

struct ConvergenceTask {
  /// green-semi, green-full, strong-temporal or strong-spatial.
  std::string kind = "green-semi";
  double x = 0.0;
  /// green-semi grid sizes; strong-spatial rungs.
  std::vector<int> ns{8, 16, 32, 64};
  /// green-full step sizes at n = `n`.
  std::vector<double> taus{0.1, 0.025, 0.00625, 0.0015625};
  int n = 64;
  std::vector<int> tau_exponents{8, 9, 10, 11, 12, 13, 14};
  int reference_exponent = 18;
  double tau = 1.0 / 16384.0;
  int reference_n = 1024;
  double horizon = 1.0 / 16.0;
  std::int64_t paths = 400;
  friend bool operator==(const ConvergenceTask&, const ConvergenceTask&) = default;
};

struct GreenCheckTask {
  std::vector<int> ns{3, 4, 8, 16, 64};
  std::vector<double> thetas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> taus{1e-2, 1e-3, 1e-4, 1e-5};
  double full_upper_constant = 1.0;
  friend bool operator==(const GreenCheckTask&, const GreenCheckTask&) = default;
};

/// One JSON document configures every subcommand; each reads its own
/// section plus the shared grid / scheme / model / seed.
struct RunConfig {
  GridSpec grid{8};
  SchemeSpec scheme;
  ModelSpec model;
  std::uint64_t seed = 1;
  GreenCheckTask green_check;
  SimulateTask simulate;
  MomentsTask moments;
  SweepOptions sweep;
  RenewalTask renewal;
  ConvergenceTask convergence;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
RunConfig config_from_json(const std::string& text);
/// Canonical form: fixed key order, shortest round-trip numbers.
std::string config_to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

int run_cli(int argc, char** argv);

}  // namespace she
