#pragma once

#include <string>
#include <vector>

namespace she {

struct LemmaSuiteOptions {
  std::vector<int> ns{3, 4, 8, 16, 64};
  std::vector<double> thetas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> taus{1e-2, 1e-3, 1e-4, 1e-5};
  /// Log-spaced times; filled with 25 points over [1e-4, 1e2] when empty.
  std::vector<double> times;
  std::vector<double> xs{0.0, 0.37, 0.5, 0.81};
  /// Constant C in the fully discrete upper bound 1 + C / sqrt([t/tau] tau + tau).
  double full_upper_constant = 1.0;
  /// Number of random (t, x) points per n for the quadrature identities.
  int identity_samples = 6;
  unsigned long long seed = 7;
  /// Flips the sign of the first nonzero eigenvalue in the semi-discrete
  /// square-integral check.
  bool inject_fault = false;
};

struct LemmaFailure {
  std::string check;
  int n = 0;
  double theta = 0.0;
  double tau = 0.0;
  double t = 0.0;
  double x = 0.0;
  double value = 0.0;
  double bound = 0.0;
};

struct LemmaSummary {
  std::string check;
  std::string description;
  long long evaluated = 0;
  long long failed = 0;
  /// Worst relative slack (negative on failure).
  double worst_margin = 0.0;
  bool passed() const { return failed == 0; }
};

struct LemmaSuiteResult {
  std::vector<LemmaSummary> summaries;
  std::vector<LemmaFailure> failures;
  long long skipped_unstable = 0;
  bool passed() const;
};

LemmaSuiteResult run_lemma_suite(const LemmaSuiteOptions& opts = {});

std::vector<double> default_time_grid();

}  // namespace she
