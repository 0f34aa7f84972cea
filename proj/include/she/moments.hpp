#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "she/model.hpp"

namespace she {

using MomentMatrix = Eigen::MatrixXd;

enum class MomentSource { ExactRecursion, MonteCarlo };

struct MomentSeries {
  std::vector<double> times;
  /// log E|u(t, probe)|^p; kept in log form so long horizons do not overflow.
  std::vector<double> log_values;
  /// Standard error of E|u|^p (Monte Carlo only), relative to the value.
  std::vector<double> rel_stderr;
  double p = 2.0;
  MomentSource source = MomentSource::ExactRecursion;
  std::int64_t paths = 0;
  std::uint64_t seed = 0;
  /// Set when a path exceeded the blow-up threshold and the series stops early.
  bool horizon_truncated = false;

  double value(std::size_t i) const;
  double stderr_abs(std::size_t i) const;
};

struct GrowthFit {
  double gamma = 0.0;
  double intercept = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  double r_squared = 0.0;
  /// Half-width of the 95% Student-t interval for gamma.
  double ci_halfwidth = 0.0;
  int points = 0;
};

/// Full matrices M^i = E[u^i (u^i)^T] for i = 0..steps from the dense
/// recursion M' = B M B^T + lambda^2 n tau c^2 R1 diag(M) R1^T. Requires linear
/// sigma; throws std::invalid_argument otherwise.
std::vector<MomentMatrix> exact_second_moment_recursion(const GridSpec& grid,
                                                        const SchemeSpec& scheme,
                                                        const ModelSpec& model,
                                                        std::int64_t steps);

enum class RecursionPath { Auto, Dense, Circulant };

/// min_j log E|u_j|^2 at every step 0..steps (the inf over grid points).
/// Auto uses the O(n) circulant path when u0 is constant.
MomentSeries exact_second_moment_series(const GridSpec& grid, const SchemeSpec& scheme,
                                        const ModelSpec& model, std::int64_t steps,
                                        RecursionPath path = RecursionPath::Auto,
                                        int stride = 1);

struct McOptions {
  std::int64_t paths = 1000;
  std::uint64_t seed = 1;
  int probe = 0;
  /// Record every `stride` steps (0 always included).
  int stride = 1;
  unsigned threads = 0;
};

/// Monte Carlo estimates of E|u(t, x_probe)|^p for each p, with standard
/// errors. Aggregation is in fixed path chunks and a fixed reduction order,
/// so results do not depend on the thread count.
std::vector<MomentSeries> mc_moments(const GridSpec& grid, const SchemeSpec& scheme,
                                     const ModelSpec& model, const std::vector<double>& ps,
                                     std::int64_t steps, const McOptions& opts);

MomentSeries mc_moment(const GridSpec& grid, const SchemeSpec& scheme,
                       const ModelSpec& model, double p, std::int64_t steps,
                       const McOptions& opts);

/// Least-squares slope of log values against time on [t_a, t_b]. Throws
/// std::invalid_argument with fewer than 5 points in the window.
GrowthFit fit_growth(const MomentSeries& series, double t_a, double t_b);

/// Default window start: max(positivity time, 20% of the horizon).
double default_window_start(double horizon, double positivity_time);

struct SweepPoint {
  double lambda = 0.0;
  int n = 0;
  double tau = 0.0;
  double gate_value = 0.0;
  bool gate_ok = false;
  GrowthFit fit;
  /// log(1 + lambda^2 tau) / tau.
  double lower_rate = 0.0;
  /// 4 pi^2 zeta^2 J0^4 lambda^4 / (J0^2 + 32 pi zeta)^2.
  double sharp_rate = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double slope = 0.0;
  double slope_ci = 0.0;
  double zeta = 0.0;
};

struct SweepOptions {
  double zeta = 2.0;
  std::vector<double> lambdas{1.0, 1.5, 2.0, 2.5};
  double tau = 1e-4;
  double theta = 1.0;
  double horizon = 5.0;
  /// Record stride for the fitted series.
  int stride = 50;
  unsigned threads = 0;

  friend bool operator==(const SweepOptions&, const SweepOptions&) = default;
};

/// n = max(3, ceil(zeta lambda^2)), sigma = identity, u0 = 1.
SweepResult lambda_scaling_sweep(const SweepOptions& opts);

int sweep_grid_size(double zeta, double lambda);

struct IntermittencyRow {
  double p = 0.0;
  GrowthFit fit;
  bool finite = false;
};

struct IntermittencyReport {
  std::vector<IntermittencyRow> rows;
  std::optional<GrowthFit> exact_gamma2;
  bool gamma2_positive = false;
  bool all_finite = false;
  /// gamma_p / p nondecreasing in p within the fit intervals.
  bool normalized_nondecreasing = false;
  bool horizon_truncated = false;
};

IntermittencyReport intermittency_report(const GridSpec& grid, const SchemeSpec& scheme,
                                         const ModelSpec& model, const std::vector<double>& ps,
                                         double horizon, const McOptions& opts);

/// Discrete reverse Gronwall: if y_k >= alpha + beta sum_{i<k} y_i for all
/// k >= N, then y_{N+l} >= (alpha + beta sum_{i<N} y_i)(1+beta)^l. Returns
/// the first N from which the hypothesis holds to the end (or nullopt), and
/// whether the conclusion holds there.
struct GronwallCheck {
  std::optional<std::size_t> start;
  bool conclusion_holds = false;
};
GronwallCheck check_reverse_gronwall_discrete(const std::vector<double>& y, double alpha,
                                              double beta);

/// Continuous version on a uniform grid with spacing h (trapezoidal
/// integrals): phi(t) >= alpha + beta int_0^t phi implies
/// phi(t) >= e^{beta (t-a)}(alpha + beta int_0^a phi).
GronwallCheck check_reverse_gronwall_continuous(const std::vector<double>& phi, double h,
                                                double alpha, double beta);

}  // namespace she
