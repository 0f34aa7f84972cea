#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "she/model.hpp"

namespace she {

struct GreenQuadSpec {
  /// Gauss-Legendre nodes per panel; one of 7, 10, 15, 20, 25, 30.
  int nodes = 15;
  /// Panels per 1/n in the variable s = sqrt(t) (semi-discrete case).
  int panels_per_cell = 4;
  /// Gauss-Legendre nodes per time step (fully discrete case).
  int step_nodes = 10;
  /// Also evaluate with every panel split in two and report the relative change.
  bool check_halving = true;
  /// Refuse fully discrete quadrature beyond this many time steps.
  std::int64_t max_steps = 400000;
};

struct GreenErrorResult {
  /// int_0^T int_0^1 |G - G_h|^2 dy dt at the finer resolution.
  double value = 0.0;
  /// Certified bound on the neglected part int_T^infinity.
  double tail_bound = 0.0;
  double horizon = 0.0;
  /// |fine - coarse| / fine from the halving check.
  double halving_change = 0.0;
  bool converged = true;
};

/// int_0^infinity int_0^1 |G(t,x,y) - G^n(t,x,y)|^2 dy dt by quadrature.
GreenErrorResult green_error_semi(int n, double x, const GreenQuadSpec& q = {});

/// The same integral at grid points x, from the Fourier-series closed form.
double green_error_semi_series(int n, std::int64_t modes = 200000);

/// int_0^infinity int_0^1 |G - G2^{n,tau}|^2 dy dt by per-step quadrature.
GreenErrorResult green_error_full(int n, double tau, double theta, double x,
                                  const GreenQuadSpec& q = {});

double green_error_full_series(int n, double tau, double theta,
                               std::int64_t modes = 200000);

/// Integrand in time: int_0^1 |G(t,x,y) - G^n(t,x,y)|^2 dy.
double green_error_semi_at(int n, double x, double t);
double green_error_full_at(int n, double tau, double theta, double x, double t);

/// |int_0^1 (G^n(t,x,y) - G1(t,x,y)) u0([ny]/n) dy|^2 for grid samples u0.
double initial_data_error(int n, double tau, double theta, double x, double t,
                          const std::vector<double>& u0);

enum class RefineDirection { Temporal, Spatial };

const char* to_string(RefineDirection d);

struct Rung {
  int n = 0;
  double tau = 0.0;
  std::uint64_t seed = 0;
};

/// Coarse rungs plus the reference (finest) discretization. All rungs must
/// carry the reference seed, divide it evenly, and be at least 4x coarser
/// in the refined direction.
struct RefinementLadder {
  RefineDirection direction = RefineDirection::Temporal;
  std::vector<Rung> rungs;
  Rung reference;
};

struct StrongStudyConfig {
  double lambda = 1.0;
  double theta = 1.0;
  SigmaSpec sigma = SigmaSpec::linear(1.0);
  InitialData u0 = InitialData::constant(1.0);
  double horizon = 1.0 / 16.0;
  std::int64_t paths = 400;
  unsigned threads = 0;
};

struct ErrorCurve {
  RefineDirection direction = RefineDirection::Temporal;
  std::vector<Rung> resolutions;
  /// Root-mean-square error at (T, x = 0) against the reference.
  std::vector<double> errors;
  std::vector<double> stderrs;
  double fitted_order = 0.0;
  double ci = 0.0;
  std::int64_t paths = 0;
  std::uint64_t seed = 0;
};

/// Standard ladders: temporal rungs tau = 2^-k at fixed n; spatial rungs n at
/// fixed tau. `reference_*` is the finest level.
RefinementLadder temporal_ladder(int n, const std::vector<int>& tau_exponents,
                                 int reference_exponent, std::uint64_t seed);
RefinementLadder spatial_ladder(double tau, const std::vector<int>& ns, int reference_n,
                                std::uint64_t seed);

/// Coupled-noise strong error: every rung is driven by sums of the
/// reference's noise cells. Throws std::invalid_argument on a malformed
/// ladder (including mismatched seeds) or on sampled initial data whose
/// length differs from a rung's n.
ErrorCurve strong_error_study(const StrongStudyConfig& cfg, const RefinementLadder& ladder);

/// Least-squares order: err ~ h^q with h = tau (temporal) or 1/n (spatial).
void fit_order(ErrorCurve& curve);

}  // namespace she
