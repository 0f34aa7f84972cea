#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "she/model.hpp"

namespace she {

enum class Regime { ExplicitLike, CrankNicolson, ImplicitLike };

const char* to_string(Regime r);

struct StabilityReport {
  Regime regime = Regime::ImplicitLike;
  bool satisfied = false;
  /// Margin with |R1_j R2_j| <= 1 - epsilon for j >= 1.
  double epsilon = 0.0;
  /// The regime's own epsilon before tightening by the actual factors.
  double epsilon_regime = 0.0;
  int binding_mode = 0;
  double max_amplification = 0.0;
  std::string diagnostic;
};

/// `r` only matters for theta < 1/2, where it defaults to n^2 tau.
StabilityReport check_stability(int n, double tau, double theta,
                                std::optional<double> r = std::nullopt);

struct PositivityTime {
  double t_star = 0.0;
  /// The time given by the sufficient bound before shrinking.
  double t_sufficient = 0.0;
  /// Step count for the fully discrete kernel (t_star = steps * tau).
  std::int64_t steps = 0;
  std::int64_t steps_sufficient = 0;
  /// Grid size used for the brute-force minimum over all n^2 pairs.
  int certified_on = 0;
  double min_at_t_star = 0.0;
  double min_at_twice_t_star = 0.0;
};

PositivityTime positivity_time_semi(int n);

/// Throws std::domain_error when the scheme is unstable.
PositivityTime positivity_time_full(int n, double tau, double theta);

bool check_sharp_regime(int n, double tau, const ModelSpec& model,
                        double zeta);

/// Left-hand side J0^4 n^2 tau / (16 pi zeta^2) + 16 pi n^2 tau of the gate.
double sharp_gate_value(int n, double tau, double j0, double zeta);

}  // namespace she
