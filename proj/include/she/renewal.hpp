#pragma once

#include <cstdint>
#include <optional>

namespace she {

struct RenewalRoot {
  double mu = 0.0;
  /// b for the continuous density, b~ for the discrete one.
  double b = 0.0;
  /// |total mass - 1| from an evaluation independent of the root finder.
  double mass_error = 0.0;
  double lower_bound = 0.0;
  bool lower_bound_ok = false;
  /// pi mu^2 b^2: the exponential rate carried by the density.
  double implied_rate = 0.0;
  /// Discrete case: terms summed directly for the mass check, and the
  /// geometric tail bound added to it.
  std::int64_t terms = 0;
  double tail_bound = 0.0;
  /// Discrete case: 1/(mu b~) - 2 sqrt(tau) <= sum e^{-c r} tau/sqrt(r tau) <= 1/(mu b~).
  bool sandwich_ok = true;
};

/// Root of h(mu) = b / sqrt(mu^2 b^2 + 2 n^2 pi) - (1/mu - 1), b = lambda^2 J0^2 / sqrt(32 pi).
/// zeta only enters the lower-bound check and defaults to n / lambda^2.
RenewalRoot continuous_mu(double lambda, double j0, int n,
                          std::optional<double> zeta = std::nullopt);

/// Root of h~(mu) = sqrt(tau) [S(c1) - S(c2)] - 1/b~ with b~ = lambda^2 J0^2 / (8 sqrt(pi)),
/// c1 = pi mu^2 b~^2 tau, c2 = c1 + 4 n^2 pi^2 tau, S(c) = sum_{r>=1} e^{-c r}/sqrt(r).
/// Throws std::domain_error when n < zeta lambda^2 or the step-size gate fails.
RenewalRoot discrete_mu(double lambda, double j0, int n, double tau, double zeta);

/// Root of the tau -> 0 limit of h~: 1/mu - b~ / sqrt(mu^2 b~^2 + 4 n^2 pi) - 1.
RenewalRoot discrete_mu_limit(double lambda, double j0, int n, double zeta);

/// S(c) = sum_{r>=1} e^{-c r} / sqrt(r): direct terms plus an Euler-Maclaurin
/// tail with a certified remainder bound (returned through `remainder`).
double decay_series(double c, double* remainder = nullptr);

/// Direct summation of sum_r g~(r) up to the first R with tail bound < 1e-12.
double discrete_mass_direct(double mu, double btilde, int n, double tau,
                            std::int64_t* terms = nullptr, double* tail = nullptr);

}  // namespace she
