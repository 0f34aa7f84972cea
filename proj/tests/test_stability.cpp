#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "she/kernels.hpp"
#include "she/spectral.hpp"
#include "she/stability.hpp"

using namespace she;

namespace {

double grid_min(const std::vector<double>& g) { return *std::min_element(g.begin(), g.end()); }

}  // namespace

TEST_CASE("explicit-like regime") {
  const auto a = check_stability(4, 0.02, 0.0);
  CHECK(a.regime == Regime::ExplicitLike);
  CHECK(a.satisfied);
  CHECK(a.epsilon_regime == doctest::Approx(2.0 - 4.0 * 0.32));
  const auto b = check_stability(10, 0.01, 0.0);
  CHECK_FALSE(b.satisfied);
  CHECK(b.diagnostic.find("binding mode") != std::string::npos);
  // theta = 1/4 relaxes the bound to n^2 tau < 1.
  CHECK(check_stability(10, 0.009, 0.25).satisfied);
  CHECK_FALSE(check_stability(10, 0.011, 0.25).satisfied);
}

TEST_CASE("Crank-Nicolson regime") {
  const auto r = check_stability(10, 0.009, 0.5);
  CHECK(r.regime == Regime::CrankNicolson);
  CHECK(r.satisfied);
  CHECK(r.epsilon_regime == doctest::Approx(std::min(0.5, 1.0 / (0.9 + 0.5))));
}

TEST_CASE("implicit-like regime") {
  const auto r = check_stability(64, 0.3, 0.75);
  CHECK(r.regime == Regime::ImplicitLike);
  CHECK(r.satisfied);
  CHECK(r.epsilon_regime == doctest::Approx(1.0 / 3.0));
  for (int n : {3, 4, 8, 16, 64})
    for (double tau : {1e-2, 1e-3, 1e-4, 1e-5})
      for (double theta : {0.6, 0.75, 1.0}) CHECK(check_stability(n, tau, theta).satisfied);
}

TEST_CASE("reported epsilon bounds every amplification factor") {
  for (int n : {3, 8, 16})
    for (double theta : {0.0, 0.25, 0.5, 0.75, 1.0})
      for (double tau : {1e-2, 1e-3, 1e-4}) {
        const auto r = check_stability(n, tau, theta);
        if (!r.satisfied) continue;
        const SpectralBasis b(n);
        const AmplificationFactors f(b, tau, theta);
        for (int j = 1; j < n; ++j)
          CHECK(std::abs(f.beta[static_cast<std::size_t>(j)]) <= 1.0 - r.epsilon + 1e-15);
      }
}

TEST_CASE("semi-discrete positivity time") {
  const auto p3 = positivity_time_semi(3);
  CHECK(p3.t_sufficient == doctest::Approx(std::log(4.0) / 27.0).epsilon(1e-14));
  CHECK(p3.t_sufficient == doctest::Approx(0.051341).epsilon(1e-5));
  double prev = 0.0;
  for (int n : {3, 4, 8, 16}) {
    const auto p = positivity_time_semi(n);
    CHECK(p.t_star <= p.t_sufficient);
    CHECK(grid_min(semi_green_grid(p.t_star, SpectralBasis(n))) >= 0.5);
    CHECK(p.min_at_t_star >= 0.5);
    CHECK(p.t_sufficient >= prev);
    prev = p.t_sufficient;
  }
}

TEST_CASE("fully discrete positivity time") {
  const auto p = positivity_time_full(4, 0.01, 1.0);
  const SpectralBasis b(4);
  const AmplificationFactors f(b, 0.01, 1.0);
  CHECK(p.steps <= p.steps_sufficient);
  CHECK(p.t_star == doctest::Approx(p.steps * 0.01));
  CHECK(grid_min(full_green_grid(p.steps, FullKernel::G1, f, b)) >= 0.5);
  // From the returned step onward the grid minimum stays above 1/2.
  for (std::int64_t k = p.steps; k < p.steps + 200; ++k)
    CHECK(grid_min(full_green_grid(k, FullKernel::G1, f, b)) >= 0.5);

  // Heavy damping: a single step suffices.
  CHECK(positivity_time_full(8, 0.5, 1.0).steps <= 1);
  CHECK_THROWS_AS(positivity_time_full(10, 0.01, 0.0), std::domain_error);
}

TEST_CASE("sharp regime gate") {
  ModelSpec m;
  m.lambda = 2.0;
  CHECK(sharp_gate_value(4, 1e-4, 1.0, 1.0) == doctest::Approx(16e-4 / (16 * std::numbers::pi) +
                                                                 16 * std::numbers::pi * 16e-4));
  CHECK(sharp_gate_value(4, 1e-4, 1.0, 1.0) == doctest::Approx(0.0804).epsilon(1e-3));
  CHECK(check_sharp_regime(4, 1e-4, m, 1.0));
  CHECK_FALSE(check_sharp_regime(3, 1e-4, m, 1.0));
  m.lambda = 1.0;
  const double tau = 1.0 / (16.0 * std::numbers::pi * 16.0);
  CHECK_FALSE(check_sharp_regime(4, tau, m, 1.0));
}
