#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "she/kernels.hpp"
#include "she/lemmas.hpp"
#include "she/spectral.hpp"

using namespace she;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr double kPi = std::numbers::pi;

// Plain spectral sum with many terms, in long double.
double brute_heat(double t, double d, int terms) {
  long double s = 1.0L;
  for (int m = terms; m >= 1; --m)
    s += 2.0L * std::exp(-4.0L * kPi * kPi * m * m * t) * std::cos(2.0L * kPi * m * d);
  return static_cast<double>(s);
}

// Integral over [0,1] split at the cell edges, where the discrete kernels jump.
template <class F>
double cellwise_quad(F f, int n) {
  double s = 0.0;
  for (int l = 0; l < n; ++l)
    s += gauss_kronrod<double, 61>::integrate(f, static_cast<double>(l) / n,
                                               static_cast<double>(l + 1) / n, 10, 1e-12);
  return s;
}

}  // namespace

TEST_CASE("heat kernel matches a 2000-term spectral sum") {
  CHECK(std::abs(heat_kernel(0.1, 0.3, 0.3) - brute_heat(0.1, 0.0, 2000)) < 1e-12);
  for (double t : {1e-3, 0.01, 0.049, 0.05, 0.2})
    for (double d : {0.0, 0.13, 0.5, 0.77})
      CHECK(std::abs(heat_kernel(t, d, 0.0) - brute_heat(t, d, 2000)) < 1e-10 * brute_heat(t, d, 2000) + 1e-13);
}

TEST_CASE("image and spectral forms agree at the crossover") {
  for (double d : {0.0, 0.25, 0.5})
    CHECK(std::abs(heat_kernel_images(0.05, d, 4) - heat_kernel_spectral(0.05, d, 5)) < 1e-12);
}

TEST_CASE("heat kernel symmetry and translation invariance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double t = 1e-3 + u(rng), x = u(rng), y = u(rng), s = u(rng);
    const double g = heat_kernel(t, x, y);
    CHECK(heat_kernel(t, y, x) == doctest::Approx(g).epsilon(1e-13));
    CHECK(heat_kernel(t, std::fmod(x + s, 1.0), std::fmod(y + s, 1.0)) ==
          doctest::Approx(g).epsilon(1e-12));
  }
}

TEST_CASE("heat kernel conservation and square integral") {
  for (double t : {1e-4, 0.01, 0.3}) {
    double mass = 0.0;
    for (int l = 0; l < 16; ++l) mass += heat_kernel_cell_integral(t, 0.37, l / 16.0, (l + 1) / 16.0);
    CHECK(std::abs(mass - 1.0) < 1e-12);
  }
  CHECK(heat_kernel_square_integral(0.01) >= 1.0 / std::sqrt(0.08 * kPi));
  CHECK(heat_kernel_square_integral(0.01) == doctest::Approx(1.99471).epsilon(1e-3));
  CHECK(heat_kernel_square_integral(50.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double t : {0.003, 0.01, 0.2}) {
    auto f = [&](double y) {
      const double g = heat_kernel(t, 0.37, y);
      return g * g;
    };
    const double q = gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 10, 1e-12);
    CHECK(std::abs(q - heat_kernel_square_integral(t)) < 1e-9);
  }
}

TEST_CASE("centered cell integral avoids cancellation") {
  const double t = 2.0;
  const double c = heat_kernel_cell_integral_centered(t, 0.0, 0.0, 0.25);
  const double direct = heat_kernel_cell_integral(t, 0.0, 0.0, 0.25) - 0.25;
  CHECK(c != 0.0);
  CHECK(std::abs(c) < 1e-30);
  CHECK(std::abs(direct) < 1e-15);
}

TEST_CASE("semi-discrete kernel spot values") {
  const SpectralBasis b(3);
  CHECK(b.eigenvalue(1) == doctest::Approx(-27.0).epsilon(1e-14));
  CHECK(semi_green(0.01, 0.0, 0.0, b) == doctest::Approx(1.0 + 2.0 * std::exp(-0.27)).epsilon(1e-14));
  CHECK(semi_green(0.01, 0.0, 0.0, b) == doctest::Approx(2.52676).epsilon(1e-5));
  CHECK(semi_green_square_integral(0.01, 0.0, b) == doctest::Approx(2.16550).epsilon(1e-5));
  CHECK(semi_green_square_integral(100.0, 0.3, b) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("semi-discrete kernel at t = 0 is a discrete delta") {
  const SpectralBasis b(8);
  for (int q = 0; q < 8; ++q)
    for (int l = 0; l < 8; ++l)
      CHECK(std::abs(semi_green(0.0, q / 8.0, l / 8.0, b) - (q == l ? 8.0 : 0.0)) < 1e-12);
}

TEST_CASE("discrete kernels conserve mass") {
  for (int n : {3, 4, 16}) {
    const SpectralBasis b(n);
    for (double t : {0.0, 1e-3, 0.1, 3.0}) {
      CHECK(std::abs(cellwise_integral(semi_green_grid(t, b)) - 1.0) < 1e-12);
      std::vector<double> off(static_cast<std::size_t>(n));
      for (int l = 0; l < n; ++l) off[static_cast<std::size_t>(l)] = semi_green(t, 0.37, static_cast<double>(l) / n, b);
      CHECK(std::abs(cellwise_integral(off) - 1.0) < 1e-12);
    }
    for (double theta : {0.5, 1.0}) {
      const AmplificationFactors f(b, 1e-3, theta);
      for (std::int64_t k : {0, 1, 50, 4000})
        CHECK(std::abs(cellwise_integral(full_green_grid(k, FullKernel::G1, f, b)) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("semi grid profile equals pointwise evaluation") {
  const SpectralBasis b(16);
  const auto g = semi_green_grid(0.002, b);
  for (int d = 0; d < 16; ++d)
    CHECK(g[static_cast<std::size_t>(d)] == doctest::Approx(semi_green(0.002, d / 16.0, 0.0, b)).epsilon(1e-12));
}

TEST_CASE("fully discrete kernel tends to the semi-discrete one") {
  // Implicit Euler: the error is first order in tau.
  const SpectralBasis b(4);
  auto gap = [&](double tau, double x, double y) {
    const AmplificationFactors f(b, tau, 1.0);
    // Half a step past t = 0.01 so the step count is exact.
    return std::abs(full_green(0.01 + 0.5 * tau, x, y, FullKernel::G1, f, b) - semi_green(0.01, x, y, b));
  };
  for (double x : {0.0, 0.3})
    for (double y : {0.0, 0.6}) {
      CHECK(gap(1e-6, x, y) < 1e-4);
      CHECK(gap(1e-6, x, y) / gap(5e-7, x, y) == doctest::Approx(2.0).epsilon(0.01));
    }
}

TEST_CASE("implicit G2 factors are contractions") {
  const SpectralBasis b(8);
  const AmplificationFactors f(b, 0.01, 1.0);
  for (int j = 1; j < 8; ++j) {
    const auto i = static_cast<std::size_t>(j);
    CHECK(f.r1[i] > 0.0);
    CHECK(f.r1[i] <= 1.0);
    CHECK(f.r2[i] == 1.0);
    CHECK(f.beta[i] * f.r1[i] == doctest::Approx(std::pow(1.0 - 0.01 * b.eigenvalue(j), -2.0)));
  }
}

TEST_CASE("fully discrete square integral against quadrature") {
  const SpectralBasis b(4);
  const AmplificationFactors f(b, 0.01, 1.0);
  for (double x : {0.0, 0.3}) {
    auto g2 = [&](double y) {
      const double v = full_green(0.05, x, y, FullKernel::G2, f, b);
      return v * v;
    };
    CHECK(std::abs(cellwise_quad(g2, 4) - full_green_square_integral(0.05, x, f, b)) < 1e-10);
  }
  double at0 = 0.0;
  for (int j = 0; j < 4; ++j) at0 += f.r1[static_cast<std::size_t>(j)] * f.r1[static_cast<std::size_t>(j)];
  CHECK(full_green_square_integral(0.0, 0.0, f, b) == doctest::Approx(at0));
  CHECK(at0 >= 1.0);
}

TEST_CASE("explicit scheme square integral simplifies") {
  const SpectralBasis b(4);
  const AmplificationFactors f(b, 0.02, 0.0);
  const std::int64_t k = 7;
  double s = 0.0;
  for (int j = 0; j < 4; ++j) s += std::pow(f.r2[static_cast<std::size_t>(j)], 2.0 * k);
  CHECK(full_green_square_integral(k * 0.02, 0.0, f, b) == doctest::Approx(s).epsilon(1e-13));
}

TEST_CASE("unstable factors are refused") {
  const SpectralBasis b(10);
  const AmplificationFactors f(b, 0.01, 0.0);
  CHECK_FALSE(f.stable);
  CHECK_THROWS_AS(full_green(0.1, 0.0, 0.0, FullKernel::G1, f, b), std::domain_error);
}

TEST_CASE("lemma suite on a reduced lattice") {
  LemmaSuiteOptions o;
  o.ns = {3, 8};
  o.taus = {1e-2, 1e-4};
  o.identity_samples = 3;
  const auto r = run_lemma_suite(o);
  for (const auto& s : r.summaries) {
    INFO(s.check);
    CHECK(s.passed());
    CHECK(s.evaluated > 0);
  }
  CHECK(r.passed());
}

TEST_CASE("fault injection names the failing check") {
  LemmaSuiteOptions o;
  o.ns = {4};
  o.taus = {1e-3};
  o.inject_fault = true;
  const auto r = run_lemma_suite(o);
  CHECK_FALSE(r.passed());
  bool named = false;
  for (const auto& s : r.summaries)
    if (!s.passed()) named = named || s.check.rfind("semi-square", 0) == 0;
  CHECK(named);
  REQUIRE_FALSE(r.failures.empty());
}
