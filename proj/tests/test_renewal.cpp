#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

#include "she/renewal.hpp"

using namespace she;

namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form mass of b e^{-a t}(1 - e^{-c t})/sqrt(t) on (0, inf).
double laplace_mass(double b, double a, double c) {
  return b * std::sqrt(kPi) * (1.0 / std::sqrt(a) - 1.0 / std::sqrt(a + c));
}

double toms_root(double b, double c_coef) {
  auto f = [&](double mu) { return laplace_mass(b, kPi * mu * mu * b * b, c_coef) - 1.0; };
  boost::uintmax_t it = 200;
  const auto r = boost::math::tools::toms748_solve(f, 1e-3, 1.0,
                                                  boost::math::tools::eps_tolerance<double>(50), it);
  return 0.5 * (r.first + r.second);
}

long double brute_series(double c) {
  long double s = 0.0L;
  const auto last = static_cast<long>(std::ceil(60.0 / c));
  for (long r = last; r >= 1; --r) s += std::exp(-static_cast<long double>(c) * r) / std::sqrt(static_cast<long double>(r));
  return s;
}

int grid_for(double zeta, double lambda) {
  return std::max(3, static_cast<int>(std::ceil(zeta * lambda * lambda)));
}

}  // namespace

TEST_CASE("continuous root at lambda = J0 = 1, n = 4") {
  const auto r = continuous_mu(1.0, 1.0, 4);
  CHECK(r.b == doctest::Approx(0.0997356).epsilon(1e-6));
  CHECK(r.mu == doctest::Approx(0.990151).epsilon(1e-6));
  CHECK(r.mu == doctest::Approx(toms_root(r.b, 2.0 * 16 * kPi * kPi)).epsilon(1e-12));
  CHECK(r.mass_error < 1e-8);
  CHECK(r.lower_bound_ok);
  CHECK_THROWS_AS(continuous_mu(0.0, 1.0, 4), std::invalid_argument);
}

TEST_CASE("decay series against direct summation") {
  for (double c : {1e-4, 1e-3, 0.01, 0.3, 2.0, 40.0}) {
    double rem = -1.0;
    const double s = decay_series(c, &rem);
    CHECK(rem >= 0.0);
    CHECK(std::abs(s - static_cast<double>(brute_series(c))) < 1e-11 * s + 1e-15);
  }
}

TEST_CASE("roots respect their lower bounds across zeta and lambda") {
  for (double zeta : {0.5, 1.0, 2.0})
    for (double lambda : {1.0, 2.0, 3.0}) {
      const int n = grid_for(zeta, lambda);
      CAPTURE(zeta);
      CAPTURE(lambda);
      const auto c = continuous_mu(lambda, 1.0, n, zeta);
      CHECK(c.lower_bound_ok);
      CHECK(c.mass_error < 1e-8);

      const double tau = 0.2 / (16.0 * kPi * n * n);
      const auto d = discrete_mu(lambda, 1.0, n, tau, zeta);
      CHECK(d.lower_bound_ok);
      CHECK(d.mass_error < 1e-8);
      CHECK(d.sandwich_ok);
      CHECK(d.tail_bound < 1e-12);
      const double sharp = 4.0 * kPi * kPi * zeta * zeta * std::pow(lambda, 4) /
                           std::pow(1.0 + 32.0 * kPi * zeta, 2);
      CHECK(d.implied_rate >= sharp * (1.0 - 1e-12));
    }
}

TEST_CASE("discrete mass by direct summation matches the series") {
  const double bt = 1.0 / (8.0 * std::sqrt(kPi));
  const double tau = 1e-3, mu = 0.9;
  const int n = 4;
  const double c1 = kPi * mu * mu * bt * bt * tau;
  const double c2 = c1 + 4.0 * n * n * kPi * kPi * tau;
  const double via_series = bt * std::sqrt(tau) * (decay_series(c1) - decay_series(c2));
  CHECK(discrete_mass_direct(mu, bt, n, tau) == doctest::Approx(via_series).epsilon(1e-10));
}

TEST_CASE("discrete roots approach their own limit") {
  const auto lim = discrete_mu_limit(1.0, 1.0, 4, 1.0);
  CHECK(lim.mass_error < 1e-12);
  CHECK(lim.mu == doctest::Approx(toms_root(lim.b, 4.0 * 16 * kPi * kPi)).epsilon(1e-12));
  double prev = 1.0;
  for (double tau : {1e-3, 5e-4, 2.5e-4, 1.25e-4}) {
    const auto d = discrete_mu(1.0, 1.0, 4, tau, 1.0);
    const double gap = std::abs(d.mu - lim.mu);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 2e-4);
}

TEST_CASE("discrete root refuses bad parameters") {
  CHECK_THROWS_AS(discrete_mu(2.0, 1.0, 3, 1e-4, 1.0), std::domain_error);
  CHECK_THROWS_AS(discrete_mu(1.0, 1.0, 4, 0.1, 1.0), std::domain_error);
  CHECK_THROWS_AS(discrete_mu(1.0, 1.0, 4, -1.0, 1.0), std::invalid_argument);
}
