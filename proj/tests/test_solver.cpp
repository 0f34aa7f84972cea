#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "she/fourier.hpp"
#include "she/noise.hpp"
#include "she/solver.hpp"
#include "she/spectral.hpp"

using namespace she;

namespace {

std::vector<double> cos_mode(int n, int j) {
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    u[static_cast<std::size_t>(k)] = std::cos(2.0 * std::numbers::pi * j * k / n);
  return u;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ModelSpec deterministic() {
  ModelSpec m;
  m.lambda = 0.0;
  return m;
}

}  // namespace

TEST_CASE("discrete Laplacian") {
  CHECK(discrete_laplacian({1, 0, 0, 0}) == std::vector<double>{-32, 16, 0, 16});
  for (double v : discrete_laplacian({2.5, 2.5, 2.5, 2.5, 2.5})) CHECK(v == 0.0);
  for (int n : {5, 16}) {
    const SpectralBasis b(n);
    const auto u = cos_mode(n, 1);
    auto lu = discrete_laplacian(u);
    for (auto& v : lu) v /= b.eigenvalue(1);
    CHECK(max_abs_diff(lu, u) < 1e-10);
  }
}

TEST_CASE("Fourier round trip") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  for (int n : {3, 8, 15, 64}) {
    RealFourier f(n);
    std::vector<double> u(static_cast<std::size_t>(n)), h(u.size()), back(u.size());
    for (auto& v : u) v = d(rng);
    f.forward(u.data(), h.data());
    f.backward(h.data(), back.data());
    for (auto& v : back) v /= n;
    CHECK(max_abs_diff(u, back) < 1e-12);
  }
}

TEST_CASE("deterministic theta step preserves constants and decays modes") {
  for (double theta : {0.0, 0.5, 1.0}) {
    SchemeSpec s;
    s.tau = 1e-3;
    s.theta = theta;
    const auto m = deterministic();
    const std::vector<double> zero(8, 0.0);
    Field c{std::vector<double>(8, 1.7), 0};
    for (int i = 0; i < 20; ++i) c = theta_step(c, s, m, zero);
    for (double v : c.values) CHECK(v == doctest::Approx(1.7).epsilon(1e-14));

    const SpectralBasis b(8);
    const AmplificationFactors f(b, s.tau, theta);
    Field u{cos_mode(8, 1), 0};
    for (int i = 0; i < 50; ++i) u = theta_step(u, s, m, zero);
    auto expect = cos_mode(8, 1);
    for (auto& v : expect) v *= std::pow(f.beta[1], 50);
    CHECK(max_abs_diff(u.values, expect) < 1e-10 * std::abs(std::pow(f.beta[1], 50)));
  }
}

TEST_CASE("exponential integrator decays a single mode exactly") {
  SchemeSpec s;
  s.tau = 2e-3;
  s.stepper = Stepper::ExponentialIntegrator;
  const auto m = deterministic();
  const SpectralBasis b(16);
  const std::vector<double> zero(16, 0.0);
  Field u{cos_mode(16, 3), 0};
  for (int i = 0; i < 40; ++i) u = exp_integrator_step(u, s, m, zero);
  auto expect = cos_mode(16, 3);
  for (auto& v : expect) v *= std::exp(40 * s.tau * b.eigenvalue(3));
  CHECK(max_abs_diff(u.values, expect) < 1e-15);

  Field c{std::vector<double>(16, 0.4), 0};
  c = exp_integrator_step(c, s, m, zero);
  for (double v : c.values) CHECK(v == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("one-step agreement of theta and exponential steppers is second order") {
  // Smooth deterministic data; the local difference scales like tau^2.
  const int n = 32;
  std::vector<double> u0(n);
  for (int k = 0; k < n; ++k)
    u0[static_cast<std::size_t>(k)] = std::exp(std::sin(2.0 * std::numbers::pi * k / n));
  const auto m = deterministic();
  const std::vector<double> zero(n, 0.0);
  std::vector<double> hs, errs;
  for (double tau = 1e-4; tau > 1e-6; tau /= 2) {
    SchemeSpec th;
    th.tau = tau;
    th.theta = 1.0;
    SchemeSpec ex = th;
    ex.stepper = Stepper::ExponentialIntegrator;
    const auto a = theta_step({u0, 0}, th, m, zero);
    const auto b = exp_integrator_step({u0, 0}, ex, m, zero);
    hs.push_back(std::log(tau));
    errs.push_back(std::log(max_abs_diff(a.values, b.values)));
  }
  for (std::size_t i = 1; i < hs.size(); ++i) {
    const double slope = (errs[i] - errs[i - 1]) / (hs[i] - hs[i - 1]);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("spatial mean moves only through the noise") {
  const int n = 8;
  SchemeSpec s;
  s.tau = 1e-3;
  s.theta = 0.5;
  ModelSpec m;
  m.lambda = 1.3;
  m.sigma = SigmaSpec::table({-1.0, 0.0, 1.0, 3.0}, {-0.5, 0.0, 2.0, 2.5}, 2.0, 0.25);
  std::vector<double> u(n);
  for (int k = 0; k < n; ++k) u[static_cast<std::size_t>(k)] = 1.0 + 0.3 * std::sin(k);
  std::vector<double> xi(n);
  noise_row({3, 0, 0}, 0, n, xi.data());
  double mean0 = 0.0, forcing = 0.0;
  for (int k = 0; k < n; ++k) {
    mean0 += u[static_cast<std::size_t>(k)] / n;
    forcing += m.sigma(u[static_cast<std::size_t>(k)]) * xi[static_cast<std::size_t>(k)];
  }
  const auto next = theta_step({u, 0}, s, m, xi);
  double mean1 = 0.0;
  for (double v : next.values) mean1 += v / n;
  CHECK(std::abs(mean1 - (mean0 + m.lambda * std::sqrt(n * s.tau) / n * forcing)) < 1e-12);
}

TEST_CASE("simulate records and reproduces") {
  const GridSpec g{8};
  SchemeSpec s;
  ModelSpec m;
  const NoiseSeed seed{12, 0, 0};
  const auto a = simulate(g, s, m, seed, 0, {0});
  REQUIRE(a.snapshots.size() == 1);
  CHECK(a.snapshots[0].values == std::vector<double>(8, 1.0));

  const auto b = simulate(g, s, m, seed, 100, {0, 50, 100}, true);
  const auto c = simulate(g, s, m, seed, 100, {0, 50, 100});
  REQUIRE(b.snapshots.size() == 3);
  CHECK(b.snapshots[2].values == c.snapshots[2].values);
  CHECK(b.full_state.size() == 101);
  CHECK(b.full_state[50].values == b.snapshots[1].values);
  CHECK_THROWS_AS(simulate(g, s, m, seed, 10, {11}), std::invalid_argument);

  // Step-by-step propagation with the same noise rows matches simulate.
  Propagator p(8, s, m);
  std::vector<double> u(8, 1.0), row(8);
  for (std::int64_t i = 0; i < 100; ++i) {
    noise_row(seed, static_cast<std::uint32_t>(i), 8, row.data());
    p.step(u, row.data(), i);
  }
  CHECK(max_abs_diff(u, c.snapshots[2].values) < 1e-13);
}

TEST_CASE("covariance of one noisy step at n = 3") {
  // One implicit step from u = 1 with sigma = id: Cov = q R1 R1^T.
  const int n = 3;
  SchemeSpec s;
  s.tau = 0.05;
  s.theta = 1.0;
  ModelSpec m;
  const SpectralBasis b(n);
  const AmplificationFactors f(b, s.tau, 1.0);
  const double q = m.lambda * m.lambda * n * s.tau;
  // R1 as a circulant matrix, row d: (1/n) sum_j r1_j cos(2 pi j d / n).
  double r1[3];
  for (int d = 0; d < n; ++d) {
    r1[d] = 0.0;
    for (int j = 0; j < n; ++j) r1[d] += f.r1[static_cast<std::size_t>(j)] * b.cos_grid(j * d) / n;
  }
  double expect[3] = {0, 0, 0};
  for (int d = 0; d < n; ++d)
    for (int k = 0; k < n; ++k) expect[d] += q * r1[k] * r1[(k - d + n) % n];

  Propagator p(n, s, m);
  const int paths = 200000;
  double sum[3] = {0, 0, 0}, cross[3] = {0, 0, 0};
  std::vector<double> xi(n);
  for (int i = 0; i < paths; ++i) {
    std::vector<double> u(n, 1.0);
    noise_row({8, static_cast<std::uint32_t>(i), 0}, 0, n, xi.data());
    p.step(u, xi.data());
    for (int d = 0; d < n; ++d) {
      sum[d] += u[static_cast<std::size_t>(d)];
      cross[d] += (u[0] - 1.0) * (u[static_cast<std::size_t>(d)] - 1.0);
    }
  }
  for (int d = 0; d < n; ++d) {
    CHECK(sum[d] / paths == doctest::Approx(1.0).epsilon(0.01));
    CHECK(cross[d] / paths == doctest::Approx(expect[d]).epsilon(0.02));
  }
}

TEST_CASE("blow-up is reported with its horizon") {
  const GridSpec g{4};
  SchemeSpec s;
  s.tau = 0.1;
  s.theta = 1.0;
  ModelSpec m;
  m.lambda = 60.0;
  try {
    simulate(g, s, m, {1, 0, 0}, 100000, {100000});
    FAIL("expected blow-up");
  } catch (const BlowUp& e) {
    CHECK(e.step > 0);
    CHECK(std::string(e.what()).find("blow-up") != std::string::npos);
  }
}

TEST_CASE("unstable schemes are refused") {
  SchemeSpec s;
  s.tau = 0.01;
  s.theta = 0.0;
  CHECK_THROWS_AS(Propagator(10, s, ModelSpec{}), std::domain_error);
}
