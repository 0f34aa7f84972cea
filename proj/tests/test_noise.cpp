#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "she/noise.hpp"
#include "she/philox.hpp"

using namespace she;

TEST_CASE("philox known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal quantile matches boost") {
  boost::math::normal n01;
  for (double p : {1e-300, 1e-20, 1e-8, 0.01, 0.025, 0.2, 0.425, 0.5, 0.575, 0.9, 0.975, 1 - 1e-10}) {
    const double ref = boost::math::quantile(n01, p);
    CHECK(normal_quantile(p) == doctest::Approx(ref).epsilon(1e-14));
  }
  CHECK(normal_quantile(0.5) == 0.0);
}

TEST_CASE("uniforms stay inside the open interval") {
  CHECK(uniform_open(0, 0) > 0.0);
  CHECK(uniform_open(0xffffffff, 0xffffffff) < 1.0);
}

TEST_CASE("variates are quantized and deterministic") {
  const NoiseSeed s{42, 3, 0};
  for (std::uint32_t c = 0; c < 100; ++c) {
    const double z = noise_variate(s, 7, c);
    CHECK(z * 0x1.0p32 == std::nearbyint(z * 0x1.0p32));
    CHECK(z == noise_variate(s, 7, c));
  }
  const auto a = sample_block(s, 10, 9);
  const auto b = sample_block(s, 10, 9);
  CHECK(a.sums == b.sums);
  std::vector<double> row(9);
  noise_row(s, 4, 9, row.data());
  for (int j = 0; j < 9; ++j) CHECK(row[static_cast<std::size_t>(j)] == a.sum(4, j));
}

TEST_CASE("sample moments of a million variates") {
  const auto b = sample_block({2024, 0, 0}, 1000, 1000);
  double mean = 0.0, m2 = 0.0;
  for (double z : b.sums) mean += z;
  mean /= static_cast<double>(b.sums.size());
  for (double z : b.sums) m2 += (z - mean) * (z - mean);
  const double var = m2 / static_cast<double>(b.sums.size() - 1);
  CHECK(std::abs(mean) < 0.004);
  CHECK(var > 0.995);
  CHECK(var < 1.005);
}

TEST_CASE("distinct streams are uncorrelated") {
  const auto a = sample_block({9, 0, 0}, 1000, 100);
  const auto b = sample_block({9, 1, 0}, 1000, 100);
  const auto c = sample_block({9, 0, 1}, 1000, 100);
  auto corr = [](const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      syy += y[i] * y[i];
      sxy += x[i] * y[i];
    }
    const double cov = sxy / m - sx / m * sy / m;
    return cov / std::sqrt((sxx / m - sx * sx / m / m) * (syy / m - sy * sy / m / m));
  };
  CHECK(std::abs(corr(a.sums, b.sums)) < 0.01);
  CHECK(std::abs(corr(a.sums, c.sums)) < 0.01);
}

TEST_CASE("coarsening") {
  const auto fine = sample_block({5, 0, 0}, 64, 32);
  const auto id = coarsen(fine, 1, 1);
  CHECK(id.sums == fine.sums);
  CHECK(id.weight == 1);

  const auto two = coarsen(coarsen(fine, 2, 2), 2, 2);
  const auto four = coarsen(fine, 4, 4);
  CHECK(two.sums == four.sums);
  CHECK(two.weight == 16);
  CHECK(four.m == 16);
  CHECK(four.n == 8);
  CHECK(four.xi(3, 2) == four.sum(3, 2) / 4.0);

  CHECK_THROWS_AS(coarsen(fine, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(coarsen(fine, 1, 5), std::invalid_argument);
}

TEST_CASE("coarsened variates keep unit variance") {
  const auto fine = sample_block({77, 0, 0}, 400, 1000);
  const auto c = coarsen(fine, 2, 2);
  double m2 = 0.0, mean = 0.0;
  const auto count = static_cast<double>(c.sums.size());
  for (int i = 0; i < c.m; ++i)
    for (int j = 0; j < c.n; ++j) mean += c.xi(i, j);
  mean /= count;
  for (int i = 0; i < c.m; ++i)
    for (int j = 0; j < c.n; ++j) m2 += (c.xi(i, j) - mean) * (c.xi(i, j) - mean);
  const double var = m2 / (count - 1);
  CHECK(var > 0.99);
  CHECK(var < 1.01);
}

TEST_CASE("streaming accumulator reproduces coarsen") {
  const NoiseSeed s{31, 2, 0};
  const auto fine = sample_block(s, 48, 24);
  for (auto [sf, tf] : {std::pair{1, 4}, std::pair{4, 1}, std::pair{2, 3}, std::pair{8, 16}}) {
    const auto c = coarsen(fine, sf, tf);
    NoiseAccumulator acc(24, sf, tf);
    std::vector<double> row(static_cast<std::size_t>(c.n));
    int produced = 0;
    for (int i = 0; i < fine.m; ++i) {
      if (!acc.add(fine.sums.data() + static_cast<std::size_t>(i) * 24)) continue;
      c.xi_row(produced, row.data());
      CHECK(acc.xi() == row);
      ++produced;
    }
    CHECK(produced == c.m);
  }
  CHECK_THROWS_AS(NoiseAccumulator(24, 5, 1), std::invalid_argument);
}
