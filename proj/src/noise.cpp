#include "she/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "she/philox.hpp"

namespace she {

namespace {

inline PhiloxKey key_of(const NoiseSeed& s) {
  return {static_cast<std::uint32_t>(s.master_seed),
          static_cast<std::uint32_t>(s.master_seed >> 32)};
}

inline double quantize(double z) { return std::nearbyint(z * 0x1.0p32) * 0x1.0p-32; }

inline void pair_at(const NoiseSeed& seed, std::uint32_t step, std::uint32_t pair,
                    double& a, double& b) {
  const auto w = philox4x32_10({pair, step, seed.path, seed.purpose}, key_of(seed));
  a = quantize(normal_quantile(uniform_open(w[0], w[1])));
  b = quantize(normal_quantile(uniform_open(w[2], w[3])));
}

}  // namespace

double noise_variate(const NoiseSeed& seed, std::uint32_t step, std::uint32_t cell) {
  double a, b;
  pair_at(seed, step, cell / 2, a, b);
  return (cell % 2 == 0) ? a : b;
}

void noise_row(const NoiseSeed& seed, std::uint32_t step, int n, double* out) {
  int j = 0;
  for (; j + 1 < n; j += 2) pair_at(seed, step, static_cast<std::uint32_t>(j / 2), out[j], out[j + 1]);
  if (j < n) {
    double b;
    pair_at(seed, step, static_cast<std::uint32_t>(j / 2), out[j], b);
  }
}

double NoiseBlock::xi(int i, int j) const {
  return weight == 1 ? sum(i, j) : sum(i, j) / std::sqrt(static_cast<double>(weight));
}

void NoiseBlock::xi_row(int i, double* out) const {
  const double* row = sums.data() + static_cast<std::size_t>(i) * n;
  if (weight == 1) {
    for (int j = 0; j < n; ++j) out[j] = row[j];
    return;
  }
  const double s = std::sqrt(static_cast<double>(weight));
  for (int j = 0; j < n; ++j) out[j] = row[j] / s;
}

NoiseBlock sample_block(const NoiseSeed& seed, int m, int n, double tau,
                        std::uint32_t first_step) {
  if (m < 1 || n < 1) throw std::invalid_argument("noise block needs m, n >= 1");
  NoiseBlock b;
  b.m = m;
  b.n = n;
  b.tau = tau;
  b.sums.resize(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    noise_row(seed, first_step + static_cast<std::uint32_t>(i), n,
              b.sums.data() + static_cast<std::size_t>(i) * n);
  return b;
}

NoiseBlock coarsen(const NoiseBlock& fine, int space_factor, int time_factor) {
  if (space_factor < 1 || time_factor < 1 || fine.n % space_factor != 0 ||
      fine.m % time_factor != 0)
    throw std::invalid_argument("coarsening factors must divide the noise block");
  NoiseBlock c;
  c.n = fine.n / space_factor;
  c.m = fine.m / time_factor;
  c.tau = fine.tau * time_factor;
  c.weight = fine.weight * space_factor * time_factor;
  c.sums.assign(static_cast<std::size_t>(c.m) * c.n, 0.0);
  // Entries are multiples of 2^-32 well inside 2^21, so these sums are exact
  // and independent of grouping.
  for (int i = 0; i < fine.m; ++i) {
    double* dst = c.sums.data() + static_cast<std::size_t>(i / time_factor) * c.n;
    const double* src = fine.sums.data() + static_cast<std::size_t>(i) * fine.n;
    for (int j = 0; j < fine.n; ++j) dst[j / space_factor] += src[j];
  }
  return c;
}

NoiseAccumulator::NoiseAccumulator(int n_fine, int space_factor, int time_factor)
    : n_fine_(n_fine), space_factor_(space_factor), time_factor_(time_factor) {
  if (space_factor < 1 || time_factor < 1 || n_fine % space_factor != 0)
    throw std::invalid_argument("coarsening factors must divide the noise block");
  n_coarse_ = n_fine / space_factor;
  sums_.assign(static_cast<std::size_t>(n_coarse_), 0.0);
  xi_.assign(static_cast<std::size_t>(n_coarse_), 0.0);
}

bool NoiseAccumulator::add(const double* fine_row) {
  for (int j = 0; j < n_fine_; ++j) sums_[static_cast<std::size_t>(j / space_factor_)] += fine_row[j];
  if (++filled_ < time_factor_) return false;
  const bool unit = space_factor_ * time_factor_ == 1;
  const double s = std::sqrt(static_cast<double>(space_factor_) * time_factor_);
  for (std::size_t j = 0; j < sums_.size(); ++j) {
    xi_[j] = unit ? sums_[j] : sums_[j] / s;
    sums_[j] = 0.0;
  }
  filled_ = 0;
  return true;
}

}  // namespace she
