#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace she {

/// Name of the generator and normal transform, written into output headers.
inline constexpr const char* kGeneratorId = "philox4x32-10+as241-q32";

enum class NoisePurpose : std::uint32_t { Path = 0, Auxiliary = 1 };

struct NoiseSeed {
  std::uint64_t master_seed = 0;
  std::uint32_t path = 0;
  std::uint32_t purpose = 0;
};

/// Standard normal variate for (seed, step, cell), rounded to a multiple of
/// 2^-32 so that block sums are exact in double precision.
double noise_variate(const NoiseSeed& seed, std::uint32_t step, std::uint32_t cell);

/// Fills cells [0, n) of one time step.
void noise_row(const NoiseSeed& seed, std::uint32_t step, int n, double* out);

/// m x n matrix of cell sums. Each entry is the sum of `weight` unit normals,
/// so xi(i,j) = sum(i,j) / sqrt(weight) is standard normal.
struct NoiseBlock {
  int m = 0;
  int n = 0;
  double tau = 0.0;
  std::int64_t weight = 1;
  std::vector<double> sums;

  double sum(int i, int j) const { return sums[static_cast<std::size_t>(i) * n + j]; }
  double xi(int i, int j) const;
  /// Row i as standard normals.
  void xi_row(int i, double* out) const;
};

/// Rows are time steps first_step .. first_step + m - 1.
NoiseBlock sample_block(const NoiseSeed& seed, int m, int n, double tau = 0.0,
                        std::uint32_t first_step = 0);

/// Sums space_factor x time_factor blocks of fine cells. Throws
/// std::invalid_argument when the factors do not divide the block.
NoiseBlock coarsen(const NoiseBlock& fine, int space_factor, int time_factor);

/// Streaming form of coarsen for one row at a time: feeds fine rows of
/// n_fine cells and yields a coarse row after every time_factor rows. The
/// sums match coarsen() bit for bit.
class NoiseAccumulator {
 public:
  NoiseAccumulator(int n_fine, int space_factor, int time_factor);

  /// Adds one fine row of standard normals (weight 1). Returns true when a
  /// coarse row is complete; read it with xi() before the next add().
  bool add(const double* fine_row);
  const std::vector<double>& xi() const { return xi_; }
  int n_coarse() const { return n_coarse_; }

 private:
  int n_fine_;
  int space_factor_;
  int time_factor_;
  int n_coarse_;
  int filled_ = 0;
  std::vector<double> sums_;
  std::vector<double> xi_;
};

}  // namespace she
