#pragma once

#include <cstdint>
#include <vector>

#include "she/spectral.hpp"

namespace she {

struct KernelEvalOptions {
  /// Images m in [-M, M] around the nearest copy of x - y.
  int image_terms = 4;
  /// Spectral modes j = 1..J.
  int spectral_terms = 5;
  /// Image sum below this time, spectral sum at or above it.
  double crossover_time = 0.05;
};

/// Periodic heat kernel G(t,x,y) on the unit circle.
double heat_kernel(double t, double x, double y, const KernelEvalOptions& opts = {});

/// G(t,x,y) - 1, accurate when G is close to 1.
double heat_kernel_minus_one(double t, double x, double y,
                             const KernelEvalOptions& opts = {});

/// Image-sum and spectral-sum forms with explicit truncation, for
/// cross-checking the crossover.
double heat_kernel_images(double t, double d, int terms);
double heat_kernel_spectral(double t, double d, int terms);

/// Exact integral of G(t,x,.) over [a,b] with 0 <= a <= b <= 1.
double heat_kernel_cell_integral(double t, double x, double a, double b,
                                 const KernelEvalOptions& opts = {});

/// Integral of G(t,x,.) - 1 over [a,b]; no cancellation for large t.
double heat_kernel_cell_integral_centered(double t, double x, double a, double b,
                                          const KernelEvalOptions& opts = {});

/// int_0^1 G(t,x,y)^2 dy = G(2t,x,x).
double heat_kernel_square_integral(double t, const KernelEvalOptions& opts = {});

/// Semi-discrete kernel G^n(t,x,y) = sum_j e^{lambda_j t} e^n_j(x) conj(e_j([ny]/n)).
double semi_green(double t, double x, double y, const SpectralBasis& basis);

/// Values g(d) = G^n(t, d/n, 0) for d = 0..n-1. At grid points the kernel
/// depends only on q - l, so this is the full n x n table.
std::vector<double> semi_green_grid(double t, const SpectralBasis& basis);

/// sum_j e^{2 lambda_j t} |e^n_j(x)|^2 = int_0^1 G^n(t,x,y)^2 dy.
double semi_green_square_integral(double t, double x, const SpectralBasis& basis);

enum class FullKernel { G1, G2 };

/// Fully discrete kernels. G1 carries (R1 R2)^[t/tau]; G2 carries an extra
/// R1. Throws std::domain_error when the factors are unstable.
double full_green(double t, double x, double y, FullKernel which,
                  const AmplificationFactors& factors, const SpectralBasis& basis);

/// Grid table for step index k: g(d) = G(k tau, d/n, 0).
std::vector<double> full_green_grid(std::int64_t k, FullKernel which,
                                    const AmplificationFactors& factors,
                                    const SpectralBasis& basis);

/// sum_j (R1_j R2_j)^{2[t/tau]} R1_j^2 |e^n_j(x)|^2 = int_0^1 G2^2 dy.
double full_green_square_integral(double t, double x,
                                  const AmplificationFactors& factors,
                                  const SpectralBasis& basis);

/// Cell-wise y-integral of a grid-piecewise-constant kernel: (1/n) sum_l.
double cellwise_integral(const std::vector<double>& values_per_cell);

}  // namespace she
