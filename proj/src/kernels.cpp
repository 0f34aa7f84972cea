#include "she/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "she/model.hpp"

namespace she {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive_time(double t) {
  if (!(t > 0.0)) throw std::domain_error("heat kernel needs t > 0");
}

// Offset x - y folded into [-1/2, 1/2].
double fold(double d) { return d - std::nearbyint(d); }

// erf(u) - erf(v) without cancellation in the tails.
double erf_diff(double u, double v) {
  if (u > 0.0 && v > 0.0) return std::erfc(v) - std::erfc(u);
  if (u < 0.0 && v < 0.0) return std::erfc(-u) - std::erfc(-v);
  return std::erf(u) - std::erf(v);
}

double spectral_sum_minus_one(double t, double d, int terms) {
  double s = 0.0;
  for (int j = terms; j >= 1; --j)
    s += std::exp(-4.0 * kPi * kPi * j * j * t) * std::cos(2.0 * kPi * j * d);
  return 2.0 * s;
}

void check_stable(const AmplificationFactors& f) {
  if (!f.stable) throw std::domain_error("unstable theta-scheme: " + f.diagnostic);
}

double mode_power(const AmplificationFactors& f, std::size_t j, std::int64_t k,
                  FullKernel which) {
  double c = std::pow(f.beta[j], static_cast<double>(k));
  if (which == FullKernel::G2) c *= f.r1[j];
  return c;
}

}  // namespace

double heat_kernel_images(double t, double d, int terms) {
  require_positive_time(t);
  d = fold(d);
  double s = 0.0;
  for (int m = -terms; m <= terms; ++m) {
    const double z = d - m;
    s += std::exp(-z * z / (4.0 * t));
  }
  return s / std::sqrt(4.0 * kPi * t);
}

double heat_kernel_spectral(double t, double d, int terms) {
  require_positive_time(t);
  return 1.0 + spectral_sum_minus_one(t, fold(d), terms);
}

double heat_kernel(double t, double x, double y, const KernelEvalOptions& opts) {
  require_positive_time(t);
  if (t < opts.crossover_time) return heat_kernel_images(t, x - y, opts.image_terms);
  return heat_kernel_spectral(t, x - y, opts.spectral_terms);
}

double heat_kernel_minus_one(double t, double x, double y,
                             const KernelEvalOptions& opts) {
  require_positive_time(t);
  if (t < opts.crossover_time)
    return heat_kernel_images(t, x - y, opts.image_terms) - 1.0;
  return spectral_sum_minus_one(t, fold(x - y), opts.spectral_terms);
}

double heat_kernel_cell_integral_centered(double t, double x, double a, double b,
                                          const KernelEvalOptions& opts) {
  require_positive_time(t);
  if (t < opts.crossover_time) {
    const double s = std::sqrt(4.0 * t);
    double acc = 0.0;
    const int M = opts.image_terms + 1;
    for (int m = -M; m <= M; ++m)
      acc += erf_diff((x - a - m) / s, (x - b - m) / s);
    return 0.5 * acc - (b - a);
  }
  double acc = 0.0;
  for (int j = opts.spectral_terms; j >= 1; --j) {
    const double w = 2.0 * kPi * j;
    acc += std::exp(-4.0 * kPi * kPi * j * j * t) *
           (std::sin(w * (x - a)) - std::sin(w * (x - b))) / w;
  }
  return 2.0 * acc;
}

double heat_kernel_cell_integral(double t, double x, double a, double b,
                                 const KernelEvalOptions& opts) {
  return (b - a) + heat_kernel_cell_integral_centered(t, x, a, b, opts);
}

double heat_kernel_square_integral(double t, const KernelEvalOptions& opts) {
  require_positive_time(t);
  return heat_kernel(2.0 * t, 0.0, 0.0, opts);
}

double semi_green(double t, double x, double y, const SpectralBasis& basis) {
  if (t < 0.0) throw std::domain_error("semi_green needs t >= 0");
  const int n = basis.n();
  const int l = basis.wrap(GridSpec{n}.cell(y));
  double s = 0.0;
  for (int j = n - 1; j >= 0; --j)
    s += std::exp(basis.eigenvalue(j) * t) * basis.interp_cross(j, x, l);
  return s;
}

namespace {

std::vector<double> grid_profile(const std::vector<double>& coef,
                                 const SpectralBasis& basis) {
  const int n = basis.n();
  std::vector<double> g(static_cast<std::size_t>(n), 0.0);
  for (int d = 0; d < n; ++d) {
    double s = 0.0;
    for (int j = n - 1; j >= 0; --j)
      s += coef[static_cast<std::size_t>(j)] *
           basis.cos_grid(static_cast<long long>(j) * d);
    g[static_cast<std::size_t>(d)] = s;
  }
  return g;
}

}  // namespace

std::vector<double> semi_green_grid(double t, const SpectralBasis& basis) {
  if (t < 0.0) throw std::domain_error("semi_green needs t >= 0");
  std::vector<double> c(basis.eigenvalues().size());
  for (std::size_t j = 0; j < c.size(); ++j)
    c[j] = std::exp(basis.eigenvalues()[j] * t);
  return grid_profile(c, basis);
}

double semi_green_square_integral(double t, double x, const SpectralBasis& basis) {
  if (t < 0.0) throw std::domain_error("semi_green needs t >= 0");
  double s = 0.0;
  for (int j = basis.n() - 1; j >= 0; --j)
    s += std::exp(2.0 * basis.eigenvalue(j) * t) * basis.interp_modulus_sq(j, x);
  return s;
}

double full_green(double t, double x, double y, FullKernel which,
                  const AmplificationFactors& factors, const SpectralBasis& basis) {
  check_stable(factors);
  if (t < 0.0) throw std::domain_error("full_green needs t >= 0");
  const std::int64_t k = step_index(t, factors.tau);
  const int n = basis.n();
  const int l = basis.wrap(GridSpec{n}.cell(y));
  double s = 0.0;
  for (int j = n - 1; j >= 0; --j)
    s += mode_power(factors, static_cast<std::size_t>(j), k, which) *
         basis.interp_cross(j, x, l);
  return s;
}

std::vector<double> full_green_grid(std::int64_t k, FullKernel which,
                                    const AmplificationFactors& factors,
                                    const SpectralBasis& basis) {
  check_stable(factors);
  std::vector<double> c(factors.beta.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = mode_power(factors, j, k, which);
  return grid_profile(c, basis);
}

double full_green_square_integral(double t, double x,
                                  const AmplificationFactors& factors,
                                  const SpectralBasis& basis) {
  check_stable(factors);
  if (t < 0.0) throw std::domain_error("full_green needs t >= 0");
  const std::int64_t k = step_index(t, factors.tau);
  double s = 0.0;
  for (int j = basis.n() - 1; j >= 0; --j) {
    const double c = mode_power(factors, static_cast<std::size_t>(j), k, FullKernel::G2);
    s += c * c * basis.interp_modulus_sq(j, x);
  }
  return s;
}

double cellwise_integral(const std::vector<double>& values_per_cell) {
  double s = 0.0;
  for (double v : values_per_cell) s += v;
  return s / static_cast<double>(values_per_cell.size());
}

}  // namespace she
