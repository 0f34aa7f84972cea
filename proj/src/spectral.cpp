#include "she/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "she/model.hpp"
#include "she/stability.hpp"

namespace she {

SpectralBasis::SpectralBasis(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("basis size must be positive");
  eig_.resize(static_cast<std::size_t>(n));
  cos_.resize(static_cast<std::size_t>(n));
  sin_.resize(static_cast<std::size_t>(n));
  const double pi = std::numbers::pi;
  for (int j = 0; j < n; ++j) {
    // Symmetric evaluation keeps lambda_j == lambda_{n-j} bit-for-bit.
    const int jj = std::min(j, n - j);
    const double s = std::sin(jj * pi / n);
    eig_[static_cast<std::size_t>(j)] = -4.0 * n * static_cast<double>(n) * s * s;
    const double a = 2.0 * pi * jj / n;
    cos_[static_cast<std::size_t>(j)] = std::cos(a);
    sin_[static_cast<std::size_t>(j)] = (j == jj ? 1.0 : -1.0) * std::sin(a);
  }
}

SpectralBasis SpectralBasis::with_eigenvalue(int j, double value) const {
  SpectralBasis b = *this;
  b.eig_[static_cast<std::size_t>(wrap(j))] = value;
  b.eig_[static_cast<std::size_t>(wrap(n_ - j))] = value;
  return b;
}

void SpectralBasis::locate(double x, int& k, double& w) const {
  GridSpec g{n_};
  k = g.cell(x);
  w = n_ * x - k;
  if (w < 0.0) w = 0.0;
  if (w > 1.0) w = 1.0;
  k = wrap(k);
}

double SpectralBasis::interp_cross(int j, double x, int l) const {
  int k;
  double w;
  locate(x, k, w);
  const long long jj = j;
  return (1.0 - w) * cos_grid(jj * (k - l)) + w * cos_grid(jj * (k + 1 - l));
}

double SpectralBasis::interp_modulus_sq(int j, double x) const {
  int k;
  double w;
  locate(x, k, w);
  return 1.0 - 2.0 * w * (1.0 - w) * (1.0 - cos_grid(j));
}

AmplificationFactors::AmplificationFactors(const SpectralBasis& basis,
                                           double tau_, double theta_)
    : n(basis.n()), tau(tau_), theta(theta_) {
  const auto m = static_cast<std::size_t>(n);
  r1.resize(m);
  r2.resize(m);
  beta.resize(m);
  r3.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double l = basis.eigenvalues()[j];
    r1[j] = 1.0 / (1.0 - theta * tau * l);
    r2[j] = 1.0 + (1.0 - theta) * tau * l;
    beta[j] = r1[j] * r2[j];
    r3[j] = -l * tau / (1.0 + (1.0 - theta) * tau * l);
  }
  const auto rep = check_stability(n, tau, theta);
  stable = rep.satisfied;
  diagnostic = rep.diagnostic;
}

}  // namespace she
