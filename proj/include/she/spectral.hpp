#pragma once

#include <string>
#include <vector>

namespace she {

/// Eigenstructure of the periodic second-difference operator n^2 D on n
/// points: eigenvalues lambda_j = -4 n^2 sin^2(j pi / n), eigenvectors
/// e_j(x_k) = exp(2 pi i j k / n). Everything is kept real; complex products
/// are expanded into cosines.
class SpectralBasis {
 public:
  explicit SpectralBasis(int n);

  int n() const { return n_; }
  double eigenvalue(int j) const { return eig_[static_cast<std::size_t>(wrap(j))]; }
  const std::vector<double>& eigenvalues() const { return eig_; }

  /// cos(2 pi m / n) for any integer m, from an exact table.
  double cos_grid(long long m) const { return cos_[static_cast<std::size_t>(wrap(m))]; }
  double sin_grid(long long m) const { return sin_[static_cast<std::size_t>(wrap(m))]; }

  /// Re[e^n_j(x) conj(e_j(l/n))], with e^n_j the piecewise-linear interpolant
  /// of e_j through the grid.
  double interp_cross(int j, double x, int l) const;
  /// |e^n_j(x)|^2 = (1-w)^2 + w^2 + 2 w (1-w) cos(2 pi j / n), w = nx - [nx].
  double interp_modulus_sq(int j, double x) const;

  /// Copy with eigenvalue j (and its mirror n - j) replaced; fault injection.
  SpectralBasis with_eigenvalue(int j, double value) const;

  /// Splits x into its cell index k in [0,n) and offset w = nx - k in [0,1).
  void locate(double x, int& k, double& w) const;

  int wrap(long long m) const {
    long long r = m % n_;
    return static_cast<int>(r < 0 ? r + n_ : r);
  }

 private:
  int n_;
  std::vector<double> eig_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

/// Per-mode theta-scheme factors R1 = (1 - theta tau lambda)^-1,
/// R2 = 1 + (1-theta) tau lambda, beta = R1 R2, R3 = 1/beta - 1.
struct AmplificationFactors {
  AmplificationFactors(const SpectralBasis& basis, double tau, double theta);

  int n;
  double tau;
  double theta;
  std::vector<double> r1;
  std::vector<double> r2;
  std::vector<double> beta;
  std::vector<double> r3;
  /// Whether the theta-scheme stability condition holds at the default r.
  bool stable;
  std::string diagnostic;
};

}  // namespace she
