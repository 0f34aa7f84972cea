#pragma once

#include <memory>
#include <vector>

namespace she {

/// Real periodic transform of size n in halfcomplex order
/// (r_0, r_1, ..., r_{n/2}, i_{(n-1)/2}, ..., i_1). Slot k and slot n-k hold
/// the two real coordinates of mode k, so a per-mode real multiplier that is
/// symmetric in k (f_k = f_{n-k}) acts elementwise on the packed array.
class RealFourier {
 public:
  explicit RealFourier(int n);

  int n() const { return n_; }
  /// Unnormalized: backward(forward(x)) = n x.
  void forward(const double* in, double* out) const;
  void backward(const double* in, double* out) const;

  /// u <- F^{-1} diag(f) F u for a symmetric per-mode multiplier f.
  void apply_modal(std::vector<double>& u, const std::vector<double>& f,
                   std::vector<double>& work) const;

 private:
  struct Plans;
  int n_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace she
