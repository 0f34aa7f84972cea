#include "she/fourier.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace she {

struct RealFourier::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFourier::RealFourier(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("transform size must be positive");
  // Planning is not thread-safe in FFTW; ESTIMATE plans are deterministic.
  std::lock_guard<std::mutex> lock(planner_mutex());
  static std::map<int, std::shared_ptr<const Plans>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) {
    plans_ = it->second;
    return;
  }
  auto p = std::make_shared<Plans>();
  std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p->fwd = fftw_plan_r2r_1d(n, a.data(), b.data(), FFTW_R2HC, flags);
  p->bwd = fftw_plan_r2r_1d(n, a.data(), b.data(), FFTW_HC2R, flags | FFTW_PRESERVE_INPUT);
  if (!p->fwd || !p->bwd) throw std::runtime_error("FFTW planning failed");
  plans_ = p;
  cache.emplace(n, p);
}

void RealFourier::forward(const double* in, double* out) const {
  fftw_execute_r2r(plans_->fwd, const_cast<double*>(in), out);
}

void RealFourier::backward(const double* in, double* out) const {
  fftw_execute_r2r(plans_->bwd, const_cast<double*>(in), out);
}

void RealFourier::apply_modal(std::vector<double>& u, const std::vector<double>& f,
                              std::vector<double>& work) const {
  work.resize(static_cast<std::size_t>(n_));
  forward(u.data(), work.data());
  const double inv = 1.0 / n_;
  for (int k = 0; k < n_; ++k) work[static_cast<std::size_t>(k)] *= f[static_cast<std::size_t>(k)] * inv;
  backward(work.data(), u.data());
}

}  // namespace she
