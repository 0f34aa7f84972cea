#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "she/fourier.hpp"
#include "she/model.hpp"
#include "she/noise.hpp"

namespace she {

inline constexpr double kBlowUpThreshold = 1e150;

/// Thrown when |u| exceeds kBlowUpThreshold.
class BlowUp : public std::runtime_error {
 public:
  BlowUp(std::int64_t step, double time);
  std::int64_t step;
  double time;
};

struct Field {
  std::vector<double> values;
  std::int64_t time_index = 0;
};

struct Trajectory {
  double tau = 0.0;
  std::vector<Field> snapshots;
  /// Every step, when requested.
  std::vector<Field> full_state;
};

/// n^2 (u_{j+1} - 2 u_j + u_{j-1}) with periodic wraparound.
std::vector<double> discrete_laplacian(const std::vector<double>& u);

/// One-step map u -> R1 (R2 u + lambda sqrt(n tau) sigma(u) xi) for the
/// theta-scheme, or u -> e^{tau Delta_n}(u + lambda sqrt(n tau) sigma(u) xi)
/// for the exponential integrator. The factors act per Fourier mode.
class Propagator {
 public:
  /// Throws std::domain_error when the theta-scheme is unstable.
  Propagator(int n, const SchemeSpec& scheme, const ModelSpec& model);

  int n() const { return n_; }
  const std::vector<double>& state_factor() const { return state_; }
  const std::vector<double>& noise_factor() const { return noise_; }

  /// Advances u in place with a row of n standard normals. Throws on
  /// non-finite state or blow-up; `step` only labels the diagnostic.
  void step(std::vector<double>& u, const double* xi, std::int64_t step = 0);

 private:
  int n_;
  double tau_;
  Stepper stepper_;
  double amplitude_;
  SigmaSpec sigma_;
  RealFourier fft_;
  std::vector<double> state_;
  std::vector<double> noise_;
  std::vector<double> a_, b_, c_;
};

Field theta_step(const Field& u, const SchemeSpec& scheme, const ModelSpec& model,
                 const std::vector<double>& noise_row);

Field exp_integrator_step(const Field& u, const SchemeSpec& scheme,
                          const ModelSpec& model, const std::vector<double>& noise_row);

/// Runs `steps` steps with the noise stream of `seed` and records the
/// requested step indices (which must lie in [0, steps]).
Trajectory simulate(const GridSpec& grid, const SchemeSpec& scheme,
                    const ModelSpec& model, const NoiseSeed& seed, std::int64_t steps,
                    std::vector<std::int64_t> record_steps, bool keep_full_state = false);

}  // namespace she
