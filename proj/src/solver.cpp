#include "she/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "she/spectral.hpp"
#include "she/stability.hpp"

namespace she {

namespace {

std::string blow_up_message(std::int64_t step, double time) {
  std::ostringstream os;
  os << "moment blow-up horizon reached: |u| > " << kBlowUpThreshold << " at step "
     << step << " (t = " << time << ")";
  return os.str();
}

}  // namespace

BlowUp::BlowUp(std::int64_t s, double t)
    : std::runtime_error(blow_up_message(s, t)), step(s), time(t) {}

std::vector<double> discrete_laplacian(const std::vector<double>& u) {
  const auto n = u.size();
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double left = u[(j + n - 1) % n];
    const double right = u[(j + 1) % n];
    out[j] = n2 * (right - 2.0 * u[j] + left);
  }
  return out;
}

Propagator::Propagator(int n, const SchemeSpec& scheme, const ModelSpec& model)
    : n_(n),
      tau_(scheme.tau),
      stepper_(scheme.stepper),
      amplitude_(model.lambda * std::sqrt(n * scheme.tau)),
      sigma_(model.sigma),
      fft_(n) {
  const SpectralBasis basis(n);
  const auto m = static_cast<std::size_t>(n);
  state_.resize(m);
  noise_.resize(m);
  if (stepper_ == Stepper::ThetaScheme) {
    const auto st = check_stability(n, scheme.tau, scheme.theta, scheme.r);
    if (!st.satisfied) throw std::domain_error("unstable theta-scheme: " + st.diagnostic);
    const AmplificationFactors f(basis, scheme.tau, scheme.theta);
    for (std::size_t j = 0; j < m; ++j) {
      state_[j] = f.beta[j];
      noise_[j] = f.r1[j];
    }
  } else {
    for (std::size_t j = 0; j < m; ++j)
      state_[j] = noise_[j] = std::exp(scheme.tau * basis.eigenvalues()[j]);
  }
  a_.resize(m);
  b_.resize(m);
  c_.resize(m);
}

void Propagator::step(std::vector<double>& u, const double* xi, std::int64_t step) {
  const auto m = static_cast<std::size_t>(n_);
  const double inv = 1.0 / n_;
  const bool noisy = amplitude_ != 0.0;
  if (noisy)
    for (std::size_t j = 0; j < m; ++j) c_[j] = amplitude_ * sigma_(u[j]) * xi[j];

  if (stepper_ == Stepper::ExponentialIntegrator) {
    if (noisy)
      for (std::size_t j = 0; j < m; ++j) u[j] += c_[j];
    fft_.forward(u.data(), a_.data());
    for (std::size_t k = 0; k < m; ++k) a_[k] *= state_[k] * inv;
  } else {
    fft_.forward(u.data(), a_.data());
    if (noisy) {
      fft_.forward(c_.data(), b_.data());
      for (std::size_t k = 0; k < m; ++k)
        a_[k] = (state_[k] * a_[k] + noise_[k] * b_[k]) * inv;
    } else {
      for (std::size_t k = 0; k < m; ++k) a_[k] *= state_[k] * inv;
    }
  }
  fft_.backward(a_.data(), u.data());

  double peak = 0.0;
  for (double v : u) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite state at step " << step;
      throw std::runtime_error(os.str());
    }
    peak = std::max(peak, std::abs(v));
  }
  if (peak > kBlowUpThreshold) throw BlowUp(step, static_cast<double>(step) * tau_);
}

namespace {

Field one_step(const Field& u, SchemeSpec scheme, Stepper stepper, const ModelSpec& model,
               const std::vector<double>& noise_row) {
  scheme.stepper = stepper;
  const int n = static_cast<int>(u.values.size());
  if (static_cast<int>(noise_row.size()) != n)
    throw std::invalid_argument("noise row length differs from the field");
  Propagator p(n, scheme, model);
  Field out{u.values, u.time_index + 1};
  p.step(out.values, noise_row.data(), out.time_index);
  return out;
}

}  // namespace

Field theta_step(const Field& u, const SchemeSpec& scheme, const ModelSpec& model,
                 const std::vector<double>& noise_row) {
  return one_step(u, scheme, Stepper::ThetaScheme, model, noise_row);
}

Field exp_integrator_step(const Field& u, const SchemeSpec& scheme,
                          const ModelSpec& model, const std::vector<double>& noise_row) {
  return one_step(u, scheme, Stepper::ExponentialIntegrator, model, noise_row);
}

Trajectory simulate(const GridSpec& grid, const SchemeSpec& scheme,
                    const ModelSpec& model, const NoiseSeed& seed, std::int64_t steps,
                    std::vector<std::int64_t> record_steps, bool keep_full_state) {
  std::sort(record_steps.begin(), record_steps.end());
  record_steps.erase(std::unique(record_steps.begin(), record_steps.end()),
                     record_steps.end());
  if (!record_steps.empty() && (record_steps.front() < 0 || record_steps.back() > steps))
    throw std::invalid_argument("record steps outside the simulated range");

  Trajectory tr;
  tr.tau = scheme.tau;
  std::vector<double> u = model.u0.on_grid(grid.n);
  std::vector<double> xi(static_cast<std::size_t>(grid.n));
  Propagator prop(grid.n, scheme, model);
  auto rec = record_steps.begin();
  auto take = [&](std::int64_t i) {
    if (rec != record_steps.end() && *rec == i) {
      tr.snapshots.push_back({u, i});
      ++rec;
    }
    if (keep_full_state) tr.full_state.push_back({u, i});
  };
  take(0);
  for (std::int64_t i = 0; i < steps; ++i) {
    noise_row(seed, static_cast<std::uint32_t>(i), grid.n, xi.data());
    prop.step(u, xi.data(), i + 1);
    take(i + 1);
  }
  return tr;
}

}  // namespace she
