#include "she/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "she/kernels.hpp"
#include "she/spectral.hpp"

namespace she {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::ExplicitLike: return "explicit-like";
    case Regime::CrankNicolson: return "crank-nicolson";
    case Regime::ImplicitLike: return "implicit-like";
  }
  return "?";
}

StabilityReport check_stability(int n, double tau, double theta,
                                std::optional<double> r) {
  StabilityReport rep;
  const double n2tau = static_cast<double>(n) * n * tau;

  const double pi = std::numbers::pi;
  for (int j = 1; j <= n / 2; ++j) {
    const double s = std::sin(j * pi / n);
    const double l = -4.0 * n * static_cast<double>(n) * s * s;
    const double b = (1.0 + (1.0 - theta) * tau * l) / (1.0 - theta * tau * l);
    if (std::abs(b) > rep.max_amplification) {
      rep.max_amplification = std::abs(b);
      rep.binding_mode = j;
    }
  }

  std::ostringstream why;
  if (theta < 0.5) {
    rep.regime = Regime::ExplicitLike;
    const double rr = r.value_or(n2tau);
    const double bound = 1.0 / (2.0 - 4.0 * theta);
    rep.satisfied = n2tau <= rr && rr < bound;
    rep.epsilon_regime = 2.0 - 4.0 * rr / (1.0 + 4.0 * theta * rr);
    if (!rep.satisfied)
      why << "theta = " << theta << " needs n^2 tau <= r < 1/(2-4 theta): n^2 tau = "
          << n2tau << ", r = " << rr << ", bound = " << bound;
  } else if (theta == 0.5) {
    rep.regime = Regime::CrankNicolson;
    rep.satisfied = true;
    rep.epsilon_regime = std::min(0.5, 1.0 / (n2tau + 0.5));
  } else {
    rep.regime = Regime::ImplicitLike;
    rep.satisfied = true;
    rep.epsilon_regime = std::min(-(1.0 - 2.0 * theta) / (2.0 * theta), 0.5);
  }
  rep.epsilon = std::min(rep.epsilon_regime, 1.0 - rep.max_amplification);
  if (rep.satisfied && !(rep.epsilon > 0.0)) {
    rep.satisfied = false;
    why << "no contraction margin left";
  }
  if (!rep.satisfied) {
    why << "; binding mode j = " << rep.binding_mode
        << " has |R1 R2| = " << rep.max_amplification;
    rep.diagnostic = why.str();
  }
  return rep;
}

namespace {

double grid_min(const std::vector<double>& g) {
  return *std::min_element(g.begin(), g.end());
}

}  // namespace

PositivityTime positivity_time_semi(int n) {
  if (n < 3) throw std::invalid_argument("positivity time needs n >= 3");
  const SpectralBasis basis(n);
  auto min_at = [&](double t) { return grid_min(semi_green_grid(t, basis)); };

  PositivityTime out;
  out.certified_on = n;
  out.t_sufficient = std::log(2.0 * (n - 1)) / (-basis.eigenvalue(1));
  const double t_hi = out.t_sufficient;
  if (min_at(t_hi) < 0.5)
    throw std::logic_error("sufficient positivity time fails its own check");

  // Shrink by bisection, then scan [t*, t_sufficient] and restart the
  // bisection above any failing sample.
  double lo = 0.0;
  double hi = t_hi;
  constexpr int kScan = 512;
  for (;;) {
    for (int it = 0; it < 80 && hi - lo > 1e-15 * t_hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (min_at(mid) >= 0.5 ? hi : lo) = mid;
    }
    double failing = -1.0;
    for (int i = kScan; i >= 1; --i) {
      const double t = hi + (t_hi - hi) * i / kScan;
      if (min_at(t) < 0.5) {
        failing = t;
        break;
      }
    }
    if (failing < 0.0) break;
    lo = failing;
    hi = t_hi;
  }
  out.t_star = hi;
  out.min_at_t_star = min_at(hi);
  out.min_at_twice_t_star = min_at(2.0 * hi);
  return out;
}

PositivityTime positivity_time_full(int n, double tau, double theta) {
  if (n < 3) throw std::invalid_argument("positivity time needs n >= 3");
  const auto st = check_stability(n, tau, theta);
  if (!st.satisfied) throw std::domain_error("unstable theta-scheme: " + st.diagnostic);
  const SpectralBasis basis(n);
  const AmplificationFactors f(basis, tau, theta);
  auto min_at = [&](std::int64_t k) {
    return grid_min(full_green_grid(k, FullKernel::G1, f, basis));
  };

  const double eps_p = std::min(st.epsilon, 1.0 - f.beta[1]);
  const double modes = 2.0 * (n / 2);
  std::int64_t m = 1;
  if (eps_p < 1.0) {
    m = static_cast<std::int64_t>(
        std::ceil(std::log(0.5 / modes) / std::log1p(-eps_p)));
    m = std::max<std::int64_t>(m, 1);
    while (m > 1 && modes * std::pow(1.0 - eps_p, static_cast<double>(m - 1)) <= 0.5) --m;
    while (modes * std::pow(1.0 - eps_p, static_cast<double>(m)) > 0.5) ++m;
  }

  PositivityTime out;
  out.certified_on = n;
  out.steps_sufficient = m;
  out.t_sufficient = static_cast<double>(m) * tau;
  if (min_at(m) < 0.5)
    throw std::logic_error("sufficient positivity step fails its own check");

  // The kernel is piecewise constant in time, so every step from the
  // returned one up to the sufficient one is checked.
  std::int64_t k = m;
  while (k > 0 && min_at(k - 1) >= 0.5) --k;
  out.steps = k;
  out.t_star = static_cast<double>(k) * tau;
  out.min_at_t_star = min_at(k);
  out.min_at_twice_t_star = min_at(2 * k);
  return out;
}

double sharp_gate_value(int n, double tau, double j0, double zeta) {
  const double n2tau = static_cast<double>(n) * n * tau;
  const double pi = std::numbers::pi;
  return std::pow(j0, 4) * n2tau / (16.0 * pi * zeta * zeta) + 16.0 * pi * n2tau;
}

bool check_sharp_regime(int n, double tau, const ModelSpec& model, double zeta) {
  const SharpRegimeSpec regime{zeta, model.lambda};
  return regime.holds(n) &&
         sharp_gate_value(n, tau, model.sigma.lower_ratio(), zeta) < 1.0;
}

}  // namespace she
