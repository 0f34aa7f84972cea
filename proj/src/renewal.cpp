#include "she/renewal.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "she/model.hpp"
#include "she/stability.hpp"

namespace she {

namespace {

constexpr double kPi = std::numbers::pi;

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Root of an increasing or decreasing function on [lo, hi] with a sign change.
double bisect(const std::function<double(double)>& h, double lo, double hi) {
  double flo = h(lo);
  const double fhi = h(hi);
  if (!(flo * fhi < 0.0)) throw std::logic_error("renewal function has no sign change");
  // Strict monotonicity on the bracket, sampled.
  const int samples = 64;
  double prev = flo;
  const double sign = fhi > flo ? 1.0 : -1.0;
  for (int i = 1; i <= samples; ++i) {
    const double v = h(lo + (hi - lo) * i / samples);
    if (!(sign * (v - prev) > 0.0))
      throw std::logic_error("renewal function is not strictly monotone on the bracket");
    prev = v;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = h(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// k-th derivative of f(x) = e^{-cx} x^{-1/2}.
double decay_derivative(int k, double c, double x) {
  double acc = 0.0;
  double binom = 1.0;
  for (int i = 0; i <= k; ++i) {
    double p = 1.0;
    for (int m = 0; m < i; ++m) p *= -0.5 - m;
    acc += binom * std::pow(-c, k - i) * p * std::pow(x, -0.5 - i);
    binom = binom * (k - i) / (i + 1);
  }
  return std::exp(-c * x) * acc;
}

double continuous_b(double lambda, double j0) {
  return lambda * lambda * j0 * j0 / std::sqrt(32.0 * kPi);
}

double discrete_b(double lambda, double j0) {
  return lambda * lambda * j0 * j0 / (8.0 * std::sqrt(kPi));
}

}  // namespace

double decay_series(double c, double* remainder) {
  if (!(c > 0.0)) throw std::domain_error("decay series needs c > 0");
  const double zeta6 = std::pow(kPi, 6) / 945.0;
  for (int r0 = 64;; r0 *= 2) {
    const double x = r0;
    const double bound = 2.0 * zeta6 / std::pow(2.0 * kPi, 6) *
                         std::abs(decay_derivative(5, c, x));
    const double integral = std::sqrt(kPi / c) * std::erfc(std::sqrt(c * x));
    const double tail = integral + 0.5 * decay_derivative(0, c, x) -
                        decay_derivative(1, c, x) / 12.0 +
                        decay_derivative(3, c, x) / 720.0 -
                        decay_derivative(5, c, x) / 30240.0;
    if (bound > 1e-15 * tail && r0 < (1 << 20)) continue;
    Neumaier head;
    for (int r = r0 - 1; r >= 1; --r) head.add(std::exp(-c * r) / std::sqrt(static_cast<double>(r)));
    if (remainder) *remainder = bound;
    return head.value() + tail;
  }
}

double discrete_mass_direct(double mu, double bt, int n, double tau, std::int64_t* terms,
                            double* tail) {
  const double c1 = kPi * mu * mu * bt * bt * tau;
  const double c2 = c1 + 4.0 * n * static_cast<double>(n) * kPi * kPi * tau;
  auto tail_bound = [&](double R) {
    return bt * std::exp(-c1 * R) * tau / std::sqrt(R * tau) / (-std::expm1(-c1));
  };
  // Smallest R* with the tail bound below 1e-12, by doubling then bisection.
  double hi = 1.0;
  while (tail_bound(hi) >= 1e-12) hi *= 2.0;
  double lo = hi / 2.0;
  while (hi - lo > 1.0) {
    const double mid = std::floor(0.5 * (lo + hi));
    (tail_bound(mid) < 1e-12 ? hi : lo) = mid;
  }
  const auto R = static_cast<std::int64_t>(hi);
  Neumaier s;
  const double scale = bt * std::sqrt(tau);
  for (std::int64_t r = R; r >= 1; --r) {
    const double rd = static_cast<double>(r);
    s.add(scale * std::exp(-c1 * rd) * -std::expm1(-(c2 - c1) * rd) / std::sqrt(rd));
  }
  if (terms) *terms = R;
  if (tail) *tail = tail_bound(static_cast<double>(R));
  return s.value();
}

RenewalRoot continuous_mu(double lambda, double j0, int n, std::optional<double> zeta) {
  if (!(lambda > 0.0 && j0 > 0.0 && n > 0))
    throw std::invalid_argument("continuous renewal root needs lambda, J0, n > 0");
  const double b = continuous_b(lambda, j0);
  const double nn = static_cast<double>(n) * n;
  auto h = [&](double mu) { return b / std::sqrt(mu * mu * b * b + 2.0 * nn * kPi) - (1.0 / mu - 1.0); };

  RenewalRoot r;
  r.b = b;
  r.mu = bisect(h, 1e-6, 1.0);

  // Mass of g(t) = b e^{-pi mu^2 b^2 t}(1 - e^{-2 n^2 pi^2 t})/sqrt(t) by
  // quadrature in s = sqrt(t), where the integrand is smooth.
  const double a = kPi * r.mu * r.mu * b * b;
  auto g = [&](double s) {
    return 2.0 * b * std::exp(-a * s * s) * (-std::expm1(-2.0 * nn * kPi * kPi * s * s));
  };
  using boost::math::quadrature::gauss_kronrod;
  const double s_knee = 5.0 / n;
  const double s_end = std::sqrt(50.0 / a);
  double mass = gauss_kronrod<double, 61>::integrate(g, 0.0, s_knee, 10, 1e-12);
  const int pieces = 64;
  for (int i = 0; i < pieces; ++i) {
    const double lo = s_knee + (s_end - s_knee) * i / pieces;
    const double hi = s_knee + (s_end - s_knee) * (i + 1) / pieces;
    mass += gauss_kronrod<double, 61>::integrate(g, lo, hi, 10, 1e-12);
  }
  // Gaussian tail beyond s_end, bounded by dropping the (1 - e^{..}) factor.
  mass += b * std::sqrt(kPi / a) * std::erfc(std::sqrt(a) * s_end);
  r.mass_error = std::abs(mass - 1.0);

  const double z = zeta.value_or(n / (lambda * lambda));
  r.lower_bound = 8.0 * kPi * z / (j0 * j0 + 8.0 * kPi * z);
  r.lower_bound_ok = r.mu >= r.lower_bound;
  r.implied_rate = kPi * r.mu * r.mu * b * b;
  return r;
}

RenewalRoot discrete_mu(double lambda, double j0, int n, double tau, double zeta) {
  if (!(lambda > 0.0 && j0 > 0.0 && n > 0 && tau > 0.0 && zeta > 0.0))
    throw std::invalid_argument("discrete renewal root needs positive parameters");
  if (!(n >= zeta * lambda * lambda)) throw std::domain_error("n < zeta lambda^2");
  const double gate = sharp_gate_value(n, tau, j0, zeta);
  if (!(gate < 1.0))
    throw std::domain_error("step-size gate J0^4 n^2 tau/(16 pi zeta^2) + 16 pi n^2 tau < 1 fails");

  const double bt = discrete_b(lambda, j0);
  const double nn = static_cast<double>(n) * n;
  const double st = std::sqrt(tau);
  auto h = [&](double mu) {
    const double c1 = kPi * mu * mu * bt * bt * tau;
    const double c2 = c1 + 4.0 * nn * kPi * kPi * tau;
    return st * (decay_series(c1) - decay_series(c2)) - 1.0 / bt;
  };

  RenewalRoot r;
  r.b = bt;
  r.lower_bound = 16.0 * kPi * zeta / (j0 * j0 + 32.0 * kPi * zeta);
  r.mu = bisect(h, r.lower_bound, 1.0);
  r.lower_bound_ok = r.mu >= r.lower_bound;
  r.implied_rate = kPi * r.mu * r.mu * bt * bt;

  std::int64_t terms = 0;
  double tail = 0.0;
  const double mass = discrete_mass_direct(r.mu, bt, n, tau, &terms, &tail);
  r.terms = terms;
  r.tail_bound = tail;
  r.mass_error = std::abs(mass - 1.0);

  const double c1 = kPi * r.mu * r.mu * bt * bt * tau;
  const double first = st * decay_series(c1);
  const double top = 1.0 / (r.mu * bt);
  r.sandwich_ok = first <= top * (1.0 + 1e-12) && first >= top - 2.0 * st;
  return r;
}

RenewalRoot discrete_mu_limit(double lambda, double j0, int n, double zeta) {
  const double bt = discrete_b(lambda, j0);
  const double nn = static_cast<double>(n) * n;
  auto h = [&](double mu) { return bt / std::sqrt(mu * mu * bt * bt + 4.0 * nn * kPi) - (1.0 / mu - 1.0); };
  RenewalRoot r;
  r.b = bt;
  r.mu = bisect(h, 1e-6, 1.0);
  r.lower_bound = 16.0 * kPi * zeta / (j0 * j0 + 32.0 * kPi * zeta);
  r.lower_bound_ok = r.mu >= r.lower_bound;
  r.implied_rate = kPi * r.mu * r.mu * bt * bt;
  // Closed-form mass of the limiting density b~ e^{-pi mu^2 b~^2 t}(1 - e^{-4 n^2 pi^2 t})/sqrt(t).
  const double mass = 1.0 / r.mu - bt / std::sqrt(r.mu * r.mu * bt * bt + 4.0 * nn * kPi);
  r.mass_error = std::abs(mass - 1.0);
  return r;
}

}  // namespace she
