#include "she/convergence.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "she/kernels.hpp"
#include "she/noise.hpp"
#include "she/parallel.hpp"
#include "she/solver.hpp"
#include "she/spectral.hpp"
#include "she/stats.hpp"

namespace she {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTailTarget = 1e-12;
constexpr std::int64_t kChunkPaths = 16;

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

template <unsigned N>
Rule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  Rule r;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      r.x.push_back(0.0);
      r.w.push_back(w[i]);
    } else {
      r.x.push_back(-a[i]);
      r.w.push_back(w[i]);
      r.x.push_back(a[i]);
      r.w.push_back(w[i]);
    }
  }
  return r;
}

const Rule& gauss_rule(int nodes) {
  static const Rule r7 = make_rule<7>(), r10 = make_rule<10>(), r15 = make_rule<15>(),
                    r20 = make_rule<20>(), r25 = make_rule<25>(), r30 = make_rule<30>();
  switch (nodes) {
    case 7: return r7;
    case 10: return r10;
    case 15: return r15;
    case 20: return r20;
    case 25: return r25;
    case 30: return r30;
    default: throw std::invalid_argument("quadrature nodes must be 7, 10, 15, 20, 25 or 30");
  }
}

// Pieces of int_0^1 |G - K|^2 dy for a grid-piecewise-constant K(y) with
// modal coefficients coef_j (j >= 1):
//   int (G-1)^2 = G(2t,x,x) - 1
//   int (K-1)^2 = sum_j coef_j^2 |e^n_j(x)|^2
//   int (G-1)(K-1) = sum_l (K_l - 1) int_cell_l (G-1).
class ErrorPieces {
 public:
  ErrorPieces(const SpectralBasis& basis, double x) : basis_(basis), x_(x) {
    basis.locate(x, k_, w_);
    const int n = basis.n();
    mod_sq_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) mod_sq_[static_cast<std::size_t>(j)] = basis.interp_modulus_sq(j, x);
  }

  double continuous_square(double t) const { return heat_kernel_minus_one(2.0 * t, x_, x_); }

  double discrete_square(const std::vector<double>& coef) const {
    double s = 0.0;
    for (int j = basis_.n() - 1; j >= 1; --j)
      s += coef[static_cast<std::size_t>(j)] * coef[static_cast<std::size_t>(j)] *
           mod_sq_[static_cast<std::size_t>(j)];
    return s;
  }

  // K_l - 1 for l = 0..n-1.
  std::vector<double> profile(const std::vector<double>& coef) const {
    const int n = basis_.n();
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    for (int l = 0; l < n; ++l) {
      double s = 0.0;
      for (int j = n - 1; j >= 1; --j) {
        const double cross = (1.0 - w_) * basis_.cos_grid(static_cast<long long>(j) * (k_ - l)) +
                             w_ * basis_.cos_grid(static_cast<long long>(j) * (k_ + 1 - l));
        s += coef[static_cast<std::size_t>(j)] * cross;
      }
      p[static_cast<std::size_t>(l)] = s;
    }
    return p;
  }

  double cross(double t, const std::vector<double>& profile) const {
    const int n = basis_.n();
    double s = 0.0;
    for (int l = 0; l < n; ++l)
      s += profile[static_cast<std::size_t>(l)] *
           heat_kernel_cell_integral_centered(t, x_, static_cast<double>(l) / n,
                                              static_cast<double>(l + 1) / n);
    return s;
  }

 private:
  const SpectralBasis& basis_;
  double x_;
  int k_ = 0;
  double w_ = 0.0;
  std::vector<double> mod_sq_;
};

std::vector<double> semi_coef(const SpectralBasis& basis, double t) {
  std::vector<double> c(static_cast<std::size_t>(basis.n()));
  for (int j = 0; j < basis.n(); ++j) c[static_cast<std::size_t>(j)] = std::exp(basis.eigenvalue(j) * t);
  return c;
}

std::vector<double> full_coef(const AmplificationFactors& f, std::int64_t k, bool with_r1) {
  std::vector<double> c(static_cast<std::size_t>(f.n));
  for (int j = 0; j < f.n; ++j) {
    const auto i = static_cast<std::size_t>(j);
    const double p = std::pow(f.beta[i], static_cast<double>(k));
    c[i] = with_r1 ? p * f.r1[i] : p;
  }
  return c;
}

double semi_integrand(const SpectralBasis& basis, const ErrorPieces& pieces, double t) {
  const auto coef = semi_coef(basis, t);
  return pieces.continuous_square(t) + pieces.discrete_square(coef) -
         2.0 * pieces.cross(t, pieces.profile(coef));
}

// int_T^inf sum_{m != 0} e^{-2 a_m t} dt with a_m = 4 pi^2 m^2.
double continuous_tail(double T) {
  double s = 0.0;
  for (int m = 200; m >= 1; --m) {
    const double a = 4.0 * kPi * kPi * m * m;
    s += 2.0 * std::exp(-2.0 * a * T) / (2.0 * a);
  }
  return s;
}

double semi_quadrature(const SpectralBasis& basis, const ErrorPieces& pieces, double s_end,
                       int panels, const Rule& rule) {
  const double h = s_end / panels;
  double total = 0.0;
  for (int p = panels - 1; p >= 0; --p) {
    const double a = p * h;
    double part = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double s = a + 0.5 * h * (rule.x[i] + 1.0);
      part += rule.w[i] * semi_integrand(basis, pieces, s * s) * 2.0 * s;
    }
    total += 0.5 * h * part;
  }
  return total;
}

void require_stable(const AmplificationFactors& f) {
  if (!f.stable) throw std::domain_error("unstable theta-scheme: " + f.diagnostic);
}

double full_tail(const AmplificationFactors& f, std::int64_t K) {
  double s = continuous_tail(static_cast<double>(K) * f.tau);
  for (int j = 1; j < f.n; ++j) {
    const auto i = static_cast<std::size_t>(j);
    const double b2 = f.beta[i] * f.beta[i];
    s += f.tau * f.r1[i] * f.r1[i] * std::pow(b2, static_cast<double>(K)) / (1.0 - b2);
  }
  return 2.0 * s;
}

// Steps [0, K) with each step split into `split` panels; the first step is
// integrated in s = sqrt(t) to absorb the t^{-1/2} behaviour at the origin.
double full_quadrature(const AmplificationFactors& f, const ErrorPieces& pieces,
                       std::int64_t K, int split, int first_panels, const Rule& rule_first,
                       const Rule& rule_step) {
  const double tau = f.tau;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(K));
  for (std::int64_t k = 0; k < K; ++k) {
    const auto coef = full_coef(f, k, true);
    const auto prof = pieces.profile(coef);
    double part = tau * pieces.discrete_square(coef);
    if (k == 0) {
      const double hs = std::sqrt(tau) / first_panels;
      for (int p = 0; p < first_panels; ++p) {
        double q = 0.0;
        for (std::size_t i = 0; i < rule_first.x.size(); ++i) {
          const double s = p * hs + 0.5 * hs * (rule_first.x[i] + 1.0);
          const double t = s * s;
          q += rule_first.w[i] * (pieces.continuous_square(t) - 2.0 * pieces.cross(t, prof)) * 2.0 * s;
        }
        part += 0.5 * hs * q;
      }
    } else {
      const double h = tau / split;
      for (int p = 0; p < split; ++p) {
        const double a = static_cast<double>(k) * tau + p * h;
        double q = 0.0;
        for (std::size_t i = 0; i < rule_step.x.size(); ++i) {
          const double t = a + 0.5 * h * (rule_step.x[i] + 1.0);
          q += rule_step.w[i] * (pieces.continuous_square(t) - 2.0 * pieces.cross(t, prof));
        }
        part += 0.5 * h * q;
      }
    }
    terms.push_back(part);
  }
  double total = 0.0;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) total += *it;
  return total;
}

double relative_change(double fine, double coarse) {
  return fine != 0.0 ? std::abs(fine - coarse) / std::abs(fine) : std::abs(fine - coarse);
}

std::int64_t integer_ratio(double big, double small, const char* what) {
  const double r = big / small;
  const auto k = static_cast<std::int64_t>(std::llround(r));
  if (k < 1 || std::abs(r - static_cast<double>(k)) > 1e-9 * r)
    throw std::invalid_argument(std::string(what) + " is not an integer multiple");
  return k;
}

struct Welford {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    count += 1.0;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }

  static Welford merge(const Welford& a, const Welford& b) {
    if (a.count == 0.0) return b;
    if (b.count == 0.0) return a;
    Welford r;
    r.count = a.count + b.count;
    const double d = b.mean - a.mean;
    r.mean = a.mean + d * b.count / r.count;
    r.m2 = a.m2 + b.m2 + d * d * a.count * b.count / r.count;
    return r;
  }
};

}  // namespace

GreenErrorResult green_error_semi(int n, double x, const GreenQuadSpec& q) {
  if (n < 3) throw std::invalid_argument("n < 3");
  const SpectralBasis basis(n);
  const ErrorPieces pieces(basis, x);
  const Rule& rule = gauss_rule(q.nodes);
  const double T = 1.0;
  const int panels = q.panels_per_cell * std::max(n, 8);
  GreenErrorResult r;
  r.horizon = T;
  const double coarse = semi_quadrature(basis, pieces, std::sqrt(T), panels, rule);
  r.value = coarse;
  if (q.check_halving) {
    r.value = semi_quadrature(basis, pieces, std::sqrt(T), 2 * panels, rule);
    r.halving_change = relative_change(r.value, coarse);
  }
  double disc = 0.0;
  for (int j = n - 1; j >= 1; --j) {
    const double l = basis.eigenvalue(j);
    disc += std::exp(2.0 * l * T) / (-2.0 * l);
  }
  r.tail_bound = 2.0 * (continuous_tail(T) + disc);
  r.converged = r.tail_bound <= kTailTarget && r.halving_change < 0.01;
  return r;
}

double green_error_semi_series(int n, std::int64_t modes) {
  if (n < 3) throw std::invalid_argument("n < 3");
  const SpectralBasis basis(n);
  double disc = 0.0;
  for (int j = n - 1; j >= 1; --j) disc += 1.0 / (-2.0 * basis.eigenvalue(j));
  double cross = 0.0;
  for (std::int64_t m = modes; m >= 1; --m) {
    if (m % n == 0) continue;
    const double phi = 2.0 * kPi * static_cast<double>(m) / n;
    const double a = 4.0 * kPi * kPi * static_cast<double>(m) * static_cast<double>(m);
    cross += (std::sin(phi) / phi) / (a - basis.eigenvalue(basis.wrap(m)));
  }
  return 1.0 / 24.0 + disc - 4.0 * cross;
}

GreenErrorResult green_error_full(int n, double tau, double theta, double x,
                                  const GreenQuadSpec& q) {
  if (n < 3) throw std::invalid_argument("n < 3");
  const SpectralBasis basis(n);
  const AmplificationFactors f(basis, tau, theta);
  require_stable(f);
  const ErrorPieces pieces(basis, x);
  const Rule& rule_first = gauss_rule(q.nodes);
  const Rule& rule_step = gauss_rule(q.step_nodes);

  auto K = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(0.25 / tau)));
  while (full_tail(f, K) > kTailTarget) {
    K *= 2;
    if (K > q.max_steps)
      throw std::invalid_argument("Green error quadrature needs more than max_steps steps");
  }
  const int first_panels =
      std::max(1, static_cast<int>(std::ceil(std::sqrt(tau) * q.panels_per_cell * n)));

  GreenErrorResult r;
  r.horizon = static_cast<double>(K) * tau;
  r.tail_bound = full_tail(f, K);
  const double coarse =
      full_quadrature(f, pieces, K, 1, first_panels, rule_first, rule_step);
  r.value = coarse;
  if (q.check_halving) {
    r.value = full_quadrature(f, pieces, K, 2, 2 * first_panels, rule_first, rule_step);
    r.halving_change = relative_change(r.value, coarse);
  }
  r.converged = r.tail_bound <= kTailTarget && r.halving_change < 0.01;
  return r;
}

double green_error_full_series(int n, double tau, double theta, std::int64_t modes) {
  if (n < 3) throw std::invalid_argument("n < 3");
  const SpectralBasis basis(n);
  const AmplificationFactors f(basis, tau, theta);
  require_stable(f);
  double disc = 0.0;
  for (int j = n - 1; j >= 1; --j) {
    const auto i = static_cast<std::size_t>(j);
    disc += tau * f.r1[i] * f.r1[i] / (1.0 - f.beta[i] * f.beta[i]);
  }
  double cross = 0.0;
  for (std::int64_t m = modes; m >= 1; --m) {
    if (m % n == 0) continue;
    const auto i = static_cast<std::size_t>(basis.wrap(m));
    const double phi = 2.0 * kPi * static_cast<double>(m) / n;
    const double a = 4.0 * kPi * kPi * static_cast<double>(m) * static_cast<double>(m);
    const double decay = std::exp(-a * tau);
    cross += (std::sin(phi) / phi) * f.r1[i] * -std::expm1(-a * tau) /
             (a * (1.0 - f.beta[i] * decay));
  }
  return 1.0 / 24.0 + disc - 4.0 * cross;
}

double green_error_semi_at(int n, double x, double t) {
  const SpectralBasis basis(n);
  const ErrorPieces pieces(basis, x);
  return semi_integrand(basis, pieces, t);
}

double green_error_full_at(int n, double tau, double theta, double x, double t) {
  const SpectralBasis basis(n);
  const AmplificationFactors f(basis, tau, theta);
  require_stable(f);
  const ErrorPieces pieces(basis, x);
  const auto coef = full_coef(f, step_index(t, tau), true);
  return pieces.continuous_square(t) + pieces.discrete_square(coef) -
         2.0 * pieces.cross(t, pieces.profile(coef));
}

double initial_data_error(int n, double tau, double theta, double x, double t,
                          const std::vector<double>& u0) {
  if (static_cast<int>(u0.size()) != n)
    throw std::invalid_argument("initial samples do not match the grid size");
  const SpectralBasis basis(n);
  const AmplificationFactors f(basis, tau, theta);
  require_stable(f);
  const ErrorPieces pieces(basis, x);
  const auto semi = semi_coef(basis, t);
  const auto full = full_coef(f, step_index(t, tau), false);
  std::vector<double> diff(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = semi[j] - full[j];
  const auto prof = pieces.profile(diff);
  double s = 0.0;
  for (int l = n - 1; l >= 0; --l) s += prof[static_cast<std::size_t>(l)] * u0[static_cast<std::size_t>(l)];
  s /= n;
  return s * s;
}

const char* to_string(RefineDirection d) {
  return d == RefineDirection::Temporal ? "temporal" : "spatial";
}

RefinementLadder temporal_ladder(int n, const std::vector<int>& tau_exponents,
                                 int reference_exponent, std::uint64_t seed) {
  RefinementLadder l;
  l.direction = RefineDirection::Temporal;
  for (int k : tau_exponents) l.rungs.push_back({n, std::ldexp(1.0, -k), seed});
  l.reference = {n, std::ldexp(1.0, -reference_exponent), seed};
  return l;
}

RefinementLadder spatial_ladder(double tau, const std::vector<int>& ns, int reference_n,
                                std::uint64_t seed) {
  RefinementLadder l;
  l.direction = RefineDirection::Spatial;
  for (int n : ns) l.rungs.push_back({n, tau, seed});
  l.reference = {reference_n, tau, seed};
  return l;
}

ErrorCurve strong_error_study(const StrongStudyConfig& cfg, const RefinementLadder& ladder) {
  const Rung& ref = ladder.reference;
  if (ladder.rungs.empty()) throw std::invalid_argument("refinement ladder has no rungs");
  if (ref.n < 3) throw std::invalid_argument("reference n < 3");
  if (cfg.paths < 1) throw std::invalid_argument("paths < 1");

  const std::int64_t ref_steps = integer_ratio(cfg.horizon, ref.tau, "horizon / reference tau");
  const auto R = ladder.rungs.size();
  std::vector<int> sf(R), tf(R);
  for (std::size_t r = 0; r < R; ++r) {
    const Rung& g = ladder.rungs[r];
    if (g.seed != ref.seed)
      throw std::invalid_argument("rung seed " + std::to_string(g.seed) +
                                  " differs from reference seed " + std::to_string(ref.seed));
    if (g.n < 3 || ref.n % g.n != 0)
      throw std::invalid_argument("rung n must divide the reference n");
    sf[r] = ref.n / g.n;
    tf[r] = static_cast<int>(integer_ratio(g.tau, ref.tau, "rung tau / reference tau"));
    integer_ratio(cfg.horizon, g.tau, "horizon / rung tau");
    const int factor = ladder.direction == RefineDirection::Temporal ? tf[r] : sf[r];
    if (factor < 4)
      throw std::invalid_argument("reference must be at least 4x finer than every rung");
  }

  // Sampled initial data must match every grid on the ladder.
  cfg.u0.on_grid(ref.n);
  for (const auto& g : ladder.rungs) cfg.u0.on_grid(g.n);

  auto make_model = [&] {
    ModelSpec m;
    m.lambda = cfg.lambda;
    m.sigma = cfg.sigma;
    m.u0 = cfg.u0;
    return m;
  };
  auto make_scheme = [&](double tau) {
    SchemeSpec s;
    s.tau = tau;
    s.theta = cfg.theta;
    return s;
  };
  const ModelSpec model = make_model();
  // Construct once up front so instability surfaces before any work starts.
  Propagator(ref.n, make_scheme(ref.tau), model);
  for (const auto& g : ladder.rungs) Propagator(g.n, make_scheme(g.tau), model);

  const std::int64_t chunks = (cfg.paths + kChunkPaths - 1) / kChunkPaths;
  std::vector<std::vector<Welford>> stats(static_cast<std::size_t>(chunks),
                                          std::vector<Welford>(R));
  parallel_for(static_cast<std::size_t>(chunks), cfg.threads, [&](std::size_t c) {
    Propagator ref_prop(ref.n, make_scheme(ref.tau), model);
    std::vector<Propagator> props;
    props.reserve(R);
    for (const auto& g : ladder.rungs) props.emplace_back(g.n, make_scheme(g.tau), model);
    std::vector<double> fine(static_cast<std::size_t>(ref.n));
    const std::int64_t first = static_cast<std::int64_t>(c) * kChunkPaths;
    const std::int64_t last = std::min(cfg.paths, first + kChunkPaths);
    for (std::int64_t p = first; p < last; ++p) {
      const NoiseSeed seed{ref.seed, static_cast<std::uint32_t>(p),
                           static_cast<std::uint32_t>(NoisePurpose::Path)};
      auto u_ref = cfg.u0.on_grid(ref.n);
      std::vector<std::vector<double>> u(R);
      std::vector<NoiseAccumulator> acc;
      acc.reserve(R);
      std::vector<std::int64_t> coarse_step(R, 0);
      for (std::size_t r = 0; r < R; ++r) {
        u[r] = cfg.u0.on_grid(ladder.rungs[r].n);
        acc.emplace_back(ref.n, sf[r], tf[r]);
      }
      for (std::int64_t i = 0; i < ref_steps; ++i) {
        noise_row(seed, static_cast<std::uint32_t>(i), ref.n, fine.data());
        ref_prop.step(u_ref, fine.data(), i);
        for (std::size_t r = 0; r < R; ++r)
          if (acc[r].add(fine.data())) props[r].step(u[r], acc[r].xi().data(), coarse_step[r]++);
      }
      for (std::size_t r = 0; r < R; ++r) {
        const double e = u[r][0] - u_ref[0];
        stats[c][r].add(e * e);
      }
    }
  });

  ErrorCurve curve;
  curve.direction = ladder.direction;
  curve.resolutions = ladder.rungs;
  curve.paths = cfg.paths;
  curve.seed = ref.seed;
  for (std::size_t r = 0; r < R; ++r) {
    std::vector<Welford> col(static_cast<std::size_t>(chunks));
    for (std::size_t c = 0; c < col.size(); ++c) col[c] = stats[c][r];
    const Welford w = pairwise_reduce(col, 0, col.size(), Welford::merge);
    const double rms = std::sqrt(w.mean);
    const double se_mean = w.count > 1.0 ? std::sqrt(w.m2 / (w.count - 1.0) / w.count) : 0.0;
    curve.errors.push_back(rms);
    curve.stderrs.push_back(rms > 0.0 ? se_mean / (2.0 * rms) : 0.0);
  }
  if (R >= 2) fit_order(curve);
  return curve;
}

void fit_order(ErrorCurve& curve) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < curve.errors.size(); ++i) {
    if (!(curve.errors[i] > 0.0)) throw std::invalid_argument("nonpositive error in order fit");
    const auto& g = curve.resolutions[i];
    const double h = curve.direction == RefineDirection::Temporal ? g.tau : 1.0 / g.n;
    xs.push_back(std::log(h));
    ys.push_back(std::log(curve.errors[i]));
  }
  const LineFit f = fit_line(xs, ys);
  curve.fitted_order = f.slope;
  curve.ci = f.slope_ci;
}

}  // namespace she
