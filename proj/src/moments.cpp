#include "she/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "she/noise.hpp"
#include "she/parallel.hpp"
#include "she/solver.hpp"
#include "she/spectral.hpp"
#include "she/stability.hpp"
#include "she/stats.hpp"

namespace she {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRescaleAbove = 1e200;

void require_linear_sigma(const ModelSpec& model) {
  if (!model.sigma.is_linear())
    throw std::invalid_argument(
        "exact second-moment recursion needs linear sigma; use Monte Carlo");
}

void require_stable(const GridSpec& grid, const SchemeSpec& scheme) {
  if (scheme.stepper != Stepper::ThetaScheme)
    throw std::invalid_argument("exact recursion is implemented for the theta-scheme");
  const auto st = check_stability(grid.n, scheme.tau, scheme.theta, scheme.r);
  if (!st.satisfied) throw std::domain_error("unstable theta-scheme: " + st.diagnostic);
}

Eigen::MatrixXd circulant(const std::vector<double>& modal, const SpectralBasis& basis) {
  const int n = basis.n();
  std::vector<double> col(static_cast<std::size_t>(n), 0.0);
  for (int d = 0; d < n; ++d) {
    double s = 0.0;
    for (int j = n - 1; j >= 0; --j)
      s += modal[static_cast<std::size_t>(j)] * basis.cos_grid(static_cast<long long>(j) * d);
    col[static_cast<std::size_t>(d)] = s / n;
  }
  Eigen::MatrixXd C(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) C(r, c) = col[static_cast<std::size_t>(basis.wrap(r - c))];
  return C;
}

struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    count += 1.0;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }
};

Moments merge(const Moments& a, const Moments& b) {
  if (a.count == 0.0) return b;
  if (b.count == 0.0) return a;
  Moments r;
  r.count = a.count + b.count;
  const double d = b.mean - a.mean;
  r.mean = a.mean + d * (b.count / r.count);
  r.m2 = a.m2 + b.m2 + d * d * (a.count * b.count / r.count);
  return r;
}

std::vector<std::int64_t> record_steps(std::int64_t steps, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  std::vector<std::int64_t> r;
  for (std::int64_t i = 0; i <= steps; i += stride) r.push_back(i);
  return r;
}

}  // namespace

double MomentSeries::value(std::size_t i) const { return std::exp(log_values[i]); }

double MomentSeries::stderr_abs(std::size_t i) const {
  return rel_stderr.empty() ? 0.0 : rel_stderr[i] * value(i);
}

std::vector<MomentMatrix> exact_second_moment_recursion(const GridSpec& grid,
                                                        const SchemeSpec& scheme,
                                                        const ModelSpec& model,
                                                        std::int64_t steps) {
  require_linear_sigma(model);
  require_stable(grid, scheme);
  const SpectralBasis basis(grid.n);
  const AmplificationFactors f(basis, scheme.tau, scheme.theta);
  const Eigen::MatrixXd B = circulant(f.beta, basis);
  const Eigen::MatrixXd R1 = circulant(f.r1, basis);
  const double c = model.sigma.slope();
  const double q = model.lambda * model.lambda * grid.n * scheme.tau * c * c;

  const auto u0 = model.u0.on_grid(grid.n);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(u0.data(), grid.n);
  std::vector<MomentMatrix> out;
  out.reserve(static_cast<std::size_t>(steps + 1));
  out.push_back(v * v.transpose());
  for (std::int64_t i = 0; i < steps; ++i) {
    const auto& M = out.back();
    Eigen::MatrixXd next = B * M * B.transpose();
    next.noalias() += q * (R1 * M.diagonal().asDiagonal() * R1.transpose());
    out.push_back(0.5 * (next + next.transpose()));
  }
  return out;
}

MomentSeries exact_second_moment_series(const GridSpec& grid, const SchemeSpec& scheme,
                                        const ModelSpec& model, std::int64_t steps,
                                        RecursionPath path, int stride) {
  require_linear_sigma(model);
  require_stable(grid, scheme);
  if (path == RecursionPath::Auto)
    path = model.u0.is_constant() ? RecursionPath::Circulant : RecursionPath::Dense;
  if (path == RecursionPath::Circulant && !model.u0.is_constant())
    throw std::invalid_argument("circulant recursion needs constant initial data");

  const int n = grid.n;
  const SpectralBasis basis(n);
  const AmplificationFactors f(basis, scheme.tau, scheme.theta);
  const double c = model.sigma.slope();
  const double q = model.lambda * model.lambda * n * scheme.tau * c * c;

  MomentSeries s;
  s.source = MomentSource::ExactRecursion;
  s.p = 2.0;
  double log_scale = 0.0;
  auto emit = [&](std::int64_t i, double min_diag) {
    s.times.push_back(scheme.time(i));
    s.log_values.push_back(std::log(min_diag) + log_scale);
  };

  if (path == RecursionPath::Circulant) {
    // M stays circulant: M = F^{-1} diag(mu) F with diag(M) = mean(mu).
    const double i0 = model.u0.constant_value();
    std::vector<double> mu(static_cast<std::size_t>(n), 0.0);
    std::vector<double> b2(mu.size()), r2(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) {
      b2[j] = f.beta[j] * f.beta[j];
      r2[j] = f.r1[j] * f.r1[j] * q;
    }
    mu[0] = n * i0 * i0;
    auto mean = [&] {
      double acc = 0.0;
      for (double v : mu) acc += v;
      return acc / n;
    };
    double diag = mean();
    emit(0, diag);
    for (std::int64_t i = 1; i <= steps; ++i) {
      double peak = 0.0;
      for (std::size_t j = 0; j < mu.size(); ++j) {
        mu[j] = b2[j] * mu[j] + r2[j] * diag;
        peak = std::max(peak, mu[j]);
      }
      if (peak > kRescaleAbove) {
        for (double& v : mu) v /= peak;
        log_scale += std::log(peak);
      }
      diag = mean();
      if (i % stride == 0) emit(i, diag);
    }
    return s;
  }

  const Eigen::MatrixXd B = circulant(f.beta, basis);
  const Eigen::MatrixXd R1 = circulant(f.r1, basis);
  const auto u0 = model.u0.on_grid(n);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(u0.data(), n);
  Eigen::MatrixXd M = v * v.transpose();
  emit(0, M.diagonal().minCoeff());
  for (std::int64_t i = 1; i <= steps; ++i) {
    Eigen::MatrixXd next = B * M * B.transpose();
    next.noalias() += q * (R1 * M.diagonal().asDiagonal() * R1.transpose());
    M = 0.5 * (next + next.transpose());
    const double peak = M.cwiseAbs().maxCoeff();
    if (peak > kRescaleAbove) {
      M /= peak;
      log_scale += std::log(peak);
    }
    if (i % stride == 0) emit(i, M.diagonal().minCoeff());
  }
  return s;
}

std::vector<MomentSeries> mc_moments(const GridSpec& grid, const SchemeSpec& scheme,
                                     const ModelSpec& model, const std::vector<double>& ps,
                                     std::int64_t steps, const McOptions& opts) {
  if (opts.paths < 2) throw std::invalid_argument("Monte Carlo needs at least 2 paths");
  for (double p : ps)
    if (!(p >= 1.0)) throw std::invalid_argument("moment order p must be >= 1");
  if (opts.probe < 0 || opts.probe >= grid.n)
    throw std::invalid_argument("probe index outside the grid");

  const auto rec = record_steps(steps, opts.stride);
  const std::size_t nt = rec.size();
  const std::size_t np = ps.size();
  constexpr std::int64_t kChunk = 256;
  const std::size_t chunks = static_cast<std::size_t>((opts.paths + kChunk - 1) / kChunk);

  struct ChunkResult {
    std::vector<Moments> stats;  // [time][p]
    std::size_t valid = 0;       // record slots before any blow-up
  };
  std::vector<ChunkResult> results(chunks);
  // Construct once up front so an unstable scheme fails before any work.
  const Propagator proto(grid.n, scheme, model);

  parallel_for(chunks, opts.threads, [&](std::size_t c) {
    ChunkResult r;
    r.stats.assign(nt * np, Moments{});
    r.valid = nt;
    Propagator prop = proto;
    std::vector<double> u;
    std::vector<double> xi(static_cast<std::size_t>(grid.n));
    const std::int64_t first = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t last = std::min(opts.paths, first + kChunk);
    for (std::int64_t path = first; path < last; ++path) {
      const NoiseSeed seed{opts.seed, static_cast<std::uint32_t>(path),
                           static_cast<std::uint32_t>(NoisePurpose::Path)};
      u = model.u0.on_grid(grid.n);
      std::size_t slot = 0;
      auto record = [&](std::int64_t i) -> bool {
        if (slot < nt && rec[slot] == i) {
          const double a = std::abs(u[static_cast<std::size_t>(opts.probe)]);
          for (std::size_t k = 0; k < np; ++k) {
            const double v = std::pow(a, ps[k]);
            if (!std::isfinite(v)) return false;
            r.stats[slot * np + k].add(v);
          }
          ++slot;
        }
        return true;
      };
      bool ok = record(0);
      for (std::int64_t i = 0; ok && i < steps && slot < r.valid; ++i) {
        noise_row(seed, static_cast<std::uint32_t>(i), grid.n, xi.data());
        try {
          prop.step(u, xi.data(), i + 1);
        } catch (const BlowUp&) {
          ok = false;
          break;
        }
        ok = record(i + 1);
      }
      if (!ok) r.valid = std::min(r.valid, slot);
    }
    results[c] = std::move(r);
  });

  std::size_t valid = nt;
  for (const auto& r : results) valid = std::min(valid, r.valid);

  std::vector<MomentSeries> out(np);
  for (std::size_t k = 0; k < np; ++k) {
    auto& s = out[k];
    s.p = ps[k];
    s.source = MomentSource::MonteCarlo;
    s.paths = opts.paths;
    s.seed = opts.seed;
    s.horizon_truncated = valid < nt;
    for (std::size_t t = 0; t < valid; ++t) {
      std::vector<Moments> parts(chunks);
      for (std::size_t c = 0; c < chunks; ++c) parts[c] = results[c].stats[t * np + k];
      const Moments m = pairwise_reduce(parts, 0, chunks, merge);
      const double var = m.m2 / (m.count - 1.0);
      s.times.push_back(scheme.time(rec[t]));
      s.log_values.push_back(std::log(m.mean));
      s.rel_stderr.push_back(m.mean > 0.0 ? std::sqrt(var / m.count) / m.mean : 0.0);
    }
  }
  return out;
}

MomentSeries mc_moment(const GridSpec& grid, const SchemeSpec& scheme,
                       const ModelSpec& model, double p, std::int64_t steps,
                       const McOptions& opts) {
  return mc_moments(grid, scheme, model, {p}, steps, opts).front();
}

GrowthFit fit_growth(const MomentSeries& series, double t_a, double t_b) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double t = series.times[i];
    if (t < t_a || t > t_b) continue;
    const double y = series.log_values[i];
    if (!std::isfinite(y))
      throw std::invalid_argument("nonpositive or non-finite moment inside the fit window");
    xs.push_back(t);
    ys.push_back(y);
  }
  if (xs.size() < 5) throw std::invalid_argument("fit window holds fewer than 5 points");
  const LineFit f = fit_line(xs, ys);
  GrowthFit g;
  g.points = static_cast<int>(xs.size());
  g.t_a = xs.front();
  g.t_b = xs.back();
  g.gamma = f.slope;
  g.intercept = f.intercept;
  g.r_squared = f.r_squared;
  g.ci_halfwidth = f.slope_ci;
  return g;
}

double default_window_start(double horizon, double positivity_time) {
  return std::max(positivity_time, 0.2 * horizon);
}

int sweep_grid_size(double zeta, double lambda) {
  const double need = zeta * lambda * lambda;
  int n = static_cast<int>(std::ceil(need));
  if (n < need) ++n;
  return std::max(3, n);
}

SweepResult lambda_scaling_sweep(const SweepOptions& opts) {
  if (opts.lambdas.empty()) throw std::invalid_argument("lambda list is empty");
  SweepResult res;
  res.zeta = opts.zeta;
  res.points.resize(opts.lambdas.size());
  const std::int64_t steps = step_index(opts.horizon, opts.tau);

  parallel_for(opts.lambdas.size(), opts.threads, [&](std::size_t k) {
    SweepPoint pt;
    pt.lambda = opts.lambdas[k];
    pt.n = sweep_grid_size(opts.zeta, pt.lambda);
    pt.tau = opts.tau;
    ModelSpec model;
    model.lambda = pt.lambda;
    model.sigma = SigmaSpec::linear(1.0);
    model.u0 = InitialData::constant(1.0);
    const double j0 = model.sigma.lower_ratio();
    pt.gate_value = sharp_gate_value(pt.n, opts.tau, j0, opts.zeta);
    pt.gate_ok = check_sharp_regime(pt.n, opts.tau, model, opts.zeta);
    SchemeSpec scheme;
    scheme.tau = opts.tau;
    scheme.theta = opts.theta;
    const GridSpec grid{pt.n};
    const auto series =
        exact_second_moment_series(grid, scheme, model, steps, RecursionPath::Circulant, opts.stride);
    const double t_pos = positivity_time_full(pt.n, opts.tau, opts.theta).t_star;
    pt.fit = fit_growth(series, default_window_start(opts.horizon, t_pos), opts.horizon);
    const double l2 = pt.lambda * pt.lambda;
    pt.lower_rate = std::log1p(l2 * j0 * j0 * opts.tau) / opts.tau;
    const double denom = j0 * j0 + 32.0 * kPi * opts.zeta;
    pt.sharp_rate = 4.0 * kPi * kPi * opts.zeta * opts.zeta * std::pow(j0, 4) * l2 * l2 /
                    (denom * denom);
    res.points[k] = pt;
  });

  if (res.points.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& p : res.points) {
      xs.push_back(std::log(p.lambda));
      ys.push_back(std::log(p.fit.gamma));
    }
    const LineFit f = fit_line(xs, ys);
    res.slope = f.slope;
    res.slope_ci = f.slope_ci;
  }
  return res;
}

IntermittencyReport intermittency_report(const GridSpec& grid, const SchemeSpec& scheme,
                                         const ModelSpec& model, const std::vector<double>& ps,
                                         double horizon, const McOptions& opts) {
  for (double p : ps)
    if (p != 2.0 && p != 4.0 && p != 6.0)
      throw std::invalid_argument("intermittency report supports p in {2, 4, 6}");
  const std::int64_t steps = step_index(horizon, scheme.tau);
  const auto series = mc_moments(grid, scheme, model, ps, steps, opts);
  const double t_pos = scheme.stepper == Stepper::ThetaScheme
                           ? positivity_time_full(grid.n, scheme.tau, scheme.theta).t_star
                           : positivity_time_semi(grid.n).t_star;

  IntermittencyReport rep;
  rep.all_finite = true;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const auto& s = series[k];
    rep.horizon_truncated = rep.horizon_truncated || s.horizon_truncated;
    const double t_end = s.times.empty() ? 0.0 : s.times.back();
    IntermittencyRow row;
    row.p = ps[k];
    row.fit = fit_growth(s, default_window_start(t_end, t_pos), t_end);
    row.finite = std::isfinite(row.fit.gamma) && !s.horizon_truncated;
    rep.all_finite = rep.all_finite && row.finite;
    if (ps[k] == 2.0) rep.gamma2_positive = row.fit.gamma > 0.0;
    rep.rows.push_back(row);
  }
  std::sort(rep.rows.begin(), rep.rows.end(),
            [](const IntermittencyRow& a, const IntermittencyRow& b) { return a.p < b.p; });
  rep.normalized_nondecreasing = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    const auto& a = rep.rows[k - 1];
    const auto& b = rep.rows[k];
    const double slack = a.fit.ci_halfwidth / a.p + b.fit.ci_halfwidth / b.p;
    if (b.fit.gamma / b.p < a.fit.gamma / a.p - slack) rep.normalized_nondecreasing = false;
  }
  if (model.sigma.is_linear() && scheme.stepper == Stepper::ThetaScheme) {
    const auto exact =
        exact_second_moment_series(grid, scheme, model, steps, RecursionPath::Auto, opts.stride);
    rep.exact_gamma2 = fit_growth(exact, default_window_start(horizon, t_pos), horizon);
  }
  return rep;
}

GronwallCheck check_reverse_gronwall_discrete(const std::vector<double>& y, double alpha,
                                              double beta) {
  GronwallCheck out;
  const std::size_t m = y.size();
  if (m == 0) return out;
  // prefix[k] = sum_{i<k} y_i
  std::vector<double> prefix(m + 1, 0.0);
  for (std::size_t k = 0; k < m; ++k) prefix[k + 1] = prefix[k] + y[k];
  std::size_t start = m;
  while (start > 0 && y[start - 1] >= alpha + beta * prefix[start - 1]) --start;
  if (start == m) return out;
  out.start = start;
  const double base = alpha + beta * prefix[start];
  out.conclusion_holds = true;
  for (std::size_t l = 0; start + l < m; ++l) {
    const double rhs = base * std::pow(1.0 + beta, static_cast<double>(l));
    if (y[start + l] < rhs * (1.0 - 1e-12)) out.conclusion_holds = false;
  }
  return out;
}

GronwallCheck check_reverse_gronwall_continuous(const std::vector<double>& phi, double h,
                                                double alpha, double beta) {
  GronwallCheck out;
  const std::size_t m = phi.size();
  if (m == 0) return out;
  std::vector<double> integral(m, 0.0);
  for (std::size_t k = 1; k < m; ++k)
    integral[k] = integral[k - 1] + 0.5 * h * (phi[k - 1] + phi[k]);
  std::size_t start = m;
  while (start > 0 && phi[start - 1] >= alpha + beta * integral[start - 1]) --start;
  if (start == m) return out;
  out.start = start;
  const double base = alpha + beta * integral[start];
  out.conclusion_holds = true;
  for (std::size_t k = start; k < m; ++k) {
    const double rhs = base * std::exp(beta * h * static_cast<double>(k - start));
    if (phi[k] < rhs * (1.0 - 1e-12)) out.conclusion_holds = false;
  }
  return out;
}

}  // namespace she
