#include "she/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "she/kernels.hpp"
#include "she/model.hpp"
#include "she/spectral.hpp"

namespace she {

namespace {

constexpr double kPi = std::numbers::pi;

struct Recorder {
  LemmaSuiteResult& out;
  std::map<std::string, std::size_t> index;

  void declare(const std::string& check, const std::string& description) {
    index[check] = out.summaries.size();
    out.summaries.push_back({check, description, 0, 0, INFINITY});
  }

  void record(const std::string& check, double margin, const LemmaFailure& at) {
    auto& s = out.summaries[index.at(check)];
    ++s.evaluated;
    s.worst_margin = std::min(s.worst_margin, margin);
    if (!(margin >= 0.0)) {
      ++s.failed;
      if (out.failures.size() < 200) {
        LemmaFailure f = at;
        f.check = check;
        out.failures.push_back(f);
      }
    }
  }

  void lower(const std::string& check, double value, double bound, LemmaFailure at) {
    at.value = value;
    at.bound = bound;
    record(check, (value - bound) / std::max(1.0, std::abs(bound)), at);
  }

  void upper(const std::string& check, double value, double bound, LemmaFailure at) {
    at.value = value;
    at.bound = bound;
    record(check, (bound - value) / std::max(1.0, std::abs(bound)), at);
  }

  void close(const std::string& check, double value, double expected, double tol,
             LemmaFailure at) {
    at.value = value;
    at.bound = expected;
    const double err = std::abs(value - expected) / std::max(1.0, std::abs(expected));
    record(check, (tol - err) / tol, at);
  }
};

double quad_heat_square(double t, double x) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double y) {
    const double g = heat_kernel(t, x, y);
    return g * g;
  };
  // Split at the peak and at the antipode so each piece is smooth and
  // monotone enough for the adaptive rule.
  std::vector<double> cuts{0.0, 1.0, x};
  const double anti = x + 0.5 < 1.0 ? x + 0.5 : x - 0.5;
  cuts.push_back(anti);
  const double w = std::sqrt(t);
  for (double c : {x - 4 * w, x + 4 * w})
    if (c > 0.0 && c < 1.0) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    s += gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 10, 1e-12);
  }
  return s;
}

}  // namespace

bool LemmaSuiteResult::passed() const {
  for (const auto& s : summaries)
    if (!s.passed()) return false;
  return true;
}

std::vector<double> default_time_grid() {
  std::vector<double> ts;
  for (int i = 0; i <= 24; ++i) ts.push_back(std::pow(10.0, -4.0 + 6.0 * i / 24.0));
  return ts;
}

LemmaSuiteResult run_lemma_suite(const LemmaSuiteOptions& opts) {
  LemmaSuiteResult out;
  Recorder rec{out, {}};
  rec.declare("heat-conservation", "int G dy = 1");
  rec.declare("semi-conservation", "int G^n dy = 1");
  rec.declare("full-conservation", "int G1 dy = 1");
  rec.declare("heat-square-identity", "int G^2 dy = G(2t,x,x) vs quadrature");
  rec.declare("semi-square-identity", "int (G^n)^2 dy = sum e^{2 lambda t}|e^n|^2");
  rec.declare("full-square-identity", "int G2^2 dy = sum beta^{2k} R1^2 |e^n|^2");
  rec.declare("heat-square-lower", "int G^2 dy >= 1/sqrt(8 pi t)");
  rec.declare("heat-square-upper", "int G^2 dy <= 1 + sqrt(pi/(8t))");
  rec.declare("semi-square-lower", "int (G^n)^2 dy >= 1");
  rec.declare("semi-square-upper", "int (G^n)^2 dy <= 1 + sqrt(pi/(8t))");
  rec.declare("semi-grid-refined", "grid points: >= (1 - e^{-2 n^2 pi^2 t})/sqrt(32 pi t)");
  rec.declare("full-square-lower", "int G2^2 dy >= 1");
  rec.declare("full-square-upper", "int G2^2 dy <= 1 + C/sqrt([t/tau] tau + tau)");
  rec.declare("full-grid-refined",
              "grid points: >= (1 - e^{-4 n^2 pi^2 (k+1) tau})/(8 sqrt(pi (k+1) tau))");

  const auto times = opts.times.empty() ? default_time_grid() : opts.times;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (double t : times) {
    for (double x : opts.xs) {
      LemmaFailure at{"", 0, 0.0, 0.0, t, x, 0.0, 0.0};
      const double sq = heat_kernel_square_integral(t);
      rec.lower("heat-square-lower", sq, 1.0 / std::sqrt(8.0 * kPi * t), at);
      rec.upper("heat-square-upper", sq, 1.0 + std::sqrt(kPi / (8.0 * t)), at);
    }
  }

  for (int n : opts.ns) {
    const SpectralBasis basis(n);
    const SpectralBasis checked =
        opts.inject_fault ? basis.with_eigenvalue(1, -basis.eigenvalue(1)) : basis;
    GridSpec grid{n};

    for (double t : times) {
      for (double x : opts.xs) {
        LemmaFailure at{"", n, 0.0, 0.0, t, x, 0.0, 0.0};
        const double sq = semi_green_square_integral(t, x, checked);
        rec.lower("semi-square-lower", sq, 1.0, at);
        rec.upper("semi-square-upper", sq, 1.0 + std::sqrt(kPi / (8.0 * t)), at);
      }
      LemmaFailure at{"", n, 0.0, 0.0, t, 0.0, 0.0, 0.0};
      const double sq0 = semi_green_square_integral(t, 0.0, checked);
      const double nn = static_cast<double>(n) * n;
      rec.lower("semi-grid-refined", sq0,
                (1.0 - std::exp(-2.0 * nn * kPi * kPi * t)) / std::sqrt(32.0 * kPi * t), at);
    }

    for (int s = 0; s < opts.identity_samples; ++s) {
      const double t = std::pow(10.0, -4.0 + 6.0 * unit(rng));
      const double x = unit(rng);
      LemmaFailure at{"", n, 0.0, 0.0, t, x, 0.0, 0.0};

      double heat_mass = 0.0;
      for (int l = 0; l < n; ++l)
        heat_mass += heat_kernel_cell_integral(t, x, grid.point(l), grid.point(l + 1));
      rec.close("heat-conservation", heat_mass, 1.0, 1e-12, at);

      std::vector<double> row(static_cast<std::size_t>(n));
      for (int l = 0; l < n; ++l)
        row[static_cast<std::size_t>(l)] = semi_green(t, x, grid.point(l), basis);
      rec.close("semi-conservation", cellwise_integral(row), 1.0, 1e-12, at);
      for (double& v : row) v *= v;
      rec.close("semi-square-identity", cellwise_integral(row),
                semi_green_square_integral(t, x, basis), 1e-9, at);

      if (n == opts.ns.front())
        rec.close("heat-square-identity", quad_heat_square(t, x),
                  heat_kernel_square_integral(t), 1e-9, at);
    }

    for (double theta : opts.thetas) {
      for (double tau : opts.taus) {
        const AmplificationFactors f(basis, tau, theta);
        if (!f.stable) {
          ++out.skipped_unstable;
          continue;
        }
        const bool refined_applies =
            theta == 1.0 || static_cast<double>(n) * n * tau < 1.0 / (8.0 * (1.0 - theta));
        for (double t : times) {
          const std::int64_t k = step_index(t, tau);
          const double kt = static_cast<double>(k) * tau;
          for (double x : opts.xs) {
            LemmaFailure at{"", n, theta, tau, t, x, 0.0, 0.0};
            const double sq = full_green_square_integral(t, x, f, basis);
            rec.lower("full-square-lower", sq, 1.0, at);
            rec.upper("full-square-upper", sq,
                      1.0 + opts.full_upper_constant / std::sqrt(kt + tau), at);
          }
          if (refined_applies) {
            LemmaFailure at{"", n, theta, tau, t, 0.0, 0.0, 0.0};
            const double sq0 = full_green_square_integral(t, 0.0, f, basis);
            const double kp = static_cast<double>(k + 1) * tau;
            const double nn = static_cast<double>(n) * n;
            rec.lower("full-grid-refined", sq0,
                      (1.0 - std::exp(-4.0 * nn * kPi * kPi * kp)) /
                          (8.0 * std::sqrt(kPi * kp)),
                      at);
          }
        }
        for (int s = 0; s < opts.identity_samples; ++s) {
          const double t = std::pow(10.0, -4.0 + 6.0 * unit(rng));
          const double x = unit(rng);
          LemmaFailure at{"", n, theta, tau, t, x, 0.0, 0.0};
          std::vector<double> g1(static_cast<std::size_t>(n));
          std::vector<double> g2(static_cast<std::size_t>(n));
          for (int l = 0; l < n; ++l) {
            g1[static_cast<std::size_t>(l)] =
                full_green(t, x, grid.point(l), FullKernel::G1, f, basis);
            const double v = full_green(t, x, grid.point(l), FullKernel::G2, f, basis);
            g2[static_cast<std::size_t>(l)] = v * v;
          }
          rec.close("full-conservation", cellwise_integral(g1), 1.0, 1e-12, at);
          rec.close("full-square-identity", cellwise_integral(g2),
                    full_green_square_integral(t, x, f, basis), 1e-9, at);
        }
      }
    }
  }
  return out;
}

}  // namespace she
