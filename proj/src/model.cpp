#include "she/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "she/stability.hpp"

namespace she {

int GridSpec::cell(double y) const {
  auto k = static_cast<long long>(std::floor(n * y));
  // n*y can land one ulp below an integer when y = k/n was itself rounded.
  while (static_cast<double>(k + 1) / n <= y) ++k;
  while (k > 0 && static_cast<double>(k) / n > y) --k;
  return static_cast<int>(k);
}

std::int64_t step_index(double s, double tau) {
  auto m = static_cast<std::int64_t>(std::floor(s / tau));
  while (static_cast<double>(m + 1) * tau <= s) ++m;
  while (m > 0 && static_cast<double>(m) * tau > s) --m;
  return m;
}

const char* to_string(Stepper s) {
  return s == Stepper::ThetaScheme ? "theta" : "exponential";
}

Stepper stepper_from_string(const std::string& s) {
  if (s == "theta") return Stepper::ThetaScheme;
  if (s == "exponential") return Stepper::ExponentialIntegrator;
  throw std::invalid_argument("unknown stepper '" + s + "'");
}

SigmaSpec SigmaSpec::linear(double slope) {
  SigmaSpec s;
  s.kind_ = Kind::Linear;
  s.slope_ = slope;
  s.lipschitz_ = std::abs(slope);
  s.lower_ratio_ = std::abs(slope);
  return s;
}

namespace {

double segment_slope(const std::vector<double>& xs,
                     const std::vector<double>& ys, std::size_t i) {
  return (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
}

}  // namespace

double SigmaSpec::table_lipschitz(const std::vector<double>& knots,
                                  const std::vector<double>& values) {
  double lip = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    lip = std::max(lip, std::abs(segment_slope(knots, values, i)));
  return lip;
}

double SigmaSpec::table_lower_ratio(const std::vector<double>& knots,
                                    const std::vector<double>& values) {
  // On every piece sigma(x) = a + s x, so sigma(x)/x = s + a/x is monotone on
  // each side of 0. The infimum of |.| is therefore zero (a root away from 0),
  // a knot value, a limit at +-infinity (the end slopes), or the slope at 0
  // when sigma(0) = 0.
  const std::size_t k = knots.size();
  double inf = std::numeric_limits<double>::infinity();
  const double s_left = segment_slope(knots, values, 0);
  const double s_right = segment_slope(knots, values, k - 2);
  inf = std::min({inf, std::abs(s_left), std::abs(s_right)});

  struct Piece {
    double lo, hi, a, s;
  };
  std::vector<Piece> pieces;
  const double big = std::numeric_limits<double>::infinity();
  pieces.push_back({-big, knots[0], values[0] - s_left * knots[0], s_left});
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const double s = segment_slope(knots, values, i);
    pieces.push_back({knots[i], knots[i + 1], values[i] - s * knots[i], s});
  }
  pieces.push_back({knots[k - 1], big, values[k - 1] - s_right * knots[k - 1],
                    s_right});

  for (const auto& p : pieces) {
    // Root of a + s x inside the open piece, away from 0.
    if (p.s != 0.0) {
      const double root = -p.a / p.s;
      if (root > p.lo && root < p.hi && root != 0.0) return 0.0;
    } else if (p.a == 0.0) {
      return 0.0;
    }
    if (p.lo < 0.0 && p.hi > 0.0 && p.a == 0.0)
      inf = std::min(inf, std::abs(p.s));
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (knots[i] == 0.0) {
      if (values[i] == 0.0) {
        // Both one-sided limits of sigma(x)/x are the adjacent slopes.
        if (i > 0) inf = std::min(inf, std::abs(segment_slope(knots, values, i - 1)));
        else inf = std::min(inf, std::abs(s_left));
        if (i + 1 < k) inf = std::min(inf, std::abs(segment_slope(knots, values, i)));
        else inf = std::min(inf, std::abs(s_right));
      }
      continue;
    }
    inf = std::min(inf, std::abs(values[i] / knots[i]));
  }
  return inf;
}

SigmaSpec SigmaSpec::table(std::vector<double> knots,
                           std::vector<double> values, double lipschitz,
                           double lower_ratio) {
  if (knots.size() < 2 || knots.size() != values.size())
    throw std::invalid_argument(
        "sigma table needs >= 2 knots and matching values");
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    if (!(knots[i] < knots[i + 1]))
      throw std::invalid_argument("sigma table knots must be increasing");
  if (lipschitz < 0.0 || lower_ratio < 0.0)
    throw std::invalid_argument("sigma constants must be nonnegative");

  const double lip = table_lipschitz(knots, values);
  const double ratio = table_lower_ratio(knots, values);
  const double slack = 1e-12 * std::max(1.0, lip);
  if (lipschitz + slack < lip) {
    std::ostringstream os;
    os << "declared L_sigma = " << lipschitz
       << " is below the table's steepest slope " << lip;
    throw std::invalid_argument(os.str());
  }
  if (lower_ratio > ratio + slack) {
    std::ostringstream os;
    os << "declared J0 = " << lower_ratio
       << " exceeds inf |sigma(x)/x| = " << ratio;
    throw std::invalid_argument(os.str());
  }
  SigmaSpec s;
  s.kind_ = Kind::Table;
  s.slope_ = 0.0;
  s.knots_ = std::move(knots);
  s.values_ = std::move(values);
  s.lipschitz_ = lipschitz;
  s.lower_ratio_ = lower_ratio;
  return s;
}

double SigmaSpec::operator()(double x) const {
  if (kind_ == Kind::Linear) return slope_ * x;
  const auto& xs = knots_;
  const auto& ys = values_;
  std::size_t i;
  if (x <= xs.front()) {
    i = 0;
  } else if (x >= xs.back()) {
    i = xs.size() - 2;
  } else {
    i = static_cast<std::size_t>(
            std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) -
        1;
  }
  return ys[i] + segment_slope(xs, ys, i) * (x - xs[i]);
}

InitialData InitialData::constant(double value) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw std::invalid_argument("initial constant must be finite and >= 0");
  InitialData d;
  d.kind_ = Kind::Constant;
  d.value_ = value;
  return d;
}

InitialData InitialData::samples(std::vector<double> values) {
  if (values.empty())
    throw std::invalid_argument("initial samples must be non-empty");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("initial samples must be finite and >= 0");
  InitialData d;
  d.kind_ = Kind::GridSamples;
  d.samples_ = std::move(values);
  d.value_ = *std::min_element(d.samples_.begin(), d.samples_.end());
  return d;
}

double InitialData::infimum() const { return value_; }

double InitialData::value_at(int j) const {
  return kind_ == Kind::Constant ? value_ : samples_.at(static_cast<std::size_t>(j));
}

std::vector<double> InitialData::on_grid(int n) const {
  if (kind_ == Kind::Constant) return std::vector<double>(static_cast<std::size_t>(n), value_);
  if (static_cast<int>(samples_.size()) != n)
    throw std::invalid_argument("initial samples do not match the grid size");
  return samples_;
}

ValidationReport validate_run_config(const GridSpec& grid,
                                     const SchemeSpec& scheme,
                                     const ModelSpec& model,
                                     bool lower_bound_experiment) {
  ValidationReport rep;
  auto fail = [&](const std::string& s) { rep.failures.push_back(s); };
  if (grid.n < 3) fail("n < 3");
  if (!(scheme.tau > 0.0 && scheme.tau < 1.0)) fail("tau outside (0,1)");
  if (!(scheme.theta >= 0.0 && scheme.theta <= 1.0))
    fail("theta outside [0,1]");
  if (!(model.lambda >= 0.0)) fail("lambda < 0");
  if (!model.u0.is_constant() &&
      static_cast<int>(model.u0.sample_values().size()) != grid.n)
    fail("initial samples do not match n");

  if (rep.ok() && scheme.stepper == Stepper::ThetaScheme) {
    const auto st = check_stability(grid.n, scheme.tau, scheme.theta, scheme.r);
    if (!st.satisfied) fail(st.diagnostic);
  }
  if (lower_bound_experiment) {
    if (!(model.u0.infimum() > 0.0)) fail("I0 = 0 (lower bound needs I0 > 0)");
    if (!(model.sigma.lower_ratio() > 0.0))
      fail("J0 = 0 (lower bound needs J0 > 0)");
  }
  return rep;
}

bool operator==(const GridSpec& a, const GridSpec& b) { return a.n == b.n; }

bool operator==(const SchemeSpec& a, const SchemeSpec& b) {
  return a.tau == b.tau && a.theta == b.theta && a.stepper == b.stepper &&
         a.r == b.r;
}

bool operator==(const ModelSpec& a, const ModelSpec& b) {
  return a.lambda == b.lambda && a.sigma == b.sigma && a.u0 == b.u0;
}

}  // namespace she
