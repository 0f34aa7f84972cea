#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace she {

/// Uniform periodic partition of the unit circle, x_j = j/n.
struct GridSpec {
  int n = 3;

  double point(int j) const { return static_cast<double>(j) / n; }

  /// Index k of the cell [k/n, (k+1)/n) holding y, for y in [0,1].
  /// y = 1 maps to n, which callers wrap to 0 where periodicity applies.
  int cell(double y) const;

  /// Spatial flooring map: [ny]/n.
  double floor_point(double y) const { return point(cell(y)); }
};

/// Largest integer m with m*tau <= s (exact for s computed as m*tau).
std::int64_t step_index(double s, double tau);

enum class Stepper { ThetaScheme, ExponentialIntegrator };

const char* to_string(Stepper s);
Stepper stepper_from_string(const std::string& s);

struct SchemeSpec {
  double tau = 1e-3;
  double theta = 1.0;
  Stepper stepper = Stepper::ThetaScheme;
  /// Coupled bound n^2 tau <= r for theta < 1/2; defaults to n^2 tau.
  std::optional<double> r;

  double time(std::int64_t i) const { return static_cast<double>(i) * tau; }
  /// Time-flooring map: [s/tau] tau.
  double floor_time(double s) const { return time(step_index(s, tau)); }
};

/// Diffusion coefficient sigma. Either sigma(x) = c x, or a piecewise-linear
/// table (linear extrapolation past the end knots) with declared Lipschitz
/// constant L and lower ratio J0 = inf_{x != 0} |sigma(x)/x|.
class SigmaSpec {
 public:
  enum class Kind { Linear, Table };

  static SigmaSpec linear(double slope);
  /// Throws std::invalid_argument if the declared constants do not bound the
  /// table (L below the steepest slope, or J0 above the true lower ratio).
  static SigmaSpec table(std::vector<double> knots, std::vector<double> values,
                         double lipschitz, double lower_ratio);

  double operator()(double x) const;

  Kind kind() const { return kind_; }
  bool is_linear() const { return kind_ == Kind::Linear; }
  double slope() const { return slope_; }
  double lipschitz() const { return lipschitz_; }
  double lower_ratio() const { return lower_ratio_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

  /// Exact sup of |slope| over the table segments and extrapolation.
  static double table_lipschitz(const std::vector<double>& knots,
                                const std::vector<double>& values);
  /// Exact inf over x != 0 of |sigma(x)/x| for a table.
  static double table_lower_ratio(const std::vector<double>& knots,
                                  const std::vector<double>& values);

  friend bool operator==(const SigmaSpec&, const SigmaSpec&) = default;

 private:
  Kind kind_ = Kind::Linear;
  double slope_ = 1.0;
  std::vector<double> knots_;
  std::vector<double> values_;
  double lipschitz_ = 1.0;
  double lower_ratio_ = 1.0;
};

class InitialData {
 public:
  enum class Kind { Constant, GridSamples };

  static InitialData constant(double value);
  static InitialData samples(std::vector<double> values);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::Constant; }
  /// I0, the infimum of the data.
  double infimum() const;
  double value_at(int j) const;
  const std::vector<double>& sample_values() const { return samples_; }
  double constant_value() const { return value_; }
  std::vector<double> on_grid(int n) const;

  friend bool operator==(const InitialData&, const InitialData&) = default;

 private:
  Kind kind_ = Kind::Constant;
  double value_ = 1.0;
  std::vector<double> samples_;
};

struct ModelSpec {
  double lambda = 1.0;
  SigmaSpec sigma = SigmaSpec::linear(1.0);
  InitialData u0 = InitialData::constant(1.0);
};

struct SharpRegimeSpec {
  double zeta = 1.0;
  double lambda = 1.0;
  bool holds(int n) const { return n >= zeta * lambda * lambda; }
};

struct ValidationReport {
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Aggregates the parameter assumptions. `lower_bound_experiment` adds the
/// positivity requirements I0 > 0 and J0 > 0.
ValidationReport validate_run_config(const GridSpec& grid,
                                     const SchemeSpec& scheme,
                                     const ModelSpec& model,
                                     bool lower_bound_experiment = false);

bool operator==(const GridSpec& a, const GridSpec& b);
bool operator==(const SchemeSpec& a, const SchemeSpec& b);
bool operator==(const ModelSpec& a, const ModelSpec& b);

}  // namespace she
