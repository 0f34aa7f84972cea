#include "she/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "she/convergence.hpp"
#include "she/io.hpp"
#include "she/lemmas.hpp"
#include "she/noise.hpp"
#include "she/parallel.hpp"
#include "she/renewal.hpp"
#include "she/solver.hpp"

namespace she {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& o, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!o.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read(const json& o, const char* key, T& out) {
  if (o.contains(key)) out = o.at(key).get<T>();
}

json sigma_to_json(const SigmaSpec& s) {
  json j;
  if (s.is_linear()) {
    j["kind"] = "linear";
    j["slope"] = s.slope();
  } else {
    j["kind"] = "table";
    j["knots"] = s.knots();
    j["values"] = s.values();
    j["lipschitz"] = s.lipschitz();
    j["lower_ratio"] = s.lower_ratio();
  }
  return j;
}

SigmaSpec sigma_from_json(const json& j) {
  check_keys(j, {"kind", "slope", "knots", "values", "lipschitz", "lower_ratio"}, "model.sigma");
  const std::string kind = j.value("kind", std::string("linear"));
  if (kind == "linear") return SigmaSpec::linear(j.value("slope", 1.0));
  if (kind == "table")
    return SigmaSpec::table(j.at("knots").get<std::vector<double>>(),
                            j.at("values").get<std::vector<double>>(), j.at("lipschitz").get<double>(),
                            j.at("lower_ratio").get<double>());
  throw ConfigError("model.sigma.kind must be 'linear' or 'table'");
}

json u0_to_json(const InitialData& u) {
  json j;
  if (u.is_constant()) {
    j["kind"] = "constant";
    j["value"] = u.constant_value();
  } else {
    j["kind"] = "samples";
    j["values"] = u.sample_values();
  }
  return j;
}

InitialData u0_from_json(const json& j) {
  check_keys(j, {"kind", "value", "values"}, "model.u0");
  const std::string kind = j.value("kind", std::string("constant"));
  if (kind == "constant") return InitialData::constant(j.value("value", 1.0));
  if (kind == "samples") return InitialData::samples(j.at("values").get<std::vector<double>>());
  throw ConfigError("model.u0.kind must be 'constant' or 'samples'");
}

json to_json(const RunConfig& c) {
  json j;
  j["grid"] = {{"n", c.grid.n}};
  json s;
  s["tau"] = c.scheme.tau;
  s["theta"] = c.scheme.theta;
  s["stepper"] = to_string(c.scheme.stepper);
  if (c.scheme.r) s["r"] = *c.scheme.r;
  j["scheme"] = s;
  j["model"] = {{"lambda", c.model.lambda},
                {"sigma", sigma_to_json(c.model.sigma)},
                {"u0", u0_to_json(c.model.u0)}};
  j["seed"] = c.seed;
  const auto& g = c.green_check;
  j["green_check"] = {{"ns", g.ns},
                      {"thetas", g.thetas},
                      {"taus", g.taus},
                      {"full_upper_constant", g.full_upper_constant}};
  j["simulate"] = {{"steps", c.simulate.steps},
                   {"record_every", c.simulate.record_every},
                   {"path", c.simulate.path}};
  const auto& m = c.moments;
  j["moments"] = {{"ps", m.ps},       {"paths", m.paths}, {"steps", m.steps},
                  {"stride", m.stride}, {"probe", m.probe}, {"exact", m.exact}};
  const auto& w = c.sweep;
  j["sweep"] = {{"zeta", w.zeta},   {"lambdas", w.lambdas}, {"tau", w.tau},
                {"theta", w.theta}, {"horizon", w.horizon}, {"stride", w.stride}};
  json r = {{"lambda", c.renewal.lambda}, {"j0", c.renewal.j0}, {"n", c.renewal.n}};
  if (c.renewal.zeta) r["zeta"] = *c.renewal.zeta;
  r["taus"] = c.renewal.taus;
  j["renewal"] = r;
  const auto& v = c.convergence;
  j["convergence"] = {{"kind", v.kind},
                      {"x", v.x},
                      {"ns", v.ns},
                      {"taus", v.taus},
                      {"n", v.n},
                      {"tau_exponents", v.tau_exponents},
                      {"reference_exponent", v.reference_exponent},
                      {"tau", v.tau},
                      {"reference_n", v.reference_n},
                      {"horizon", v.horizon},
                      {"paths", v.paths}};
  return j;
}

RunConfig from_json(const json& j) {
  check_keys(j, {"grid", "scheme", "model", "seed", "green_check", "simulate", "moments", "sweep",
                 "renewal", "convergence"},
             "config");
  RunConfig c;
  if (j.contains("grid")) {
    check_keys(j["grid"], {"n"}, "grid");
    read(j["grid"], "n", c.grid.n);
  }
  if (j.contains("scheme")) {
    const auto& s = j["scheme"];
    check_keys(s, {"tau", "theta", "stepper", "r"}, "scheme");
    read(s, "tau", c.scheme.tau);
    read(s, "theta", c.scheme.theta);
    if (s.contains("stepper")) c.scheme.stepper = stepper_from_string(s["stepper"].get<std::string>());
    if (s.contains("r") && !s["r"].is_null()) c.scheme.r = s["r"].get<double>();
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    check_keys(m, {"lambda", "sigma", "u0"}, "model");
    read(m, "lambda", c.model.lambda);
    if (m.contains("sigma")) c.model.sigma = sigma_from_json(m["sigma"]);
    if (m.contains("u0")) c.model.u0 = u0_from_json(m["u0"]);
  }
  read(j, "seed", c.seed);
  if (j.contains("green_check")) {
    const auto& g = j["green_check"];
    check_keys(g, {"ns", "thetas", "taus", "full_upper_constant"}, "green_check");
    read(g, "ns", c.green_check.ns);
    read(g, "thetas", c.green_check.thetas);
    read(g, "taus", c.green_check.taus);
    read(g, "full_upper_constant", c.green_check.full_upper_constant);
  }
  if (j.contains("simulate")) {
    const auto& s = j["simulate"];
    check_keys(s, {"steps", "record_every", "path"}, "simulate");
    read(s, "steps", c.simulate.steps);
    read(s, "record_every", c.simulate.record_every);
    read(s, "path", c.simulate.path);
  }
  if (j.contains("moments")) {
    const auto& m = j["moments"];
    check_keys(m, {"ps", "paths", "steps", "stride", "probe", "exact"}, "moments");
    read(m, "ps", c.moments.ps);
    read(m, "paths", c.moments.paths);
    read(m, "steps", c.moments.steps);
    read(m, "stride", c.moments.stride);
    read(m, "probe", c.moments.probe);
    read(m, "exact", c.moments.exact);
  }
  if (j.contains("sweep")) {
    const auto& w = j["sweep"];
    check_keys(w, {"zeta", "lambdas", "tau", "theta", "horizon", "stride"}, "sweep");
    read(w, "zeta", c.sweep.zeta);
    read(w, "lambdas", c.sweep.lambdas);
    read(w, "tau", c.sweep.tau);
    read(w, "theta", c.sweep.theta);
    read(w, "horizon", c.sweep.horizon);
    read(w, "stride", c.sweep.stride);
  }
  if (j.contains("renewal")) {
    const auto& r = j["renewal"];
    check_keys(r, {"lambda", "j0", "n", "zeta", "taus"}, "renewal");
    read(r, "lambda", c.renewal.lambda);
    read(r, "j0", c.renewal.j0);
    read(r, "n", c.renewal.n);
    if (r.contains("zeta") && !r["zeta"].is_null()) c.renewal.zeta = r["zeta"].get<double>();
    read(r, "taus", c.renewal.taus);
  }
  if (j.contains("convergence")) {
    const auto& v = j["convergence"];
    check_keys(v, {"kind", "x", "ns", "taus", "n", "tau_exponents", "reference_exponent", "tau",
                   "reference_n", "horizon", "paths"},
               "convergence");
    auto& t = c.convergence;
    read(v, "kind", t.kind);
    read(v, "x", t.x);
    read(v, "ns", t.ns);
    read(v, "taus", t.taus);
    read(v, "n", t.n);
    read(v, "tau_exponents", t.tau_exponents);
    read(v, "reference_exponent", t.reference_exponent);
    read(v, "tau", t.tau);
    read(v, "reference_n", t.reference_n);
    read(v, "horizon", t.horizon);
    read(v, "paths", t.paths);
  }
  return c;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::int64_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

struct Context {
  RunConfig cfg;
  std::string out_dir = "out";
  unsigned threads = 0;
  bool svg = true;
  RunManifest manifest;

  std::string path(const std::string& name) const { return out_dir + "/" + name; }

  void csv(const std::string& name, const CsvTable& t) {
    write_csv(path(name), manifest, t);
    manifest.outputs.push_back(path(name));
  }

  void plot(const std::string& name, const std::string& title, const std::string& xl,
            const std::string& yl, const std::vector<PlotSeries>& s, const std::string& note,
            bool log_axes = true) {
    if (!svg) return;
    write_svg(path(name), title, xl, yl, s, note, log_axes);
    manifest.outputs.push_back(path(name));
  }

  void finish(const std::string& command) {
    manifest.finished_utc = utc_now();
    write_manifest_json(path(command + ".manifest.json"), manifest);
  }
};

void require_valid(const Context& ctx) {
  const auto rep = validate_run_config(ctx.cfg.grid, ctx.cfg.scheme, ctx.cfg.model);
  if (rep.ok()) return;
  std::string msg = "invalid run configuration:";
  for (const auto& f : rep.failures) msg += "\n  - " + f;
  throw ConfigError(msg);
}

int cmd_green_check(const RunConfig& cfg, bool as_json, bool inject_fault) {
  LemmaSuiteOptions opts;
  opts.ns = cfg.green_check.ns;
  opts.thetas = cfg.green_check.thetas;
  opts.taus = cfg.green_check.taus;
  opts.full_upper_constant = cfg.green_check.full_upper_constant;
  opts.inject_fault = inject_fault;
  const auto res = run_lemma_suite(opts);
  if (as_json) {
    json j;
    j["passed"] = res.passed();
    j["skipped_unstable"] = res.skipped_unstable;
    json checks = json::array();
    for (const auto& s : res.summaries)
      checks.push_back({{"check", s.check},
                        {"description", s.description},
                        {"passed", s.passed()},
                        {"evaluated", s.evaluated},
                        {"failed", s.failed},
                        {"worst_margin", s.worst_margin}});
    j["checks"] = checks;
    json fails = json::array();
    for (const auto& f : res.failures)
      fails.push_back({{"check", f.check}, {"n", f.n},     {"theta", f.theta}, {"tau", f.tau},
                       {"t", f.t},         {"x", f.x},     {"value", f.value}, {"bound", f.bound}});
    j["failures"] = fails;
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& s : res.summaries) {
      std::cout << (s.passed() ? "PASS " : "FAIL ") << s.check << "  evaluated=" << s.evaluated
                << " failed=" << s.failed << " worst_margin=" << fmt(s.worst_margin) << "\n";
    }
    if (!res.failures.empty()) {
      std::cout << "\nfailures (first " << std::min<std::size_t>(res.failures.size(), 20)
                << " of " << res.failures.size() << " recorded):\n";
      std::cout << "check,n,theta,tau,t,x,value,bound\n";
      for (std::size_t i = 0; i < res.failures.size() && i < 20; ++i) {
        const auto& f = res.failures[i];
        std::cout << f.check << "," << f.n << "," << fmt(f.theta) << "," << fmt(f.tau) << ","
                  << fmt(f.t) << "," << fmt(f.x) << "," << fmt(f.value) << "," << fmt(f.bound)
                  << "\n";
      }
    }
    std::cout << (res.passed() ? "all checks passed" : "some checks failed") << " ("
              << res.skipped_unstable << " unstable lattice points skipped)\n";
  }
  return res.passed() ? kExitOk : kExitCheckFailed;
}

int cmd_simulate(Context& ctx) {
  require_valid(ctx);
  const auto& c = ctx.cfg;
  const auto& t = c.simulate;
  if (t.steps < 1 || t.record_every < 1) throw ConfigError("simulate.steps and record_every must be >= 1");
  std::vector<std::int64_t> rec;
  for (std::int64_t i = 0; i <= t.steps; i += t.record_every) rec.push_back(i);
  if (rec.back() != t.steps) rec.push_back(t.steps);
  const NoiseSeed seed{c.seed, t.path, static_cast<std::uint32_t>(NoisePurpose::Path)};
  const auto traj = simulate(c.grid, c.scheme, c.model, seed, t.steps, rec);
  CsvTable tab{{"step", "time", "j", "x", "u"}, {}};
  for (const auto& f : traj.snapshots)
    for (int j = 0; j < c.grid.n; ++j)
      tab.add_row({fmt(f.time_index), fmt(c.scheme.time(f.time_index)), fmt(j), fmt(c.grid.point(j)),
                   fmt(f.values[static_cast<std::size_t>(j)])});
  ctx.csv("simulate.csv", tab);
  ctx.finish("simulate");
  return kExitOk;
}

int cmd_moments(Context& ctx) {
  require_valid(ctx);
  const auto& c = ctx.cfg;
  const auto& t = c.moments;
  if (t.steps < 1 || t.stride < 1) throw ConfigError("moments.steps and stride must be >= 1");
  if (t.ps.empty()) throw ConfigError("moments.ps is empty");
  CsvTable tab{{"source", "p", "time", "log_moment", "moment", "stderr"}, {}};
  std::vector<PlotSeries> plots;
  bool truncated = false;
  double truncated_at = 0.0;
  auto emit = [&](const MomentSeries& s, const std::string& source) {
    PlotSeries ps{source + " p=" + fmt(s.p), {}, {}, true};
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      const double se = s.source == MomentSource::MonteCarlo ? s.stderr_abs(i) : 0.0;
      tab.add_row({source, fmt(s.p), fmt(s.times[i]), fmt(s.log_values[i]), fmt(s.value(i)), fmt(se)});
      ps.xs.push_back(s.times[i]);
      ps.ys.push_back(s.log_values[i]);
    }
    if (s.horizon_truncated) {
      truncated = true;
      truncated_at = s.times.empty() ? 0.0 : s.times.back();
    }
    plots.push_back(std::move(ps));
  };
  if (t.exact && c.model.sigma.is_linear() && c.scheme.stepper == Stepper::ThetaScheme)
    emit(exact_second_moment_series(c.grid, c.scheme, c.model, t.steps, RecursionPath::Auto, t.stride),
         "exact_min");
  if (t.paths > 0) {
    McOptions o;
    o.paths = t.paths;
    o.seed = c.seed;
    o.probe = t.probe;
    o.stride = t.stride;
    o.threads = ctx.threads;
    for (const auto& s : mc_moments(c.grid, c.scheme, c.model, t.ps, t.steps, o)) emit(s, "monte_carlo");
  }
  ctx.csv("moments.csv", tab);
  ctx.plot("moments.svg", "moment growth", "t", "log E|u|^p", plots, "", false);
  ctx.finish("moments");
  if (truncated) {
    std::cerr << "moment blow-up: series truncated after t = " << fmt(truncated_at)
              << " (|u| exceeded " << fmt(kBlowUpThreshold) << ")\n";
    return kExitBlowUp;
  }
  return kExitOk;
}

int cmd_sweep(Context& ctx) {
  auto opts = ctx.cfg.sweep;
  if (opts.lambdas.empty()) throw ConfigError("sweep.lambdas is empty; give at least one lambda");
  opts.threads = ctx.threads;
  const auto res = lambda_scaling_sweep(opts);
  CsvTable tab{{"lambda", "n", "tau", "gate_value", "gate_ok", "gamma2", "gamma2_ci", "t_a", "t_b",
                "lower_rate", "sharp_rate"},
               {}};
  PlotSeries gam{"gamma2", {}, {}, true}, sharp{"sharp lower rate", {}, {}, true};
  for (const auto& p : res.points) {
    tab.add_row({fmt(p.lambda), fmt(p.n), fmt(p.tau), fmt(p.gate_value), fmt(p.gate_ok),
                 fmt(p.fit.gamma), fmt(p.fit.ci_halfwidth), fmt(p.fit.t_a), fmt(p.fit.t_b),
                 fmt(p.lower_rate), fmt(p.sharp_rate)});
    gam.xs.push_back(p.lambda);
    gam.ys.push_back(p.fit.gamma);
    sharp.xs.push_back(p.lambda);
    sharp.ys.push_back(p.sharp_rate);
  }
  ctx.csv("sweep.csv", tab);
  CsvTable fit{{"zeta", "points", "slope", "slope_ci"}, {}};
  fit.add_row({fmt(res.zeta), fmt(static_cast<int>(res.points.size())), fmt(res.slope), fmt(res.slope_ci)});
  ctx.csv("sweep_fit.csv", fit);
  std::ostringstream note;
  note << "slope " << fmt(std::round(res.slope * 1000) / 1000);
  ctx.plot("sweep.svg", "growth rate vs lambda", "lambda", "gamma2", {gam, sharp}, note.str());
  ctx.finish("sweep");
  return kExitOk;
}

int cmd_renewal(Context& ctx) {
  const auto& r = ctx.cfg.renewal;
  const double zeta = r.zeta.value_or(r.n / (r.lambda * r.lambda));
  CsvTable tab{{"kind", "tau", "mu", "b", "mass_error", "lower_bound", "lower_bound_ok"}, {}};
  auto row = [&](const std::string& kind, const std::string& tau, const RenewalRoot& q) {
    tab.add_row({kind, tau, fmt(q.mu), fmt(q.b), fmt(q.mass_error), fmt(q.lower_bound),
                 fmt(q.lower_bound_ok)});
  };
  row("continuous", "", continuous_mu(r.lambda, r.j0, r.n, r.zeta));
  for (double tau : r.taus) row("discrete", fmt(tau), discrete_mu(r.lambda, r.j0, r.n, tau, zeta));
  if (!r.taus.empty()) row("discrete_limit", "0", discrete_mu_limit(r.lambda, r.j0, r.n, zeta));
  ctx.csv("renewal.csv", tab);
  ctx.finish("renewal");
  return kExitOk;
}

int cmd_convergence(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto& v = c.convergence;
  if (v.kind == "green-semi") {
    CsvTable tab{{"n", "series", "quadrature", "tail_bound", "halving_change", "ratio_to_next"}, {}};
    std::vector<double> vals;
    for (int n : v.ns) vals.push_back(green_error_semi_series(n));
    PlotSeries s{"error", {}, {}, true};
    for (std::size_t i = 0; i < v.ns.size(); ++i) {
      const auto q = green_error_semi(v.ns[i], v.x);
      const std::string ratio = i + 1 < vals.size() ? fmt(vals[i] / vals[i + 1]) : "";
      tab.add_row({fmt(v.ns[i]), fmt(vals[i]), fmt(q.value), fmt(q.tail_bound), fmt(q.halving_change), ratio});
      s.xs.push_back(v.ns[i]);
      s.ys.push_back(vals[i]);
    }
    ctx.csv("green_error.csv", tab);
    ctx.plot("green_error.svg", "semi-discrete Green error", "n", "error", {s}, "");
  } else if (v.kind == "green-full") {
    CsvTable tab{{"n", "tau", "theta", "series", "quadrature", "tail_bound", "halving_change", "ratio_to_next"}, {}};
    std::vector<double> vals;
    for (double tau : v.taus) vals.push_back(green_error_full_series(v.n, tau, c.scheme.theta));
    PlotSeries s{"error", {}, {}, true};
    for (std::size_t i = 0; i < v.taus.size(); ++i) {
      const auto q = green_error_full(v.n, v.taus[i], c.scheme.theta, v.x);
      const std::string ratio = i + 1 < vals.size() ? fmt(vals[i] / vals[i + 1]) : "";
      tab.add_row({fmt(v.n), fmt(v.taus[i]), fmt(c.scheme.theta), fmt(vals[i]), fmt(q.value),
                   fmt(q.tail_bound), fmt(q.halving_change), ratio});
      s.xs.push_back(v.taus[i]);
      s.ys.push_back(vals[i]);
    }
    ctx.csv("green_error.csv", tab);
    ctx.plot("green_error.svg", "fully discrete Green error", "tau", "error", {s}, "");
  } else if (v.kind == "strong-temporal" || v.kind == "strong-spatial") {
    StrongStudyConfig sc;
    sc.lambda = c.model.lambda;
    sc.theta = c.scheme.theta;
    sc.sigma = c.model.sigma;
    sc.u0 = c.model.u0;
    sc.horizon = v.horizon;
    sc.paths = v.paths;
    sc.threads = ctx.threads;
    const auto ladder = v.kind == "strong-temporal"
                            ? temporal_ladder(v.n, v.tau_exponents, v.reference_exponent, c.seed)
                            : spatial_ladder(v.tau, v.ns, v.reference_n, c.seed);
    const auto curve = strong_error_study(sc, ladder);
    CsvTable tab{{"n", "tau", "rms_error", "stderr"}, {}};
    PlotSeries s{"rms error", {}, {}, true};
    const bool temporal = v.kind == "strong-temporal";
    for (std::size_t i = 0; i < curve.errors.size(); ++i) {
      const auto& g = curve.resolutions[i];
      tab.add_row({fmt(g.n), fmt(g.tau), fmt(curve.errors[i]), fmt(curve.stderrs[i])});
      s.xs.push_back(temporal ? g.tau : 1.0 / g.n);
      s.ys.push_back(curve.errors[i]);
    }
    ctx.csv("strong_error.csv", tab);
    CsvTable fit{{"direction", "reference_n", "reference_tau", "paths", "order", "order_ci"}, {}};
    fit.add_row({to_string(curve.direction), fmt(ladder.reference.n), fmt(ladder.reference.tau),
                 fmt(curve.paths), fmt(curve.fitted_order), fmt(curve.ci)});
    ctx.csv("strong_error_fit.csv", fit);
    std::ostringstream note;
    note << "order " << fmt(std::round(curve.fitted_order * 1000) / 1000);
    ctx.plot("strong_error.svg", std::string(to_string(curve.direction)) + " strong error",
             temporal ? "tau" : "1/n", "rms error", {s}, note.str());
  } else {
    throw ConfigError("convergence.kind must be green-semi, green-full, strong-temporal or strong-spatial");
  }
  ctx.finish("convergence");
  return kExitOk;
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
  try {
    return from_json(json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::string config_to_json(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

int run_cli(int argc, char** argv) {
  CLI::App app{"she-lab: finite-difference experiments for the stochastic heat equation"};
  app.require_subcommand(1);

  std::string config_path;
  Context ctx;
  bool as_json = false, inject_fault = false, no_svg = false;

  auto* green = app.add_subcommand("green-check", "Check the Green-function identities and bounds");
  green->add_option("-c,--config", config_path, "JSON run config")->check(CLI::ExistingFile);
  green->add_flag("--json", as_json, "Machine-readable report");
  green->add_flag("--inject-fault", inject_fault, "Perturb an eigenvalue to exercise failure reporting");

  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"simulate", "Simulate one path"},
           {"moments", "Moment curves by exact recursion and Monte Carlo"},
           {"sweep", "Growth rate against lambda in the sharp regime"},
           {"renewal", "Renewal-density roots"},
           {"convergence", "Green-function error rates and strong refinement studies"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", ctx.out_dir, "Output directory")->capture_default_str();
    sub->add_option("-t,--threads", ctx.threads,
                    std::string("Worker threads (default: $") + kThreadsEnv + " or all cores)");
    sub->add_flag("--no-svg", no_svg, "Skip SVG plots");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    ctx.cfg = load_config(config_path);
    if (green->parsed()) return cmd_green_check(ctx.cfg, as_json, inject_fault);
    ctx.svg = !no_svg;
    ctx.manifest.config_hash = config_hash(ctx.cfg);
    ctx.manifest.seed = ctx.cfg.seed;
    ctx.manifest.generator_id = kGeneratorId;
    ctx.manifest.started_utc = utc_now();
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "simulate") return cmd_simulate(ctx);
    if (cmd == "moments") return cmd_moments(ctx);
    if (cmd == "sweep") return cmd_sweep(ctx);
    if (cmd == "renewal") return cmd_renewal(ctx);
    return cmd_convergence(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\nrun with --help for usage\n";
    return kExitConfig;
  } catch (const BlowUp& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\nrun with --help for usage\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::runtime_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitBlowUp;
  }
}

}  // namespace she
