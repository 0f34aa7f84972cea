#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <sys/wait.h>

#include "she/cli.hpp"
#include "she/io.hpp"

using namespace she;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("she_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& args, const fs::path& log) {
  const char* exe = std::getenv("SHE_LAB");
  REQUIRE(exe != nullptr);
  const std::string cmd = std::string("\"") + exe + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config round trip") {
  RunConfig c;
  c.grid.n = 12;
  c.scheme.tau = 2.5e-4;
  c.scheme.theta = 0.75;
  c.scheme.r = 0.3;
  c.model.lambda = 1.7;
  c.model.sigma = SigmaSpec::table({-1.0, 0.0, 2.0}, {-1.0, 0.0, 3.0}, 1.5, 1.0);
  c.model.u0 = InitialData::samples({1.0, 1.5, 2.0, 1.5, 1.0, 0.5, 1.0, 1.5, 2.0, 1.5, 1.0, 0.1});
  c.seed = 12345678901ULL;
  c.renewal.zeta = 0.5;
  c.renewal.taus = {1e-3, 5e-4};
  c.sweep.lambdas = {1.0, 3.0};
  c.convergence.kind = "strong-spatial";
  const auto text = config_to_json(c);
  const auto back = config_from_json(text);
  CHECK(back == c);
  CHECK(config_to_json(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  c.seed = 2;
  CHECK(config_hash(back) != config_hash(c));
}

TEST_CASE("config errors") {
  CHECK(config_from_json("{}") == RunConfig{});
  CHECK_THROWS_AS(config_from_json("{\"grid\": {\"n\": 8, \"m\": 1}}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"bogus\": 1}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"grid\": "), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"model\": {\"sigma\": {\"kind\": \"cubic\"}}}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"grid\": {\"n\": \"eight\"}}"), ConfigError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0})
    CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv rendering") {
  RunManifest m;
  m.config_hash = "abc";
  m.seed = 7;
  m.generator_id = "philox4x32-10";
  m.tool_version = kToolVersion;
  CHECK(m.header_line() == std::string("# manifest: abc seed=7 generator=philox4x32-10 version=") + kToolVersion);
  CsvTable t;
  t.columns = {"a", "b"};
  t.add_row({"1", "2"});
  CHECK_THROWS(t.add_row({"1"}));
  CHECK(render_csv(m, t) == m.header_line() + "\na,b\n1,2\n");
}

TEST_CASE("binary exit codes and outputs") {
  const auto dir = scratch("run");
  const auto log = dir / "log.txt";
  write_file(dir / "cfg.json",
             R"({"grid": {"n": 4}, "green_check": {"ns": [3, 4], "taus": [1e-3], "thetas": [0.5, 1.0]},
                 "simulate": {"steps": 20, "record_every": 5},
                 "renewal": {"taus": [1e-3]}})");
  const std::string cfg = "-c \"" + (dir / "cfg.json").string() + "\"";
  const std::string out = " -o \"" + (dir / "out").string() + "\"";

  CHECK(run("--help", log) == 0);
  CHECK(run("no-such-command", log) == 2);

  CHECK(run("green-check " + cfg, log) == 0);
  CHECK(read_file(log).find("all checks passed") != std::string::npos);
  CHECK(run("green-check --inject-fault " + cfg, log) == 1);
  CHECK(run("green-check --json " + cfg, log) == 0);
  CHECK(read_file(log).find('{') == 0);

  CHECK(run("simulate " + cfg + out, log) == 0);
  const auto sim = read_file(dir / "out" / "simulate.csv");
  CHECK(sim.rfind("# manifest: ", 0) == 0);
  CHECK(fs::exists(dir / "out" / "simulate.manifest.json"));
  CHECK(run("simulate -t 3 " + cfg + out, log) == 0);
  CHECK(read_file(dir / "out" / "simulate.csv") == sim);

  CHECK(run("renewal " + cfg + out, log) == 0);
  CHECK(read_file(dir / "out" / "renewal.csv").find("discrete_limit") != std::string::npos);

  write_file(dir / "empty.json", R"({"sweep": {"lambdas": []}})");
  CHECK(run("sweep -c \"" + (dir / "empty.json").string() + "\"" + out, log) == 2);

  write_file(dir / "unknown.json", R"({"simulate": {"stpes": 3}})");
  CHECK(run("simulate -c \"" + (dir / "unknown.json").string() + "\"" + out, log) == 2);

  write_file(dir / "boom.json",
             R"({"grid": {"n": 4}, "scheme": {"tau": 0.1, "theta": 1.0}, "model": {"lambda": 60},
                 "simulate": {"steps": 100000, "record_every": 100000}})");
  CHECK(run("simulate -c \"" + (dir / "boom.json").string() + "\"" + out, log) == 3);
  CHECK(read_file(log).find("blow-up") != std::string::npos);
}
