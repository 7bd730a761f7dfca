#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "evokit/cli.hpp"
#include "evokit/config.hpp"
#include "evokit/examples.hpp"
#include "evokit/selftest.hpp"

using namespace evokit;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = EVOKIT_CONFIG_DIR;

std::string cfg(const std::string& name) { return kConfigs + "/" + name; }

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("evokit_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// "k=v k=v" summary line into a map.
std::map<std::string, std::string> fields(const std::string& line) {
  std::map<std::string, std::string> m;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) m[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path write_json(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Config, HeatConfigAssemblesTheHeatExample) {
  AssembledProblem a = assemble(load_config(cfg("heat.json")));
  ASSERT_EQ(a.mode, Mode::spectral);
  ASSERT_TRUE(a.problem.has_value());
  const EvoProblem& p = *a.problem;
  EvoProblem ref = example_heat(default_grid());
  EXPECT_EQ(p.grid.n, ref.grid.n);
  EXPECT_EQ(p.grid.t0, ref.grid.t0);
  EXPECT_EQ(p.grid.dt, ref.grid.dt);
  EXPECT_EQ(p.grid.nu, ref.grid.nu);
  ASSERT_EQ(p.dim(), ref.dim());
  EXPECT_EQ((Eigen::MatrixXcd(p.A) - Eigen::MatrixXcd(ref.A)).norm(), 0.0);
  EXPECT_EQ((p.quad - ref.quad).norm(), 0.0);
  for (cplx z : {cplx(0.5, 0.0), cplx(0.3, 0.2), cplx(0.9, -0.4)})
    EXPECT_LE((p.law.eval(z) - ref.law.eval(z)).norm(), 1e-15);
  EXPECT_LE((p.rhs.values - ref.rhs.values).norm(), 1e-13 * ref.rhs.values.norm());
}

TEST(Config, UnknownKeyNamesThePath) {
  json j = json::parse(slurp(cfg("heat.json")));
  j["spatial"]["n_xx"] = 3;
  try {
    parse_config(j, kConfigs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Validation);
    EXPECT_NE(std::string(e.what()).find("n_xx"), std::string::npos) << e.what();
  }
  json k = json::parse(slurp(cfg("heat.json")));
  k["grid"]["n"] = "many";
  EXPECT_THROW(assemble(parse_config(k, kConfigs)), std::exception);
}

TEST(Config, Overrides) {
  ProblemConfig c = load_config(cfg("heat.json"));
  ProblemConfig n2 = with_nu(c, 2.0);
  EXPECT_EQ(n2.nu, 2.0);
  EXPECT_EQ(n2.n, c.n);
  EXPECT_EQ(n2.t0, c.t0);
  ProblemConfig d2 = with_dt(c, c.dt * 2.0);
  EXPECT_EQ(d2.n, c.n / 2);
  EXPECT_DOUBLE_EQ(d2.t0 + d2.n * d2.dt, c.t0 + c.n * c.dt);
}

TEST(Cli, SolveHeatWritesSolutionAndSummary) {
  fs::path out = fresh_dir("heat");
  Result r = call({"solve", "--problem", cfg("heat.json"), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto f = fields(r.out);
  EXPECT_EQ(f["name"], "heat");
  EXPECT_LE(std::stod(f["residual"]), 1e-8);
  EXPECT_LE(std::stod(f["causal_defect"]), 1e-8);
  EXPECT_LE(std::stod(f["norm_ratio"]), 1.0 + 1e-6);
  EXPECT_TRUE(fs::exists(out / "heat_solution.csv"));
  std::string summary = slurp(out / "heat_summary.csv");
  EXPECT_EQ(summary.rfind("key,value\n", 0), 0u);
  EXPECT_NE(summary.find("residual,"), std::string::npos);
}

TEST(Cli, IdenticalConfigsGiveIdenticalCsvs) {
  fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  for (const auto& dir : {a, b}) {
    ASSERT_EQ(call({"solve", "--problem", cfg("ode.json"), "--out", dir.string(), "--jobs", "3"}).code, 0);
    ASSERT_EQ(call({"step", "--problem", cfg("mixed_type.json"), "--out", dir.string()}).code, 0);
    ASSERT_EQ(call({"stability", "--experiment", "para_hyper", "--c", "1", "--out", dir.string()}).code, 0);
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    ASSERT_TRUE(fs::exists(b / e.path().filename())) << e.path();
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
  }
  EXPECT_GE(files, 5);
  // Thread count must not change the numbers.
  fs::path c = fresh_dir("det_c");
  ASSERT_EQ(call({"solve", "--problem", cfg("ode.json"), "--out", c.string(), "--jobs", "1"}).code, 0);
  EXPECT_EQ(slurp(a / "ode_solution.csv"), slurp(c / "ode_solution.csv"));
}

TEST(Cli, OracleFlag) {
  fs::path out = fresh_dir("oracle");
  Result r = call({"solve", "--problem", cfg("ode.json"), "--out", out.string(), "--oracle"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto f = fields(r.out);
  ASSERT_TRUE(f.count("oracle_diff"));
  EXPECT_LE(std::stod(f["oracle_diff"]), 0.05);
  EXPECT_TRUE(fs::exists(out / "ode_oracle.csv"));
}

TEST(Cli, CheckLawExitCodes) {
  Result bad = call({"check-law", "--law", cfg("laws/bad_law.json")});
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.out.find("pass=false"), std::string::npos);
  EXPECT_NE(bad.err.find("SpdViolation"), std::string::npos);
  Result good = call({"check-law", "--law", cfg("laws/heat_law.json")});
  EXPECT_EQ(good.code, 0) << good.err;
  EXPECT_NE(good.out.find("pass=true"), std::string::npos);
}

TEST(Cli, ValidationErrorsExitTwo) {
  fs::path dir = fresh_dir("bad");
  fs::path unknown = write_json(dir, "unknown.json", R"({"name": "x", "mode": "spectral", "colour": 1})");
  Result r = call({"solve", "--problem", unknown.string(), "--out", dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("colour"), std::string::npos) << r.err;

  fs::path broken = write_json(dir, "broken.json", R"({"name": "x", )");
  EXPECT_EQ(call({"solve", "--problem", broken.string(), "--out", dir.string()}).code, 2);
  EXPECT_EQ(call({"solve", "--problem", (dir / "missing.json").string()}).code, 2);
  EXPECT_EQ(call({"solve"}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"solve", "--problem", cfg("heat.json"), "--jobs", "0"}).code, 2);
  // A timestep that does not split the window into 2^k steps.
  EXPECT_EQ(call({"step", "--problem", cfg("ode.json"), "--dt", "0.3", "--out", dir.string()}).code, 2);
  EXPECT_EQ(call({"stability", "--experiment", "delay", "--c", "0.5", "--out", dir.string()}).code, 2);
}

TEST(Cli, NumericalFailureExitsThree) {
  fs::path out = fresh_dir("singular");
  Result r = call({"elliptic", "--alpha", "1", "--beta", "-1", "--out", out.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("SingularCoupling"), std::string::npos);
}

TEST(Cli, ModuleSubcommands) {
  fs::path out = fresh_dir("modules");
  const std::string o = out.string();

  auto e = fields(call({"elliptic", "--out", o}).out);
  EXPECT_NEAR(std::stod(e["value_at_quarter"]), 1.0 / 6.0, 1e-6);
  EXPECT_LE(std::stod(e["closed_form_error"]), 1e-10);
  auto en = fields(call({"elliptic", "--alpha", "1", "--beta", "-1", "--bc", "neumann", "--out", o}).out);
  EXPECT_LE(std::stod(en["residual"]), 1e-10);

  auto s = fields(call({"stability", "--experiment", "delay", "--c", "2", "--h", "-1", "--out", o}).out);
  EXPECT_NEAR(std::stod(s["theoretical"]), 0.442854, 1e-6);
  EXPECT_GE(std::stod(s["fitted_rate"]), 0.9 * 0.442854);

  auto b = fields(call({"bd", "--n", "64", "--out", o}).out);
  EXPECT_EQ(b["bd_dim"], "2");
  EXPECT_LE(std::stod(b["max_angle"]), 1e-2);

  auto h = fields(call({"homogenize", "--experiment", "elliptic", "--n", "2,4", "--out", o}).out);
  EXPECT_NEAR(std::stod(h["effective_coefficient"]) / (2.0 / 3.0), 1.0, 0.05);
  EXPECT_TRUE(fs::exists(out / "homogenize_elliptic_pairings.csv"));

  for (const char* f : {"elliptic_x_dirichlet_solution.csv", "stability_delay_summary.csv", "bd_64_basis.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST(Cli, OutDefaultsToEnvironment) {
  fs::path out = fresh_dir("env");
  ::setenv("EVOKIT_OUT", out.string().c_str(), 1);
  Result r = call({"bd", "--n", "32"});
  ::unsetenv("EVOKIT_OUT");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "bd_32_basis.csv"));
}

TEST(Cli, QuickSelftest) {
  fs::path out = fresh_dir("self");
  Result r = call({"selftest", "--out", out.string()});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("selftest PASS"), std::string::npos) << r.out;
}

TEST(Cli, HelpExitsZero) {
  EXPECT_EQ(call({"--help"}).code, 0);
  EXPECT_EQ(call({"stability", "--help"}).code, 0);
}
