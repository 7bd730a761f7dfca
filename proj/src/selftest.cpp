#include "evokit/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>

#include "evokit/error.hpp"
#include "evokit/examples.hpp"
#include "evokit/homogenize.hpp"
#include "evokit/profiles.hpp"
#include "evokit/spatial_ops.hpp"
#include "evokit/stability.hpp"

#ifndef EVOKIT_CONFIG_DIR
#define EVOKIT_CONFIG_DIR "configs"
#endif

namespace evokit {

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// A check returns its measured value; pass is decided against a bound.
struct Check {
  std::string name;
  std::function<std::pair<bool, std::string>()> run;
};

std::pair<bool, std::string> below(double v, double bound) { return {v <= bound, sci(v) + " <= " + sci(bound)}; }

std::vector<Check> trivial_checks() {
  std::vector<Check> c;
  c.push_back({"skew_grad_1d", [] {
                 return below(skew_defect(block_skew(grad_pair_1d(65, 1.0, Boundary::dirichlet)), 20, 1), 1e-13);
               }});
  c.push_back({"skew_curl_3d", [] { return below(skew_defect(block_skew(curl_pair_3d(3)), 20, 2), 1e-13); }});
  c.push_back({"derive_integrate", [] {
                 TimeGrid g = default_grid(1.0, 1024);
                 // Derivative of a Gaussian: zero mean and spectrally resolved at this step.
                 Signal u = Signal::sample(g, [](double t) { return cplx(-2.0 * (t - 2.0) * std::exp(-(t - 2.0) * (t - 2.0))); });
                 Signal back = derive(integrate(u));
                 return below(weighted_norm(back - u) / weighted_norm(u), 1e-10);
               }});
  c.push_back({"ode_causality", [] {
                 EvoProblem p = example_ode(default_grid(), Forcing::bump);
                 return below(causality_test(p, 0.0), 1e-8);
               }});
  c.push_back({"weak_star_mean_a1", [] {
                 double m = weak_star_mean(profile_a1()), r = weak_star_mean(profile_a1().reciprocal());
                 return std::pair{m == 0.75 && r == 1.5, "mean " + sci(m) + ", reciprocal mean " + sci(r)};
               }});
  c.push_back({"constant_base_homogenization", [] {
                 EllipticHomOptions o;
                 o.n_x = 64;
                 auto r = elliptic_hom_experiment(PeriodicProfile::constant(2.0), [](double) { return 1.0; }, {1, 2, 4}, o);
                 return below(std::abs(r.effective_coefficient - 2.0), 1e-10);
               }});
  c.push_back({"ode_hom_limit_geometric", [] {
                 std::vector<double> b;
                 for (int l = 1; l <= 8; ++l) b.push_back(std::pow(0.5, l));
                 HomLimit lim = ode_hom_limit(b, 8, 4.0);
                 cplx z(0.1, 0.05);
                 return below(std::abs(lim.law.eval(z)(0, 0) - (1.0 + 0.5 * z)), 1e-6);
               }});
  c.push_back({"minty_zero_relation", [] {
                 Eigen::VectorXd y(3);
                 y << 1.0, -2.0, 0.5;
                 Eigen::VectorXd x = minty_inverse(relation_zero(), 2.0, y);
                 return below((x - 0.5 * y).cwiseAbs().maxCoeff(), 1e-9);
               }});
  c.push_back({"soft_threshold", [] {
                 Eigen::VectorXd x(3), want(3);
                 x << 3.0, -0.5, -2.0;
                 want << 2.0, 0.0, -1.0;
                 return below((relation_sign(1.0).resolvent(1.0, x) - want).cwiseAbs().maxCoeff(), 0.0);
               }});
  c.push_back({"positivity_negative_control", [] {
                 MaterialLaw law = build_affine(sparse_identity(1) * cplx(-1.0), SpMatC(1, 1), 1.0);
                 PositivityReport r = check_positivity(law, 1.0);
                 return std::pair{!r.pass, "c_est " + sci(r.c_est)};
               }});
  c.push_back({"delay_no_root", [] {
                 try {
                   delay_rate(1.0, -1.0);
                 } catch (const Error& e) {
                   return std::pair{e.code() == ErrorCode::NoRoot, std::string(to_string(e.code()))};
                 }
                 return std::pair{false, std::string("no error raised")};
               }});
  return c;
}

std::vector<std::string> config_files(const std::string& dir) {
  std::vector<std::string> files;
  if (!std::filesystem::is_directory(dir)) fail(ErrorCode::Validation, "config directory '" + dir + "' not found");
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::string default_config_dir() { return EVOKIT_CONFIG_DIR; }

std::vector<SelftestResult> run_selftest(bool full, const RunContext& ctx, const std::string& config_dir,
                                         std::ostream& out) {
  using clock = std::chrono::steady_clock;
  std::vector<SelftestResult> results;
  auto record = [&](SelftestResult r) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    results.push_back(std::move(r));
  };
  for (const Check& c : trivial_checks()) {
    SelftestResult r;
    r.name = c.name;
    auto t0 = clock::now();
    try {
      auto [ok, detail] = c.run();
      r.pass = ok;
      r.detail = detail;
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    record(r);
  }
  if (!full) return results;

  RunContext sub = ctx;
  sub.out_dir = (std::filesystem::path(ctx.out_dir) / "selftest").string();
  sub.oracle = false;
  for (const std::string& f : config_files(config_dir)) {
    SelftestResult r;
    r.name = "config " + std::filesystem::path(f).filename().string();
    auto t0 = clock::now();
    try {
      r.detail = run_config(load_config(f), sub);
      r.pass = true;
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    // Timing goes to the report only; output files carry no wall-clock data.
    r.detail += " (" + sci(r.seconds) + " s)";
    record(r);
  }
  return results;
}

}  // namespace evokit
