#include "evokit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "evokit/elliptic.hpp"
#include "evokit/error.hpp"
#include "evokit/homogenize.hpp"
#include "evokit/profiles.hpp"
#include "evokit/selftest.hpp"
#include "evokit/spatial_ops.hpp"
#include "evokit/stability.hpp"

namespace evokit {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string out_path(const RunContext& ctx, const std::string& name, const std::string& suffix) {
  std::filesystem::create_directories(ctx.out_dir);
  return (std::filesystem::path(ctx.out_dir) / (name + "_" + suffix + ".csv")).string();
}

template <class F>
void write_file(const std::string& path, F&& body) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::Validation, "cannot write '" + path + "'");
  body(os);
}

// key,value rows parsed back out of a "k=v k=v" summary line.
void write_summary_csv(const std::string& path, const std::string& line) {
  write_file(path, [&](std::ostream& os) {
    os << "key,value\n";
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
      auto eq = tok.find('=');
      if (eq != std::string::npos) os << tok.substr(0, eq) << "," << tok.substr(eq + 1) << "\n";
    }
  });
}

double quad_norm(const Signal& u, const Eigen::VectorXd& q) {
  const TimeGrid& g = u.grid;
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) {
    double w = g.dt * std::exp(-2.0 * g.nu * g.t(j));
    for (int k = 0; k < u.dim(); ++k) acc += w * q[k] * std::norm(u.values(j, k));
  }
  return std::sqrt(acc);
}

std::vector<double> grid_samples(const TimeGrid& g, int max_count) {
  std::vector<double> t;
  const int stride = std::max(1, g.n / max_count);
  for (int j = 0; j < g.n; j += stride) t.push_back(g.t(j));
  return t;
}

std::string run_spectral(const ProblemConfig& cfg, const AssembledProblem& a, const RunContext& ctx) {
  const EvoProblem& p = *a.problem;
  SolverOptions opt;
  opt.jobs = ctx.jobs;
  Solution s = solve_autonomous(p, opt);
  write_file(out_path(ctx, cfg.name, "solution"), [&](std::ostream& os) { write_csv(s.u, os); });
  std::string line = "name=" + cfg.name + " mode=spectral residual=" + fmt(s.residual) +
                     " causal_defect=" + fmt(s.causal_defect) + " norm_ratio=" + fmt(norm_ratio(p, s));
  if (ctx.oracle) {
    Solution o = dense_oracle(p);
    // Late unweighted values carry round-off amplified by e^{nu t}: compare on the interior.
    auto [a, b] = p.grid.interior();
    double scale = sup_norm_on(s.u, p.grid.t0, b);
    double diff = sup_diff_on(s.u, o.u, p.grid.t0, b);
    line += " oracle_diff=" + fmt(scale > 0.0 ? diff / scale : diff);
    write_file(out_path(ctx, cfg.name, "oracle"), [&](std::ostream& os) { write_csv(o.u, os); });
  }
  return line;
}

std::string run_step(const ProblemConfig& cfg, const AssembledProblem& a, const RunContext& ctx) {
  if (ctx.oracle) fail(ErrorCode::Validation, "--oracle applies to spectral problems only");
  Solution s;
  std::string mode;
  double c = 0.0;
  if (a.mode == Mode::inclusion) {
    s = solve_inclusion(a.tv_law, *a.relation, a.rhs);
    mode = "inclusion";
  } else {
    s = solve_nonauto(a.tv_law, a.A, a.rhs, a.step);
    mode = "step";
  }
  c = check_nonauto_posdef(a.tv_law, a.grid.nu, grid_samples(a.grid, 257));
  write_file(out_path(ctx, cfg.name, "solution"), [&](std::ostream& os) { write_csv(s.u, os); });
  const Eigen::VectorXd q = a.quad.size() == a.rhs.dim() ? a.quad : Eigen::VectorXd::Ones(a.rhs.dim());
  double nf = quad_norm(a.rhs, q);
  double ratio = nf > 0.0 ? quad_norm(s.u, q) * c / nf : 0.0;
  return "name=" + cfg.name + " mode=" + mode + " residual=" + fmt(s.residual) + " causal_defect=" +
         fmt(s.causal_defect) + " norm_ratio=" + fmt(ratio) + " posdef_min=" + fmt(c);
}

std::vector<int> int_list(const json& a) {
  std::vector<int> v;
  for (const auto& x : a) v.push_back(x.get<int>());
  return v;
}

std::string run_homogenize_impl(const std::string& name, const std::string& type, const std::string& base_name,
                                const std::vector<int>& n_list, int n_x, double nu, const std::string& forcing,
                                const RunContext& ctx) {
  WeakConvergenceReport r;
  if (type == "elliptic") {
    EllipticHomOptions o;
    if (n_x > 0) o.n_x = n_x;
    o.jobs = ctx.jobs;
    r = elliptic_hom_experiment(profile_from_name(base_name), [](double) { return 1.0; }, n_list, o);
  } else if (type == "ode") {
    OdeHomOptions o;
    if (n_x > 0) o.n_x = n_x;
    o.jobs = ctx.jobs;
    std::function<double(double)> f;
    if (forcing == "heaviside") {
      f = heaviside;
    } else if (forcing.rfind("indicator:", 0) == 0 || forcing.rfind("bump:", 0) == 0) {
      double a = 0.0, b = 0.0;
      char comma = 0;
      std::istringstream is(forcing.substr(forcing.find(':') + 1));
      if (!(is >> a >> comma >> b) || comma != ',' || !(b > a))
        fail(ErrorCode::Validation, "forcing '" + forcing + "' needs a,b with a < b");
      if (forcing[0] == 'i') f = [a, b](double t) { return indicator(t, a, b); };
      else f = [a, b](double t) { return smooth_bump(t, a, b); };
    } else {
      fail(ErrorCode::Validation, "unknown forcing '" + forcing + "' (heaviside, indicator:a,b, bump:a,b)");
    }
    r = ode_hom_experiment(profile_from_name(base_name), f, n_list, nu, o);
  } else if (type == "mixed") {
    MixedHomOptions o;
    if (n_x > 0) o.n_x = n_x;
    o.jobs = ctx.jobs;
    r = mixed_hom_experiment(n_list, o);
  } else {
    fail(ErrorCode::Validation, "unknown homogenization experiment '" + type + "' (elliptic, ode, mixed)");
  }
  write_file(out_path(ctx, name, "pairings"), [&](std::ostream& os) { write_report_csv(r, os); });
  const int last = static_cast<int>(r.n_list.size()) - 1;
  std::string line = "name=" + name + " experiment=" + type + " n_max=" + std::to_string(r.n_list.back()) +
                     " max_pairing=" + fmt(r.max_pairing(last)) + " strong_gap=" + fmt(r.strong_gap.back()) +
                     " rate_estimate=" + fmt(r.rate_estimate);
  if (type != "mixed")
    line += " effective_coefficient=" + fmt(r.effective_coefficient) + " reference=" + fmt(r.reference);
  write_summary_csv(out_path(ctx, name, "summary"), line);
  return line;
}

std::string run_stability_impl(const std::string& name, const std::string& type, double c, double h,
                               const StabilityOptions& opt) {
  DecayReport d;
  if (type == "para_hyper") d = para_hyper_experiment(c, Partition{}, opt);
  else if (type == "delay") d = delay_experiment(c, h, Partition{}, opt);
  else fail(ErrorCode::Validation, "unknown stability experiment '" + type + "' (para_hyper, delay)");
  std::string line = "name=" + name + " experiment=" + type + " c=" + fmt(c) + (type == "delay" ? " h=" + fmt(h) : "") +
                     " fitted_rate=" + fmt(d.fitted_rate) + " theoretical=" + fmt(d.theoretical) + " r2=" + fmt(d.r2) +
                     " windows=" + std::to_string(d.windows) + " t_start=" + fmt(d.t_start) +
                     " exact_zero=" + (d.exact_zero ? "1" : "0");
  return line;
}

StabilityOptions stability_options(const json& e) {
  StabilityOptions o;
  if (e.contains("n_x")) o.n_x = e["n_x"].get<int>();
  if (e.contains("dt")) o.dt = e["dt"].get<double>();
  if (e.contains("t0")) o.t0 = e["t0"].get<double>();
  if (e.contains("t_end")) o.t_end = e["t_end"].get<double>();
  if (e.contains("tail_start")) o.tail_start = e["tail_start"].get<double>();
  return o;
}

Eigen::VectorXd psi_values(const std::string& name, const Eigen::VectorXd& x) {
  if (name == "x") return x;
  if (name == "cubic") return x.array().cube().matrix();
  if (name == "sin") return (2.0 * M_PI * x.array()).sin().matrix();
  fail(ErrorCode::Validation, "unknown psi '" + name + "' (x, cubic, sin)");
}

std::string run_elliptic(double alpha, double beta, const std::string& psi_name, int n, const std::string& bc_name,
                         const RunContext& ctx) {
  if (n < 2) fail(ErrorCode::Validation, "--n must be >= 2");
  if (bc_name != "dirichlet" && bc_name != "neumann") fail(ErrorCode::Validation, "--bc must be dirichlet or neumann");
  const Boundary bc = bc_name == "dirichlet" ? Boundary::dirichlet : Boundary::neumann;
  const Eigen::VectorXd x = cell_midpoints(n, -0.5, 0.5);
  const Eigen::VectorXd psi = psi_values(psi_name, x);
  const Eigen::VectorXd closed = indefinite_example(alpha, beta, psi, bc);
  const OperatorPair pair = grad_pair_1d(n + 1, 1.0, bc);
  // Data f = G_c^* psi, so the flux a grad u solves the same problem as the closed form.
  const Eigen::VectorXd f = -(pair.D() * psi);
  EllipticResult er = solve_divergence(EllipticProblem::make_linear(pair, indefinite_coefficient(alpha, beta, n), f));
  const double err = (er.flux - closed).cwiseAbs().maxCoeff();
  const std::string name = "elliptic_" + psi_name + "_" + bc_name;
  write_file(out_path(ctx, name, "solution"), [&](std::ostream& os) {
    os << "x,psi,closed_form,computed\n" << std::setprecision(17);
    for (int i = 0; i < n; ++i) os << x[i] << "," << psi[i] << "," << closed[i] << "," << er.flux[i] << "\n";
  });
  std::string line = "name=" + name + " alpha=" + fmt(alpha) + " beta=" + fmt(beta) + " closed_form_error=" + fmt(err) +
                     " residual=" + fmt(er.residual);
  for (int i = 0; i < n; ++i)
    if (std::abs(x[i] - 0.25) < 1e-12) line += " value_at_quarter=" + fmt(closed[i]);
  return line;
}

std::string run_bd(int n, const RunContext& ctx) {
  if (n < 4) fail(ErrorCode::Validation, "--n must be >= 4");
  const OperatorPair pair = grad_pair_1d(n + 1, 1.0, Boundary::dirichlet);
  BdBasis b = bd_basis(pair);
  Eigen::MatrixXd ex(n + 1, 2);
  for (int i = 0; i <= n; ++i) {
    double x = static_cast<double>(i) / n;
    ex(i, 0) = std::exp(x);
    ex(i, 1) = std::exp(-x);
  }
  Eigen::VectorXd ang = principal_angles(pair, b.basis, ex);
  BdMap m = bd_map(pair);
  write_file(out_path(ctx, "bd_" + std::to_string(n), "basis"), [&](std::ostream& os) {
    os << "x";
    for (int k = 0; k < b.basis.cols(); ++k) os << ",b" << k;
    os << "\n" << std::setprecision(17);
    for (int i = 0; i <= n; ++i) {
      os << static_cast<double>(i) / n;
      for (int k = 0; k < b.basis.cols(); ++k) os << "," << b.basis(i, k);
      os << "\n";
    }
  });
  return "name=bd n=" + std::to_string(n) + " bd_dim=" + std::to_string(b.basis.cols()) +
         " max_angle=" + fmt(ang.size() ? ang.maxCoeff() : 0.0) + " isometry_defect=" + fmt(m.defect);
}

std::vector<int> parse_n_list(const std::string& s) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      int n = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      v.push_back(n);
    } catch (const std::exception&) {
      fail(ErrorCode::Validation, "--n: cannot parse '" + tok + "'");
    }
  }
  if (v.empty()) fail(ErrorCode::Validation, "--n: empty list");
  return v;
}

std::string default_out() {
  const char* e = std::getenv("EVOKIT_OUT");
  return e && *e ? e : "out";
}

}  // namespace

std::string run_config(const ProblemConfig& cfg, const RunContext& ctx) {
  std::string line;
  if (cfg.mode == Mode::homogenize) {
    const json& e = cfg.experiment;
    line = run_homogenize_impl(cfg.name, e["type"].get<std::string>(), e.value("base", std::string("a1")),
                               int_list(e["n"]), e.value("n_x", 0), e.value("nu", 4.0),
                               e.value("forcing", std::string("indicator:0,1")), ctx);
    return line;
  }
  if (cfg.mode == Mode::stability) {
    const json& e = cfg.experiment;
    line = run_stability_impl(cfg.name, e["type"].get<std::string>(), e["c"].get<double>(), e.value("h", -1.0),
                              stability_options(e));
    write_summary_csv(out_path(ctx, cfg.name, "summary"), line);
    return line;
  }
  AssembledProblem a = assemble(cfg);
  line = a.mode == Mode::spectral ? run_spectral(cfg, a, ctx) : run_step(cfg, a, ctx);
  write_summary_csv(out_path(ctx, cfg.name, "summary"), line);
  return line;
}

int exit_code_for(const std::exception& e) {
  if (auto* ev = dynamic_cast<const Error*>(&e)) return is_validation(ev->code()) ? 2 : 3;
  if (dynamic_cast<const json::exception*>(&e)) return 2;
  return 3;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"evokit: evolutionary equations toolkit"};
  app.require_subcommand(1);
  RunContext ctx;
  ctx.out_dir = default_out();
  ctx.jobs = std::max(1u, std::thread::hardware_concurrency());
  auto common = [&](CLI::App* s) {
    s->add_option("--out", ctx.out_dir, "output directory (default $EVOKIT_OUT or ./out)");
    s->add_option("--jobs", ctx.jobs, "worker threads")->check(CLI::PositiveNumber);
  };

  std::string problem;
  double nu = 0.0, dt = 0.0;
  auto* solve = app.add_subcommand("solve", "solve a problem config");
  solve->add_option("--problem", problem, "problem config (JSON)")->required();
  solve->add_option("--nu", nu, "override the exponential weight");
  solve->add_flag("--oracle", ctx.oracle, "also run the dense backward-difference oracle");
  common(solve);

  auto* step = app.add_subcommand("step", "time-step a problem config");
  step->add_option("--problem", problem, "problem config (JSON)")->required();
  step->add_option("--dt", dt, "step size; must split the window into 2^k steps");
  step->add_option("--nu", nu, "override the exponential weight");
  common(step);

  std::string law_file;
  double radius = 1.0;
  auto* check = app.add_subcommand("check-law", "sample the positivity condition of a law file");
  check->add_option("--law", law_file, "law description (JSON)")->required();
  check->add_option("--r", radius, "radius of the ball B(r, r)");
  common(check);

  double alpha = 1.0, beta = 2.0;
  std::string psi = "x", bc = "dirichlet";
  int n_cells = 130;
  auto* ell = app.add_subcommand("elliptic", "indefinite 1D divergence-form example");
  ell->add_option("--alpha", alpha, "coefficient on x >= 0");
  ell->add_option("--beta", beta, "coefficient on x < 0");
  ell->add_option("--psi", psi, "data: x, cubic, sin");
  ell->add_option("--n", n_cells, "cells on [-1/2, 1/2]");
  ell->add_option("--bc", bc, "dirichlet or neumann");
  common(ell);

  std::string experiment, base = "a1", n_list = "1,2,4,8,16,32,64", forcing = "indicator:0,1";
  int n_x = 0;
  double hom_nu = 4.0;
  auto* hom = app.add_subcommand("homogenize", "weak-convergence experiment");
  hom->add_option("--experiment", experiment, "elliptic, ode or mixed")->required();
  hom->add_option("--base", base, "periodic profile: a1, a2, const:c");
  hom->add_option("--n", n_list, "comma-separated oscillation indices");
  hom->add_option("--n-x", n_x, "spatial cells (0: experiment default)");
  hom->add_option("--nu", hom_nu, "weight for the ode experiment");
  hom->add_option("--forcing", forcing, "ode forcing: heaviside, indicator:a,b, bump:a,b");
  common(hom);

  double c = 2.0, h = -1.0;
  auto* stab = app.add_subcommand("stability", "exponential decay experiment");
  stab->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  stab->add_option("--experiment", experiment, "para_hyper or delay")->required();
  stab->add_option("--c", c, "damping constant")->required();
  stab->add_option("--h", h, "delay (h < 0)");
  common(stab);

  int bd_n = 512;
  auto* bd = app.add_subcommand("bd", "boundary data space of the 1D gradient");
  bd->add_option("--n", bd_n, "cells on [0, 1]");
  common(bd);

  bool full = false;
  std::string config_dir = default_config_dir();
  auto* self = app.add_subcommand("selftest", "built-in checks");
  self->add_flag("--full", full, "also run every shipped config");
  self->add_option("--configs", config_dir, "config directory for --full");
  common(self);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    std::string line;
    if (solve->parsed() || step->parsed()) {
      ProblemConfig cfg = load_config(problem);
      if (nu != 0.0) cfg = with_nu(cfg, nu);
      if (step->parsed()) {
        if (cfg.mode == Mode::spectral) cfg.mode = Mode::step;
        if (cfg.mode != Mode::step && cfg.mode != Mode::inclusion)
          fail(ErrorCode::Validation, "step needs a spectral, step or inclusion config");
        if (dt != 0.0) cfg = with_dt(cfg, dt);
      }
      line = run_config(cfg, ctx);
    } else if (check->parsed()) {
      MaterialLaw law = load_law_file(law_file);
      PositivityReport r = check_positivity(law, radius);
      out << "c_est=" << fmt(r.c_est) << "\n"
          << "argmin_re=" << fmt(r.argmin_z.real()) << "\n"
          << "argmin_im=" << fmt(r.argmin_z.imag()) << "\n"
          << "samples=" << r.samples << "\n"
          << "pass=" << (r.pass ? "true" : "false") << "\n";
      if (!r.pass) {
        err << "error: SpdViolation: positivity fails, Re z^{-1} M(z) >= c > 0 does not hold on B(r, r)\n";
        return 3;
      }
      return 0;
    } else if (ell->parsed()) {
      line = run_elliptic(alpha, beta, psi, n_cells, bc, ctx);
    } else if (hom->parsed()) {
      line = run_homogenize_impl("homogenize_" + experiment, experiment, base, parse_n_list(n_list), n_x, hom_nu,
                                 forcing, ctx);
    } else if (stab->parsed()) {
      StabilityOptions o;
      line = run_stability_impl("stability_" + experiment, experiment, c, h, o);
      write_summary_csv(out_path(ctx, "stability_" + experiment, "summary"), line);
    } else if (bd->parsed()) {
      line = run_bd(bd_n, ctx);
    } else if (self->parsed()) {
      auto results = run_selftest(full, ctx, config_dir, out);
      int failed = static_cast<int>(std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.pass; }));
      out << "selftest " << (failed ? "FAIL" : "PASS") << " checks=" << results.size() << " failed=" << failed << "\n";
      return failed ? 3 : 0;
    }
    out << line << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace evokit
