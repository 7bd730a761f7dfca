#include <gtest/gtest.h>

#include <cmath>

#include "evokit/evo_solver.hpp"
#include "evokit/examples.hpp"
#include "evokit/profiles.hpp"
#include "oracles.hpp"

using namespace evokit;

namespace {

TimeGrid jump_grid(double nu = 1.0) { return TimeGrid::window(-4.0, 28.0, 16384, nu); }
constexpr double kJumpLayer = 0.25;

double rel(const EvoProblem& p, const Signal& a, const Signal& b) { return state_norm(p, a - b) / state_norm(p, b); }

// The heat example's rhs with its time profile replaced by g(t).
Signal heat_rhs_with_profile(const EvoProblem& heat, const std::function<double(double)>& g) {
  // The default profile is a bump on [0, 4] with peak 1 at t = 2.
  int peak = static_cast<int>(std::lround((2.0 - heat.grid.t0) / heat.grid.dt));
  Eigen::VectorXcd shape = heat.rhs.at(peak);
  return Signal::sample(heat.grid, heat.dim(), [&](double t) { return Eigen::VectorXcd(g(t) * shape); });
}

double simpson_nodes(const std::vector<double>& y, double dt) {
  const int n = static_cast<int>(y.size()) - 1;  // even number of panels expected
  double acc = y.front() + y.back();
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * y[i];
  return acc * dt / 3.0;
}

}  // namespace

TEST(Solve, ScalarOdeHeaviside) {
  TimeGrid g = jump_grid();
  EvoProblem p = example_ode(g, Forcing::heaviside);
  Solution s = solve_autonomous(p);
  Signal want = Signal::sample(g, [](double t) { return cplx(t > 0 ? 1.0 - std::exp(-t) : 0.0); });
  auto [a, b] = g.interior();
  EXPECT_LE(sup_diff_on(s.u, want, a + kJumpLayer, b), 1e-6);
  // The node at the jump itself carries an O(dt) sampling error.
  EXPECT_LE(sup_diff_on(s.u, want, a, b), g.dt);
  EXPECT_LE(s.residual, 1e-8);
}

TEST(Solve, HeatSeparableHeaviside) {
  TimeGrid g = jump_grid();
  const int n_x = 64;
  EvoProblem p = example_heat(g, n_x, Forcing::heaviside);
  Solution s = solve_autonomous(p);
  EXPECT_LE(s.residual, 1e-8);
  auto [a, b] = g.interior();
  const int n_theta = n_x - 1;
  const double h = oracle::kPi / n_x;
  double err = 0.0;
  for (int j = 0; j < g.n; ++j) {
    double t = g.t(j);
    if (t < a || t > b) continue;
    for (int i = 0; i < n_theta; ++i) {
      double x = (i + 1) * h;
      double want = t > 0 ? (1.0 - std::exp(-t)) * std::sin(x) : 0.0;
      err = std::max(err, std::abs(s.u.values(j, i) - want));
    }
  }
  EXPECT_LE(err, 1e-3);
}

TEST(Solve, ZeroRhsGivesZero) {
  EvoProblem p = example_heat(default_grid(1.0, 256), 16);
  Solution s = solve_autonomous(p.with_rhs(Signal(p.grid, p.dim())));
  EXPECT_EQ(s.u.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.causal_defect, 0.0);
  EXPECT_TRUE(norm_bound_check(p.with_rhs(Signal(p.grid, p.dim()))));
}

TEST(Solve, Linearity) {
  EvoProblem p = example_heat(default_grid(1.0, 512), 16);
  Signal f1 = p.rhs;
  Signal f2 = heat_rhs_with_profile(p, [](double t) { return smooth_bump(t, 1.0, 3.0); });
  const cplx alpha(0.7, -1.3);
  Signal lhs = solve_autonomous(p.with_rhs(alpha * f1 + f2)).u;
  Signal rhs = alpha * solve_autonomous(p.with_rhs(f1)).u + solve_autonomous(p.with_rhs(f2)).u;
  EXPECT_LE(rel(p, lhs, rhs), 1e-10);
}

TEST(Solve, OptionsAgree) {
  EvoProblem p = example_wave(default_grid(1.0, 256), 16);
  SolverOptions base;
  Solution ref = solve_autonomous(p, base);
  SolverOptions nosym = base;
  nosym.use_symmetry = false;
  EXPECT_LE(rel(p, solve_autonomous(p, nosym).u, ref.u), 1e-12);
  SolverOptions krylov = base;
  krylov.dense_threshold = 0;
  krylov.large = LargeSolver::gmres;
  EXPECT_LE(rel(p, solve_autonomous(p, krylov).u, ref.u), 1e-10);
  SolverOptions lu = base;
  lu.dense_threshold = 0;
  EXPECT_LE(rel(p, solve_autonomous(p, lu).u, ref.u), 1e-12);
  SolverOptions par = base;
  par.jobs = 3;
  // Frequencies are independent, so the thread count must not change a single bit.
  EXPECT_EQ((solve_autonomous(p, par).u.values - ref.u.values).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Causality, HeatEarlyRhs) {
  EvoProblem heat = example_heat(default_grid(), 64);
  EvoProblem p = heat.with_rhs(heat_rhs_with_profile(heat, [](double t) { return smooth_bump(t, 0.0, 2.0); }));
  EXPECT_LE(causality_test(p, 0.0), 1e-8);
  EXPECT_EQ(causality_test(p.with_rhs(Signal(p.grid, p.dim())), 0.0), 0.0);
}

TEST(Causality, AntiCausalNegativeControl) {
  TimeGrid g = default_grid();
  Signal f = Signal::sample(g, [](double t) { return cplx(smooth_bump(t, 0.0, 2.0)); });
  const double h = 1.0;
  auto advance = [h](const Signal& u) { return apply_multiplier(u, [h](cplx s) { return std::exp(h * s); }); };
  EXPECT_GE(causality_test(advance, f, 0.0), 0.1);
  auto delay = [h](const Signal& u) { return apply_multiplier(u, [h](cplx s) { return std::exp(-h * s); }); };
  EXPECT_LE(causality_test(delay, f, 0.0), 1e-8);
}

TEST(Causality, SupportStart) {
  TimeGrid g = default_grid();
  Signal f = Signal::sample(g, [](double t) { return cplx(indicator(t, 1.0, 2.0)); });
  EXPECT_NEAR(support_start(f), 1.0 - g.dt, 1e-12);
  EXPECT_EQ(support_start(Signal(g, 1)), g.t_end());
  EXPECT_EQ(support_start(Signal::sample(g, [](double) { return cplx(1.0); })), g.t0);
}

TEST(NuIndependence, HeatAndEdgeCases) {
  EvoProblem p = example_heat(default_grid(), 64);
  EXPECT_LE(nu_independence_test(p, 2.0), 1e-6);
  EXPECT_EQ(nu_independence_test(p, 1.0), 0.0);
}

TEST(NuIndependence, BelowThresholdIsSingular) {
  // u' - 2u = f is invertible only for nu > 2; at nu = 2 the zero frequency is singular.
  TimeGrid g = default_grid(3.0, 256);
  MaterialLaw law = build_affine(sparse_identity(1), sparse_identity(1) * cplx(-2.0), 1.0);
  Signal f = Signal::sample(g, [](double t) { return cplx(smooth_bump(t, 0.0, 4.0)); });
  EvoProblem p = EvoProblem::make(g, law, SpMatC(1, 1), f);
  try {
    nu_independence_test(p, 2.0);
    FAIL() << "expected SingularFrequency";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularFrequency);
  }
}

TEST(Oracle, FirstOrderAgainstSpectral) {
  // nu = 4 permits the shortest wrap-compliant window, so n_t = 64 is already a fine step.
  const double nu = 4.0, t_end = 4.0 + std::log(1e10) / nu + 0.5;
  std::vector<double> diffs;
  for (int n_t : {64, 128, 256}) {
    EvoProblem p = example_heat(TimeGrid::window(-1.0, t_end, n_t, nu), 16);
    Solution s = solve_autonomous(p), o = dense_oracle(p);
    EXPECT_LE(o.residual, 1e-8);
    auto [a, b] = p.grid.interior();
    diffs.push_back(sup_diff_on(s.u, o.u, a, b) / sup_norm_on(s.u, a, b));
  }
  for (size_t i = 1; i < diffs.size(); ++i) {
    double order = std::log2(diffs[i - 1] / diffs[i]);
    EXPECT_GE(order, 0.8);
    EXPECT_LE(order, 1.2);
  }
}

TEST(Oracle, OdeClosedFormAtCoarseStep) {
  // Backward Euler error for u' + u = H is about e^{-t} (dt/2) |1 - t|, so the classical bound
  // (dt/2) sup|u''| = dt/2 is what a step of 1e-2 can deliver.
  std::vector<double> errs;
  for (double dt : {0.01, 0.005}) {
    TimeGrid g = TimeGrid::make(-1.0, dt, 1024, 1.0);
    Solution o = dense_oracle(example_ode(g, Forcing::heaviside));
    Signal want = Signal::sample(g, [](double t) { return cplx(t > 0 ? 1.0 - std::exp(-t) : 0.0); });
    errs.push_back(sup_diff_on(o.u, want, g.t0, g.t_end()));
    EXPECT_LE(errs.back(), 0.5 * dt) << dt;
  }
  EXPECT_NEAR(std::log2(errs[0] / errs[1]), 1.0, 0.05);
}

TEST(Oracle, RejectsGeneralLawsAndZeroRhs) {
  EvoProblem frac = example_fractional(default_grid(1.0, 256), 8);
  EXPECT_THROW(dense_oracle(frac), Error);
  EvoProblem heat = example_heat(default_grid(1.0, 256), 8);
  Solution z = dense_oracle(heat.with_rhs(Signal(heat.grid, heat.dim())));
  EXPECT_EQ(z.u.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(dense_oracle(example_heat(default_grid(1.0, 2048), 64)), Error);
}

TEST(NormBound, HeatAndScaledLaw) {
  EvoProblem p = example_heat(default_grid(), 64);
  EXPECT_TRUE(norm_bound_check(p));
  Solution s = solve_autonomous(p);
  EXPECT_LE(norm_ratio(p, s), 1.0 + 1e-6);
  // The heat law at r = 1 has c_est about 1/2, giving the looser factor 2.
  double c_half = check_positivity(p.law, 1.0).c_est;
  EXPECT_NEAR(c_half, 0.5, 0.05);
  EXPECT_LE(state_norm(p, s.u), (1.0 / c_half) * state_norm(p, p.rhs) * (1 + 1e-6));
  EvoProblem scaled = EvoProblem::make(p.grid, p.law.scaled(10.0), p.A, p.rhs, p.quad, "scaled");
  EXPECT_NEAR(scaled.positivity.c_est / p.positivity.c_est, 10.0, 1e-9);
  EXPECT_TRUE(norm_bound_check(scaled));
  EXPECT_LT(state_norm(scaled, solve_autonomous(scaled).u), state_norm(p, s.u));
}

TEST(Energy, WaveBalance) {
  EvoProblem p = example_wave(default_grid(), 64);
  Solution s = solve_autonomous(p);
  const TimeGrid& g = p.grid;
  auto energy = [&](int j) { return (p.quad.array() * s.u.at(j).array().abs2()).sum(); };
  auto power = [&](int j) { return 2.0 * (p.quad.array() * (p.rhs.at(j).conjugate().array() * s.u.at(j).array())).sum().real(); };
  // E(b) - E(a) = int_a^b 2 Re <f, u> dt over [-1, 7] (an even number of steps).
  const int ja = static_cast<int>(std::lround((-1.0 - g.t0) / g.dt)), jb = static_cast<int>(std::lround((7.0 - g.t0) / g.dt));
  std::vector<double> pw;
  for (int j = ja; j <= jb; ++j) pw.push_back(power(j));
  double e_max = 0.0;
  for (int j = ja; j <= jb; ++j) e_max = std::max(e_max, energy(j));
  const double span = g.t(jb) - g.t(ja);
  EXPECT_LE(std::abs(energy(jb) - energy(ja) - simpson_nodes(pw, g.dt)), 1e-6 * span * e_max);
  // Force-free tail: the energy is conserved.
  const int jc = static_cast<int>(std::lround((4.5 - g.t0) / g.dt));
  EXPECT_LE(std::abs(energy(jb) - energy(jc)), 1e-6 * (g.t(jb) - g.t(jc)) * e_max);
}

TEST(Examples, ResidualAndCausalityAll) {
  TimeGrid g = default_grid();
  for (const std::string& name : example_names()) {
    EvoProblem p = make_example(name, g);
    Solution s = solve_autonomous(p);
    EXPECT_LE(s.residual, 1e-8) << name;
    EXPECT_LE(s.causal_defect, 1e-8) << name;
    EXPECT_TRUE(p.positivity.pass) << name;
  }
}

TEST(Problem, ShapeValidation) {
  TimeGrid g = default_grid(1.0, 256);
  MaterialLaw law = build_heat(1.0, 2, 3);
  EXPECT_THROW(EvoProblem::make(g, law, SpMatC(4, 4), Signal(g, 5)), Error);
  EXPECT_THROW(EvoProblem::make(g, law, SpMatC(5, 5), Signal(g, 4)), Error);
  EXPECT_THROW(EvoProblem::make(g, law, SpMatC(5, 5), Signal(default_grid(1.0, 512), 5)), Error);
  EXPECT_NO_THROW(EvoProblem::make(g, law, SpMatC(5, 5), Signal(g, 5)));
}
