#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "evokit/homogenize.hpp"
#include "evokit/profiles.hpp"
#include "evokit/spatial_ops.hpp"
#include "oracles.hpp"

using namespace evokit;

namespace {

// Decreasing along n up to 10% relative noise.
void expect_decreasing(const std::vector<double>& v, const char* what) {
  for (size_t k = 1; k < v.size(); ++k) EXPECT_LE(v[k], 1.1 * v[k - 1]) << what << " at " << k;
}

std::vector<double> max_pairings(const WeakConvergenceReport& r) {
  std::vector<double> out;
  for (int k = 0; k < r.pairings.rows(); ++k) out.push_back(r.max_pairing(k));
  return out;
}

// Untruncated limit symbol 1 / <(1 + z a)^{-1}> of a two-valued table.
cplx limit_symbol_a1(cplx z) { return 1.0 / (0.5 / (1.0 + 0.5 * z) + 0.5 / (1.0 + z)); }

double time_indicator(double t) { return indicator(t, 0.0, 1.0); }

}  // namespace

TEST(Profile, WeakStarMeans) {
  EXPECT_EQ(weak_star_mean(profile_a1()), 0.75);
  EXPECT_EQ(weak_star_mean(profile_a1().reciprocal()), 1.5);
  EXPECT_EQ(weak_star_mean(profile_a2()), 0.75);
  EXPECT_NEAR(weak_star_mean(profile_a2().reciprocal()), 4.0 / 3.0, 1e-15);
  EXPECT_EQ(weak_star_mean(PeriodicProfile::constant(2.5)), 2.5);
  EXPECT_EQ(weak_star_mean(profile_from_name("const:0.3")), 0.3);
  // A callable is integrated by quadrature.
  PeriodicProfile c = PeriodicProfile::callable([](double x) { return 2.0 + std::sin(2.0 * oracle::kPi * x); });
  EXPECT_NEAR(weak_star_mean(c), 2.0, 1e-10);
  EXPECT_NEAR(c.lo, 1.0, 1e-5);
  EXPECT_NEAR(c.hi, 3.0, 1e-5);
}

TEST(Profile, MomentsAndAverages) {
  std::vector<double> b = moments(profile_a1(), 4);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_EQ(b[0], 0.75);
  EXPECT_EQ(b[1], 0.625);  // (1/2)(1/4 + 1)
  EXPECT_NEAR(b[2], 0.5 * (0.125 + 1.0), 1e-15);
  PeriodicProfile a = profile_a1();
  EXPECT_DOUBLE_EQ(a.average(0.0, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(a.average(0.25, 0.75), 0.75);
  EXPECT_DOUBLE_EQ(a.average(3.0, 7.0), 0.75);   // whole periods
  EXPECT_DOUBLE_EQ(a.average(-0.5, 0.0), 1.0);   // periodic extension
  EXPECT_DOUBLE_EQ(a(1.75), 1.0);
}

TEST(Profile, Validation) {
  EXPECT_THROW(PeriodicProfile::table({0, 0.5}, {1, 2}), Error);
  EXPECT_THROW(PeriodicProfile::table({0, 0.7, 0.5, 1}, {1, 2, 3}), Error);
  EXPECT_THROW(PeriodicProfile::table({0.1, 1}, {1}), Error);
  EXPECT_THROW(profile_from_name("a3"), Error);
  EXPECT_THROW(PeriodicProfile::table({0, 0.5, 1}, {-1, 1}).reciprocal(), Error);
}

TEST(TestFamily, SixteenFunctions) {
  EXPECT_EQ(test_family_names().size(), 16u);
  EXPECT_THROW(test_function(16, 0.5), Error);
}

TEST(EllipticHom, HarmonicMeanLimit) {
  // n = 1 is a single period and sits before the asymptotic regime; monotonicity starts at n = 2.
  std::vector<int> n_list;
  for (int n = 2; n <= 64; n *= 2) n_list.push_back(n);
  WeakConvergenceReport r = elliptic_hom_experiment(profile_a1(), [](double) { return 1.0; }, n_list);
  EXPECT_EQ(r.reference, 2.0 / 3.0);
  EXPECT_NEAR(r.effective_coefficient / (2.0 / 3.0), 1.0, 0.05);
  std::vector<double> mp = max_pairings(r);
  expect_decreasing(mp, "elliptic pairing");
  EXPECT_LE(mp.back(), 0.05);
  EXPECT_NEAR(r.rate_estimate, 1.0, 0.3);
}

TEST(EllipticHom, ConstantBaseIsExact) {
  WeakConvergenceReport r = elliptic_hom_experiment(PeriodicProfile::constant(1.7), [](double x) { return std::sin(3.0 * x); }, {1, 4, 16});
  EXPECT_NEAR(r.effective_coefficient, 1.7, 1e-12);
  for (double g : r.strong_gap) EXPECT_LE(g, 1e-10);
}

TEST(EllipticHom, ResolutionAndPositivity) {
  EllipticHomOptions coarse;
  coarse.n_x = 64;
  try {
    elliptic_hom_experiment(profile_a1(), [](double) { return 1.0; }, {1, 16}, coarse);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResolutionExceeded);
  }
  EXPECT_THROW(elliptic_hom_experiment(PeriodicProfile::table({0, 0.5, 1}, {-1, 1}), [](double) { return 1.0; }, {1}), Error);
  EXPECT_THROW(elliptic_hom_experiment(profile_a1(), [](double) { return 1.0; }, {4, 2}), Error);
}

TEST(OdeLimit, RegressionValueAndClosedForm) {
  HomLimit lim = ode_hom_limit(moments(profile_a1(), 8), 8, 4.0);
  const cplx z(0.125);
  const double got = lim.law.eval(z)(0, 0).real();
  EXPECT_NEAR(got, 1.09286, 1e-5);
  EXPECT_LE(std::abs(got - limit_symbol_a1(z)), lim.remainder);
  // The certified remainder holds across the disc.
  const double r = lim.law.r;
  for (int k = 0; k < 24; ++k) {
    cplx s = r + 0.95 * r * std::polar(1.0, 2.0 * oracle::kPi * k / 24.0);
    EXPECT_LE(std::abs(lim.law.eval(s)(0, 0) - limit_symbol_a1(s)), lim.remainder) << k;
  }
  EXPECT_LT(lim.q, kHomMaxQ);
}

TEST(OdeLimit, GeometricIdentity) {
  for (double c : {0.3, 1.0, -0.8}) {
    std::vector<double> b(60);
    for (int l = 0; l < 60; ++l) b[l] = std::pow(c, l + 1);
    HomLimit lim = ode_hom_limit(b, 60, 4.0);
    const double r = lim.law.r;
    for (int k = 0; k < 16; ++k) {
      cplx s = r + 0.9 * r * std::polar(1.0, 2.0 * oracle::kPi * k / 16.0);
      EXPECT_LE(std::abs(lim.law.eval(s)(0, 0) - (1.0 + c * s)), 1e-12) << c << " " << k;
    }
  }
}

TEST(OdeLimit, ZeroMomentsAndDivergence) {
  HomLimit zero = ode_hom_limit(std::vector<double>(8, 0.0), 8, 4.0);
  EXPECT_EQ(zero.law.eval(cplx(0.1, 0.05))(0, 0), cplx(1.0));
  EXPECT_EQ(zero.remainder, 0.0);
  try {
    ode_hom_limit(moments(PeriodicProfile::constant(5.0), 8), 8, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Divergence);
  }
}

TEST(OdeLimit, OddAndEvenFamiliesDiffer) {
  // a1 and the constant 3/4 share their mean but not their higher moments.
  HomLimit odd = ode_hom_limit(moments(profile_a1(), 8), 8, 4.0);
  HomLimit even = ode_hom_limit(moments(profile_a2(), 8), 8, 4.0);
  const cplx z(0.125);
  double diff = std::abs(odd.law.eval(z)(0, 0) - even.law.eval(z)(0, 0));
  EXPECT_NEAR(even.law.eval(z)(0, 0).real(), 1.0 + 0.75 * 0.125, 1e-6);
  EXPECT_GT(diff, 10.0 * (odd.remainder + even.remainder));
  EXPECT_GT(std::abs(weak_star_mean(profile_a1().reciprocal()) - weak_star_mean(profile_a2().reciprocal())), 0.1);
}

TEST(OdeHom, PairingsAgainstLimit) {
  WeakConvergenceReport r = ode_hom_experiment(profile_a1(), time_indicator, {1, 2, 4, 8, 16, 32, 64, 128}, 4.0);
  std::vector<double> mp = max_pairings(r);
  expect_decreasing(mp, "ode pairing");
  EXPECT_LE(mp.back(), 0.05);
  EXPECT_NEAR(r.effective_coefficient, 1.09286, 1e-5);
  EXPECT_EQ(r.reference, 0.75);
  // Weak, not strong: the strong gap stays away from zero.
  EXPECT_GE(r.strong_gap.back(), 0.01);
}

TEST(OdeHom, EvenFamilyTracksItsOwnLimit) {
  // The constant 3/4 family sits at its limit for every n, while its distance to the a1 limit
  // does not shrink.
  OdeHomOptions opt;
  opt.n_x = 256;
  WeakConvergenceReport r = ode_hom_experiment(profile_a2(), time_indicator, {1, 8, 32}, 4.0, opt);
  for (double g : r.strong_gap) EXPECT_LE(g, 1e-8);
  EXPECT_LE(r.pairings.maxCoeff(), 1e-8);
}

TEST(OdeHom, Preconditions) {
  EXPECT_THROW(ode_hom_experiment(profile_a1(), time_indicator, {1}, 2.0), Error);
  OdeHomOptions coarse;
  coarse.n_x = 64;
  try {
    ode_hom_experiment(profile_a1(), time_indicator, {1, 16}, 4.0, coarse);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResolutionExceeded);
  }
}

TEST(MixedHom, PairingsAndStrongGap) {
  WeakConvergenceReport r = mixed_hom_experiment({1, 2, 4, 8, 16, 32});
  std::vector<double> mp = max_pairings(r);
  expect_decreasing(mp, "mixed pairing");
  EXPECT_LE(mp.back(), 0.10);
  // The coupled 1D states converge strongly at about 1/n; the weak pairings decay faster.
  for (size_t k = 1; k < mp.size(); ++k) EXPECT_GE(r.strong_gap[k], 10.0 * mp[k]) << k;
  EXPECT_GT(r.strong_gap[4] / mp[4], r.strong_gap[1] / mp[1]);
  EXPECT_GE(r.strong_gap[0], 0.01);
  std::ostringstream os;
  write_report_csv(r, os);
  const std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(MixedHom, FirstIndexIsTheDirectSystem) {
  // Assemble the n = 1 system by hand: quarters of [0,1] for the two indicator patterns.
  MixedHomOptions opt;
  opt.n_x = 16;
  EvoProblem p = mixed_hom_problem(1, opt);
  const OperatorPair pair = grad_pair_1d(17, 1.0, Boundary::dirichlet);
  const BlockSkew bs = block_skew(pair, BcSide::first);
  const double h = 1.0 / 16;
  auto chi_u = [](double x) { return (x < 0.25 || (x >= 0.5 && x < 0.75)) ? 1.0 : 0.0; };
  auto chi_v = [](double x) { return (x < 0.25 || x >= 0.75) ? 1.0 : 0.0; };
  Eigen::VectorXcd m0(bs.dim()), m1(bs.dim());
  for (int k = 0; k < bs.dim(); ++k) {
    double v;
    if (k < bs.n_first) {
      // Dual cell [x_k - h/2, x_k + h/2] around node k + 1; split at the node.
      double xk = (k + 1) * h;
      v = 0.5 * (chi_u(xk - 0.25 * h) + chi_u(xk + 0.25 * h));
    } else {
      v = chi_v((k - bs.n_first + 0.5) * h);
    }
    m0[k] = v;
    m1[k] = 1.0 - v;
  }
  MaterialLaw law = build_affine(diag_sparse(m0), diag_sparse(m1), 1.0 / opt.nu);
  EvoProblem direct = EvoProblem::make(p.grid, law, to_complex(bs.A), p.rhs, bs.quad, "direct");
  Solution a = solve_autonomous(p), b = solve_autonomous(direct);
  EXPECT_LE((a.u.values - b.u.values).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + b.u.values.cwiseAbs().maxCoeff()));
  EXPECT_LE(a.residual, 1e-8);
}

TEST(MixedHom, Resolution) {
  MixedHomOptions opt;
  opt.n_x = 64;
  try {
    mixed_hom_experiment({1, 16}, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResolutionExceeded);
  }
  EXPECT_THROW(mixed_hom_problem(16, opt), Error);
}
