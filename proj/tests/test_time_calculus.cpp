#include <gtest/gtest.h>

#include <cmath>

#include "evokit/examples.hpp"
#include "evokit/profiles.hpp"
#include "evokit/time_calculus.hpp"
#include "oracles.hpp"

using namespace evokit;

namespace {

// Fine grid for jump profiles; nodal errors near a jump are O(dt).
TimeGrid jump_grid(double nu = 1.0) { return TimeGrid::window(-4.0, 28.0, 16384, nu); }
// Nodes within this distance after a jump are excluded from closed-form sup checks.
constexpr double kJumpLayer = 0.25;

double rel(const Signal& a, const Signal& b) { return weighted_norm(a - b) / weighted_norm(b); }

Signal bump(const TimeGrid& g, double a, double b) {
  return Signal::sample(g, [=](double t) { return cplx(smooth_bump(t, a, b)); });
}

Signal random_smooth(const TimeGrid& g, std::mt19937& gen) {
  std::uniform_real_distribution<double> c(-1.0, 10.0), w(0.5, 3.0), amp(-1.0, 1.0);
  Signal u(g, 1);
  for (int k = 0; k < 5; ++k) {
    double a = c(gen), width = w(gen);
    cplx z(amp(gen), amp(gen));
    u = u + z * bump(g, a, a + width);
  }
  return u;
}

}  // namespace

TEST(Grid, ShapesAndFrequencies) {
  TimeGrid g = TimeGrid::window(-1.0, 3.0, 64, 1.5);
  EXPECT_DOUBLE_EQ(g.dt, 4.0 / 64);
  Signal u = Signal::sample(g, 3, [](double t) { return Eigen::VectorXcd::Constant(3, t); });
  EXPECT_EQ(u.values.rows(), 64);
  EXPECT_EQ(u.dim(), 3);
  EXPECT_NEAR(g.xi(1), 2.0 * oracle::kPi / 4.0, 1e-14);
  EXPECT_NEAR(g.xi(63), -2.0 * oracle::kPi / 4.0, 1e-14);
  EXPECT_EQ(g.s(0), cplx(1.5, 0.0));
  EXPECT_THROW(TimeGrid::make(0.0, 0.1, 100, 1.0), Error);
  EXPECT_THROW(TimeGrid::make(0.0, 0.1, 64, 0.0), Error);
}

TEST(FourierLaplace, RoundTripRandom) {
  TimeGrid g = TimeGrid::window(-2.0, 6.0, 512, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXcd v(g.n, 2);
    v.col(0) = oracle::random_vector(g.n, oracle::rng());
    v.col(1) = oracle::random_vector(g.n, oracle::rng());
    Signal u(g, v);
    Signal back = inv_fourier_laplace(fourier_laplace(u));
    EXPECT_LE(rel(back, u), 1e-12);
  }
}

TEST(FourierLaplace, SingleModeConcentrated) {
  TimeGrid g = TimeGrid::window(-2.0, 6.0, 256, 1.0);
  const int m = 5;
  Signal u = Signal::sample(g, [&](double t) { return std::exp(g.nu * t) * std::exp(cplx(0.0, g.xi(m) * t)); });
  Spectrum s = fourier_laplace(u);
  double peak = std::abs(s.values(m, 0)), other = 0.0;
  for (int k = 0; k < g.n; ++k)
    if (k != m) other = std::max(other, std::abs(s.values(k, 0)));
  EXPECT_LE(other, 1e-12 * peak);
}

TEST(FourierLaplace, PlancherelGaussian) {
  TimeGrid g = default_grid();
  const double c = 2.0;
  Signal u = Signal::sample(g, [&](double t) { return cplx(std::exp(-(t - c) * (t - c))); });
  Spectrum s = fourier_laplace(u);
  double spec = s.values.squaredNorm() / (2.0 * oracle::kPi) * (2.0 * oracle::kPi / (g.n * g.dt));
  // int e^{-2t} e^{-2(t-c)^2} dt = sqrt(pi/2) e^{1/2 - 2c}
  double exact = std::sqrt(oracle::kPi / 2.0) * std::exp(0.5 - 2.0 * c);
  EXPECT_NEAR(spec / exact, 1.0, 1e-10);
  EXPECT_NEAR(weighted_norm(u) * weighted_norm(u) / exact, 1.0, 1e-10);
}

TEST(Derive, InverseOfIntegrate) {
  TimeGrid g = default_grid();
  // f = d/dt e^{-(t-2)^2} has zero mean, so its antiderivative is the Gaussian itself.
  Signal gauss = Signal::sample(g, [](double t) { return cplx(std::exp(-(t - 2) * (t - 2))); });
  Signal f = Signal::sample(g, [](double t) { return cplx(-2.0 * (t - 2) * std::exp(-(t - 2) * (t - 2))); });
  EXPECT_LE(rel(integrate(f), gauss), 1e-10);
  EXPECT_LE(rel(derive(integrate(f)), f), 1e-10);
  EXPECT_LE(rel(integrate(derive(gauss)), gauss), 1e-10);
}

TEST(Derive, GaussianClosedForm) {
  TimeGrid g = default_grid();
  const double c = 2.0;
  Signal u = Signal::sample(g, [&](double t) { return cplx(std::exp(-(t - c) * (t - c))); });
  Signal want = Signal::sample(g, [&](double t) { return cplx(-2.0 * (t - c) * std::exp(-(t - c) * (t - c))); });
  auto [a, b] = g.interior();
  EXPECT_LE(sup_diff_on(derive(u), want, a, b), 1e-8);
}

TEST(Derive, RealPartEqualsNu) {
  for (double nu : {1.0, 2.0}) {
    TimeGrid g = default_grid(nu);
    Signal u = bump(g, 0.0, 3.0) + cplx(0.0, 0.5) * bump(g, 1.0, 4.0);
    double lhs = weighted_inner(derive(u), u).real();
    double rhs = nu * std::pow(weighted_norm(u), 2);
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-8) << "nu " << nu;
  }
}

TEST(Derive, StrictPositivityProperty) {
  TimeGrid g = default_grid(1.5);
  std::mt19937 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    Signal u = random_smooth(g, gen);
    double n2 = std::pow(weighted_norm(u), 2);
    EXPECT_GE(weighted_inner(derive(u), u).real(), (g.nu - 1e-8) * n2);
  }
}

TEST(Derive, RejectsEdgeSupport) {
  TimeGrid g = default_grid();
  Signal u = Signal::sample(g, [](double) { return cplx(1.0); });
  EXPECT_THROW(derive(u), Error);
}

TEST(Integrate, IndicatorClosedForm) {
  TimeGrid g = TimeGrid::window(-4.0, 12.0, 32768, 1.0);
  Signal f = Signal::sample(g, [](double t) { return cplx(indicator(t, 0.0, 1.0)); });
  Signal out = integrate(f);
  double err = 0.0;
  for (int j = 0; j < g.n; ++j) {
    double t = g.t(j);
    if (std::abs(t) < kJumpLayer || std::abs(t - 1.0) < kJumpLayer) continue;
    double want = t <= 0 ? 0.0 : (t <= 1 ? t : 1.0);
    err = std::max(err, std::abs(out.values(j, 0) - want));
  }
  EXPECT_LE(err, 1e-6);
  // At the jumps themselves the sampled indicator is ambiguous; the error is O(dt).
  EXPECT_LE(sup_diff_on(out, Signal::sample(g, [](double t) { return cplx(t <= 0 ? 0.0 : (t <= 1 ? t : 1.0)); }),
                        g.t0, g.t_end()),
            g.dt);
}

TEST(Integrate, CausalUnderFuturePerturbation) {
  TimeGrid g = TimeGrid::window(-4.0, 12.0, 4096, 1.0);
  Signal f = Signal::sample(g, [](double t) { return cplx(indicator(t, 0.0, 1.0)); });
  Signal f2 = f + bump(g, 2.5, 3.5);
  Signal a = integrate(f), b = integrate(f2);
  EXPECT_LE(sup_diff_on(a, b, g.t0, 2.0) / sup_norm_on(a, g.t0, 2.0), 1e-8);
}

TEST(Fractional, HalfPowersCompose) {
  TimeGrid g = default_grid();
  Signal u = Signal::sample(g, [](double t) { return cplx(std::exp(-2.0 * (t - 2) * (t - 2))); });
  EXPECT_LE(rel(fractional_power(fractional_power(u, 0.5), 0.5), derive(u)), 1e-10);
  EXPECT_LE(rel(fractional_power(fractional_power(u, -0.3), -0.4), fractional_power(u, -0.7)), 1e-10);
  EXPECT_LE(rel(fractional_power(u, -1.0), integrate(u)), 1e-10);
}

TEST(Fractional, HeavisideRiemannLiouville) {
  TimeGrid g = jump_grid();
  auto [a, b] = g.interior();
  for (double alpha : {0.3, 0.5, 0.75}) {
    Signal h = Signal::sample(g, [](double t) { return cplx(heaviside(t)); });
    Signal out = fractional_power(h, -alpha);
    double err_closed = 0.0, err_quad = 0.0;
    for (int j = 0; j < g.n; ++j) {
      double t = g.t(j);
      if (t < a + kJumpLayer || t > b) continue;
      // The substitution lands on s = 0 up to rounding at the upper end.
      double quad = oracle::rl_integral([](double s) { return s >= -1e-12 ? 1.0 : 0.0; }, alpha, t);
      err_quad = std::max(err_quad, std::abs(out.values(j, 0) - quad));
      err_closed = std::max(err_closed, std::abs(out.values(j, 0) - std::pow(t, alpha) / std::tgamma(alpha + 1)));
    }
    EXPECT_LE(err_quad, 1e-4) << alpha;
    EXPECT_LE(err_closed, 1e-4) << alpha;
  }
}

TEST(Fractional, InverseAmplificationBound) {
  std::mt19937 gen(11);
  for (double nu : {1.0, 2.0, 4.0}) {
    TimeGrid g = TimeGrid::window(-2.0, 6.0, 256, nu);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Signal u(g, Eigen::MatrixXcd(oracle::random_vector(g.n, gen)));
      u = (1.0 / weighted_norm(u)) * u;
      worst = std::max(worst, weighted_norm(fractional_power(u, -0.5, Guard::none)));
    }
    EXPECT_LE(worst, std::pow(nu, -0.5) + 1e-10) << nu;
  }
}

TEST(Translate, IndicatorShift) {
  TimeGrid g = default_grid();
  Signal f = Signal::sample(g, [](double t) { return cplx(indicator(t, 0.0, 1.0)); });
  Signal want = Signal::sample(g, [](double t) { return cplx(indicator(t, 1.0, 2.0)); });
  // Late nodes carry weighted round-off times e^{nu t}; compare where the weight is moderate.
  EXPECT_LE(sup_diff_on(translate(f, -1.0), want, g.t0, g.interior().second), 1e-8);
  EXPECT_LE(sup_diff_on(translate_shift(f, -1.0), want, g.t0, g.t_end()), 0.0);
}

TEST(Translate, TwoImplementationsAgree) {
  TimeGrid g = default_grid();
  std::mt19937 gen(3);
  for (int trial = 0; trial < 5; ++trial) {
    Signal u = random_smooth(g, gen);
    EXPECT_LE(rel(translate(u, -0.5), translate_shift(u, -0.5)), 1e-9);
    EXPECT_LE(rel(translate(u, 0.75), translate_shift(u, 0.75)), 1e-9);
  }
  // Delaying a late bump by 30 pushes it past the window end.
  EXPECT_THROW(translate(bump(g, 10.0, 12.0), -30.0), Error);
  EXPECT_THROW(translate(bump(g, 0.0, 1.0), -0.3 * g.dt), Error);
}

TEST(Convolve, ExponentialKernelHeaviside) {
  TimeGrid g = jump_grid();
  auto [a, b] = g.interior();
  Kernel k = Kernel::scalar(g.dt, static_cast<int>(40.0 / g.dt), [](double s) { return std::exp(-s); });
  Signal h = Signal::sample(g, [](double t) { return cplx(heaviside(t)); });
  Signal want = Signal::sample(g, [](double t) { return cplx(t > 0 ? 1.0 - std::exp(-t) : 0.0); });
  Signal out = convolve(k, h);
  EXPECT_LE(sup_diff_on(out, want, a + kJumpLayer, b), 1e-6);
  EXPECT_LE(sup_diff_on(out, want, g.t0, a - 0.5), 1e-12);
}

TEST(Convolve, MatchesDirectQuadrature) {
  TimeGrid g = default_grid();
  auto kf = [](double s) { return std::exp(-0.5 * s) * std::cos(s); };
  const int len = 1024;
  Kernel k = Kernel::scalar(g.dt, len, kf);
  Signal u = bump(g, 0.0, 3.0) + cplx(0.3, -0.2) * bump(g, 2.0, 6.0);
  std::vector<cplx> samples(u.values.data(), u.values.data() + g.n);
  std::vector<cplx> direct = oracle::direct_convolution(kf, samples, g.dt, len);
  Signal d(g, Eigen::Map<Eigen::VectorXcd>(direct.data(), g.n));
  EXPECT_LE(rel(convolve(k, u), d), 1e-6);
}

TEST(Convolve, NarrowBumpIsApproximateIdentity) {
  TimeGrid g = jump_grid();
  double prev = 1e300;
  for (double w : {0.2, 0.1, 0.05}) {
    auto shape = [w](double s) { return smooth_bump(s, 0.0, w); };
    Kernel k = Kernel::scalar(g.dt, static_cast<int>(w / g.dt) + 2, shape);
    double mass = k.laplace(cplx(0.0)).real()(0, 0);
    for (auto& m : k.samples) m /= mass;
    Signal u = Signal::sample(g, [](double t) { return cplx(std::exp(-t * t)); });
    double err = sup_diff_on(convolve(k, u), u, g.t0, g.t_end());
    // Centre of mass at w / 2 and |u'| <= sqrt(2/e).
    EXPECT_LE(err, w * std::sqrt(2.0 / std::exp(1.0)));
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Norm, IndicatorClosedForm) {
  // Squaring the midpoint value at the jumps costs O(dt), so this needs a fine step.
  TimeGrid g = TimeGrid::window(-1.0, 3.0, 32768, 1.0);
  Signal f = Signal::sample(g, [](double t) { return cplx(indicator(t, 0.0, 1.0)); });
  // (int_0^1 e^{-2t} dt)^{1/2}
  EXPECT_NEAR(weighted_norm(f), std::sqrt((1.0 - std::exp(-2.0)) / 2.0), 1e-4);
  EXPECT_NEAR(std::sqrt((1.0 - std::exp(-2.0)) / 2.0), 0.657520, 1e-6);
}

TEST(Causality, TruncationTestForCausalOperations) {
  TimeGrid g = default_grid();
  const double a = 3.0;
  Signal f = bump(g, 0.0, 2.0);
  Signal f2 = f + cplx(0.0, 2.0) * bump(g, 3.0, 5.0);
  Kernel k = Kernel::scalar(g.dt, 2048, [](double s) { return std::exp(-s) * (1.0 + s); });
  auto check = [&](const std::function<Signal(const Signal&)>& op, const char* name) {
    Signal x = op(f), y = op(f2);
    EXPECT_LE(sup_diff_on(x, y, g.t0, a), 1e-8 * sup_norm_on(x, g.t0, g.t_end())) << name;
  };
  check([](const Signal& s) { return integrate(s); }, "integrate");
  check([](const Signal& s) { return fractional_power(s, -0.5); }, "fractional");
  check([&](const Signal& s) { return convolve(k, s); }, "convolve");
  check([](const Signal& s) { return translate(s, -1.0); }, "translate");
}

TEST(Kernel, LaplaceOfExponential) {
  const double ds = 1.0 / 256;
  Kernel k = Kernel::scalar(ds, static_cast<int>(60.0 / ds), [](double s) { return std::exp(-s); });
  for (cplx s : {cplx(1.0, 0.0), cplx(1.0, 3.0), cplx(2.0, -1.0)}) {
    cplx want = 1.0 / (s + 1.0);
    // Trapezoidal error is O(ds^2 |s + 1|^2 / 12).
    EXPECT_LE(std::abs(k.laplace(s)(0, 0) - want), ds * ds * std::norm(s + 1.0));
  }
  EXPECT_NEAR(k.l1_weighted(0.0), 1.0, 1e-5);
}
