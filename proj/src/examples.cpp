#include "evokit/examples.hpp"

#include <cmath>

#include "evokit/error.hpp"
#include "evokit/material_law.hpp"
#include "evokit/profiles.hpp"
#include "evokit/spatial_ops.hpp"

namespace evokit {

namespace {

constexpr double kBumpEnd = 4.0;

double forcing(Forcing f, double t) { return f == Forcing::heaviside ? heaviside(t) : smooth_bump(t, 0.0, kBumpEnd); }

double overlap(double a, double b, double lo, double hi) { return std::max(0.0, std::min(b, hi) - std::max(a, lo)); }

// First-variant state: interior nodes then cells of a Dirichlet pair on [x0, x0 + length].
struct Staggered {
  OperatorPair pair;
  BlockSkew bs;
  double x0 = 0.0, h = 0.0;
  // Control volume of DOF k.
  std::pair<double, double> volume(int k) const {
    if (k < bs.n_first) {
      double x = x0 + (k + 1) * h;
      return {x - 0.5 * h, x + 0.5 * h};
    }
    double a = x0 + (k - bs.n_first) * h;
    return {a, a + h};
  }
  double position(int k) const {
    auto [a, b] = volume(k);
    return 0.5 * (a + b);
  }
};

Staggered staggered(int n_x, double x0, double length) {
  Staggered s;
  s.pair = grad_pair_1d(n_x + 1, length, Boundary::dirichlet);
  s.bs = block_skew(s.pair, BcSide::first);
  s.x0 = x0;
  s.h = length / n_x;
  return s;
}

Signal nodal_forcing(const TimeGrid& g, const Staggered& s, Forcing f, const std::function<double(double)>& prof) {
  const int d = s.bs.dim();
  Eigen::VectorXd shape = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < s.bs.n_first; ++k) shape[k] = prof(s.position(k));
  return Signal::sample(g, d, [&](double t) { return Eigen::VectorXcd((forcing(f, t) * shape).cast<cplx>()); });
}

double law_radius(const TimeGrid& g) { return 1.0 / g.nu; }

}  // namespace

TimeGrid default_grid(double nu, int n_t) { return TimeGrid::window(-4.0, 28.0, n_t, nu); }

EvoProblem example_ode(const TimeGrid& g, Forcing f) {
  MaterialLaw law = build_affine(sparse_identity(1), sparse_identity(1), law_radius(g));
  Signal rhs = Signal::sample(g, [&](double t) { return cplx(forcing(f, t)); });
  return EvoProblem::make(g, law, SpMatC(1, 1), rhs, Eigen::VectorXd::Ones(1), "ode");
}

EvoProblem example_heat(const TimeGrid& g, int n_x, Forcing f, double kappa) {
  Staggered s = staggered(n_x, 0.0, M_PI);
  MaterialLaw law = build_heat(kappa, s.bs.n_first, s.bs.n_second, law_radius(g));
  Signal rhs = nodal_forcing(g, s, f, [](double x) { return std::sin(x); });
  return EvoProblem::make(g, law, to_complex(s.bs.A), rhs, s.bs.quad, "heat");
}

EvoProblem example_wave(const TimeGrid& g, int n_x) {
  Staggered s = staggered(n_x, 0.0, 1.0);
  const int d = s.bs.dim();
  MaterialLaw law = build_affine(sparse_identity(d), SpMatC(d, d), law_radius(g));
  Signal rhs = nodal_forcing(g, s, Forcing::bump, [](double x) { return std::exp(-std::pow((x - 0.5) / 0.1, 2)); });
  return EvoProblem::make(g, law, to_complex(s.bs.A), rhs, s.bs.quad, "wave");
}

EvoProblem example_eddy_current(const TimeGrid& g, int n) {
  OperatorPair pair = curl_pair_3d(n);
  BlockSkew bs = block_skew(pair, BcSide::first);
  const int ne = bs.n_first, nf = bs.n_second, d = bs.dim();
  SpMatC eps(ne, ne);
  MaterialLaw law = build_maxwell(eps, sparse_identity(nf), sparse_identity(ne), law_radius(g));
  // Current density along interior edges, weighted by a smooth profile of the DOF index.
  Eigen::VectorXd shape = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < ne; ++k) shape[k] = std::sin(M_PI * (k + 0.5) / ne);
  Signal rhs = Signal::sample(g, d, [&](double t) {
    return Eigen::VectorXcd((smooth_bump(t, 0.0, kBumpEnd) * shape).cast<cplx>());
  });
  return EvoProblem::make(g, law, to_complex(bs.A), rhs, bs.quad, "eddy_current");
}

EvoProblem example_fractional(const TimeGrid& g, int n_x, double alpha) {
  Staggered s = staggered(n_x, 0.0, 1.0);
  const int d = s.bs.dim();
  Eigen::VectorXcd stress = Eigen::VectorXcd::Zero(d);
  stress.tail(s.bs.n_second).setOnes();
  MaterialLaw law = build_fractional(sparse_identity(d), {{alpha, diag_sparse(stress)}}, SpMatC(d, d), law_radius(g));
  Signal rhs = nodal_forcing(g, s, Forcing::bump, [](double x) { return std::sin(M_PI * x); });
  return EvoProblem::make(g, law, to_complex(s.bs.A), rhs, s.bs.quad, "fractional");
}

EvoProblem example_integro(const TimeGrid& g, int n_x) {
  Staggered s = staggered(n_x, 0.0, 1.0);
  Kernel k = Kernel::scalar(1.0 / 64.0, 64 * 40, [](double t) { return 0.5 * std::exp(-t); });
  MaterialLaw law = build_integro(k, 1.0, law_radius(g), s.bs.n_first, s.bs.n_second);
  Signal rhs = nodal_forcing(g, s, Forcing::bump, [](double x) { return std::sin(M_PI * x); });
  return EvoProblem::make(g, law, to_complex(s.bs.A), rhs, s.bs.quad, "integro");
}

EvoProblem example_toy_mixed(const TimeGrid& g, int n_x) {
  Staggered s = staggered(n_x, 0.0, 1.0);
  const int d = s.bs.dim();
  // eta on p: 1 on [0, 2/3); alpha on s: 1 on [0, 1/3).
  Eigen::VectorXcd m0(d), m1(d);
  for (int k = 0; k < d; ++k) {
    auto [a, b] = s.volume(k);
    double v = k < s.bs.n_first ? overlap(a, b, 0.0, 2.0 / 3.0) / (b - a) : overlap(a, b, 0.0, 1.0 / 3.0) / (b - a);
    m0[k] = v;
    m1[k] = 1.0 - v;
  }
  MaterialLaw law = build_affine(diag_sparse(m0), diag_sparse(m1), law_radius(g));
  Signal rhs = nodal_forcing(g, s, Forcing::bump, [](double x) { return std::sin(M_PI * x); });
  return EvoProblem::make(g, law, to_complex(s.bs.A), rhs, s.bs.quad, "toy_mixed");
}

std::vector<std::string> example_names() {
  return {"heat", "wave", "eddy_current", "fractional", "integro", "toy_mixed"};
}

EvoProblem make_example(const std::string& name, const TimeGrid& g, int n_x) {
  if (name == "ode") return example_ode(g);
  if (name == "heat") return example_heat(g, n_x > 0 ? n_x : 64);
  if (name == "wave") return example_wave(g, n_x > 0 ? n_x : 64);
  if (name == "eddy_current") return example_eddy_current(g, n_x > 0 ? n_x : 4);
  if (name == "fractional") return example_fractional(g, n_x > 0 ? n_x : 32);
  if (name == "integro") return example_integro(g, n_x > 0 ? n_x : 32);
  if (name == "toy_mixed") return example_toy_mixed(g, n_x > 0 ? n_x : 48);
  fail(ErrorCode::Validation, "unknown example '" + name + "'");
}

double ramp(double t) { return t <= 0.0 ? 0.0 : (t <= 1.0 ? t : 1.0); }

MixedTypeSetup mixed_type_ramp(int n_x, double L, double eps, double dt, double t0, double t_end, double nu) {
  if (!(eps > 0.0 && eps < L)) fail(ErrorCode::Validation, "need 0 < eps < L");
  Staggered s = staggered(n_x, -L, 2.0 * L);
  const int d = s.bs.dim(), nu_dofs = s.bs.n_first;
  // theta: fraction of the control volume in ]-eps, 0[ (u) or ]-eps, eps[ (v).
  Eigen::VectorXd theta(d);
  MixedTypeSetup m;
  for (int k = 0; k < d; ++k) {
    auto [a, b] = s.volume(k);
    theta[k] = overlap(a, b, -eps, k < nu_dofs ? 0.0 : eps) / (b - a);
    if (a >= -eps && b <= 0.0) m.elliptic_dofs.push_back(k);
  }
  auto diag = [d](const Eigen::VectorXd& v) {
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < d; ++i)
      if (v[i] != 0.0) t.emplace_back(i, i, v[i]);
    SpMat M(d, d);
    M.setFromTriplets(t.begin(), t.end());
    return M;
  };
  const Eigen::VectorXd outside = Eigen::VectorXd::Ones(d) - theta;
  m.law.dim = d;
  m.law.lip_M0 = 1.0;
  m.law.M0 = [=](double t) { return diag(ramp(t) * outside); };
  m.law.M1 = [=](double t) { return t < 0.0 ? diag(Eigen::VectorXd::Ones(d)) : diag(theta); };
  // [[0, -d/dx], [-d/dx, 0]]: the negated first-variant block operator.
  m.A = -s.bs.A;
  m.quad = s.bs.quad;
  m.n_u = nu_dofs;
  m.eps = eps;
  const int n = static_cast<int>(std::lround((t_end - t0) / dt));
  const TimeGrid g = TimeGrid::make(t0, dt, n, nu);
  // (d/dt)^{-1} f as a smooth pulse centred in the hyperbolic region x > eps.
  Eigen::VectorXd shape = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < nu_dofs; ++k) shape[k] = std::exp(-std::pow((s.position(k) - 1.0) / 0.3, 2));
  m.rhs = Signal::sample(g, d, [&](double t) {
    return Eigen::VectorXcd((smooth_bump(t, -0.5, 1.5) * shape).cast<cplx>());
  });
  return m;
}

double mixed_type_posdef_closed_form(double t, double nu) {
  if (t <= 0.0) return 1.0;
  if (t <= 1.0) return std::min(0.5 + nu * t, 1.0);
  return std::min(nu, 1.0);
}

}  // namespace evokit
