#include "evokit/stability.hpp"

#include <cmath>
#include <limits>

#include "evokit/error.hpp"
#include "evokit/evo_solver.hpp"
#include "evokit/profiles.hpp"
#include "evokit/spatial_ops.hpp"

namespace evokit {

namespace {

double overlap(double a, double b, std::pair<double, double> iv) {
  return std::max(0.0, std::min(b, iv.second) - std::max(a, iv.first));
}

void check_partition(const Partition& p) {
  auto ok = [](std::pair<double, double> iv) { return iv.first >= 0.0 && iv.second <= 1.0 && iv.second > iv.first; };
  if (!ok(p.omega0) || !ok(p.omega1)) fail(ErrorCode::Validation, "partition cells must be non-empty subintervals of [0,1]");
  if (overlap(p.omega0.first, p.omega0.second, p.omega1) > 0.0) fail(ErrorCode::Validation, "partition cells must be disjoint");
}

}  // namespace

DecayReport measure_decay(const Signal& u, double tail_start, double width, const Eigen::VectorXd& quad) {
  if (!(width > 0.0)) fail(ErrorCode::Validation, "window width must be positive");
  const TimeGrid& g = u.grid;
  const bool weighted = quad.size() == u.dim();
  if (quad.size() > 0 && !weighted) fail(ErrorCode::ShapeMismatch, "quadrature size does not match the signal");
  const int nw = static_cast<int>(std::floor((g.t_end() - tail_start) / width + 1e-9));
  DecayReport rep;
  rep.t_start = tail_start;
  rep.width = width;
  rep.windows = std::max(nw, 0);
  if (nw < kMinDecayWindows) fail(ErrorCode::TailTooShort, "tail holds fewer than 10 windows");
  std::vector<double> tw, ln;
  bool all_zero = true;
  for (int w = 0; w < nw; ++w) {
    const double a = tail_start + w * width, b = a + width;
    double acc = 0.0;
    for (int j = 0; j < g.n; ++j) {
      double t = g.t(j);
      if (t < a - 1e-12 || t >= b - 1e-12) continue;
      for (int i = 0; i < u.dim(); ++i) acc += (weighted ? quad[i] : 1.0) * std::norm(u.values(j, i));
    }
    double nrm = std::sqrt(g.dt * acc);
    if (nrm > 0.0) {
      all_zero = false;
      tw.push_back(a);
      ln.push_back(std::log(nrm));
    }
  }
  if (all_zero) {
    rep.exact_zero = true;
    rep.fitted_rate = std::numeric_limits<double>::infinity();
    rep.r2 = 1.0;
    return rep;
  }
  if (tw.size() < 2) {
    rep.fitted_rate = std::numeric_limits<double>::infinity();
    return rep;
  }
  const double m = static_cast<double>(tw.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < tw.size(); ++i) {
    mx += tw[i];
    my += ln[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < tw.size(); ++i) {
    sxy += (tw[i] - mx) * (ln[i] - my);
    sxx += (tw[i] - mx) * (tw[i] - mx);
    syy += (ln[i] - my) * (ln[i] - my);
  }
  const double slope = sxy / sxx;
  rep.fitted_rate = -slope;
  rep.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return rep;
}

ParaHyperSetup para_hyper_setup(double c, const Partition& part, const StabilityOptions& opt) {
  if (!(c > 0.0)) fail(ErrorCode::Validation, "damping c must be positive");
  check_partition(part);
  if (opt.n_x < 2) fail(ErrorCode::Validation, "need at least two cells");
  const OperatorPair pair = grad_pair_1d(opt.n_x + 1, 1.0, Boundary::neumann);
  const BlockSkew bs = block_skew(pair, BcSide::second);
  const int nv = bs.n_first, d = bs.dim();
  const double h = 1.0 / opt.n_x;
  std::vector<Eigen::Triplet<double>> t0, t1;
  for (int k = 0; k < d; ++k) {
    double a, b, m0;
    if (k < nv) {
      // Dual cell of node k, clipped to [0,1].
      a = std::max(0.0, (k - 0.5) * h);
      b = std::min(1.0, (k + 0.5) * h);
      m0 = (overlap(a, b, part.omega0) + overlap(a, b, part.omega1)) / (b - a);
    } else {
      a = (k - nv) * h;
      b = a + h;
      m0 = overlap(a, b, part.omega0) / h;
    }
    if (m0 != 0.0) t0.emplace_back(k, k, m0);
    t1.emplace_back(k, k, c);
  }
  SpMat M0(d, d), M1(d, d);
  M0.setFromTriplets(t0.begin(), t0.end());
  M1.setFromTriplets(t1.begin(), t1.end());
  ParaHyperSetup s;
  s.law = TimeVaryingLaw::constant(M0, M1);
  s.A = bs.A;
  s.quad = bs.quad;
  const int n = static_cast<int>(std::lround((opt.t_end - opt.t0) / opt.dt));
  const TimeGrid g = TimeGrid::make(opt.t0, opt.dt, n, 1.0);
  s.rhs = Signal::sample(g, d, [&](double t) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
    if (opt.zero_rhs) return v;
    const double bt = smooth_bump(t, 0.0, 1.0);
    for (int k = 0; k < nv; ++k) v[k] = bt * (1.0 + std::cos(M_PI * k * h));
    return v;
  });
  if (!opt.zero_rhs && opt.tail_start < 1.0) fail(ErrorCode::SupportEscape, "forcing support reaches into the tail");
  return s;
}

Signal para_hyper_solution(double c, const Partition& part, const StabilityOptions& opt, double h, bool with_delay) {
  ParaHyperSetup s = para_hyper_setup(c, part, opt);
  StepOptions so;
  // The delayed term enters as -u(t + h): its rate equation nu0 + e^{-nu0 h} = c, and c - 1 as h -> 0-.
  if (with_delay) so.delays.push_back({h, SpMat(-sparse_identity(s.law.dim).real())});
  return solve_nonauto(s.law, s.A, s.rhs, so).u;
}

DecayReport para_hyper_experiment(double c, const Partition& part, const StabilityOptions& opt) {
  ParaHyperSetup s = para_hyper_setup(c, part, opt);
  Signal u = solve_nonauto(s.law, s.A, s.rhs).u;
  DecayReport r = measure_decay(u, opt.tail_start, 1.0, s.quad);
  r.theoretical = c;
  return r;
}

double delay_rate(double c, double h) {
  if (!(h < 0.0)) fail(ErrorCode::Validation, "delay shift h must be negative");
  if (!(c > 1.0)) fail(ErrorCode::NoRoot, "nu + e^{-nu h} = c has no positive root for c <= 1");
  auto g = [&](double x) { return x + std::exp(-x * h) - c; };
  double lo = 0.0, hi = c;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

DecayReport delay_experiment(double c, double h, const Partition& part, const StabilityOptions& opt) {
  const double nu0 = delay_rate(c, h);
  Signal u = para_hyper_solution(c, part, opt, h, true);
  ParaHyperSetup s = para_hyper_setup(c, part, opt);
  DecayReport r = measure_decay(u, opt.tail_start, 1.0, s.quad);
  r.theoretical = nu0;
  return r;
}

}  // namespace evokit
