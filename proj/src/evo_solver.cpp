#include "evokit/evo_solver.hpp"

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>
#include <algorithm>
#include <cmath>
#include <thread>

#include "backward_euler.hpp"
#include "evokit/error.hpp"

namespace evokit {

namespace {

SpMat real_part(const SpMatC& m) { return m.real(); }

// Groups DOFs into independent blocks of the per-frequency systems and solves them.
class FrequencySolver {
 public:
  FrequencySolver(const SpMatC& pattern, const SolverOptions& opt) : opt_(opt) {
    comps_ = components(pattern);
    const int d = static_cast<int>(pattern.rows());
    comp_of_.assign(d, -1);
    local_.assign(d, -1);
    for (int c = 0; c < static_cast<int>(comps_.size()); ++c)
      for (int i = 0; i < static_cast<int>(comps_[c].size()); ++i) {
        comp_of_[comps_[c][i]] = c;
        local_[comps_[c][i]] = i;
      }
  }

  Eigen::VectorXcd solve(const SpMatC& S, const Eigen::VectorXcd& b) const {
    const int nc = static_cast<int>(comps_.size());
    std::vector<Eigen::MatrixXcd> dense(nc);
    std::vector<std::vector<Eigen::Triplet<cplx>>> trip(nc);
    for (int c = 0; c < nc; ++c) {
      int m = static_cast<int>(comps_[c].size());
      if (m <= opt_.dense_threshold) dense[c] = Eigen::MatrixXcd::Zero(m, m);
    }
    for (int k = 0; k < S.outerSize(); ++k)
      for (SpMatC::InnerIterator it(S, k); it; ++it) {
        int r = static_cast<int>(it.row()), col = static_cast<int>(it.col());
        int c = comp_of_[r];
        if (c != comp_of_[col]) fail(ErrorCode::Validation, "frequency system couples separate components");
        if (dense[c].size() > 0)
          dense[c](local_[r], local_[col]) += it.value();
        else
          trip[c].emplace_back(local_[r], local_[col], it.value());
      }
    Eigen::VectorXcd x(b.size());
    for (int c = 0; c < nc; ++c) {
      const auto& idx = comps_[c];
      const int m = static_cast<int>(idx.size());
      Eigen::VectorXcd bl(m);
      for (int i = 0; i < m; ++i) bl[i] = b[idx[i]];
      Eigen::VectorXcd xl;
      if (m <= opt_.dense_threshold) {
        if (m == 1) {
          cplx a = dense[c](0, 0);
          if (a == 0.0) fail(ErrorCode::SingularFrequency, "per-frequency system is singular");
          xl = bl / a;
        } else {
          Eigen::PartialPivLU<Eigen::MatrixXcd> lu(dense[c]);
          if (!(lu.rcond() >= kSingularRcond))
            fail(ErrorCode::SingularFrequency, "per-frequency system is numerically singular");
          xl = lu.solve(bl);
        }
      } else {
        SpMatC blk(m, m);
        blk.setFromTriplets(trip[c].begin(), trip[c].end());
        blk.makeCompressed();
        xl = large_solve(blk, bl);
      }
      for (int i = 0; i < m; ++i) x[idx[i]] = xl[i];
    }
    return x;
  }

 private:
  Eigen::VectorXcd large_solve(const SpMatC& blk, const Eigen::VectorXcd& b) const {
    Eigen::VectorXcd x;
    if (opt_.large == LargeSolver::gmres) {
      Eigen::GMRES<SpMatC, Eigen::DiagonalPreconditioner<cplx>> gm;
      gm.setTolerance(opt_.gmres_tol);
      gm.setMaxIterations(opt_.gmres_max_iter);
      gm.set_restart(200);
      gm.compute(blk);
      x = gm.solve(b);
      if (gm.info() != Eigen::Success)
        fail(ErrorCode::SingularFrequency, "Krylov solve did not converge at a frequency");
    } else {
      Eigen::SparseLU<SpMatC> lu;
      lu.compute(blk);
      if (lu.info() != Eigen::Success)
        fail(ErrorCode::SingularFrequency, "per-frequency system is numerically singular");
      x = lu.solve(b);
    }
    double nb = b.norm();
    double res = (blk * x - b).norm();
    if (!x.allFinite() || res > 1e-8 * std::max(nb, 1e-300) + 1e-300)
      fail(ErrorCode::SingularFrequency, "per-frequency solve is inaccurate (ill-conditioned system)");
    return x;
  }

  SolverOptions opt_;
  std::vector<std::vector<int>> comps_;
  std::vector<int> comp_of_, local_;
};

SpMatC frequency_matrix(const EvoProblem& p, cplx s) {
  SpMatC m = p.law.eval_sparse(1.0 / s);
  return SpMatC(s * m + p.A);
}

bool real_problem(const EvoProblem& p) {
  if (!sparse_is_real(p.A)) return false;
  if (p.rhs.values.imag().cwiseAbs().maxCoeff() != 0.0) return false;
  const double zr = 0.5 / p.nu();
  if (!sparse_is_real(p.law.eval_sparse(zr))) return false;
  return true;
}

}  // namespace

EvoProblem EvoProblem::make(const TimeGrid& grid, MaterialLaw law, SpMatC A, Signal rhs,
                            Eigen::VectorXd quad, std::string name) {
  EvoProblem p;
  p.grid = grid;
  p.law = std::move(law);
  p.A = std::move(A);
  p.rhs = std::move(rhs);
  p.name = std::move(name);
  const int d = p.law.dim;
  if (p.A.rows() != d || p.A.cols() != d) fail(ErrorCode::ShapeMismatch, "spatial operator does not match the law");
  if (p.rhs.dim() != d) fail(ErrorCode::ShapeMismatch, "right-hand side does not match the law");
  if (!p.rhs.grid.same_nodes(grid)) fail(ErrorCode::ShapeMismatch, "right-hand side lives on another grid");
  p.rhs.grid = grid;
  p.quad = quad.size() == 0 ? Eigen::VectorXd::Ones(d) : std::move(quad);
  if (p.quad.size() != d || (p.quad.array() <= 0.0).any())
    fail(ErrorCode::ShapeMismatch, "quadrature weights must be positive, one per DOF");
  if (!(p.law.r > 0.5 / grid.nu * (1.0 - 1e-12)))
    fail(ErrorCode::Validation, "nu must exceed 1/(2r) for the law's disc");
  p.positivity = check_positivity(p.law, 0.5 / grid.nu);
  return p;
}

EvoProblem EvoProblem::with_nu(double nu2) const {
  TimeGrid g = grid.with_nu(nu2);
  Signal f(g, rhs.values);
  return make(g, law, A, f, quad, name);
}

EvoProblem EvoProblem::with_rhs(Signal rhs2) const {
  EvoProblem p = *this;
  if (rhs2.dim() != dim() || !rhs2.grid.same_nodes(grid)) fail(ErrorCode::ShapeMismatch, "replacement rhs shape");
  rhs2.grid = grid;
  p.rhs = std::move(rhs2);
  return p;
}

double support_start(const Signal& f) {
  double mx = f.values.cwiseAbs().maxCoeff();
  if (mx == 0.0) return f.grid.t_end();
  int j = 0;
  while (j < f.n() && f.values.row(j).cwiseAbs().maxCoeff() <= 1e-14 * mx) ++j;
  return j == 0 ? f.grid.t0 : f.grid.t(j - 1);
}

double causal_defect(const Signal& u, double a) {
  double total = weighted_norm(u);
  if (total == 0.0) return 0.0;
  return weighted_norm_on(u, -std::numeric_limits<double>::infinity(), a) / total;
}

Solution solve_autonomous(const EvoProblem& p, const SolverOptions& opt) {
  const TimeGrid& g = p.grid;
  if (opt.check_wrap && wrap_margin(p.rhs) < required_margin())
    fail(ErrorCode::WrapMargin, "right-hand side violates the wrap margin on this window");
  Spectrum F = fourier_laplace(p.rhs);
  Spectrum U = F;
  U.values.setZero();

  const bool sym = opt.use_symmetry && real_problem(p);
  SpMatC pattern = SpMatC(frequency_matrix(p, g.s(0))) + SpMatC(frequency_matrix(p, g.s(1)));
  pattern += p.A;
  const FrequencySolver solver(pattern, opt);

  std::vector<int> ks;
  for (int k = 0; k < g.n; ++k)
    if (!sym || k <= g.n / 2) ks.push_back(k);
  std::vector<double> res_num(ks.size(), 0.0);
  const double f_norm2 = F.values.squaredNorm();

  auto work = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      int k = ks[i];
      Eigen::VectorXcd b = F.values.row(k).transpose();
      SpMatC S = frequency_matrix(p, g.s(k));
      Eigen::VectorXcd x = solver.solve(S, b);
      U.values.row(k) = x.transpose();
      res_num[i] = (S * x - b).squaredNorm();
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(ks.size())));
  if (jobs == 1) {
    work(0, ks.size());
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(jobs);
    const size_t chunk = (ks.size() + jobs - 1) / jobs;
    for (int t = 0; t < jobs; ++t) {
      size_t b = t * chunk, e = std::min(ks.size(), b + chunk);
      pool.emplace_back([&, t, b, e] {
        try {
          work(b, e);
        } catch (...) {
          errs[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }
  double res2 = 0.0;
  for (size_t i = 0; i < ks.size(); ++i) {
    int k = ks[i];
    double w = (sym && k != 0 && k != g.n / 2) ? 2.0 : 1.0;
    res2 += w * res_num[i];
  }
  if (sym)
    for (int k = g.n / 2 + 1; k < g.n; ++k) U.values.row(k) = U.values.row(g.n - k).conjugate();

  Solution sol;
  sol.u = inv_fourier_laplace(U);
  sol.residual = f_norm2 > 0.0 ? std::sqrt(res2 / f_norm2) : std::sqrt(res2);
  sol.causal_time = support_start(p.rhs);
  sol.causal_defect = sol.causal_time > g.t0 ? causal_defect(sol.u, sol.causal_time) : 0.0;
  return sol;
}

double causality_test(const EvoProblem& p, double a, const SolverOptions& opt) {
  Solution s = solve_autonomous(p, opt);
  return causal_defect(s.u, a);
}

double causality_test(const std::function<Signal(const Signal&)>& op, const Signal& rhs, double a) {
  return causal_defect(op(rhs), a);
}

double nu_independence_test(const EvoProblem& p, double nu2, const SolverOptions& opt) {
  Solution a = solve_autonomous(p, opt);
  if (nu2 == p.nu()) return 0.0;
  Solution b = solve_autonomous(p.with_nu(nu2), opt);
  auto [lo, hi] = p.grid.interior();
  double scale = sup_norm_on(a.u, lo, hi);
  double diff = sup_diff_on(a.u, b.u, lo, hi);
  return scale > 0.0 ? diff / scale : diff;
}

std::pair<SpMatC, SpMatC> affine_parts(const MaterialLaw& law) {
  const double r = law.r;
  const cplx z1(0.5 * r, 0.0), z2(r, 0.0), z3(0.5 * r, 0.25 * r);
  SpMatC m_1 = law.eval_sparse(z1), m_2 = law.eval_sparse(z2), m_3 = law.eval_sparse(z3);
  SpMatC m1 = SpMatC((m_2 - m_1) * (1.0 / (z2 - z1)));
  SpMatC m0 = SpMatC(m_1 - z1 * m1);
  SpMatC pred = SpMatC(m0 + z3 * m1);
  SpMatC diff = SpMatC(pred - m_3);
  double scale = std::max({1.0, norm_bound(m0), norm_bound(m1)});
  if (norm_bound(diff) > 1e-10 * scale) fail(ErrorCode::UnsupportedLaw, "law is not of the affine form M0 + z M1");
  m0.prune(cplx(0.0), 1e-14);
  m1.prune(cplx(0.0), 1e-14);
  return {m0, m1};
}

Solution dense_oracle(const EvoProblem& p) {
  const int d = p.dim(), n = p.grid.n;
  if (static_cast<long>(n) * d > kOracleMaxSize) fail(ErrorCode::SizeExceeded, "space-time system too large for the oracle");
  auto [m0c, m1c] = affine_parts(p.law);
  if (!sparse_is_real(m0c) || !sparse_is_real(m1c) || !sparse_is_real(p.A))
    fail(ErrorCode::UnsupportedLaw, "oracle supports real coefficients only");
  const double dt = p.grid.dt;
  const detail::RSp m0_dt = detail::over_dt(real_part(m0c), dt);
  const detail::RSp S = detail::step_matrix(m0_dt, real_part(m1c), real_part(p.A));

  // Global block lower-bidiagonal system: S on the diagonal, -M0/dt below it.
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < n; ++k) {
    for (int c = 0; c < S.outerSize(); ++c)
      for (detail::RSp::InnerIterator it(S, c); it; ++it)
        trip.emplace_back(k * d + it.row(), k * d + it.col(), it.value());
    if (k > 0)
      for (int c = 0; c < m0_dt.outerSize(); ++c)
        for (detail::RSp::InnerIterator it(m0_dt, c); it; ++it)
          trip.emplace_back(k * d + it.row(), (k - 1) * d + it.col(), -it.value());
  }
  detail::RSp K(n * d, n * d);
  K.setFromTriplets(trip.begin(), trip.end());

  // Block forward substitution on the assembled system, diagonal blocks factored once.
  detail::StepFactor f;
  f.factor(K.block(0, 0, d, d));
  Signal u(p.grid, d);
  for (int part = 0; part < 2; ++part) {
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd fk = part == 0 ? Eigen::VectorXd(p.rhs.values.row(k).real().transpose())
                                     : Eigen::VectorXd(p.rhs.values.row(k).imag().transpose());
      Eigen::VectorXd b = fk;
      if (k > 0) {
        detail::RSp lower = K.block(k * d, (k - 1) * d, d, d);
        b -= lower * prev;
      }
      Eigen::VectorXd x = f.solve(b);
      for (int i = 0; i < d; ++i) {
        if (part == 0)
          u.values(k, i) = cplx(x[i], 0.0);
        else
          u.values(k, i) += cplx(0.0, x[i]);
      }
      prev = x;
    }
  }
  Solution sol;
  sol.u = u;
  // Residual of the assembled system.
  Eigen::VectorXcd uu(n * d), ff(n * d);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < d; ++i) {
      uu[k * d + i] = u.values(k, i);
      ff[k * d + i] = p.rhs.values(k, i);
    }
  Eigen::VectorXcd r = K.cast<cplx>() * uu - ff;
  double nf = ff.norm();
  sol.residual = nf > 0.0 ? r.norm() / nf : r.norm();
  sol.causal_time = support_start(p.rhs);
  sol.causal_defect = sol.causal_time > p.grid.t0 ? causal_defect(u, sol.causal_time) : 0.0;
  return sol;
}

double state_norm(const EvoProblem& p, const Signal& u) {
  double acc = 0.0;
  for (int j = 0; j < u.n(); ++j) {
    double w = std::exp(-2.0 * u.grid.nu * u.grid.t(j));
    acc += w * (p.quad.array() * u.values.row(j).transpose().cwiseAbs2().array()).sum();
  }
  return std::sqrt(u.grid.dt * acc);
}

double norm_ratio(const EvoProblem& p, const Solution& s) {
  double nf = state_norm(p, p.rhs);
  if (nf == 0.0) return 0.0;
  return state_norm(p, s.u) * p.positivity.c_est / nf;
}

bool norm_bound_check(const EvoProblem& p, const SolverOptions& opt) {
  if (!(p.positivity.c_est > 0.0)) return false;
  double nf = state_norm(p, p.rhs);
  if (nf == 0.0) return true;
  Solution s = solve_autonomous(p, opt);
  return state_norm(p, s.u) <= (1.0 / p.positivity.c_est) * nf * (1.0 + 1e-6);
}

}  // namespace evokit
