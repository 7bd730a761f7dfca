#include "evokit/time_stepper.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "backward_euler.hpp"

namespace evokit {

namespace {

using detail::RSp;

double sym_lambda_min(const SpMat& m) { return lambda_min_herm(to_complex(m)); }

bool is_real_signal(const Signal& f) {
  for (int j = 0; j < f.n(); ++j)
    for (int i = 0; i < f.dim(); ++i)
      if (f.values(j, i).imag() != 0.0) return false;
  return true;
}

void check_shape(const SpMat& m, int d, const char* what) {
  if (m.rows() != d || m.cols() != d) fail(ErrorCode::ShapeMismatch, std::string(what) + " has the wrong shape");
}

// Grid indices used for the positivity precondition.
std::vector<double> check_times(const TimeGrid& g) {
  std::vector<double> t;
  const int n = g.n, m = std::min(n, 257);
  for (int i = 0; i < m; ++i) {
    long j = m == 1 ? 0 : static_cast<long>(i) * (n - 1) / (m - 1);
    t.push_back(g.t(static_cast<int>(j)));
  }
  return t;
}

struct DelayIndex {
  int shift;
  SpMat B;
};

std::vector<DelayIndex> delay_indices(const std::vector<DelayTerm>& delays, double dt, int d) {
  std::vector<DelayIndex> out;
  for (const auto& dl : delays) {
    if (dl.h > 0.0) fail(ErrorCode::Validation, "delay shift must be non-positive");
    check_shape(dl.B, d, "delay coefficient");
    double m = -dl.h / dt;
    int k = static_cast<int>(std::lround(m));
    if (std::abs(m - k) > 1e-9 * std::max(1.0, m)) fail(ErrorCode::Validation, "delay shift is not grid-aligned");
    out.push_back({k, dl.B});
  }
  return out;
}

}  // namespace

TimeVaryingLaw TimeVaryingLaw::constant(const SpMat& m0, const SpMat& m1) {
  TimeVaryingLaw law;
  law.M0 = [m0](double) { return m0; };
  law.M1 = [m1](double) { return m1; };
  law.lip_M0 = 0.0;
  law.dim = static_cast<int>(m0.rows());
  return law;
}

void validate_law(const TimeVaryingLaw& law, const std::vector<double>& t_samples) {
  for (size_t i = 0; i < t_samples.size(); ++i) {
    SpMat m0 = law.M0(t_samples[i]);
    check_shape(m0, law.dim, "M0");
    check_shape(law.M1(t_samples[i]), law.dim, "M1");
    SpMat asym = m0 - SpMat(m0.transpose());
    double scale = std::max(1.0, norm_bound(to_complex(m0)));
    if (asym.nonZeros() > 0 && norm_bound(to_complex(asym)) > 1e-12 * scale)
      fail(ErrorCode::SpdViolation, "M0(t) is not selfadjoint");
    if (sym_lambda_min(m0) < -1e-12) fail(ErrorCode::SpdViolation, "M0(t) has a negative eigenvalue");
    for (size_t j = 0; j < i; ++j) {
      double dt = std::abs(t_samples[i] - t_samples[j]);
      double diff = op_norm(to_complex(SpMat(m0 - law.M0(t_samples[j]))));
      if (diff > law.lip_M0 * dt * (1.0 + 1e-9) + 1e-12)
        fail(ErrorCode::LipschitzViolated, "M0 exceeds its declared Lipschitz constant");
    }
  }
}

double derivative_step(double t) { return 1e-6 * (1.0 + std::abs(t)); }

double nonauto_posdef_value(const TimeVaryingLaw& law, double nu, double t) {
  const double h = derivative_step(t);
  SpMat dm0 = (law.M0(t + h) - law.M0(t - h)) * (1.0 / (2.0 * h));
  SpMat m1 = law.M1(t);
  SpMat sym = law.M0(t) * nu + dm0 * 0.5 + (m1 + SpMat(m1.transpose())) * 0.5;
  return sym_lambda_min(sym);
}

double check_nonauto_posdef(const TimeVaryingLaw& law, double nu, const std::vector<double>& t_samples) {
  if (t_samples.empty()) fail(ErrorCode::Validation, "no sample times");
  double m = std::numeric_limits<double>::infinity();
  for (double t : t_samples) m = std::min(m, nonauto_posdef_value(law, nu, t));
  return m;
}

Solution solve_nonauto(const TimeVaryingLaw& law, const SpMat& A, const Signal& rhs, const StepOptions& opt) {
  const int d = law.dim, n = rhs.n();
  const TimeGrid& g = rhs.grid;
  if (rhs.dim() != d) fail(ErrorCode::ShapeMismatch, "rhs dimension does not match the law");
  check_shape(A, d, "A");
  if (opt.check_posdef && !(check_nonauto_posdef(law, g.nu, check_times(g)) > 0.0))
    fail(ErrorCode::SpdViolation, "positivity condition fails at the operating weight");
  const double dt = g.dt;
  auto delays = delay_indices(opt.delays, dt, d);
  SpMat implicit_delay(d, d);
  for (const auto& dl : delays)
    if (dl.shift == 0) implicit_delay += dl.B;

  const bool real = is_real_signal(rhs);
  const int parts = real ? 1 : 2;
  std::vector<Eigen::MatrixXd> hist(parts, Eigen::MatrixXd::Zero(n, d));
  detail::StepFactor factor;
  bool have_factor = false;
  RSp m0_dt_prev(d, d);
  double res2 = 0.0, f2 = 0.0;

  for (int k = 0; k < n; ++k) {
    const double t = g.t(k);
    RSp m0_dt = detail::over_dt(law.M0(t), dt);
    RSp S = detail::step_matrix(m0_dt, law.M1(t), A);
    if (implicit_delay.nonZeros() > 0) S = RSp(S + implicit_delay);
    if (!have_factor || !detail::same_matrix(S, factor.matrix())) {
      factor.factor(S);
      have_factor = true;
    }
    const RSp lower = -m0_dt_prev;
    for (int part = 0; part < parts; ++part) {
      Eigen::VectorXd fk = part == 0 ? Eigen::VectorXd(rhs.values.row(k).real().transpose())
                                     : Eigen::VectorXd(rhs.values.row(k).imag().transpose());
      Eigen::VectorXd b = fk;
      if (k > 0) {
        Eigen::VectorXd prev = hist[part].row(k - 1).transpose();
        b -= lower * prev;
      }
      for (const auto& dl : delays)
        if (dl.shift > 0 && k - dl.shift >= 0) {
          Eigen::VectorXd past = hist[part].row(k - dl.shift).transpose();
          b -= dl.B * past;
        }
      Eigen::VectorXd x = factor.solve(b);
      hist[part].row(k) = x.transpose();
      res2 += (factor.matrix() * x - b).squaredNorm();
      f2 += fk.squaredNorm();
    }
    m0_dt_prev = m0_dt;
  }

  Solution sol;
  sol.u = Signal(g, d);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < d; ++i)
      sol.u.values(k, i) = cplx(hist[0](k, i), parts == 2 ? hist[1](k, i) : 0.0);
  sol.residual = f2 > 0.0 ? std::sqrt(res2 / f2) : std::sqrt(res2);
  sol.causal_time = support_start(rhs);
  sol.causal_defect = sol.causal_time > g.t0 ? causal_defect(sol.u, sol.causal_time) : 0.0;
  return sol;
}

MonotoneRelation relation_sign(double k) {
  if (!(k >= 0.0)) fail(ErrorCode::Validation, "threshold must be non-negative");
  MonotoneRelation r;
  r.name = k == 1.0 ? "sign" : "soft_threshold:" + std::to_string(k);
  r.resolvent = [k](double lambda, const Eigen::VectorXd& x) {
    const double th = lambda * k;
    Eigen::VectorXd y(x.size());
    for (int i = 0; i < x.size(); ++i) {
      double a = std::abs(x[i]) - th;
      y[i] = a > 0.0 ? std::copysign(a, x[i]) : 0.0;
    }
    return y;
  };
  return r;
}

MonotoneRelation relation_arctan() {
  MonotoneRelation r;
  r.name = "arctan";
  // y + lambda atan(y) = x; g is increasing with g' >= 1, so Newton is kept inside a bracket.
  r.resolvent = [](double lambda, const Eigen::VectorXd& x) {
    Eigen::VectorXd y(x.size());
    for (int i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      double lo = xi - lambda * M_PI / 2.0, hi = xi + lambda * M_PI / 2.0;
      double v = xi / (1.0 + lambda);
      for (int it = 0; it < 100; ++it) {
        double gv = v + lambda * std::atan(v) - xi;
        if (gv == 0.0) break;
        if (gv > 0.0) hi = v; else lo = v;
        double next = v - gv / (1.0 + lambda / (1.0 + v * v));
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - v) <= 1e-15 * std::max(1.0, std::abs(v))) {
          v = next;
          break;
        }
        v = next;
      }
      y[i] = v;
    }
    return y;
  };
  return r;
}

MonotoneRelation relation_zero() {
  MonotoneRelation r;
  r.name = "zero";
  r.resolvent = [](double, const Eigen::VectorXd& x) { return x; };
  return r;
}

MonotoneRelation relation_from_name(const std::string& spec) {
  if (spec == "sign") return relation_sign(1.0);
  if (spec == "arctan") return relation_arctan();
  if (spec == "zero") return relation_zero();
  const std::string pre = "soft_threshold:";
  if (spec.rfind(pre, 0) == 0) {
    size_t pos = 0;
    double k = 0.0;
    try {
      k = std::stod(spec.substr(pre.size()), &pos);
    } catch (const std::exception&) {
      fail(ErrorCode::Validation, "bad threshold in '" + spec + "'");
    }
    if (pos != spec.size() - pre.size()) fail(ErrorCode::Validation, "bad threshold in '" + spec + "'");
    return relation_sign(k);
  }
  fail(ErrorCode::Validation, "unknown relation '" + spec + "'");
}

double resolvent_expansion(const MonotoneRelation& rel, double lambda, int dim, int pairs, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd(0.0, 3.0);
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXd x(dim), y(dim);
    for (int i = 0; i < dim; ++i) {
      x[i] = nd(gen);
      y[i] = nd(gen);
    }
    double dxy = (x - y).norm();
    if (dxy == 0.0) continue;
    worst = std::max(worst, (rel.resolvent(lambda, x) - rel.resolvent(lambda, y)).norm() / dxy);
  }
  return worst;
}

Eigen::VectorXd minty_inverse(const MonotoneRelation& a, double c, const Eigen::VectorXd& y, const MintyOptions& opt) {
  if (!(c > 0.0)) fail(ErrorCode::Validation, "monotonicity constant must be positive");
  const double lambda = opt.lambda > 0.0 ? opt.lambda : 0.5 / c;
  const double d = opt.damping;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(y.size());
  for (int it = 0; it < opt.max_iter; ++it) {
    Eigen::VectorXd w = a.resolvent(lambda, x + lambda * (y - c * x));
    Eigen::VectorXd next = (1.0 - d) * x + d * w;
    double step = (next - x).norm();
    x = next;
    if (step <= opt.tol * std::max(1.0, x.norm())) return x;
  }
  fail(ErrorCode::NoConvergence, "resolvent iteration did not converge");
}

Solution solve_inclusion(const TimeVaryingLaw& law, const MonotoneRelation& a, const Signal& rhs,
                         const InclusionOptions& opt) {
  const int d = law.dim, n = rhs.n();
  const TimeGrid& g = rhs.grid;
  if (rhs.dim() != d) fail(ErrorCode::ShapeMismatch, "rhs dimension does not match the law");
  if (!is_real_signal(rhs)) fail(ErrorCode::Validation, "inclusions take real data");
  const double dt = g.dt;
  Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(n, d);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(d);
  SpMat m0_prev(d, d);
  double res2 = 0.0, f2 = 0.0;
  SpMat S_cached;
  double tau = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = g.t(k);
    SpMat m0 = law.M0(t);
    check_shape(m0, d, "M0");
    if (!(sym_lambda_min(m0) > 1e-12)) fail(ErrorCode::SpdViolation, "M0(t) is not positive definite");
    SpMat S = m0 + law.M1(t) * dt;
    if (k == 0 || !detail::same_matrix(S, S_cached)) {
      SpMatC Sc = to_complex(S);
      double mu = lambda_min_herm(Sc), L = op_norm(Sc);
      if (!(mu > 0.0)) fail(ErrorCode::SpdViolation, "step operator is not strictly monotone");
      tau = mu / (L * L);
      S_cached = S;
    }
    Eigen::VectorXd fk = rhs.values.row(k).real().transpose();
    Eigen::VectorXd b = m0_prev * prev + dt * fk;
    Eigen::VectorXd u = prev;
    bool done = false;
    for (int it = 0; it < opt.max_iter; ++it) {
      Eigen::VectorXd w = a.resolvent(tau * dt, u - tau * (S * u - b));
      Eigen::VectorXd next = (1.0 - opt.damping) * u + opt.damping * w;
      double step = (next - u).norm();
      u = next;
      if (step <= opt.tol * std::max(1.0, u.norm())) {
        done = true;
        break;
      }
    }
    if (!done) fail(ErrorCode::NoConvergence, "inclusion step did not converge");
    // Residual: distance of the fixed-point map from identity, scaled back to the equation.
    Eigen::VectorXd w = a.resolvent(tau * dt, u - tau * (S * u - b));
    res2 += ((w - u) / (tau * dt)).squaredNorm();
    f2 += fk.squaredNorm();
    hist.row(k) = u.transpose();
    prev = u;
    m0_prev = m0;
  }
  Solution sol;
  sol.u = Signal(g, d);
  sol.u.values = hist.cast<cplx>();
  sol.residual = f2 > 0.0 ? std::sqrt(res2 / f2) : std::sqrt(res2);
  sol.causal_time = support_start(rhs);
  sol.causal_defect = sol.causal_time > g.t0 ? causal_defect(sol.u, sol.causal_time) : 0.0;
  return sol;
}

}  // namespace evokit
