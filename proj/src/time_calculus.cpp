#include "evokit/time_calculus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>

#include "evokit/error.hpp"

namespace evokit {

namespace {

bool is_pow2(int n) { return n >= 2 && (n & (n - 1)) == 0; }

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kPi = 3.14159265358979323846;

// Nodes where |w_j| exceeds tol * max|w|, as [first, last]; (-1, -1) if none.
std::pair<int, int> support(const Eigen::MatrixXcd& w, double tol) {
  double mx = 0.0;
  for (int j = 0; j < w.rows(); ++j) mx = std::max(mx, w.row(j).norm());
  if (mx == 0.0) return {-1, -1};
  int first = -1, last = -1;
  for (int j = 0; j < w.rows(); ++j) {
    if (w.row(j).norm() > tol * mx) {
      if (first < 0) first = j;
      last = j;
    }
  }
  return {first, last};
}

Eigen::MatrixXcd weighted(const Signal& u) {
  Eigen::MatrixXcd w = u.values;
  for (int j = 0; j < u.n(); ++j) w.row(j) *= std::exp(-u.grid.nu * u.grid.t(j));
  return w;
}

// Measured on the weighted samples the transform sees; late unweighted values carry
// round-off amplified by e^{nu t} and say nothing about wrap-around.
void check_edges(const Signal& u) {
  const Eigen::MatrixXcd w = weighted(u);
  double mx = 0.0;
  for (int j = 0; j < u.n(); ++j) mx = std::max(mx, w.row(j).norm());
  if (mx == 0.0) return;
  double e0 = w.row(0).norm(), e1 = w.row(u.n() - 1).norm();
  if (e0 > kWrapTol * mx || e1 > kWrapTol * mx)
    fail(ErrorCode::EdgeSupport, "signal not negligible at the window edges");
}

// Apply a causal multiplier, zero-padding the future until the wrap margin holds.
Signal causal_multiplier(const Signal& u, const std::function<cplx(cplx)>& m, Guard guard) {
  if (guard == Guard::none) return apply_multiplier(u, m);
  if (!u.values.allFinite()) fail(ErrorCode::Validation, "non-finite samples");
  const double need = required_margin();
  Signal work = u;
  for (int factor = 1; factor <= kMaxPadFactor; factor *= 2) {
    if (factor > 1) work = zero_pad(u, u.n() * factor);
    if (wrap_margin(work) >= need) return truncate(apply_multiplier(work, m), u.grid);
  }
  fail(ErrorCode::WrapMargin, "window and weight cannot suppress the periodic wrap");
}

}  // namespace

TimeGrid TimeGrid::make(double t0, double dt, int n, double nu) {
  if (!is_pow2(n)) fail(ErrorCode::Validation, "grid size must be a power of two >= 2");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::Validation, "dt must be positive");
  if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorCode::Validation, "nu must be positive");
  if (!std::isfinite(t0)) fail(ErrorCode::Validation, "t0 must be finite");
  return TimeGrid{t0, dt, n, nu};
}

TimeGrid TimeGrid::window(double t0, double t_end, int n, double nu) {
  if (!(t_end > t0)) fail(ErrorCode::Validation, "empty window");
  return make(t0, (t_end - t0) / n, n, nu);
}

double TimeGrid::xi(int k) const {
  int ks = k < n / 2 ? k : k - n;
  return 2.0 * kPi * ks / (n * dt);
}

std::pair<double, double> TimeGrid::interior() const {
  return {t0 + 0.125 * length(), t0 + 0.25 * length()};
}

TimeGrid TimeGrid::with_nu(double nu2) const { return make(t0, dt, n, nu2); }

bool TimeGrid::same_nodes(const TimeGrid& o) const {
  return n == o.n && t0 == o.t0 && dt == o.dt;
}

Signal::Signal(const TimeGrid& g, int dim) : grid(g), values(Eigen::MatrixXcd::Zero(g.n, dim)) {
  if (dim < 1) fail(ErrorCode::Validation, "signal dimension must be >= 1");
}

Signal::Signal(const TimeGrid& g, Eigen::MatrixXcd v) : grid(g), values(std::move(v)) {
  if (values.rows() != g.n || values.cols() < 1)
    fail(ErrorCode::ShapeMismatch, "signal values do not match the grid");
}

Signal Signal::sample(const TimeGrid& g, const std::function<cplx(double)>& f) {
  Signal s(g, 1);
  for (int j = 0; j < g.n; ++j) s.values(j, 0) = f(g.t(j));
  return s;
}

Signal Signal::sample(const TimeGrid& g, int dim,
                      const std::function<Eigen::VectorXcd(double)>& f) {
  Signal s(g, dim);
  for (int j = 0; j < g.n; ++j) {
    Eigen::VectorXcd v = f(g.t(j));
    if (v.size() != dim) fail(ErrorCode::ShapeMismatch, "sampled vector has wrong length");
    s.values.row(j) = v.transpose();
  }
  return s;
}

Kernel Kernel::scalar(double ds, int m, const std::function<double(double)>& k) {
  Kernel out;
  out.ds = ds;
  out.dim = 1;
  out.samples.reserve(m);
  for (int i = 0; i < m; ++i) out.samples.push_back(Eigen::MatrixXcd::Constant(1, 1, k(i * ds)));
  return out;
}

Kernel Kernel::matrix(double ds, int m, int dim,
                      const std::function<Eigen::MatrixXcd(double)>& k) {
  Kernel out;
  out.ds = ds;
  out.dim = dim;
  out.samples.reserve(m);
  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXcd v = k(i * ds);
    if (v.rows() != dim || v.cols() != dim) fail(ErrorCode::ShapeMismatch, "kernel sample shape");
    out.samples.push_back(v);
  }
  return out;
}

Eigen::MatrixXcd Kernel::laplace(cplx s) const {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
  const cplx step = std::exp(-s * ds);
  cplx f = 1.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    double c = i == 0 ? 0.5 : 1.0;
    acc += (c * f) * samples[i];
    f *= step;
    // Re-anchor the running product to avoid drift over long tables.
    if ((i & 255) == 255) f = std::exp(-s * (ds * static_cast<double>(i + 1)));
  }
  return ds * acc;
}

double Kernel::l1_weighted(double mu) const {
  double acc = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    double c = i == 0 ? 0.5 : 1.0;
    acc += c * samples[i].norm() * std::exp(-mu * ds * i);
  }
  return ds * acc;
}

double required_margin() { return -std::log(kWrapTol); }

double wrap_margin(const Signal& u) {
  const Eigen::MatrixXcd w = weighted(u);
  double mx = 0.0;
  for (int j = 0; j < u.n(); ++j) mx = std::max(mx, w.row(j).norm());
  if (mx == 0.0) return std::numeric_limits<double>::infinity();
  double m = std::numeric_limits<double>::infinity();
  const double te = u.grid.t_end();
  for (int j = 0; j < u.n(); ++j) {
    double a = w.row(j).norm();
    if (a == 0.0) continue;
    m = std::min(m, u.grid.nu * (te - u.grid.t(j)) + std::log(mx / a));
  }
  return m;
}

void fft_columns(Eigen::MatrixXcd& m, int sign) {
  const int n = static_cast<int>(m.rows());
  const int howmany = static_cast<int>(m.cols());
  if (n == 0 || howmany == 0) return;
  auto* data = reinterpret_cast<fftw_complex*>(m.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_many_dft(1, &n, howmany, data, nullptr, 1, n, data, nullptr, 1, n,
                              sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(plan);
}

Spectrum fourier_laplace(const Signal& u) {
  const TimeGrid& g = u.grid;
  Spectrum out;
  out.grid = g;
  out.values = weighted(u);
  fft_columns(out.values, -1);
  out.frequencies.resize(g.n);
  for (int k = 0; k < g.n; ++k) {
    out.frequencies[k] = g.xi(k);
    out.values.row(k) *= g.dt * std::exp(cplx(0.0, -g.xi(k) * g.t0));
  }
  return out;
}

Signal inv_fourier_laplace(const Spectrum& s) {
  const TimeGrid& g = s.grid;
  Eigen::MatrixXcd w = s.values;
  for (int k = 0; k < g.n; ++k) w.row(k) *= std::exp(cplx(0.0, g.xi(k) * g.t0)) / (g.n * g.dt);
  fft_columns(w, +1);
  for (int j = 0; j < g.n; ++j) w.row(j) *= std::exp(g.nu * g.t(j));
  return Signal(g, std::move(w));
}

Signal apply_multiplier(const Signal& u, const std::function<cplx(cplx)>& m) {
  Spectrum s = fourier_laplace(u);
  for (int k = 0; k < u.n(); ++k) s.values.row(k) *= m(u.grid.s(k));
  return inv_fourier_laplace(s);
}

Signal derive(const Signal& u, Guard guard) {
  if (guard == Guard::checked) check_edges(u);
  return apply_multiplier(u, [](cplx s) { return s; });
}

Signal integrate(const Signal& u, Guard guard) {
  return causal_multiplier(u, [](cplx s) { return 1.0 / s; }, guard);
}

Signal fractional_power(const Signal& u, double alpha, Guard guard) {
  if (!std::isfinite(alpha) || alpha == 0.0)
    fail(ErrorCode::Validation, "fractional exponent must be finite and nonzero");
  auto m = [alpha](cplx s) { return std::pow(s, alpha); };
  if (alpha > 0.0) {
    if (guard == Guard::checked) check_edges(u);
    return apply_multiplier(u, m);
  }
  return causal_multiplier(u, m, guard);
}

namespace {

int grid_steps(const TimeGrid& g, double h) {
  double q = h / g.dt;
  double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
    fail(ErrorCode::Validation, "translation must be an integer multiple of dt");
  return static_cast<int>(r);
}

void check_escape(const Signal& u, int steps) {
  auto [first, last] = support(weighted(u), kWrapTol);
  if (first < 0) return;
  // Output(t_j) = u(t_j + h): support moves by -steps nodes.
  if (first - steps < 0 || last - steps > u.n() - 1)
    fail(ErrorCode::SupportEscape, "shifted support leaves the window");
}

}  // namespace

Signal translate(const Signal& u, double h) {
  int steps = grid_steps(u.grid, h);
  if (steps == 0) return u;
  check_escape(u, steps);
  const double hh = steps * u.grid.dt;
  return apply_multiplier(u, [hh](cplx s) { return std::exp(s * hh); });
}

Signal translate_shift(const Signal& u, double h) {
  int steps = grid_steps(u.grid, h);
  if (steps == 0) return u;
  check_escape(u, steps);
  Signal out(u.grid, u.dim());
  for (int j = 0; j < u.n(); ++j) {
    int src = j + steps;
    if (src >= 0 && src < u.n()) out.values.row(j) = u.values.row(src);
  }
  return out;
}

Signal convolve(const Kernel& k, const Signal& u, Guard guard) {
  if (k.dim != u.dim() && k.dim != 1) fail(ErrorCode::ShapeMismatch, "kernel/signal dimension");
  if (std::abs(k.ds - u.grid.dt) > 1e-12 * u.grid.dt)
    fail(ErrorCode::Validation, "kernel spacing must equal the grid step");
  auto run = [&](const Signal& v) {
    const TimeGrid& g = v.grid;
    const int n = g.n;
    const int d = k.dim;
    const int m = std::min<int>(n, static_cast<int>(k.samples.size()));
    // Transform of the weighted kernel entries, one column per (r, c) entry.
    Eigen::MatrixXcd kt = Eigen::MatrixXcd::Zero(n, d * d);
    for (int i = 0; i < m; ++i) {
      double c = (i == 0 ? 0.5 : 1.0) * g.dt * std::exp(-g.nu * g.dt * i);
      for (int r = 0; r < d; ++r)
        for (int cc = 0; cc < d; ++cc) kt(i, r * d + cc) = c * k.samples[i](r, cc);
    }
    fft_columns(kt, -1);
    Spectrum s = fourier_laplace(v);
    for (int q = 0; q < n; ++q) {
      if (d == 1) {
        s.values.row(q) *= kt(q, 0);
      } else {
        Eigen::MatrixXcd kq(d, d);
        for (int r = 0; r < d; ++r)
          for (int cc = 0; cc < d; ++cc) kq(r, cc) = kt(q, r * d + cc);
        s.values.row(q) = (kq * s.values.row(q).transpose()).transpose();
      }
    }
    return inv_fourier_laplace(s);
  };
  if (guard == Guard::none) return run(u);
  const double need = required_margin();
  for (int factor = 1; factor <= kMaxPadFactor; factor *= 2) {
    Signal work = factor == 1 ? u : zero_pad(u, u.n() * factor);
    if (wrap_margin(work) >= need) return truncate(run(work), u.grid);
  }
  fail(ErrorCode::WrapMargin, "window and weight cannot suppress the periodic wrap");
}

double weighted_norm(const Signal& u) {
  double acc = 0.0;
  for (int j = 0; j < u.n(); ++j)
    acc += u.values.row(j).squaredNorm() * std::exp(-2.0 * u.grid.nu * u.grid.t(j));
  return std::sqrt(u.grid.dt * acc);
}

cplx weighted_inner(const Signal& u, const Signal& v) {
  if (!u.grid.same_nodes(v.grid) || u.dim() != v.dim())
    fail(ErrorCode::ShapeMismatch, "inner product of incompatible signals");
  cplx acc = 0.0;
  for (int j = 0; j < u.n(); ++j)
    acc += v.values.row(j).dot(u.values.row(j)) * std::exp(-2.0 * u.grid.nu * u.grid.t(j));
  return u.grid.dt * acc;
}

double weighted_norm_on(const Signal& u, double a, double b) {
  double acc = 0.0;
  for (int j = 0; j < u.n(); ++j) {
    double t = u.grid.t(j);
    if (t < a || t > b) continue;
    acc += u.values.row(j).squaredNorm() * std::exp(-2.0 * u.grid.nu * t);
  }
  return std::sqrt(u.grid.dt * acc);
}

double sup_diff_on(const Signal& u, const Signal& v, double a, double b) {
  if (u.n() != v.n() || u.dim() != v.dim()) fail(ErrorCode::ShapeMismatch, "sup_diff shapes");
  double m = 0.0;
  for (int j = 0; j < u.n(); ++j) {
    double t = u.grid.t(j);
    if (t < a || t > b) continue;
    m = std::max(m, (u.values.row(j) - v.values.row(j)).cwiseAbs().maxCoeff());
  }
  return m;
}

double sup_norm_on(const Signal& u, double a, double b) {
  double m = 0.0;
  for (int j = 0; j < u.n(); ++j) {
    double t = u.grid.t(j);
    if (t < a || t > b) continue;
    m = std::max(m, u.values.row(j).cwiseAbs().maxCoeff());
  }
  return m;
}

Signal operator+(const Signal& a, const Signal& b) {
  if (!a.grid.same_nodes(b.grid) || a.dim() != b.dim()) fail(ErrorCode::ShapeMismatch, "signal sum");
  return Signal(a.grid, a.values + b.values);
}

Signal operator-(const Signal& a, const Signal& b) {
  if (!a.grid.same_nodes(b.grid) || a.dim() != b.dim()) fail(ErrorCode::ShapeMismatch, "signal diff");
  return Signal(a.grid, a.values - b.values);
}

Signal operator*(cplx c, const Signal& a) { return Signal(a.grid, c * a.values); }

Signal truncate(const Signal& u, const TimeGrid& g) {
  if (u.n() < g.n) fail(ErrorCode::ShapeMismatch, "truncate target longer than signal");
  return Signal(g, u.values.topRows(g.n));
}

Signal zero_pad(const Signal& u, int n_new) {
  TimeGrid g = TimeGrid::make(u.grid.t0, u.grid.dt, n_new, u.grid.nu);
  Signal out(g, u.dim());
  out.values.topRows(u.n()) = u.values;
  return out;
}

void write_csv(const Signal& u, std::ostream& os) {
  os << "t";
  for (int d = 0; d < u.dim(); ++d) os << ",re_" << d << ",im_" << d;
  os << "\n" << std::setprecision(17);
  for (int j = 0; j < u.n(); ++j) {
    os << u.grid.t(j);
    for (int d = 0; d < u.dim(); ++d) os << "," << u.values(j, d).real() << "," << u.values(j, d).imag();
    os << "\n";
  }
}

}  // namespace evokit
