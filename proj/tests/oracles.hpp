#pragma once

// Independent reference computations used by the tests. Nothing here calls into the
// library's numerical kernels; each oracle is a direct quadrature, closed form or search.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

// Riemann-Liouville integral (I^alpha f)(t) = 1/Gamma(alpha) int_0^t (t-s)^{alpha-1} f(s) ds.
// The substitution w = (t-s)^alpha removes the endpoint singularity.
inline double rl_integral(const std::function<double(double)>& f, double alpha, double t, int n = 2000) {
  if (t <= 0.0) return 0.0;
  auto g = [&](double w) { return f(t - std::pow(w, 1.0 / alpha)); };
  return simpson(g, 0.0, std::pow(t, alpha), n) / (alpha * std::tgamma(alpha));
}

// O(n^2) trapezoidal causal convolution: out_j = dt sum_{m<=j} c_m k(m dt) u_{j-m}, c_0 = 1/2.
inline std::vector<cplx> direct_convolution(const std::function<double(double)>& k, const std::vector<cplx>& u,
                                            double dt, int kernel_len) {
  const int n = static_cast<int>(u.size());
  std::vector<cplx> out(n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int m = 0; m <= j && m < kernel_len; ++m) out[j] += (m == 0 ? 0.5 : 1.0) * dt * k(m * dt) * u[j - m];
  return out;
}

// Root nu0 > 0 of nu + e^{-nu h} = c by bisection on [0, c].
inline double delay_root_bisection(double c, double h) {
  auto f = [&](double nu) { return nu + std::exp(-nu * h) - c; };
  double lo = 0.0, hi = c;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// a^{-1} psi for a = alpha on [0, 1/2], beta on [-1/2, 0), projected against constants.
// The two pairings are done by Simpson quadrature on each half.
inline double indefinite_value(double alpha, double beta, const std::function<double(double)>& psi, double x) {
  auto inv = [&](double s) { return s >= 0.0 ? 1.0 / alpha : 1.0 / beta; };
  double num = simpson([&](double s) { return psi(s) / beta; }, -0.5, 0.0) +
               simpson([&](double s) { return psi(s) / alpha; }, 0.0, 0.5);
  double den = 0.5 / beta + 0.5 / alpha;
  return inv(x) * (psi(x) - num / den);
}

// Least-squares slope of log y against x.
inline double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    double ly = std::log(y[i]);
    sx += x[i], sy += ly, sxx += x[i] * x[i], sxy += x[i] * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Minimum over the region of the smallest eigenvalue of the Hermitian part of a dense matrix
// family, sampled on polar points of B(r, r).
inline double sampled_min_herm(const std::function<Eigen::MatrixXcd(cplx)>& f, double r, int n_rad, int n_ang) {
  double best = 1e300;
  for (int i = 1; i <= n_rad; ++i) {
    double rad = r * i / (n_rad + 1.0);
    for (int j = 0; j < n_ang; ++j) {
      cplx z = r + std::polar(rad, 2.0 * kPi * j / n_ang);
      Eigen::MatrixXcd m = f(z);
      Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
      best = std::min(best, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h).eigenvalues().minCoeff());
    }
  }
  return best;
}

inline std::mt19937& rng() {
  static std::mt19937 g(20240611u);
  return g;
}

inline Eigen::VectorXcd random_vector(int n, std::mt19937& g) {
  std::normal_distribution<double> d;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(d(g), d(g));
  return v;
}

}  // namespace oracle
