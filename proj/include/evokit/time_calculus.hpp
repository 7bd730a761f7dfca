#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "evokit/error.hpp"

namespace evokit {

using cplx = std::complex<double>;

// Uniform grid t_j = t0 + j*dt, j = 0..n-1, carrying the exponential weight nu.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0;
  int n = 2;
  double nu = 1.0;

  static TimeGrid make(double t0, double dt, int n, double nu);
  // Grid with window [t0, t_end) and n nodes.
  static TimeGrid window(double t0, double t_end, int n, double nu);

  double t(int j) const { return t0 + j * dt; }
  double length() const { return n * dt; }
  double t_end() const { return t0 + n * dt; }
  // Signed angular frequency of bin k.
  double xi(int k) const;
  // Multiplier variable i*xi + nu of bin k.
  cplx s(int k) const { return {nu, xi(k)}; }
  // [t0 + T/8, t0 + T/4]; later times amplify weighted round-off by e^{nu t}.
  std::pair<double, double> interior() const;
  TimeGrid with_nu(double nu2) const;
  bool same_nodes(const TimeGrid& o) const;
};

// n x dim samples; column c is the time series of component c.
struct Signal {
  TimeGrid grid;
  Eigen::MatrixXcd values;

  Signal() = default;
  Signal(const TimeGrid& g, int dim);
  Signal(const TimeGrid& g, Eigen::MatrixXcd v);

  int dim() const { return static_cast<int>(values.cols()); }
  int n() const { return grid.n; }
  Eigen::VectorXcd at(int j) const { return values.row(j).transpose(); }

  static Signal sample(const TimeGrid& g, const std::function<cplx(double)>& f);
  static Signal sample(const TimeGrid& g, int dim,
                       const std::function<Eigen::VectorXcd(double)>& f);
};

struct Spectrum {
  TimeGrid grid;
  Eigen::MatrixXcd values;
  Eigen::VectorXd frequencies;
  int dim() const { return static_cast<int>(values.cols()); }
};

// Causal kernel tabulated at s_m = m*ds, m = 0..M-1; samples are dim x dim.
struct Kernel {
  double ds = 1.0;
  int dim = 1;
  std::vector<Eigen::MatrixXcd> samples;

  static Kernel scalar(double ds, int m, const std::function<double(double)>& k);
  static Kernel matrix(double ds, int m, int dim,
                       const std::function<Eigen::MatrixXcd(double)>& k);
  // Trapezoidal Laplace transform ds * sum_m c_m k_m e^{-s s_m}, c_0 = 1/2.
  Eigen::MatrixXcd laplace(cplx s) const;
  double l1_weighted(double mu) const;
};

// Whether causal operations may zero-pad the future to meet the wrap margin.
enum class Guard { checked, none };

// Required margin: wrap-around contamination below e^{-m}.
inline constexpr double kWrapTol = 1e-10;
double required_margin();

// min_j [nu (t_end - t_j) + ln(max|w| / |w_j|)] over the weighted samples w.
double wrap_margin(const Signal& u);
// Largest padding factor causal operations will apply before giving up.
inline constexpr int kMaxPadFactor = 64;

Spectrum fourier_laplace(const Signal& u);
Signal inv_fourier_laplace(const Spectrum& s);

// Multiply the spectrum by m(s_k) (scalar, all components).
Signal apply_multiplier(const Signal& u, const std::function<cplx(cplx)>& m);

Signal derive(const Signal& u, Guard guard = Guard::checked);
Signal integrate(const Signal& u, Guard guard = Guard::checked);
// (i xi + nu)^alpha, principal branch; alpha < 0 is treated as a causal operation.
Signal fractional_power(const Signal& u, double alpha, Guard guard = Guard::checked);
// Output(t) = u(t + h) with h grid-aligned, via e^{(i xi + nu) h}.
Signal translate(const Signal& u, double h);
// Same operation as an index shift; used as an independent implementation.
Signal translate_shift(const Signal& u, double h);
// (k * u)(t) = int_0^inf k(s) u(t - s) ds; kernel spacing must equal dt.
Signal convolve(const Kernel& k, const Signal& u, Guard guard = Guard::checked);

double weighted_norm(const Signal& u);
cplx weighted_inner(const Signal& u, const Signal& v);
// Weighted norm restricted to nodes in [a, b].
double weighted_norm_on(const Signal& u, double a, double b);
// max |u(t_j) - v(t_j)| over nodes with t_j in [a, b].
double sup_diff_on(const Signal& u, const Signal& v, double a, double b);
double sup_norm_on(const Signal& u, double a, double b);

Signal operator+(const Signal& a, const Signal& b);
Signal operator-(const Signal& a, const Signal& b);
Signal operator*(cplx c, const Signal& a);

// Restrict a padded signal back onto the first n nodes of a grid.
Signal truncate(const Signal& u, const TimeGrid& g);
// Zero-extend onto a longer grid sharing t0 and dt.
Signal zero_pad(const Signal& u, int n_new);

// In-place FFT of every column (sign -1 forward, +1 backward, unnormalized).
void fft_columns(Eigen::MatrixXcd& m, int sign);

void write_csv(const Signal& u, std::ostream& os);

}  // namespace evokit
