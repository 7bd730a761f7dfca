#include "evokit/profiles.hpp"

#include <cmath>

namespace evokit {

double heaviside(double t) {
  if (t > 0.0) return 1.0;
  if (t < 0.0) return 0.0;
  return 0.5;
}

double indicator(double t, double a, double b) {
  if (t > a && t < b) return 1.0;
  if (t == a || t == b) return 0.5;
  return 0.0;
}

double gaussian(double t, double center, double width) {
  double x = (t - center) / width;
  return std::exp(-x * x);
}

double smooth_bump(double t, double a, double b) {
  if (t <= a || t >= b) return 0.0;
  double x = 2.0 * (t - a) / (b - a) - 1.0;
  return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

}  // namespace evokit
