#pragma once

#include <functional>
#include <string>

namespace evokit {

// Scalar time profiles. Jumps on grid nodes take the midpoint value.
double heaviside(double t);
double indicator(double t, double a, double b);
double gaussian(double t, double center, double width);
// C-infinity bump supported on [a, b] with peak 1.
double smooth_bump(double t, double a, double b);

using Profile = std::function<double(double)>;

}  // namespace evokit
