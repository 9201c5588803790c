#pragma once

// Comparison functions of the constant-curvature model and unit-sphere constants.

namespace tubecomp {

// Solution of f'' + delta f = 0 with f(0) = 0, f'(0) = 1.
double s_delta(double delta, double r);
// Derivative of s_delta in r.
double c_delta(double delta, double r);
// c_delta / s_delta, evaluated without cancellation for small r.
double cot_delta(double delta, double r);

// |S^{d-1}|, the area of the unit sphere in R^d.
double sphere_area(int d);
// omega_d, the volume of the unit ball in R^d.
double ball_volume(int d);

}  // namespace tubecomp
