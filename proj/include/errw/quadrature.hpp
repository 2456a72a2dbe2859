#pragma once

#include <functional>

namespace errw {

// Adaptive Simpson on [a,b] with absolute tolerance. Deterministic; used as
// the independent oracle route for density normalizations and closed-form
// moments, so it must not share code with the density evaluators under test.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 60);

// Nested 2D adaptive Simpson over [ax,bx] x [ay,by].
double adaptive_simpson_2d(const std::function<double(double, double)>& f, double ax,
                           double bx, double ay, double by, double tol);

// Integral of f over (0, inf) via the substitution w = e^t (handles the
// integrable endpoint singularity of gamma-type weights for shape < 1).
double integrate_half_line(const std::function<double(double)>& f, double tol,
                           double t_lo = -60.0, double t_hi = 60.0);

}  // namespace errw
