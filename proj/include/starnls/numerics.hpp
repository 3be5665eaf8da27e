#pragma once

#include <functional>
#include <utility>

namespace starnls::numerics {

/// Adaptive 15-point Gauss-Kronrod quadrature of f over [a, b].
/// Throws NumericError when the result is not finite.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-13);

struct Bracket {
  double lo;
  double hi;
};

/// Grows [center - half_width, center + half_width] by doubling the half width
/// until f has opposite signs at the ends.
Bracket expand_bracket(const std::function<double(double)>& f, double center,
                       double half_width, int max_doublings = 64);

/// Newton iteration safeguarded by bisection. `f_df` returns (f, f').
/// The bracket must have f(lo) * f(hi) <= 0. Stops when the step is below
/// x_tol * (1 + |x|).
double bracketed_newton(const std::function<std::pair<double, double>(double)>& f_df,
                        Bracket bracket, double x_tol = 1e-15, int max_iter = 200);

/// Derivative-free variant (Illinois false position with bisection fallback).
double bracketed_secant(const std::function<double(double)>& f, Bracket bracket,
                        double x_tol = 1e-15, int max_iter = 400);

}  // namespace starnls::numerics
