#include "starnls/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>

#include "starnls/errors.hpp"
#include "starnls/params.hpp"

namespace starnls {

void ModelParams::validate() const {
  if (edges < 2) throw DomainError("model: edge count must be >= 2");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("model: alpha must be > 0");
  validate_mu(mu);
}

void validate_mu(double mu) {
  if (!(mu > 0.0 && mu < 2.0)) throw DomainError("model: mu must lie in (0, 2)");
}

namespace numerics {

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, rel_tol, &error);
  if (!std::isfinite(value)) throw NumericError("quadrature produced a non-finite value");
  return value;
}

Bracket expand_bracket(const std::function<double(double)>& f, double center, double half_width,
                       int max_doublings) {
  double w = half_width;
  for (int i = 0; i <= max_doublings; ++i) {
    const double lo = center - w;
    const double hi = center + w;
    const double flo = f(lo);
    const double fhi = f(hi);
    if (std::isnan(flo) || std::isnan(fhi)) throw NumericError("bracket expansion hit NaN");
    if (flo == 0.0) return {lo, lo};
    if (fhi == 0.0) return {hi, hi};
    if ((flo < 0.0) != (fhi < 0.0)) return {lo, hi};
    w *= 2.0;
  }
  std::ostringstream os;
  os << "no sign change found after " << max_doublings << " bracket doublings";
  throw NumericError(os.str());
}

double bracketed_newton(const std::function<std::pair<double, double>(double)>& f_df,
                        Bracket bracket, double x_tol, int max_iter) {
  double lo = bracket.lo;
  double hi = bracket.hi;
  if (lo == hi) return lo;
  auto [flo, dlo] = f_df(lo);
  auto [fhi, dhi] = f_df(hi);
  (void)dlo;
  (void)dhi;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw NumericError("bracketed_newton: no sign change");
  // orient so that f(lo) < 0 < f(hi)
  if (flo > 0.0) std::swap(lo, hi);

  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    auto [fx, dfx] = f_df(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) lo = x; else hi = x;

    double next = x - fx / dfx;
    const double a = std::min(lo, hi);
    const double b = std::max(lo, hi);
    if (!std::isfinite(next) || next <= a || next >= b) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= x_tol * (1.0 + std::abs(x))) return x;
    if (std::abs(hi - lo) <= x_tol * (1.0 + std::abs(x))) return x;
  }
  throw NumericError("bracketed_newton: no convergence");
}

double bracketed_secant(const std::function<double(double)>& f, Bracket bracket, double x_tol,
                        int max_iter) {
  double a = bracket.lo;
  double b = bracket.hi;
  if (a == b) return a;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa < 0.0) == (fb < 0.0)) throw NumericError("bracketed_secant: no sign change");

  for (int it = 0; it < max_iter; ++it) {
    double c = b - fb * (b - a) / (fb - fa);
    // every few iterations force a bisection so the bracket keeps shrinking
    if (!std::isfinite(c) || c <= std::min(a, b) || c >= std::max(a, b) || it % 8 == 7)
      c = 0.5 * (a + b);
    const double fc = f(c);
    if (fc == 0.0) return c;
    if ((fc < 0.0) != (fb < 0.0)) {
      a = b;
      fa = fb;
    } else {
      fa *= 0.5;
    }
    b = c;
    fb = fc;
    if (std::abs(b - a) <= x_tol * (1.0 + std::abs(b))) return b;
  }
  throw NumericError("bracketed_secant: no convergence");
}

}  // namespace numerics
}  // namespace starnls
