#include "starnls/soliton.hpp"

#include <cmath>

#include "starnls/errors.hpp"
#include "starnls/numerics.hpp"

namespace starnls {
namespace {

void require_frequency(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw DomainError("soliton: frequency omega must be > 0");
}

// (mu+1)^(1/mu) / mu, the prefactor shared by all t-substituted integrals.
double mass_prefactor(double mu) { return std::pow(mu + 1.0, 1.0 / mu) / mu; }

double log_phi1(double z, double mu) {
  return std::log(mu + 1.0) / (2.0 * mu) - detail::log_cosh(mu * z) / mu;
}

// Substituting 1 - t = u s^q with q = k/(p+1) turns the integrand into
// s^(k-1) (2 - u s^q)^p, smooth on [0, 1] whatever the sign of p.
struct TailMap {
  int k;
  double q;
  explicit TailMap(double p) : k(int(std::ceil(6.0 * (p + 1.0)))), q(k / (p + 1.0)) {}
};

double tail_kernel(double u, double p) {
  const TailMap map(p);
  const int km1 = map.k - 1;
  const double q = map.q;
  return numerics::integrate(
      [=](double s) { return std::pow(s, km1) * std::pow(2.0 - u * std::pow(s, q), p); }, 0.0,
      1.0);
}

// int_{1-u}^1 (1-t^2)^p dt with u in [0, 1]
double upper_tail(double u, double p) {
  if (u <= 0.0) return 0.0;
  const TailMap map(p);
  return map.q * std::pow(u, p + 1.0) * tail_kernel(u, p);
}

double half_integral(double p) { return upper_tail(1.0, p); }

}  // namespace

namespace detail {

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}

double tail_from_gap(double u, double p) {
  if (!(u >= 0.0 && u <= 2.0)) throw DomainError("tail integral: 1 - t0 outside [0, 2]");
  if (u <= 1.0) return upper_tail(u, p);
  return 2.0 * half_integral(p) - upper_tail(2.0 - u, p);
}

double log_tail_from_shift(double w, double p) {
  if (w < 0.0) return std::log(tail_from_shift(w, p));
  // 1 - tanh w = 2 / (1 + e^{2w})
  const double log_u = std::log(2.0) - 2.0 * w - std::log1p(std::exp(-2.0 * w));
  const TailMap map(p);
  return std::log(map.q) + (p + 1.0) * log_u + std::log(tail_kernel(std::exp(log_u), p));
}

double tail_from_shift(double w, double p) {
  if (w >= 0.0) return std::exp(log_tail_from_shift(w, p));
  // 1 + tanh w = 2 / (1 + e^{-2w})
  const double v = 2.0 / (1.0 + std::exp(-2.0 * w));
  return 2.0 * half_integral(p) - upper_tail(v, p);
}

}  // namespace detail

double soliton_value(const SolitonParams& p, double mu, double x) {
  require_frequency(p.omega);
  const double y = x + p.shift;
  const double log_amp = std::log((mu + 1.0) * p.omega) / (2.0 * mu);
  return std::exp(log_amp - detail::log_cosh(mu * std::sqrt(p.omega) * y) / mu);
}

double soliton_derivative(const SolitonParams& p, double mu, double x) {
  const double phi = soliton_value(p, mu, x);
  const double rs = std::sqrt(p.omega);
  return -rs * std::tanh(mu * rs * (x + p.shift)) * phi;
}

double line_soliton_mass(double omega, double mu) {
  require_frequency(omega);
  validate_mu(mu);
  return 2.0 * mass_prefactor(mu) * std::pow(omega, 1.0 / mu - 0.5) * half_integral(1.0 / mu - 1.0);
}

double halfline_mass(const SolitonParams& p, double mu) {
  require_frequency(p.omega);
  validate_mu(mu);
  const double w = mu * std::sqrt(p.omega) * p.shift;
  return mass_prefactor(mu) * std::pow(p.omega, 1.0 / mu - 0.5) *
         detail::tail_from_shift(w, 1.0 / mu - 1.0);
}

double log_g(double z, double mu) {
  validate_mu(mu);
  return -(2.0 - mu) * log_phi1(z, mu) + std::log(mass_prefactor(mu)) +
         detail::log_tail_from_shift(mu * z, 1.0 / mu - 1.0);
}

double g_eval(double z, double mu) { return std::exp(log_g(z, mu)); }

SolitonParams solve_constraint(const HalfLineConstraint& c, double mu) {
  validate_mu(mu);
  if (!(c.mass > 0.0) || !std::isfinite(c.mass))
    throw DomainError("solve_constraint: half-line mass must be > 0");
  if (!(c.vertex_value > 0.0) || !std::isfinite(c.vertex_value))
    throw DomainError("solve_constraint: vertex value must be > 0");

  // the scaled shift z = sqrt(omega) xi solves log g(z) = log(m / a^(2-mu))
  const double target = std::log(c.mass) - (2.0 - mu) * std::log(c.vertex_value);
  auto residual = [&](double z) { return log_g(z, mu) - target; };
  auto residual_and_slope = [&](double z) {
    const double lg = log_g(z, mu);
    const double slope = (2.0 - mu) * std::tanh(mu * z) - std::exp(mu * log_phi1(z, mu) - lg);
    return std::pair{lg - target, slope};
  };

  const auto bracket = numerics::expand_bracket(residual, 0.0, 1.0, 40);
  const double z = numerics::bracketed_newton(residual_and_slope, bracket, 1e-15);

  SolitonParams out;
  out.omega = std::exp(2.0 * mu * (std::log(c.vertex_value) - log_phi1(z, mu)));
  out.shift = z / std::sqrt(out.omega);
  if (!std::isfinite(out.omega) || !(out.omega > 0.0) || !std::isfinite(out.shift))
    throw NumericError("solve_constraint: soliton parameters overflowed");
  return out;
}

HalfLineEnergy halfline_energy(const SolitonParams& p, double mu) {
  require_frequency(p.omega);
  validate_mu(mu);
  const double w = mu * std::sqrt(p.omega) * p.shift;
  const double pref = mass_prefactor(mu);
  HalfLineEnergy e;
  e.mass = pref * std::pow(p.omega, 1.0 / mu - 0.5) * detail::tail_from_shift(w, 1.0 / mu - 1.0);
  // int phi^(2mu+2)
  const double power = pref * (mu + 1.0) * std::pow(p.omega, 1.0 / mu + 0.5) *
                       detail::tail_from_shift(w, 1.0 / mu);
  // first integral: (phi')^2 = omega phi^2 - phi^(2mu+2) / (mu+1)
  e.kinetic = 0.5 * (p.omega * e.mass - power / (mu + 1.0));
  e.nonlinear = power / (2.0 * mu + 2.0);
  return e;
}

double halfline_F(const HalfLineConstraint& c, const ModelParams& params) {
  params.validate();
  const SolitonParams p = solve_constraint(c, params.mu);
  const HalfLineEnergy e = halfline_energy(p, params.mu);
  return e.kinetic - e.nonlinear -
         params.alpha / (2.0 * params.edges) * c.vertex_value * c.vertex_value;
}

double line_soliton_energy(double omega, double mu) {
  const HalfLineEnergy e = halfline_energy({omega, 0.0}, mu);
  return 2.0 * (e.kinetic - e.nonlinear);
}

}  // namespace starnls
