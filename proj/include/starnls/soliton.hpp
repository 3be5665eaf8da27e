#pragma once

#include "starnls/params.hpp"

namespace starnls {

/// phi_omega(x + shift) with phi_omega(y) = [(mu+1) omega]^(1/2mu) sech^(1/mu)(mu sqrt(omega) y).
double soliton_value(const SolitonParams& p, double mu, double x);

/// d/dx phi_omega(x + shift) = -sqrt(omega) tanh(mu sqrt(omega) (x + shift)) phi_omega(x + shift).
double soliton_derivative(const SolitonParams& p, double mu, double x);

/// Mass of the full-line soliton phi_omega.
double line_soliton_mass(double omega, double mu);

/// Mass of phi_omega(. + shift) on [0, inf).
double halfline_mass(const SolitonParams& p, double mu);

/// g(z) = phi_1(z)^-(2-mu) * int_0^inf phi_1(x+z)^2 dx. Positive and strictly
/// decreasing; g(sqrt(omega) xi) = m / a^(2-mu) ties a soliton piece to its
/// half-line mass m and origin value a.
double g_eval(double z, double mu);
double log_g(double z, double mu);

/// The unique (omega, shift) whose soliton piece has half-line mass c.mass and
/// origin value c.vertex_value. Throws DomainError for non-positive data and
/// NumericError if the root search fails.
SolitonParams solve_constraint(const HalfLineConstraint& c, double mu);

/// Terms of the half-line energy of a soliton piece, in closed form.
struct HalfLineEnergy {
  double mass = 0.0;
  double kinetic = 0.0;    // 1/2 int |phi'|^2
  double nonlinear = 0.0;  // 1/(2mu+2) int |phi|^(2mu+2)
};

HalfLineEnergy halfline_energy(const SolitonParams& p, double mu);

/// F(m, a): half-line energy of the constrained minimizer minus the
/// per-edge share alpha a^2 / (2N) of the vertex term.
double halfline_F(const HalfLineConstraint& c, const ModelParams& params);

/// Energy of the full-line soliton phi_omega (no point interaction).
double line_soliton_energy(double omega, double mu);

namespace detail {

/// int_{1-u}^{1} (1 - t^2)^p dt for u in [0, 2], p > -1.
double tail_from_gap(double u, double p);
/// int_{tanh w}^{1} (1 - t^2)^p dt, accurate for large |w|.
double tail_from_shift(double w, double p);
double log_tail_from_shift(double w, double p);

double log_cosh(double x);

}  // namespace detail
}  // namespace starnls
