#pragma once

#include <cstddef>

namespace starnls {

/// Star graph with `edges` half-lines, attractive delta of strength `alpha`
/// at the vertex, focusing nonlinearity of power 2*mu + 1.
struct ModelParams {
  int edges = 3;
  double alpha = 1.0;
  double mu = 1.0;

  /// Throws DomainError unless edges >= 2, alpha > 0 and 0 < mu < 2.
  void validate() const;

  /// alpha^2 / N^2, the lower end of the symmetric-state frequency range.
  double frequency_floor() const { return alpha * alpha / (double(edges) * edges); }
};

/// One soliton piece phi_omega(x + shift).
struct SolitonParams {
  double omega = 1.0;
  double shift = 0.0;
};

/// Half-line data: mass on [0, inf) and value at the edge origin.
struct HalfLineConstraint {
  double mass = 1.0;
  double vertex_value = 1.0;
};

void validate_mu(double mu);

}  // namespace starnls
