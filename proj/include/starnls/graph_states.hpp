#pragma once

#include <Eigen/Dense>
#include <vector>

#include "starnls/field.hpp"
#include "starnls/params.hpp"

namespace starnls {

/// Coordinates (m_1..m_{N-1}, a) of a multi-soliton of total mass M. The last
/// edge carries M - sum(m_i).
struct ManifoldPoint {
  std::vector<double> masses;
  double vertex_value = 0.0;
  double total_mass = 0.0;

  double last_mass() const;
  /// Mass carried by edge j, 0 <= j < N.
  double edge_mass(std::size_t j) const;
  /// Rejects points within 1e-9 of the manifold boundary.
  void validate(const ModelParams& params) const;

  Eigen::VectorXd coordinates() const;
  static ManifoldPoint from_coordinates(const Eigen::VectorXd& x, double total_mass);
};

/// The symmetric stationary state: every edge carries phi_omega(x + shift).
struct SymmetricState {
  double omega = 0.0;
  double shift = 0.0;         // zeta
  double vertex_value = 0.0;  // tilde a
  double mass = 0.0;
};

SymmetricState symmetric_state(double omega, const ModelParams& params);
SymmetricState symmetric_state_of_mass(double mass, const ModelParams& params);

double mass_of_omega(double omega, const ModelParams& params);
double omega_of_mass(double mass, const ModelParams& params);
/// Frequency of the full-line soliton of mass M.
double omega_line_of_mass(double mass, double mu);

/// The point (M/N, ..., M/N, a) representing the symmetric state, with a
/// found from the fixed-point equation on the vertex value.
ManifoldPoint tilde_point(double mass, const ModelParams& params);

/// Writes phi_omega(x_k + shift) into `out`. Throws DomainError if the tail
/// beyond the grid end carries more than 1e-12 mass.
void sample_soliton_piece(std::span<cplx> out, const SolitonParams& sp, double mu,
                          const Grid& grid);

/// Samples the multi-soliton of P on `grid`. Throws DomainError if a soliton
/// tail beyond the grid end carries more than 1e-12 mass.
GraphField build_multisoliton(const ManifoldPoint& p, const ModelParams& params, const Grid& grid);
GraphField sample_symmetric_state(const SymmetricState& s, const ModelParams& params,
                                  const Grid& grid);

double reduced_energy(const ManifoldPoint& p, const ModelParams& params);
Eigen::VectorXd reduced_gradient(const ManifoldPoint& p, const ModelParams& params);
Eigen::MatrixXd reduced_hessian(const ManifoldPoint& p, const ModelParams& params);

struct GroundStateCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// (2-mu) omega_R M <= (2-mu) omega M + alpha mu (mu+1)^(1/mu) (omega - alpha^2/N^2),
/// necessary for the symmetric state of mass M to be a ground state.
GroundStateCheck ground_state_inequality(double mass, const ModelParams& params);

/// Mass above which the ground-state inequality fails. Throws DomainError for
/// N = 2, where it never fails.
double threshold_mass(const ModelParams& params);

/// Energy of the symmetric state of mass M on the graph.
double symmetric_state_energy(double mass, const ModelParams& params);

}  // namespace starnls
