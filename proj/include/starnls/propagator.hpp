#pragma once

#include <functional>
#include <vector>

#include "starnls/field.hpp"
#include "starnls/params.hpp"

namespace starnls {

struct PropagatorConfig {
  double length = 40.0;
  double step = 0.01;
  double dt = 0.005;
  double horizon = 20.0;
  double tolerance = 1e-12;  // fixed-point tolerance, relative to max |psi|
  int max_iterations = 100;
  double wall_threshold = 1e-8;
  double blowup_amplitude = 1e6;
  int record_every = 20;  // steps between stored snapshots

  Grid grid() const { return {length, step}; }
  int steps() const;
  /// Throws DomainError on non-positive sizes, dt > dx or a horizon below dt.
  void validate() const;
};

/// Discrete mass and energy conserved exactly (up to the fixed-point
/// tolerance) by the scheme.
struct Invariants {
  double mass = 0.0;
  double energy = 0.0;
};

/// Crank-Nicolson stepper for i psi_t = H psi - |psi|^(2mu) psi on the
/// truncated star graph, with zero Dirichlet data at x = L.
///
/// Space is discretized by a fourth-order summation-by-parts operator with
/// a diagonal norm. The vertex row is its variational closure, so continuity
/// and sum psi_j'(0) = -alpha psi(v) hold in the weak sense, H is
/// self-adjoint in the weighted inner product, and the discrete mass and
/// energy below are exact invariants of the scheme.
class StarPropagator {
 public:
  StarPropagator(ModelParams params, PropagatorConfig cfg);

  /// Advances f by one time step in place. Returns the number of
  /// fixed-point iterations used.
  int step(GraphField& f);

  Invariants invariants(const GraphField& f) const;
  /// Discrete H applied to f (far-end sample left at zero).
  GraphField apply_h(const GraphField& f) const;

  const PropagatorConfig& config() const { return cfg_; }

 private:
  void check_amplitudes(const GraphField& f) const;

  ModelParams params_;
  PropagatorConfig cfg_;
  std::size_t points_;
  std::vector<double> weights_;       // quadrature weights on one edge, vertex share included
  std::vector<cplx> lower_;           // banded LU of the edge block of W + i dt/2 K
  std::vector<cplx> coupling_;        // edge rows 1..3 against the vertex
  std::vector<cplx> z_;               // edge block inverse applied to coupling_
  cplx vertex_diag_;
  cplx schur_;
  std::vector<cplx> prev_;
  bool have_prev_ = false;
};

struct Snapshot {
  double time = 0.0;
  GraphField field;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<double> times;  // every step, t = 0 included
  std::vector<Invariants> invariants;
};

using StepObserver = std::function<void(double time, const GraphField& f, const Invariants& inv)>;

/// Runs the propagator over [0, horizon], calling `observe` at t = 0 and
/// after every step. Throws NumericError on non-convergence, blow-up or when
/// the amplitude next to the far wall exceeds the threshold.
Invariants evolve(const GraphField& f0, const PropagatorConfig& cfg, const StepObserver& observe);

/// Same, storing a snapshot every `record_every` steps plus the final state.
Trajectory evolve(const GraphField& f0, const PropagatorConfig& cfg);

/// Discrete mass and energy of the scheme, without building a propagator.
Invariants discrete_invariants(const GraphField& f);

}  // namespace starnls
