#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "starnls/field.hpp"
#include "starnls/graph_states.hpp"
#include "starnls/params.hpp"
#include "starnls/propagator.hpp"

namespace starnls {

/// min over theta of |F - e^{i theta} ref|_{H^1}, attained at
/// theta* = arg <ref, F>_{H^1}.
double orbital_distance(const GraphField& f, const GraphField& ref);
double orbital_distance(const GraphField& f, const SymmetricState& ref);
/// arg <ref, F>_{L^2}; diagnostic companion of the H^1 phase.
double l2_phase(const GraphField& f, const GraphField& ref);

struct PerturbationShape {
  std::uint64_t seed = 1;
  int bumps_per_edge = 3;
  double min_width = 1.5;
  double max_width = 2.5;
  double max_spread = 10.0;
  /// Bump centres start at clearance * width from the vertex and end at
  /// least clearance * width before the far end. With clearance > 0 the
  /// perturbation is numerically zero near the vertex; with 0 the centres
  /// start at the vertex and the vertex values are averaged across edges.
  double clearance = 7.0;
  bool complex_valued = true;
};

/// Sum of Gaussian bumps on every edge with random centres, widths and
/// amplitudes, made continuous at the vertex. Normalized to unit H^1 norm.
/// Deterministic in the seed.
GraphField smooth_perturbation(const ModelParams& params, const Grid& grid,
                               const PerturbationShape& shape);

/// Scales f by a positive factor so that graph_mass(f) == mass.
void project_to_mass(GraphField& f, double mass);

struct StabilityConfig {
  PropagatorConfig propagation{};
  PerturbationShape perturbation{};
  int sample_every = 10;        // steps between orbital-distance samples
  double pass_factor = 5.0;
  double distance_floor = 1e-4;  // discretization floor used by the pass rule
};

struct StabilityTrace {
  std::vector<double> times;
  std::vector<double> orbital_distance;
  std::vector<double> mass_drift;    // relative, against t = 0
  std::vector<double> energy_drift;  // relative, against t = 0
  double initial_distance = 0.0;
  double max_distance = 0.0;
  double max_mass_drift = 0.0;
  double max_energy_drift = 0.0;
  double omega = 0.0;
  /// max_distance <= pass_factor * max(initial_distance, distance_floor)
  bool pass = false;
};

/// Evolves f0 and tracks its orbital distance to the symmetric state `ref`.
StabilityTrace track_orbit(const GraphField& f0, const SymmetricState& ref,
                           const StabilityConfig& cfg);

/// Psi_omega of mass M plus a perturbation of H^1 size eps * |Psi_omega|_{H^1},
/// brought back to mass M, then tracked with track_orbit.
StabilityTrace stability_run(double mass, double eps, const ModelParams& params,
                             const StabilityConfig& cfg);

/// Perturbed initial datum used by stability_run: Psi_w + delta with w
/// chosen so that the mass is M. Rescaling the sum instead would leave the
/// vertex region off the stationary profile and radiate high frequencies.
GraphField perturbed_state(double mass, double eps, const ModelParams& params, const Grid& grid,
                           const PerturbationShape& shape);

struct ProbeSample {
  double size = 0.0;      // H^1 size of the raw perturbation
  double distance = 0.0;  // orbital distance after mass projection
  double gap = 0.0;       // E(Phi) - E(Psi_omega)
};

struct ProbeReport {
  std::vector<ProbeSample> samples;
  double min_gap = 0.0;
  double min_gap_beyond = 0.0;  // over samples with distance > distance_cut
  std::size_t count_beyond = 0;
  double distance_cut = 1e-3;
};

/// Random real perturbations of H^1 size uniform in (0, radius], projected to
/// mass M by rescaling, compared in energy with Psi_omega.
ProbeReport local_min_probe(double mass, double radius, int samples, const ModelParams& params,
                            const Grid& grid, std::uint64_t seed, double distance_cut = 1e-3);

struct TransferGap {
  double t = 0.0;
  double energy_gap = 0.0;  // E_r(P(t)) - E_r(P~)
  double l2_gap = 0.0;      // |tau Phi(t) - tau Psi_omega|^2_{L^2}
};

/// Mass transfer m_1 = M/N + t, m_2 = M/N - t at fixed vertex value a~,
/// folded along edges 1 and 2. Gaps use closed-form profiles and adaptive
/// quadrature, not grid samples.
std::vector<TransferGap> mass_transfer_gap(double mass, const std::vector<double>& t_values,
                                           const ModelParams& params);

struct GapFit {
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  /// 2 c2: second derivative at t = 0.
  double curvature() const { return 2.0 * c2; }
};

/// Least-squares fit of c2 t^2 + c3 t^3 + c4 t^4 to the L2 (or energy) gap on
/// `points` values of t spread over [-t_max, t_max].
GapFit fit_transfer_gap(double mass, const ModelParams& params, double t_max, int points,
                        bool energy = false);

void write_trace_csv(std::ostream& out, const StabilityTrace& trace);

}  // namespace starnls
