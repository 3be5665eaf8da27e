#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "starnls/params.hpp"

namespace starnls {

using cplx = std::complex<double>;

/// Uniform grid [0, length] with spacing `step`, shared by every edge.
struct Grid {
  double length = 40.0;
  double step = 0.01;

  /// Number of samples per edge, endpoints included.
  std::size_t points() const;
  double x(std::size_t k) const { return double(k) * step; }
  /// Throws DomainError unless length/step is a whole number of at least 16 cells.
  void validate() const;
};

/// N sampled complex functions on the truncated edges of a star graph.
///
/// Invariants (checked by validate()): sample 0 is the vertex value and is
/// identical on every edge; the sample at x = length is zero.
class GraphField {
 public:
  GraphField(ModelParams params, Grid grid);

  const ModelParams& params() const { return params_; }
  const Grid& grid() const { return grid_; }
  std::size_t edges() const { return std::size_t(params_.edges); }
  std::size_t points() const { return points_; }

  std::span<cplx> edge(std::size_t j) { return {data_.data() + j * points_, points_}; }
  std::span<const cplx> edge(std::size_t j) const { return {data_.data() + j * points_, points_}; }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  cplx vertex_value() const { return data_.front(); }
  /// Writes v into sample 0 of every edge.
  void set_vertex(cplx v);
  /// Zeroes the far-end sample of every edge.
  void clamp_far_end();

  void validate() const;

  GraphField& operator+=(const GraphField& other);
  GraphField& operator-=(const GraphField& other);
  GraphField& operator*=(cplx s);

 private:
  void require_compatible(const GraphField& other) const;

  ModelParams params_;
  Grid grid_;
  std::size_t points_;
  std::vector<cplx> data_;
};

GraphField operator+(GraphField a, const GraphField& b);
GraphField operator-(GraphField a, const GraphField& b);
GraphField operator*(cplx s, GraphField a);

/// Field on the symmetric grid [-length, length]; samples[center()] is x = 0.
struct LineField {
  std::vector<cplx> samples;
  double step = 0.01;

  std::size_t center() const { return samples.size() / 2; }
};

/// Terms of E = 1/2 |Psi'|^2 - |Psi|^(2mu+2)/(2mu+2) - (alpha/2)|Psi(v)|^2.
struct EnergyReport {
  double mass = 0.0;
  double kinetic = 0.0;
  double nonlinear = 0.0;
  double vertex = 0.0;
  double total = 0.0;
};

namespace quadrature {

/// int_0^L f for samples on a uniform grid; trapezoid with Gregory end
/// corrections (sixth order). Needs at least 11 samples.
double halfline_integral(std::span<const double> f, double step);

/// Sixth-order finite-difference derivative: centred in the interior,
/// one-sided seven-point stencils at both ends.
std::vector<cplx> derivative(std::span<const cplx> f, double step);

}  // namespace quadrature

/// Mass, kinetic and nonlinear terms of samples on [0, L]; vertex = 0.
EnergyReport halfline_terms(std::span<const cplx> e, double step, double mu);

double edge_mass(const GraphField& f, std::size_t j);
double graph_mass(const GraphField& f);
EnergyReport graph_energy(const GraphField& f);

/// <f, g>_{H^1} = sum over edges of int conj(f) g + conj(f') g'.
cplx h1_inner(const GraphField& f, const GraphField& g);
double h1_norm(const GraphField& f);

}  // namespace starnls
