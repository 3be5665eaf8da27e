#include "starnls/transform.hpp"

#include <cmath>
#include <vector>

#include "starnls/errors.hpp"
#include "starnls/graph_states.hpp"
#include "starnls/soliton.hpp"

namespace starnls {
namespace {

struct Halves {
  std::vector<cplx> right;
  std::vector<cplx> left;  // u(-x) for x >= 0
};

Halves split(const LineField& u) {
  if (u.samples.size() % 2 == 0 || u.samples.size() < 21)
    throw DomainError("line field: need an odd number (>= 21) of samples");
  if (!(u.step > 0.0)) throw DomainError("line field: step must be > 0");
  const std::size_t c = u.center();
  Halves h;
  h.right.assign(u.samples.begin() + std::ptrdiff_t(c), u.samples.end());
  h.left.assign(u.samples.rbegin() + std::ptrdiff_t(c), u.samples.rend());
  return h;
}

}  // namespace

SolitonParams soliton_transform(std::span<const cplx> edge, const Grid& grid, double mu) {
  validate_mu(mu);
  grid.validate();
  if (edge.size() != grid.points()) throw DomainError("soliton_transform: edge does not match grid");
  const double a = std::abs(edge[0]);
  if (!(a > 0.0)) throw DomainError("soliton_transform: undefined for vanishing vertex value");
  const double m = halfline_terms(edge, grid.step, mu).mass;
  return solve_constraint({m, a}, mu);
}

GraphField multisoliton_transform(const GraphField& f) {
  f.validate();
  const double a = std::abs(f.vertex_value());
  if (!(a > 0.0)) throw DomainError("multisoliton_transform: undefined for vanishing vertex value");
  GraphField out(f.params(), f.grid());
  for (std::size_t j = 0; j < f.edges(); ++j) {
    const SolitonParams sp = soliton_transform(f.edge(j), f.grid(), f.params().mu);
    sample_soliton_piece(out.edge(j), sp, f.params().mu, f.grid());
  }
  out.set_vertex(a);
  out.clamp_far_end();
  return out;
}

LineField tau_fold(const GraphField& f, std::size_t i, std::size_t j) {
  if (i >= f.edges() || j >= f.edges() || i == j)
    throw DomainError("tau_fold: need two distinct valid edge indices");
  const auto ei = f.edge(i);
  const auto ej = f.edge(j);
  const std::size_t p = f.points();
  LineField u;
  u.step = f.grid().step;
  u.samples.resize(2 * p - 1);
  for (std::size_t k = 0; k < p; ++k) {
    u.samples[p - 1 + k] = ei[k];
    u.samples[p - 1 - k] = ej[k];
  }
  return u;
}

double line_mass(const LineField& u) {
  const Halves h = split(u);
  return halfline_terms(h.right, u.step, 1.0).mass + halfline_terms(h.left, u.step, 1.0).mass;
}

double line_energy(const LineField& u, double mu) {
  validate_mu(mu);
  const Halves h = split(u);
  return halfline_terms(h.right, u.step, mu).total + halfline_terms(h.left, u.step, mu).total;
}

double line_energy_delta(const LineField& u, double strength, double mu) {
  return line_energy(u, mu) - 0.5 * strength * std::norm(u.samples[u.center()]);
}

}  // namespace starnls
