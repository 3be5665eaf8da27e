#pragma once

#include <cstddef>
#include <span>

#include "starnls/field.hpp"
#include "starnls/params.hpp"

namespace starnls {

/// (omega, shift) of the soliton piece with the same half-line mass and
/// vertex modulus as the sampled edge. Throws DomainError if |edge[0]| == 0.
SolitonParams soliton_transform(std::span<const cplx> edge, const Grid& grid, double mu);

/// Replaces every edge by its soliton transform, sampled on the same grid.
/// The result is real, positive and has vertex value |F(v)|.
GraphField multisoliton_transform(const GraphField& f);

/// Line function equal to edge i on x > 0 and to edge j mirrored on x < 0.
LineField tau_fold(const GraphField& f, std::size_t i, std::size_t j);

double line_mass(const LineField& u);

/// 1/2 |u'|^2 - |u|^(2mu+2)/(2mu+2) - strength/2 |u(0)|^2. The two half-lines
/// are integrated separately so a kink at the origin is handled exactly.
double line_energy_delta(const LineField& u, double strength, double mu);

/// Plain line energy without point interaction.
double line_energy(const LineField& u, double mu);

}  // namespace starnls
