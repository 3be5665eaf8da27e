#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "starnls/field.hpp"
#include "starnls/transform.hpp"

namespace starnls::testing {

// Random smooth field: a shared vertex bump plus per-edge Gaussians whose
// values at 0 are cancelled by a unit-width correction, so the field is
// continuous with vertex value v != 0.
inline GraphField random_smooth_field(std::uint64_t seed, const ModelParams& params, const Grid& grid) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> vamp(0.8, 1.5), amp(0.2, 1.0), width(0.6, 2.5),
      centre(0.0, 8.0), phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> count(1, 3);
  GraphField f(params, grid);
  const cplx v = std::polar(vamp(rng), phase(rng));
  const double s0 = width(rng);
  for (std::size_t j = 0; j < f.edges(); ++j) {
    struct Bump {
      cplx a;
      double c, w;
    };
    std::vector<Bump> bumps(std::size_t(count(rng)));
    for (auto& b : bumps) b = {std::polar(amp(rng), phase(rng)), centre(rng), width(rng)};
    auto raw = [&](double x) {
      cplx s = 0.0;
      for (const auto& b : bumps) s += b.a * std::exp(-std::pow((x - b.c) / b.w, 2));
      return s;
    };
    const cplx at0 = raw(0.0);
    auto e = f.edge(j);
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
      const double x = grid.x(k);
      e[k] = v * std::exp(-std::pow(x / s0, 2)) + raw(x) - at0 * std::exp(-x * x);
    }
    e[0] = v;
  }
  return f;
}

// Sigma maps every edge to a soliton piece; pieces with omega above
// `omega_max` are too narrow to sample on the grid.
inline bool transform_resolved(const GraphField& f, double omega_max = 25.0) {
  for (std::size_t j = 0; j < f.edges(); ++j)
    if (soliton_transform(f.edge(j), f.grid(), f.params().mu).omega > omega_max) return false;
  return true;
}

inline double max_abs_diff(const GraphField& a, const GraphField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace starnls::testing
