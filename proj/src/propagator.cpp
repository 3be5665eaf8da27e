#include "starnls/propagator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "starnls/errors.hpp"

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

namespace starnls {
namespace {

constexpr cplx kI{0.0, 1.0};
constexpr int kHalfBand = 3;

// Far-field samples decay into the subnormal range, where arithmetic is
// orders of magnitude slower. Flush them to zero for the duration of a step.
class FlushDenormals {
 public:
#if defined(__SSE2__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
  ~FlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

// Boundary block of the stiffness form (unit spacing); beyond it the rows are
// the five-point stencil (1/12, -4/3, 5/2, -4/3, 1/12).
constexpr double kBlock[4][6] = {
    {9.0 / 8.0, -59.0 / 48.0, 1.0 / 12.0, 1.0 / 48.0, 0.0, 0.0},
    {-59.0 / 48.0, 59.0 / 24.0, -59.0 / 48.0, 0.0, 0.0, 0.0},
    {1.0 / 12.0, -59.0 / 48.0, 55.0 / 24.0, -59.0 / 48.0, 1.0 / 12.0, 0.0},
    {1.0 / 48.0, 0.0, -59.0 / 48.0, 59.0 / 24.0, -4.0 / 3.0, 1.0 / 12.0}};
constexpr double kNorm[4] = {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0};
constexpr double kStencil[5] = {1.0 / 12.0, -4.0 / 3.0, 5.0 / 2.0, -4.0 / 3.0, 1.0 / 12.0};

// Stiffness entry between nodes k and j of an edge with nodes 0..n.
double stiffness(std::size_t k, std::size_t j, std::size_t n) {
  auto left = [](std::size_t r, std::size_t c, double& out) {
    if (r <= 3 && c <= 5) return out = kBlock[r][c], true;
    if (c <= 3 && r <= 5) return out = kBlock[c][r], true;
    return false;
  };
  double v = 0.0;
  if (left(k, j, v)) return v;
  if (k + 5 >= n && j + 5 >= n && left(n - k, n - j, v)) return v;
  const auto d = std::ptrdiff_t(j) - std::ptrdiff_t(k);
  return std::abs(d) <= 2 ? kStencil[d + 2] : 0.0;
}

double norm_weight(std::size_t k, std::size_t n) {
  if (k <= 3) return kNorm[k];
  if (k + 3 >= n) return kNorm[n - k];
  return 1.0;
}

// Per-edge discretization data shared by the stepper and the invariants.
struct EdgeOperator {
  std::size_t n = 0;                          // index of the far end
  double dx = 0.0;
  std::vector<double> weight;                 // dx * norm, node 0 = one edge's share
  std::vector<std::array<double, 7>> row;     // stiffness / dx, columns k-3..k+3

  explicit EdgeOperator(const Grid& grid) {
    n = grid.points() - 1;
    dx = grid.step;
    weight.resize(n + 1);
    row.assign(n + 1, {});
    for (std::size_t k = 0; k <= n; ++k) {
      weight[k] = dx * norm_weight(k, n);
      for (int d = -kHalfBand; d <= kHalfBand; ++d) {
        const auto j = std::ptrdiff_t(k) + d;
        if (j < 0 || j > std::ptrdiff_t(n)) continue;
        row[k][std::size_t(d + kHalfBand)] = stiffness(k, std::size_t(j), n) / dx;
      }
    }
  }

  cplx apply_row(std::span<const cplx> e, std::size_t k) const {
    cplx acc = 0.0;
    for (int d = -kHalfBand; d <= kHalfBand; ++d) {
      const auto j = std::ptrdiff_t(k) + d;
      if (j < 0 || j >= std::ptrdiff_t(n)) continue;  // far end is zero
      acc += row[k][std::size_t(d + kHalfBand)] * e[std::size_t(j)];
    }
    return acc;
  }
};

// K psi: gradient of the quadratic part of the discrete energy. The vertex
// entry is stored on every edge.
std::vector<cplx> apply_stiffness(const GraphField& f, const EdgeOperator& op) {
  std::vector<cplx> out(f.data().size(), cplx{});
  cplx vertex = -f.params().alpha * f.vertex_value();
  for (std::size_t j = 0; j < f.edges(); ++j) {
    const auto e = f.edge(j);
    const std::size_t o = j * f.points();
    vertex += op.apply_row(e, 0);
    for (std::size_t k = 1; k < op.n; ++k) out[o + k] = op.apply_row(e, k);
  }
  for (std::size_t j = 0; j < f.edges(); ++j) out[j * f.points()] = vertex;
  return out;
}

Invariants invariants_with(const GraphField& f, const EdgeOperator& op) {
  const double mu = f.params().mu;
  const auto kpsi = apply_stiffness(f, op);
  const double nedge = double(f.edges());
  double mass = 0.0;
  double quad = 0.0;
  double nonlin = 0.0;
  for (std::size_t j = 0; j < f.edges(); ++j) {
    const auto e = f.edge(j);
    const std::size_t o = j * f.points();
    for (std::size_t k = 1; k < op.n; ++k) {
      const double s = std::norm(e[k]);
      mass += op.weight[k] * s;
      nonlin += op.weight[k] * std::pow(s, mu + 1.0);
      quad += (std::conj(e[k]) * kpsi[o + k]).real();
    }
  }
  const cplx u = f.vertex_value();
  const double sv = std::norm(u);
  const double w0 = nedge * op.weight[0];
  mass += w0 * sv;
  nonlin += w0 * std::pow(sv, mu + 1.0);
  quad += (std::conj(u) * kpsi[0]).real();
  return {mass, 0.5 * quad - nonlin / (2.0 * mu + 2.0)};
}

// (s1^(mu+1) - s0^(mu+1)) / ((mu+1)(s1 - s0)) with s = |psi|^2.
double secant_power(double s0, double s1, double mu) {
  if (mu == 1.0) return 0.5 * (s0 + s1);
  const double diff = s1 - s0;
  const double scale = std::max(s0, s1);
  if (scale == 0.0 || std::abs(diff) <= 1e-8 * scale) return std::pow(0.5 * (s0 + s1), mu);
  return (std::pow(s1, mu + 1.0) - std::pow(s0, mu + 1.0)) / ((mu + 1.0) * diff);
}

// LU without pivoting of a band matrix with half-bandwidth 3, stored row-wise
// as columns k-3..k+3. The matrix is W + i c S with W > 0 diagonal and S real
// symmetric, so its Hermitian part is positive definite and no pivoting is needed.
void band_factor(std::vector<cplx>& a, std::size_t size) {
  constexpr int w = 2 * kHalfBand + 1;
  auto at = [&](std::size_t r, std::size_t c) -> cplx& {
    return a[r * w + std::size_t(std::ptrdiff_t(c) - std::ptrdiff_t(r) + kHalfBand)];
  };
  for (std::size_t i = 0; i < size; ++i) {
    const cplx piv = at(i, i);
    for (std::size_t r = i + 1; r < std::min(size, i + kHalfBand + 1); ++r) {
      const cplx l = at(r, i) / piv;
      at(r, i) = l;
      for (std::size_t c = i + 1; c < std::min(size, i + kHalfBand + 1); ++c) at(r, c) -= l * at(i, c);
    }
  }
  for (std::size_t i = 0; i < size; ++i) at(i, i) = 1.0 / at(i, i);  // band_solve multiplies
}

void band_solve(const std::vector<cplx>& a, std::size_t size, std::span<cplx> x) {
  constexpr int w = 2 * kHalfBand + 1;
  auto at = [&](std::size_t r, std::size_t c) {
    return a[r * w + std::size_t(std::ptrdiff_t(c) - std::ptrdiff_t(r) + kHalfBand)];
  };
  for (std::size_t r = 1; r < size; ++r)
    for (std::size_t i = (r > kHalfBand ? r - kHalfBand : 0); i < r; ++i) x[r] -= at(r, i) * x[i];
  for (std::size_t i = size; i-- > 0;) {
    for (std::size_t c = i + 1; c < std::min(size, i + kHalfBand + 1); ++c) x[i] -= at(i, c) * x[c];
    x[i] *= at(i, i);
  }
}

}  // namespace

int PropagatorConfig::steps() const { return int(std::llround(horizon / dt)); }

void PropagatorConfig::validate() const {
  grid().validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("propagator: dt must be > 0");
  if (dt > step) throw DomainError("propagator: dt must not exceed dx");
  if (!(horizon >= dt) || !std::isfinite(horizon))
    throw DomainError("propagator: horizon must be at least one time step");
  if (std::abs(horizon / dt - std::round(horizon / dt)) > 1e-9 * (horizon / dt))
    throw DomainError("propagator: horizon must be a whole number of time steps");
  if (!(tolerance > 0.0)) throw DomainError("propagator: tolerance must be > 0");
  if (max_iterations < 1) throw DomainError("propagator: max_iterations must be >= 1");
  if (!(wall_threshold > 0.0)) throw DomainError("propagator: wall threshold must be > 0");
  if (!(blowup_amplitude > 0.0)) throw DomainError("propagator: blow-up amplitude must be > 0");
  if (record_every < 1) throw DomainError("propagator: record_every must be >= 1");
}

StarPropagator::StarPropagator(ModelParams params, PropagatorConfig cfg)
    : params_(params), cfg_(cfg) {
  params_.validate();
  cfg_.validate();
  const EdgeOperator op(cfg_.grid());
  points_ = op.n + 1;
  weights_ = op.weight;
  const std::size_t m = op.n - 1;  // unknowns 1..n-1 on each edge
  const cplx half = kI * (cfg_.dt / 2.0);
  constexpr int w = 2 * kHalfBand + 1;

  lower_.assign(m * w, cplx{});
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t k = r + 1;
    for (int d = -kHalfBand; d <= kHalfBand; ++d) {
      const auto c = std::ptrdiff_t(r) + d;
      if (c < 0 || c >= std::ptrdiff_t(m)) continue;
      cplx v = half * op.row[k][std::size_t(d + kHalfBand)];
      if (d == 0) v += op.weight[k];
      lower_[r * w + std::size_t(d + kHalfBand)] = v;
    }
  }
  band_factor(lower_, m);

  coupling_.assign(m, cplx{});
  for (std::size_t k = 1; k <= std::size_t(kHalfBand); ++k)
    coupling_[k - 1] = half * op.row[k][std::size_t(kHalfBand - int(k))];
  z_ = coupling_;
  band_solve(lower_, m, z_);

  const double nedge = params_.edges;
  vertex_diag_ = nedge * op.weight[0] + half * (nedge * op.row[0][kHalfBand] - params_.alpha);
  cplx cz = 0.0;
  for (std::size_t k = 0; k < std::size_t(kHalfBand); ++k) cz += coupling_[k] * z_[k];
  schur_ = vertex_diag_ - nedge * cz;
}

GraphField StarPropagator::apply_h(const GraphField& f) const {
  const EdgeOperator op(f.grid());
  const auto kpsi = apply_stiffness(f, op);
  GraphField out(f.params(), f.grid());
  for (std::size_t j = 0; j < f.edges(); ++j) {
    auto o = out.edge(j);
    for (std::size_t k = 1; k < op.n; ++k) o[k] = kpsi[j * f.points() + k] / op.weight[k];
  }
  out.set_vertex(kpsi[0] / (double(f.edges()) * op.weight[0]));
  return out;
}

Invariants StarPropagator::invariants(const GraphField& f) const { return discrete_invariants(f); }

Invariants discrete_invariants(const GraphField& f) {
  return invariants_with(f, EdgeOperator(f.grid()));
}

void StarPropagator::check_amplitudes(const GraphField& f) const {
  double wall = 0.0;
  double peak = 0.0;
  for (std::size_t j = 0; j < f.edges(); ++j) {
    const auto e = f.edge(j);
    wall = std::max(wall, std::abs(e[points_ - 2]));
    for (const auto& z : e) peak = std::max(peak, std::abs(z));
  }
  if (!std::isfinite(peak) || peak > cfg_.blowup_amplitude) {
    std::ostringstream os;
    os << "propagator: blow-up detected, max amplitude " << peak;
    throw NumericError(os.str());
  }
  if (wall > cfg_.wall_threshold) {
    std::ostringstream os;
    os << "propagator: amplitude " << wall << " next to the far wall exceeds "
       << cfg_.wall_threshold << " (radiation reached the truncation)";
    throw NumericError(os.str());
  }
}

int StarPropagator::step(GraphField& f) {
  const FlushDenormals guard;
  if (f.params().edges != params_.edges || f.points() != points_ || f.grid().step != cfg_.step)
    throw DomainError("propagator: field grid does not match the configuration");
  const double dt = cfg_.dt;
  const double mu = params_.mu;
  const std::size_t nedge = f.edges();
  const std::size_t n = points_ - 1;
  const std::size_t m = n - 1;
  const EdgeOperator op(f.grid());
  const double w0 = double(nedge) * weights_[0];
  auto weight = [&](std::size_t i) {
    const std::size_t k = i % points_;
    return k == 0 ? w0 : weights_[k];
  };

  const std::vector<cplx> old(f.data().begin(), f.data().end());
  const auto kpsi = apply_stiffness(f, op);
  std::vector<cplx> base(old.size());
  for (std::size_t i = 0; i < old.size(); ++i)
    base[i] = weight(i) * old[i] - kI * (dt / 2.0) * kpsi[i];

  std::vector<cplx> next(old.size());
  if (have_prev_ && prev_.size() == old.size()) {
    for (std::size_t i = 0; i < old.size(); ++i) next[i] = 2.0 * old[i] - prev_[i];
  } else {
    next = old;
  }

  std::vector<std::vector<cplx>> y(nedge, std::vector<cplx>(m));
  double scale = 1.0;
  for (const auto& z : old) scale = std::max(scale, std::abs(z));

  auto g = [&](std::size_t i) {
    const double s = secant_power(std::norm(old[i]), std::norm(next[i]), mu);
    return kI * dt * weight(i) * s * 0.5 * (old[i] + next[i]);
  };

  int it = 0;
  for (;;) {
    ++it;
    cplx coupled = 0.0;
    for (std::size_t j = 0; j < nedge; ++j) {
      auto& yj = y[j];
      const std::size_t o = j * points_;
      for (std::size_t k = 0; k < m; ++k) yj[k] = base[o + k + 1] + g(o + k + 1);
      band_solve(lower_, m, yj);
      for (std::size_t k = 0; k < std::size_t(kHalfBand); ++k) coupled += coupling_[k] * yj[k];
    }
    const cplx u = (base[0] + g(0) - coupled) / schur_;

    double change = 0.0;  // squared
    for (std::size_t j = 0; j < nedge; ++j) {
      const std::size_t o = j * points_;
      change = std::max(change, std::norm(u - next[o]));
      next[o] = u;
      for (std::size_t k = 0; k < m; ++k) {
        const cplx v = y[j][k] - u * z_[k];
        change = std::max(change, std::norm(v - next[o + k + 1]));
        next[o + k + 1] = v;
      }
      next[o + n] = 0.0;
    }
    if (!std::isfinite(change))
      throw NumericError("propagator: non-finite values in the nonlinear solve");
    if (change <= cfg_.tolerance * cfg_.tolerance * scale * scale) break;
    if (it >= cfg_.max_iterations) {
      std::ostringstream os;
      os << "propagator: fixed-point iteration did not converge in " << it
         << " iterations (last change " << std::sqrt(change) << ")";
      throw NumericError(os.str());
    }
  }
  prev_ = old;
  have_prev_ = true;
  std::copy(next.begin(), next.end(), f.data().begin());
  check_amplitudes(f);
  return it;
}

Invariants evolve(const GraphField& f0, const PropagatorConfig& cfg, const StepObserver& observe) {
  f0.validate();
  if (f0.grid().step != cfg.step || f0.points() != cfg.grid().points())
    throw DomainError("evolve: field grid does not match the configuration");
  StarPropagator prop(f0.params(), cfg);
  GraphField f = f0;
  Invariants inv = prop.invariants(f);
  if (observe) observe(0.0, f, inv);
  const int steps = cfg.steps();
  for (int s = 1; s <= steps; ++s) {
    prop.step(f);
    inv = prop.invariants(f);
    if (observe) observe(s * cfg.dt, f, inv);
  }
  return inv;
}

Trajectory evolve(const GraphField& f0, const PropagatorConfig& cfg) {
  Trajectory tr;
  const int steps = cfg.steps();
  int count = 0;
  evolve(f0, cfg, [&](double t, const GraphField& f, const Invariants& inv) {
    tr.times.push_back(t);
    tr.invariants.push_back(inv);
    if (count % cfg.record_every == 0 || count == steps) tr.snapshots.push_back({t, f});
    ++count;
  });
  return tr;
}

}  // namespace starnls
