#include "starnls/stability.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "starnls/errors.hpp"
#include "starnls/numerics.hpp"
#include "starnls/soliton.hpp"
#include "starnls/transform.hpp"

namespace starnls {

double orbital_distance(const GraphField& f, const GraphField& ref) {
  const cplx overlap = h1_inner(ref, f);
  const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx{1.0, 0.0};
  GraphField diff = f;
  diff -= phase * ref;
  return h1_norm(diff);
}

double orbital_distance(const GraphField& f, const SymmetricState& ref) {
  return orbital_distance(f, sample_symmetric_state(ref, f.params(), f.grid()));
}

double l2_phase(const GraphField& f, const GraphField& ref) {
  cplx acc = 0.0;
  std::vector<double> re(f.points()), im(f.points());
  for (std::size_t j = 0; j < f.edges(); ++j) {
    const auto a = ref.edge(j);
    const auto b = f.edge(j);
    for (std::size_t k = 0; k < a.size(); ++k) {
      const cplx v = std::conj(a[k]) * b[k];
      re[k] = v.real();
      im[k] = v.imag();
    }
    acc += cplx(quadrature::halfline_integral(re, f.grid().step),
                quadrature::halfline_integral(im, f.grid().step));
  }
  return std::arg(acc);
}

GraphField smooth_perturbation(const ModelParams& params, const Grid& grid,
                               const PerturbationShape& shape) {
  if (shape.bumps_per_edge < 1) throw DomainError("perturbation: need at least one bump per edge");
  if (!(shape.min_width > 0.0) || shape.max_width < shape.min_width)
    throw DomainError("perturbation: bad width range");
  if (!(shape.clearance >= 0.0) || !(shape.max_spread >= 0.0))
    throw DomainError("perturbation: clearance and spread must be >= 0");
  if (2.0 * shape.clearance * shape.max_width >= grid.length)
    throw DomainError("perturbation: grid too short for the requested bump clearance");
  GraphField f(params, grid);
  std::mt19937_64 rng(shape.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<cplx> origin(f.edges());
  for (std::size_t j = 0; j < f.edges(); ++j) {
    auto e = f.edge(j);
    for (int b = 0; b < shape.bumps_per_edge; ++b) {
      const double w = shape.min_width + (shape.max_width - shape.min_width) * unit(rng);
      const double room = grid.length - 2.0 * shape.clearance * w;
      const double spread = std::clamp(std::min(shape.max_spread, room), 0.0, grid.length / 4.0);
      const double c = shape.clearance * w + spread * unit(rng);
      const double re = 2.0 * unit(rng) - 1.0;
      const double im = shape.complex_valued ? 2.0 * unit(rng) - 1.0 : 0.0;
      for (std::size_t k = 0; k < e.size(); ++k) {
        const double y = (grid.x(k) - c) / w;
        e[k] += cplx(re, im) * std::exp(-0.5 * y * y);
      }
    }
    origin[j] = e[0];
  }
  cplx mean = 0.0;
  for (const auto& v : origin) mean += v;
  mean /= double(f.edges());
  for (std::size_t j = 0; j < f.edges(); ++j) {
    auto e = f.edge(j);
    const cplx fix = mean - origin[j];
    if (fix == cplx{}) continue;
    for (std::size_t k = 0; k < e.size(); ++k) e[k] += fix * std::exp(-0.5 * grid.x(k) * grid.x(k));
  }
  f.set_vertex(mean);
  f.clamp_far_end();
  const double norm = h1_norm(f);
  if (!(norm > 0.0)) throw NumericError("perturbation: vanishing H1 norm");
  f *= 1.0 / norm;
  return f;
}

void project_to_mass(GraphField& f, double mass) {
  if (!(mass > 0.0)) throw DomainError("project_to_mass: mass must be > 0");
  const double q = graph_mass(f);
  if (!(q > 0.0)) throw DomainError("project_to_mass: field has zero mass");
  f *= std::sqrt(mass / q);
}

GraphField perturbed_state(double mass, double eps, const ModelParams& params, const Grid& grid,
                           const PerturbationShape& shape) {
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw DomainError("perturbation size must be finite and >= 0");
  const SymmetricState s = symmetric_state_of_mass(mass, params);
  GraphField delta(params, grid);
  if (eps > 0.0) {
    delta = smooth_perturbation(params, grid, shape);
    delta *= eps * h1_norm(sample_symmetric_state(s, params, grid));
  }
  const double floor = params.frequency_floor();
  auto build = [&](double y) {
    GraphField f = sample_symmetric_state(symmetric_state(floor + std::exp(y), params), params, grid);
    f += delta;
    return f;
  };
  auto excess_mass = [&](double y) { return std::log(graph_mass(build(y)) / mass); };
  const auto bracket = numerics::expand_bracket(excess_mass, std::log(s.omega - floor), 0.1, 40);
  const double y = numerics::bracketed_secant(excess_mass, bracket, 1e-15);
  GraphField f = build(y);
  f.validate();
  return f;
}

StabilityTrace track_orbit(const GraphField& f0, const SymmetricState& ref,
                           const StabilityConfig& cfg) {
  if (cfg.sample_every < 1) throw DomainError("stability: sample_every must be >= 1");
  if (!(cfg.pass_factor > 0.0)) throw DomainError("stability: pass factor must be > 0");
  const GraphField reference = sample_symmetric_state(ref, f0.params(), f0.grid());
  StabilityTrace tr;
  tr.omega = ref.omega;
  const int steps = cfg.propagation.steps();
  int count = 0;
  Invariants inv0;
  evolve(f0, cfg.propagation, [&](double t, const GraphField& f, const Invariants& inv) {
    if (count == 0) inv0 = inv;
    if (count % cfg.sample_every == 0 || count == steps) {
      tr.times.push_back(t);
      tr.orbital_distance.push_back(orbital_distance(f, reference));
      tr.mass_drift.push_back(std::abs(inv.mass - inv0.mass) / std::abs(inv0.mass));
      tr.energy_drift.push_back(std::abs(inv.energy - inv0.energy) / std::abs(inv0.energy));
    }
    ++count;
  });
  tr.initial_distance = tr.orbital_distance.front();
  tr.max_distance = *std::max_element(tr.orbital_distance.begin(), tr.orbital_distance.end());
  tr.max_mass_drift = *std::max_element(tr.mass_drift.begin(), tr.mass_drift.end());
  tr.max_energy_drift = *std::max_element(tr.energy_drift.begin(), tr.energy_drift.end());
  tr.pass = tr.max_distance <= cfg.pass_factor * std::max(tr.initial_distance, cfg.distance_floor);
  return tr;
}

StabilityTrace stability_run(double mass, double eps, const ModelParams& params,
                             const StabilityConfig& cfg) {
  const SymmetricState s = symmetric_state_of_mass(mass, params);
  const GraphField f0 = perturbed_state(mass, eps, params, cfg.propagation.grid(), cfg.perturbation);
  return track_orbit(f0, s, cfg);
}

ProbeReport local_min_probe(double mass, double radius, int samples, const ModelParams& params,
                            const Grid& grid, std::uint64_t seed, double distance_cut) {
  if (!(radius > 0.0) || radius > 0.1) throw DomainError("probe: radius must lie in (0, 0.1]");
  if (samples < 1) throw DomainError("probe: need at least one sample");
  const SymmetricState s = symmetric_state_of_mass(mass, params);
  GraphField psi = sample_symmetric_state(s, params, grid);
  project_to_mass(psi, mass);
  const double e_ref = graph_energy(psi).total;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ProbeReport rep;
  rep.distance_cut = distance_cut;
  rep.min_gap = std::numeric_limits<double>::infinity();
  rep.min_gap_beyond = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    PerturbationShape shape;
    shape.seed = rng();
    shape.complex_valued = false;
    const double size = radius * (1.0 - unit(rng));  // (0, radius]
    GraphField phi = psi;
    phi += size * smooth_perturbation(params, grid, shape);
    project_to_mass(phi, mass);
    ProbeSample smp;
    smp.size = size;
    smp.distance = orbital_distance(phi, psi);
    smp.gap = graph_energy(phi).total - e_ref;
    rep.min_gap = std::min(rep.min_gap, smp.gap);
    if (smp.distance > distance_cut) {
      ++rep.count_beyond;
      rep.min_gap_beyond = std::min(rep.min_gap_beyond, smp.gap);
    }
    rep.samples.push_back(smp);
  }
  return rep;
}

namespace {

ManifoldPoint transfer_point(const ManifoldPoint& base, double t) {
  ManifoldPoint p = base;
  p.masses[0] += t;
  if (p.masses.size() > 1) p.masses[1] -= t;
  return p;
}

double piece_l2_gap(const SolitonParams& a, const SolitonParams& b, double mu) {
  const double slow = std::sqrt(std::min(a.omega, b.omega));
  const double fast = std::sqrt(std::max(a.omega, b.omega));
  const double reach = std::max({0.0, -a.shift, -b.shift}) + 80.0 / (mu * slow);
  const double seg = 2.0 / (mu * fast);
  const int pieces = std::max(1, int(std::ceil(reach / seg)));
  double total = 0.0;
  for (int i = 0; i < pieces; ++i) {
    const double lo = reach * i / pieces;
    const double hi = reach * (i + 1) / pieces;
    // segments are shorter than the distance to the nearest complex pole of
    // the profiles, so a fixed Gauss rule is exact to rounding; adaptive
    // refinement would chase the cancellation in a - b instead
    total += boost::math::quadrature::gauss<double, 30>::integrate(
        [&](double x) {
          const double d = soliton_value(a, mu, x) - soliton_value(b, mu, x);
          return d * d;
        },
        lo, hi);
  }
  return total;
}

}  // namespace

std::vector<TransferGap> mass_transfer_gap(double mass, const std::vector<double>& t_values,
                                           const ModelParams& params) {
  const ManifoldPoint base = tilde_point(mass, params);
  const double m = mass / params.edges;
  const double e_ref = reduced_energy(base, params);
  const SymmetricState s = symmetric_state_of_mass(mass, params);
  const SolitonParams ref{s.omega, s.shift};
  std::vector<TransferGap> out;
  for (double t : t_values) {
    if (!(std::abs(t) < m)) throw DomainError("mass_transfer_gap: |t| must be below M/N");
    const ManifoldPoint p = transfer_point(base, t);
    TransferGap g;
    g.t = t;
    g.energy_gap = t == 0.0 ? 0.0 : reduced_energy(p, params) - e_ref;
    if (t != 0.0) {
      const SolitonParams up = solve_constraint({m + t, base.vertex_value}, params.mu);
      const SolitonParams down = solve_constraint({m - t, base.vertex_value}, params.mu);
      g.l2_gap = piece_l2_gap(up, ref, params.mu) + piece_l2_gap(down, ref, params.mu);
    }
    out.push_back(g);
  }
  return out;
}

GapFit fit_transfer_gap(double mass, const ModelParams& params, double t_max, int points,
                        bool energy) {
  if (points < 3) throw DomainError("fit_transfer_gap: need at least 3 points");
  std::vector<double> ts;
  for (int i = 0; i < points; ++i) {
    const double t = -t_max + 2.0 * t_max * (i + 0.5) / points;
    ts.push_back(t);
  }
  const auto gaps = mass_transfer_gap(mass, ts, params);
  Eigen::MatrixXd a(points, 3);
  Eigen::VectorXd b(points);
  for (int i = 0; i < points; ++i) {
    const double t = ts[std::size_t(i)];
    a(i, 0) = t * t;
    a(i, 1) = t * t * t;
    a(i, 2) = t * t * t * t;
    b(i) = energy ? gaps[std::size_t(i)].energy_gap : gaps[std::size_t(i)].l2_gap;
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return {c(0), c(1), c(2)};
}

void write_trace_csv(std::ostream& out, const StabilityTrace& trace) {
  out << "t,orbital_distance,mass_drift,energy_drift\n";
  char buf[128];
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", trace.times[i],
                  trace.orbital_distance[i], trace.mass_drift[i], trace.energy_drift[i]);
    out << buf;
  }
}

}  // namespace starnls
