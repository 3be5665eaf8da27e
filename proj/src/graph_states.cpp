#include "starnls/graph_states.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "starnls/errors.hpp"
#include "starnls/numerics.hpp"
#include "starnls/soliton.hpp"

namespace starnls {
namespace {

constexpr double kBoundaryMargin = 1e-9;
constexpr double kTailMassLimit = 1e-12;

double mass_prefactor(double mu) { return std::pow(mu + 1.0, 1.0 / mu) / mu; }

// Mass of the symmetric state written in terms of excess = omega - alpha^2/N^2,
// which keeps 1 - alpha/(N sqrt(omega)) accurate near the frequency floor.
struct MassTerms {
  double mass;
  double dlog_mass_dlog_excess;
};

MassTerms mass_from_excess(double excess, const ModelParams& params) {
  const double mu = params.mu;
  const double n = params.edges;
  const double omega = params.frequency_floor() + excess;
  const double rs = std::sqrt(omega);
  const double gap = n * excess / (rs * (n * rs + params.alpha));  // 1 - t0
  const double p = 1.0 / mu - 1.0;
  const double q = 1.0 / mu - 0.5;
  const double tail = detail::tail_from_gap(gap, p);
  MassTerms out;
  out.mass = n * mass_prefactor(mu) * std::pow(omega, q) * tail;
  const double t0 = 1.0 - gap;
  const double dlog_tail_domega = std::pow(gap * (2.0 - gap), p) * t0 / (2.0 * omega) / tail;
  out.dlog_mass_dlog_excess = excess * (q / omega + dlog_tail_domega);
  return out;
}

ManifoldPoint shifted(const ManifoldPoint& p, const Eigen::VectorXd& dx) {
  return ManifoldPoint::from_coordinates(p.coordinates() + dx, p.total_mass);
}

bool inside(const ManifoldPoint& p) {
  if (!(p.vertex_value > kBoundaryMargin)) return false;
  for (double m : p.masses)
    if (!(m > kBoundaryMargin)) return false;
  return p.last_mass() > kBoundaryMargin;
}

double energy_at(const ManifoldPoint& p, const ModelParams& params) {
  if (!inside(p))
    throw NumericError("finite-difference step crosses the manifold boundary");
  return reduced_energy(p, params);
}

}  // namespace

double ManifoldPoint::last_mass() const {
  return total_mass - std::accumulate(masses.begin(), masses.end(), 0.0);
}

double ManifoldPoint::edge_mass(std::size_t j) const {
  return j < masses.size() ? masses[j] : last_mass();
}

void ManifoldPoint::validate(const ModelParams& params) const {
  params.validate();
  if (masses.size() + 1 != std::size_t(params.edges))
    throw DomainError("manifold point: expected N-1 edge masses");
  if (!(total_mass > 0.0)) throw DomainError("manifold point: total mass must be > 0");
  if (!inside(*this)) throw DomainError("manifold point: too close to the manifold boundary");
}

Eigen::VectorXd ManifoldPoint::coordinates() const {
  Eigen::VectorXd x(Eigen::Index(masses.size() + 1));
  for (std::size_t i = 0; i < masses.size(); ++i) x[Eigen::Index(i)] = masses[i];
  x[Eigen::Index(masses.size())] = vertex_value;
  return x;
}

ManifoldPoint ManifoldPoint::from_coordinates(const Eigen::VectorXd& x, double total_mass) {
  ManifoldPoint p;
  p.masses.assign(x.data(), x.data() + x.size() - 1);
  p.vertex_value = x[x.size() - 1];
  p.total_mass = total_mass;
  return p;
}

double mass_of_omega(double omega, const ModelParams& params) {
  params.validate();
  const double excess = omega - params.frequency_floor();
  if (!(excess > 0.0) || !std::isfinite(omega))
    throw DomainError("symmetric state: omega must exceed alpha^2/N^2");
  return mass_from_excess(excess, params).mass;
}

double omega_of_mass(double mass, const ModelParams& params) {
  params.validate();
  if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("omega_of_mass: mass must be > 0");
  const double target = std::log(mass);
  auto f = [&](double y) { return std::log(mass_from_excess(std::exp(y), params).mass) - target; };
  auto f_df = [&](double y) {
    const auto t = mass_from_excess(std::exp(y), params);
    return std::pair{std::log(t.mass) - target, t.dlog_mass_dlog_excess};
  };
  const auto bracket = numerics::expand_bracket(f, 0.0, 1.0, 9);
  const double y = numerics::bracketed_newton(f_df, bracket, 1e-15);
  return params.frequency_floor() + std::exp(y);
}

double omega_line_of_mass(double mass, double mu) {
  validate_mu(mu);
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw DomainError("omega_line_of_mass: mass must be > 0");
  // line_soliton_mass(omega) = line_soliton_mass(1) * omega^(1/mu - 1/2)
  return std::pow(mass / line_soliton_mass(1.0, mu), 1.0 / (1.0 / mu - 0.5));
}

SymmetricState symmetric_state(double omega, const ModelParams& params) {
  params.validate();
  const double excess = omega - params.frequency_floor();
  if (!(excess > 0.0)) throw DomainError("symmetric state: omega must exceed alpha^2/N^2");
  const double mu = params.mu;
  const double rs = std::sqrt(omega);
  SymmetricState s;
  s.omega = omega;
  s.shift = std::atanh(params.alpha / (params.edges * rs)) / (mu * rs);
  s.vertex_value = std::pow((mu + 1.0) * excess, 1.0 / (2.0 * mu));
  s.mass = mass_from_excess(excess, params).mass;
  return s;
}

SymmetricState symmetric_state_of_mass(double mass, const ModelParams& params) {
  return symmetric_state(omega_of_mass(mass, params), params);
}

ManifoldPoint tilde_point(double mass, const ModelParams& params) {
  params.validate();
  if (!(mass > 0.0)) throw DomainError("tilde_point: mass must be > 0");
  const double mu = params.mu;
  const double floor = params.frequency_floor();
  const double m = mass / params.edges;

  // a = [(mu+1)(omega(m,a) - alpha^2/N^2)]^(1/2mu) has a second root with a
  // negative shift; starting at the value where xi(m, a) = 0 excludes it.
  auto residual = [&](double a) {
    const double omega = solve_constraint({m, a}, mu).omega;
    if (omega <= floor) return -a;
    return std::pow((mu + 1.0) * (omega - floor), 1.0 / (2.0 * mu)) - a;
  };
  const double a_lo = std::pow(m / g_eval(0.0, mu), 1.0 / (2.0 - mu));
  double a_hi = 2.0 * a_lo;
  int doublings = 0;
  while (residual(a_hi) <= 0.0) {
    a_hi *= 2.0;
    if (++doublings > 200) throw NumericError("tilde_point: vertex value bracket not found");
  }
  const double a = numerics::bracketed_secant(residual, {a_lo, a_hi}, 1e-15);

  const SolitonParams sp = solve_constraint({m, a}, mu);
  const SymmetricState s = symmetric_state(sp.omega, params);
  if (std::abs(sp.shift - s.shift) > 1e-9 * std::max(1.0, std::abs(s.shift)))
    throw NumericError("tilde_point: vertex fixed point does not reproduce the symmetric shift");

  ManifoldPoint p;
  p.masses.assign(std::size_t(params.edges - 1), m);
  p.vertex_value = a;
  p.total_mass = mass;
  return p;
}

void sample_soliton_piece(std::span<cplx> out, const SolitonParams& sp, double mu,
                          const Grid& grid) {
  const double tail = halfline_mass({sp.omega, sp.shift + grid.length}, mu);
  if (tail > kTailMassLimit) {
    std::ostringstream os;
    os << "grid length " << grid.length << " leaves soliton tail mass " << tail
       << " beyond the far end";
    throw DomainError(os.str());
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = soliton_value(sp, mu, grid.x(k));
}

GraphField build_multisoliton(const ManifoldPoint& p, const ModelParams& params,
                              const Grid& grid) {
  p.validate(params);
  GraphField f(params, grid);
  for (std::size_t j = 0; j < f.edges(); ++j) {
    const SolitonParams sp = solve_constraint({p.edge_mass(j), p.vertex_value}, params.mu);
    sample_soliton_piece(f.edge(j), sp, params.mu, grid);
  }
  f.set_vertex(p.vertex_value);
  f.clamp_far_end();
  return f;
}

GraphField sample_symmetric_state(const SymmetricState& s, const ModelParams& params,
                                  const Grid& grid) {
  GraphField f(params, grid);
  for (std::size_t j = 0; j < f.edges(); ++j)
    sample_soliton_piece(f.edge(j), {s.omega, s.shift}, params.mu, grid);
  f.set_vertex(soliton_value({s.omega, s.shift}, params.mu, 0.0));
  f.clamp_far_end();
  return f;
}

double reduced_energy(const ManifoldPoint& p, const ModelParams& params) {
  p.validate(params);
  double e = 0.0;
  for (std::size_t j = 0; j < std::size_t(params.edges); ++j)
    e += halfline_F({p.edge_mass(j), p.vertex_value}, params);
  return e;
}

Eigen::VectorXd reduced_gradient(const ManifoldPoint& p, const ModelParams& params) {
  p.validate(params);
  const Eigen::VectorXd x = p.coordinates();
  Eigen::VectorXd grad(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-5, 1e-5 * std::abs(x[i]));
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(x.size());
    dx[i] = h;
    grad[i] = (energy_at(shifted(p, dx), params) - energy_at(shifted(p, -dx), params)) / (2.0 * h);
  }
  return grad;
}

Eigen::MatrixXd reduced_hessian(const ManifoldPoint& p, const ModelParams& params) {
  p.validate(params);
  const Eigen::VectorXd x = p.coordinates();
  const Eigen::Index n = x.size();
  const double e0 = reduced_energy(p, params);
  Eigen::VectorXd base_step(n);
  for (Eigen::Index i = 0; i < n; ++i) base_step[i] = 1e-3 * std::abs(x[i]);

  // second differences at steps h and h/2, combined by Richardson extrapolation
  auto estimate = [&](double scale) {
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double hi = scale * base_step[i];
      Eigen::VectorXd di = Eigen::VectorXd::Zero(n);
      di[i] = hi;
      h(i, i) = (energy_at(shifted(p, di), params) - 2.0 * e0 + energy_at(shifted(p, -di), params)) /
                (hi * hi);
      for (Eigen::Index j = 0; j < i; ++j) {
        const double hj = scale * base_step[j];
        Eigen::VectorXd dj = Eigen::VectorXd::Zero(n);
        dj[j] = hj;
        const double v = (energy_at(shifted(p, di + dj), params) -
                          energy_at(shifted(p, di - dj), params) -
                          energy_at(shifted(p, -di + dj), params) +
                          energy_at(shifted(p, -di - dj), params)) /
                         (4.0 * hi * hj);
        h(i, j) = v;
        h(j, i) = v;
      }
    }
    return h;
  };
  const Eigen::MatrixXd coarse = estimate(1.0);
  const Eigen::MatrixXd fine = estimate(0.5);
  return (4.0 * fine - coarse) / 3.0;
}

GroundStateCheck ground_state_inequality(double mass, const ModelParams& params) {
  params.validate();
  const double mu = params.mu;
  const double omega = omega_of_mass(mass, params);
  const double omega_line = omega_line_of_mass(mass, mu);
  GroundStateCheck c;
  c.lhs = (2.0 - mu) * omega_line * mass;
  c.rhs = (2.0 - mu) * omega * mass +
          params.alpha * mu * std::pow(mu + 1.0, 1.0 / mu) * (omega - params.frequency_floor());
  c.holds = c.lhs <= c.rhs;
  return c;
}

double threshold_mass(const ModelParams& params) {
  params.validate();
  // two edges: the symmetric state is a cut line soliton of frequency omega
  // and mass below line_soliton_mass(omega), so omega_R < omega for every M
  if (params.edges == 2) throw DomainError("threshold_mass: inequality holds for every mass when N = 2");
  auto margin = [&](double log_mass) {
    const auto c = ground_state_inequality(std::exp(log_mass), params);
    return (c.rhs - c.lhs) / (std::abs(c.rhs) + std::abs(c.lhs));
  };
  double lo = 0.0;
  int guard = 0;
  while (margin(lo) <= 0.0) {
    lo -= std::log(2.0);
    if (++guard > 200) throw NumericError("threshold_mass: inequality never holds");
  }
  double hi = lo + std::log(2.0);
  guard = 0;
  while (margin(hi) > 0.0) {
    hi += std::log(2.0);
    if (++guard > 200) throw NumericError("threshold_mass: inequality never fails");
  }
  return std::exp(numerics::bracketed_secant(margin, {lo, hi}, 1e-14));
}

double symmetric_state_energy(double mass, const ModelParams& params) {
  const ManifoldPoint p = tilde_point(mass, params);
  return params.edges * halfline_F({p.masses.front(), p.vertex_value}, params);
}

}  // namespace starnls
