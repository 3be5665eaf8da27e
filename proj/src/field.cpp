#include "starnls/field.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "starnls/errors.hpp"

namespace starnls {

std::size_t Grid::points() const { return std::size_t(std::llround(length / step)) + 1; }

void Grid::validate() const {
  if (!(step > 0.0) || !(length > 0.0) || !std::isfinite(length) || !std::isfinite(step))
    throw DomainError("grid: length and step must be > 0");
  const double cells = length / step;
  if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
    throw DomainError("grid: length must be a whole multiple of step");
  if (cells < 16.0) throw DomainError("grid: at least 16 cells per edge are required");
}

GraphField::GraphField(ModelParams params, Grid grid) : params_(params), grid_(grid) {
  params_.validate();
  grid_.validate();
  points_ = grid_.points();
  data_.assign(points_ * std::size_t(params_.edges), cplx{});
}

void GraphField::set_vertex(cplx v) {
  for (std::size_t j = 0; j < edges(); ++j) data_[j * points_] = v;
}

void GraphField::clamp_far_end() {
  for (std::size_t j = 0; j < edges(); ++j) data_[j * points_ + points_ - 1] = 0.0;
}

void GraphField::validate() const {
  const cplx v = data_.front();
  for (std::size_t j = 0; j < edges(); ++j) {
    if (data_[j * points_] != v) throw DomainError("field: edge values differ at the vertex");
    if (data_[j * points_ + points_ - 1] != cplx{})
      throw DomainError("field: far-end sample must be zero");
  }
}

void GraphField::require_compatible(const GraphField& other) const {
  if (other.params_.edges != params_.edges || other.points_ != points_ ||
      other.grid_.step != grid_.step)
    throw DomainError("field: mismatched grids");
}

GraphField& GraphField::operator+=(const GraphField& other) {
  require_compatible(other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

GraphField& GraphField::operator-=(const GraphField& other) {
  require_compatible(other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

GraphField& GraphField::operator*=(cplx s) {
  for (auto& z : data_) z *= s;
  return *this;
}

GraphField operator+(GraphField a, const GraphField& b) { return a += b; }
GraphField operator-(GraphField a, const GraphField& b) { return a -= b; }
GraphField operator*(cplx s, GraphField a) { return a *= s; }

namespace quadrature {
namespace {

// Gregory end weights (in units of step) for the first five samples.
constexpr std::array<double, 5> kGregory = {95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0,
                                            793.0 / 720.0, 157.0 / 160.0};

constexpr std::array<double, 7> kCentred = {-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0,
                                            3.0 / 4.0,   -3.0 / 20.0, 1.0 / 60.0};

// Derivative at x0 of the Lagrange interpolant through nodes 0..6.
std::array<double, 7> first_derivative_weights(double x0) {
  std::array<double, 7> w{};
  for (int s = 0; s < 7; ++s) {
    double denom = 1.0;
    for (int q = 0; q < 7; ++q)
      if (q != s) denom *= double(s - q);
    double acc = 0.0;
    for (int r = 0; r < 7; ++r) {
      if (r == s) continue;
      double prod = 1.0;
      for (int q = 0; q < 7; ++q)
        if (q != s && q != r) prod *= (x0 - double(q));
      acc += prod;
    }
    w[s] = acc / denom;
  }
  return w;
}

const std::array<std::array<double, 7>, 3>& edge_stencils() {
  static const std::array<std::array<double, 7>, 3> table = {
      first_derivative_weights(0.0), first_derivative_weights(1.0), first_derivative_weights(2.0)};
  return table;
}

}  // namespace

double halfline_integral(std::span<const double> f, double step) {
  const std::size_t n = f.size();
  if (n < 11) throw DomainError("quadrature: at least 11 samples are required");
  double sum = 0.0;
  for (std::size_t k = 5; k + 5 < n; ++k) sum += f[k];
  for (std::size_t k = 0; k < 5; ++k) sum += kGregory[k] * (f[k] + f[n - 1 - k]);
  return sum * step;
}

std::vector<cplx> derivative(std::span<const cplx> f, double step) {
  const std::size_t n = f.size();
  if (n < 11) throw DomainError("quadrature: at least 11 samples are required");
  std::vector<cplx> d(n);
  const double inv = 1.0 / step;
  for (std::size_t k = 3; k + 3 < n; ++k) {
    cplx acc = 0.0;
    for (int s = 0; s < 7; ++s) acc += kCentred[s] * f[k + s - 3];
    d[k] = acc * inv;
  }
  const auto& table = edge_stencils();
  for (std::size_t k = 0; k < 3; ++k) {
    cplx left = 0.0;
    cplx right = 0.0;
    for (std::size_t s = 0; s < 7; ++s) {
      left += table[k][s] * f[s];
      right += table[k][s] * f[n - 1 - s];
    }
    d[k] = left * inv;
    d[n - 1 - k] = -right * inv;
  }
  return d;
}

}  // namespace quadrature

double edge_mass(const GraphField& f, std::size_t j) {
  const auto e = f.edge(j);
  std::vector<double> dens(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) dens[k] = std::norm(e[k]);
  return quadrature::halfline_integral(dens, f.grid().step);
}

double graph_mass(const GraphField& f) {
  double m = 0.0;
  for (std::size_t j = 0; j < f.edges(); ++j) m += edge_mass(f, j);
  return m;
}

EnergyReport halfline_terms(std::span<const cplx> e, double step, double mu) {
  EnergyReport r;
  std::vector<double> dens(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) dens[k] = std::norm(e[k]);
  r.mass = quadrature::halfline_integral(dens, step);
  for (auto& v : dens) v = std::pow(v, mu + 1.0);
  r.nonlinear = quadrature::halfline_integral(dens, step) / (2.0 * mu + 2.0);
  const auto d = quadrature::derivative(e, step);
  for (std::size_t k = 0; k < d.size(); ++k) dens[k] = std::norm(d[k]);
  r.kinetic = 0.5 * quadrature::halfline_integral(dens, step);
  r.total = r.kinetic - r.nonlinear;
  return r;
}

EnergyReport graph_energy(const GraphField& f) {
  EnergyReport r;
  for (std::size_t j = 0; j < f.edges(); ++j) {
    const auto t = halfline_terms(f.edge(j), f.grid().step, f.params().mu);
    r.mass += t.mass;
    r.kinetic += t.kinetic;
    r.nonlinear += t.nonlinear;
  }
  r.vertex = 0.5 * f.params().alpha * std::norm(f.vertex_value());
  r.total = r.kinetic - r.nonlinear - r.vertex;
  return r;
}

cplx h1_inner(const GraphField& f, const GraphField& g) {
  if (f.edges() != g.edges() || f.points() != g.points() || f.grid().step != g.grid().step)
    throw DomainError("h1_inner: mismatched grids");
  const double dx = f.grid().step;
  std::vector<double> re(f.points()), im(f.points());
  cplx total = 0.0;
  for (std::size_t j = 0; j < f.edges(); ++j) {
    const auto a = f.edge(j);
    const auto b = g.edge(j);
    const auto da = quadrature::derivative(a, dx);
    const auto db = quadrature::derivative(b, dx);
    for (std::size_t k = 0; k < a.size(); ++k) {
      const cplx v = std::conj(a[k]) * b[k] + std::conj(da[k]) * db[k];
      re[k] = v.real();
      im[k] = v.imag();
    }
    total += cplx(quadrature::halfline_integral(re, dx), quadrature::halfline_integral(im, dx));
  }
  return total;
}

double h1_norm(const GraphField& f) { return std::sqrt(std::max(0.0, h1_inner(f, f).real())); }

}  // namespace starnls
