#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "starnls/errors.hpp"
#include "starnls/field.hpp"
#include "starnls/field_io.hpp"

using namespace starnls;

namespace {

GraphField random_field(std::uint64_t seed, const Grid& grid, int edges = 3) {
  ModelParams p;
  p.edges = edges;
  GraphField f(p, grid);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (std::size_t j = 0; j < f.edges(); ++j) {
    auto e = f.edge(j);
    for (std::size_t k = 1; k + 1 < e.size(); ++k) e[k] = {nd(rng), nd(rng)};
  }
  f.set_vertex({nd(rng), nd(rng)});
  return f;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK(Grid{40.0, 0.01}.points() == 4001);
  CHECK_NOTHROW((Grid{40.0, 0.01}).validate());
  CHECK_THROWS_AS((Grid{40.0, 0.0}).validate(), DomainError);
  CHECK_THROWS_AS((Grid{40.0, 0.03}).validate(), DomainError);
  CHECK_THROWS_AS((Grid{1.0, 0.1}).validate(), DomainError);
}

TEST_CASE("half-line quadrature is sixth order") {
  auto err = [](double h) {
    const std::size_t n = std::size_t(std::lround(10.0 / h)) + 1;
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = std::exp(-0.5 * k * h) * std::cos(double(k) * h);
    const double exact = (0.5 - std::exp(-5.0) * (0.5 * std::cos(10.0) - std::sin(10.0))) / 1.25;
    return std::abs(quadrature::halfline_integral(f, h) - exact);
  };
  const double e1 = err(0.1);
  const double e2 = err(0.05);
  CHECK(e1 < 1e-7);
  CHECK(std::log2(e1 / e2) > 5.5);
  CHECK_THROWS_AS(quadrature::halfline_integral(std::vector<double>(5, 1.0), 0.1), DomainError);
}

TEST_CASE("derivative stencil is sixth order including the ends") {
  auto err = [](double h) {
    const std::size_t n = std::size_t(std::lround(3.0 / h)) + 1;
    std::vector<cplx> f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = std::exp(cplx(0.0, 2.0) * (double(k) * h));
    const auto d = quadrature::derivative(f, h);
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(d[k] - cplx(0.0, 2.0) * f[k]));
    return m;
  };
  const double e1 = err(0.02);
  const double e2 = err(0.01);
  CHECK(e1 < 1e-6);
  CHECK(std::log2(e1 / e2) > 5.0);
}

TEST_CASE("field invariants and arithmetic") {
  const Grid grid{4.0, 0.1};
  GraphField f(ModelParams{}, grid);
  CHECK(f.points() == 41);
  CHECK_NOTHROW(f.validate());
  f.set_vertex({1.0, 2.0});
  for (std::size_t j = 0; j < 3; ++j) CHECK(f.edge(j)[0] == cplx(1.0, 2.0));
  f.edge(1)[0] = 0.0;
  CHECK_THROWS_AS(f.validate(), DomainError);
  f.set_vertex(0.0);
  f.edge(2).back() = 1.0;
  CHECK_THROWS_AS(f.validate(), DomainError);
  f.clamp_far_end();
  CHECK_NOTHROW(f.validate());

  const auto a = random_field(1, grid);
  const auto b = random_field(2, grid);
  const auto c = a + b - b;
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(std::abs(c.data()[i] - a.data()[i]) < 1e-14);
  const auto s = cplx(0.0, 1.0) * a;
  CHECK(graph_mass(s) == doctest::Approx(graph_mass(a)).epsilon(1e-14));
  GraphField other(ModelParams{}, Grid{8.0, 0.1});
  CHECK_THROWS_AS(other += a, DomainError);
}

TEST_CASE("mass and energy of known profiles") {
  const Grid grid{30.0, 0.01};
  ModelParams p;
  GraphField f(p, grid);
  // psi = e^{-x} on every edge: mass 3/2, kinetic 3/4, quartic term 3/16, vertex 1/2
  for (std::size_t j = 0; j < 3; ++j) {
    auto e = f.edge(j);
    for (std::size_t k = 0; k + 1 < e.size(); ++k) e[k] = std::exp(-grid.x(k));
  }
  CHECK(graph_mass(f) == doctest::Approx(1.5).epsilon(1e-11));
  const auto e = graph_energy(f);
  CHECK(e.mass == doctest::Approx(1.5).epsilon(1e-11));
  CHECK(e.kinetic == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(e.nonlinear == doctest::Approx(3.0 / 16.0).epsilon(1e-10));
  CHECK(e.vertex == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(e.total == doctest::Approx(0.75 - 3.0 / 16.0 - 0.5).epsilon(1e-10));
  CHECK(h1_norm(f) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  const auto g = cplx(0.0, 1.0) * f;
  CHECK(std::abs(h1_inner(f, g) - cplx(0.0, 3.0)) < 1e-9);
}

TEST_CASE("csv round trip preserves every sample") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const Grid grid{2.0, 0.05};
    const auto f = random_field(seed, grid, int(2 + seed % 4));
    std::stringstream ss;
    write_field_csv(ss, f);
    const auto g = read_field_csv(ss);
    CHECK(g.params().edges == f.params().edges);
    CHECK(g.grid().step == f.grid().step);
    CHECK(g.grid().length == f.grid().length);
    for (std::size_t i = 0; i < f.data().size(); ++i) {
      CHECK(std::abs(g.data()[i] - f.data()[i]) <= 1e-15 * std::abs(f.data()[i]));
    }
  }
}

TEST_CASE("csv reader rejects malformed input") {
  const Grid grid{2.0, 0.1};
  const auto f = random_field(9, grid);
  std::stringstream ss;
  write_field_csv(ss, f);
  const std::string good = ss.str();
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return read_field_csv(in);
  };
  CHECK_NOTHROW(read(good));
  CHECK_THROWS_AS(read(good.substr(good.find('\n') + 1)), DomainError);  // no metadata
  CHECK_THROWS_AS(read(good.substr(0, good.size() / 2)), DomainError);   // truncated
  std::string bad_num = good;
  bad_num.replace(bad_num.rfind(',') + 1, 3, "abc");
  CHECK_THROWS_AS(read(bad_num), DomainError);
  std::string bad_edge = good;
  const auto pos = bad_edge.find("\n0,") + 1;
  bad_edge[pos] = '7';
  CHECK_THROWS_AS(read(bad_edge), DomainError);
  CHECK_THROWS_AS(load_field("/nonexistent/field.csv"), DomainError);
}
