#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <sstream>

#include "starnls/errors.hpp"
#include "starnls/graph_states.hpp"
#include "starnls/stability.hpp"
#include "starnls/transform.hpp"

using namespace starnls;

namespace {

const Grid kGrid{40.0, 0.01};

GraphField psi_of_mass(double M, const ModelParams& p, const Grid& grid = kGrid) {
  return sample_symmetric_state(symmetric_state_of_mass(M, p), p, grid);
}

StabilityConfig short_config(double horizon) {
  StabilityConfig c;
  c.propagation.length = 40.0;
  c.propagation.step = 0.01;
  c.propagation.dt = 0.005;
  c.propagation.horizon = horizon;
  return c;
}

}  // namespace

TEST_CASE("orbital distance of phase rotations and small perturbations") {
  const ModelParams p;
  const auto s = symmetric_state(1.0, p);
  const auto f = sample_symmetric_state(s, p, kGrid);
  for (double theta : {0.0, 0.4, 2.0, -3.0}) {
    CHECK(orbital_distance(std::polar(1.0, theta) * f, f) < 1e-12);
    CHECK(orbital_distance(std::polar(1.0, theta) * f, s) < 1e-12);
    CHECK(std::abs(l2_phase(std::polar(1.0, theta) * f, f) - theta) < 1e-12);
  }
  PerturbationShape shape;
  shape.complex_valued = false;
  auto u = smooth_perturbation(p, kGrid, shape);
  // remove the component along Psi in H^1
  const cplx c = h1_inner(f, u) / h1_inner(f, f);
  u -= c * f;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const auto g = f + cplx(eps / h1_norm(u)) * u;
    const double d = orbital_distance(g, f);
    CHECK(std::abs(d - eps) < 10.0 * eps * eps);
    CHECK(orbital_distance(std::polar(1.0, 1.1) * g, f) == doctest::Approx(d).epsilon(1e-10));
  }
}

TEST_CASE("smooth perturbations are deterministic and continuous") {
  const ModelParams p;
  PerturbationShape shape;
  const auto a = smooth_perturbation(p, kGrid, shape);
  const auto b = smooth_perturbation(p, kGrid, shape);
  CHECK_NOTHROW(a.validate());
  CHECK(h1_norm(a) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < a.data().size(); ++i) REQUIRE(a.data()[i] == b.data()[i]);
  shape.seed = 2;
  const auto c = smooth_perturbation(p, kGrid, shape);
  CHECK(h1_norm(a - c) > 0.1);
  // with clearance the bumps are numerically zero at the vertex
  CHECK(std::abs(a.vertex_value()) < 1e-12);
  shape.clearance = 0.0;
  shape.max_spread = 8.0;
  const auto d = smooth_perturbation(p, kGrid, shape);
  CHECK_NOTHROW(d.validate());
  CHECK(std::abs(d.vertex_value()) > 1e-6);
  shape = {};
  shape.clearance = 20.0;
  CHECK_THROWS_AS(smooth_perturbation(p, kGrid, shape), DomainError);
  shape = {};
  shape.bumps_per_edge = 0;
  CHECK_THROWS_AS(smooth_perturbation(p, kGrid, shape), DomainError);
}

TEST_CASE("perturbed initial data carries the prescribed mass") {
  const ModelParams p;
  for (double M : {4.0, 8.0}) {
    const auto psi = psi_of_mass(M, p);
    for (double eps : {1e-3, 1e-2}) {
      const auto f = perturbed_state(M, eps, p, kGrid, PerturbationShape{});
      CHECK(graph_mass(f) == doctest::Approx(M).epsilon(1e-12));
      const double d = orbital_distance(f, symmetric_state_of_mass(M, p));
      CHECK(d > 0.3 * eps * h1_norm(psi));
      CHECK(d < 1.5 * eps * h1_norm(psi));
    }
    const auto zero = perturbed_state(M, 0.0, p, kGrid, PerturbationShape{});
    CHECK(orbital_distance(zero, symmetric_state_of_mass(M, p)) < 1e-8);
  }
  CHECK_THROWS_AS(perturbed_state(4.0, -1.0, p, kGrid, PerturbationShape{}), DomainError);
  auto f = psi_of_mass(4.0, p);
  project_to_mass(f, 5.0);
  CHECK(graph_mass(f) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK_THROWS_AS(project_to_mass(f, 0.0), DomainError);
}

TEST_CASE("short stability runs") {
  const ModelParams p;
  SUBCASE("unperturbed state stays on the orbit") {
    const auto tr = stability_run(4.0, 0.0, p, short_config(2.0));
    CHECK(tr.pass);
    CHECK(tr.max_distance < 1e-4);
    CHECK(tr.times.size() == tr.orbital_distance.size());
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == doctest::Approx(2.0));
    CHECK(tr.max_mass_drift < 1e-12);
    CHECK(tr.max_energy_drift < 1e-10);
  }
  SUBCASE("perturbed state above the threshold") {
    const auto tr = stability_run(8.0, 1e-2, p, short_config(2.0));
    CHECK(tr.pass);
    CHECK(tr.initial_distance > 1e-3);
    CHECK(tr.max_distance < 2.0 * tr.initial_distance);
    std::ostringstream os;
    write_trace_csv(os, tr);
    const std::string text = os.str();
    CHECK(text.rfind("t,orbital_distance,mass_drift,energy_drift\n", 0) == 0);
    const auto lines = std::count(text.begin(), text.end(), '\n');
    CHECK(std::size_t(lines) == tr.times.size() + 1);
  }
  SUBCASE("phase of the initial datum does not change the trace") {
    auto cfg = short_config(1.0);
    const auto s = symmetric_state_of_mass(4.0, p);
    const auto f0 = perturbed_state(4.0, 1e-2, p, kGrid, cfg.perturbation);
    const auto a = track_orbit(f0, s, cfg);
    const auto b = track_orbit(std::polar(1.0, 2.2) * f0, s, cfg);
    REQUIRE(a.orbital_distance.size() == b.orbital_distance.size());
    for (std::size_t i = 0; i < a.orbital_distance.size(); ++i)
      CHECK(a.orbital_distance[i] == doctest::Approx(b.orbital_distance[i]).epsilon(1e-9));
  }
  auto bad = short_config(1.0);
  bad.sample_every = 0;
  CHECK_THROWS_AS(stability_run(4.0, 1e-3, p, bad), DomainError);
}

TEST_CASE("local minimality probe") {
  const ModelParams p;
  for (double M : {4.0, 8.0}) {
    const auto rep = local_min_probe(M, 1e-2, 40, p, kGrid, 5);
    CHECK(rep.samples.size() == 40);
    CHECK(rep.min_gap >= -1e-10);
    CHECK(rep.count_beyond > 0);
    CHECK(rep.min_gap_beyond > 0.0);
    for (const auto& s : rep.samples) {
      CHECK(s.size > 0.0);
      CHECK(s.size <= 1e-2);
    }
  }
  CHECK_THROWS_AS(local_min_probe(4.0, 0.5, 10, p, kGrid, 1), DomainError);
  CHECK_THROWS_AS(local_min_probe(4.0, 1e-2, 0, p, kGrid, 1), DomainError);
  // deterministic in the seed
  const auto a = local_min_probe(4.0, 1e-2, 5, p, kGrid, 9);
  const auto b = local_min_probe(4.0, 1e-2, 5, p, kGrid, 9);
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].gap == b.samples[i].gap);
}

TEST_CASE("energies along the manifold agree with the reduced energy") {
  const ModelParams p;
  const double M = 4.0;
  const auto base = tilde_point(M, p);
  const double e_ref = graph_energy(build_multisoliton(base, p, kGrid)).total;
  for (auto [dm0, dm1, da] : {std::tuple{1e-2, 0.0, 0.0}, std::tuple{-5e-3, 8e-3, 2e-3},
                              std::tuple{0.0, 0.0, -1e-2}, std::tuple{3e-3, 3e-3, 3e-3}}) {
    auto q = base;
    q.masses[0] += dm0;
    q.masses[1] += dm1;
    q.vertex_value += da;
    const double quad = graph_energy(build_multisoliton(q, p, kGrid)).total - e_ref;
    const double reduced = reduced_energy(q, p) - reduced_energy(base, p);
    CHECK(std::abs(quad - reduced) < 1e-8);
    CHECK(reduced > 0.0);
  }
}

TEST_CASE("mass transfer gaps") {
  const ModelParams p;
  const double M = 4.0;
  const auto g = mass_transfer_gap(M, {0.0, 0.05, -0.05, 0.2, -0.2}, p);
  CHECK(g[0].energy_gap == 0.0);
  CHECK(g[0].l2_gap == 0.0);
  CHECK(g[1].energy_gap == doctest::Approx(g[2].energy_gap).epsilon(1e-10));
  CHECK(g[3].energy_gap == doctest::Approx(g[4].energy_gap).epsilon(1e-10));
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i].energy_gap > 0.0);
    CHECK(g[i].l2_gap > 0.0);
  }
  // the L2 gap against grid quadrature of the two folded edges
  const auto base = tilde_point(M, p);
  const auto psi = build_multisoliton(base, p, kGrid);
  for (double t : {0.05, -0.2}) {
    auto q = base;
    q.masses[0] += t;
    q.masses[1] -= t;
    const auto phi = build_multisoliton(q, p, kGrid);
    const auto diff = tau_fold(phi, 0, 1);
    const auto ref = tau_fold(psi, 0, 1);
    LineField d = diff;
    for (std::size_t k = 0; k < d.samples.size(); ++k) d.samples[k] -= ref.samples[k];
    const auto gt = mass_transfer_gap(M, {t}, p).front();
    CHECK(gt.l2_gap == doctest::Approx(line_mass(d)).epsilon(1e-8));
  }
  // fitted curvature against a central second difference
  const double h = 1e-3;
  const auto gh = mass_transfer_gap(M, {h, -h}, p);
  const double fd = (gh[0].l2_gap + gh[1].l2_gap) / (h * h);
  const auto fit = fit_transfer_gap(M, p, 0.05, 21);
  CHECK(fit.curvature() > 0.0);
  CHECK(fit.curvature() == doctest::Approx(fd).epsilon(1e-4));
  const auto efit = fit_transfer_gap(M, p, 0.05, 21, true);
  const double efd = (gh[0].energy_gap + gh[1].energy_gap) / (h * h);
  CHECK(efit.curvature() == doctest::Approx(efd).epsilon(1e-4));
  CHECK_THROWS_AS(mass_transfer_gap(M, {M / 3.0}, p), DomainError);
  CHECK_THROWS_AS(fit_transfer_gap(M, p, 0.05, 2), DomainError);
}
