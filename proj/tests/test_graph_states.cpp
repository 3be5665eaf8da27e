#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <random>

#include "starnls/errors.hpp"
#include "starnls/graph_states.hpp"
#include "starnls/soliton.hpp"

using namespace starnls;

namespace {

// Cubic case (mu = 1) in closed form: M = 2N sqrt(omega) - 2 alpha, omega_R = M^2/16.
double cubic_omega(double M, const ModelParams& p) {
  const double r = (M + 2.0 * p.alpha) / (2.0 * p.edges);
  return r * r;
}

double cubic_margin(double M, const ModelParams& p) {
  const double w = cubic_omega(M, p);
  const double wr = M * M / 16.0;
  return w * M + 2.0 * p.alpha * (w - p.frequency_floor()) - wr * M;
}

double bisect(double lo, double hi, const std::function<double(double)>& f) {
  const bool lo_sign = f(lo) > 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((f(mid) > 0.0) == lo_sign ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Symmetric-state energy from direct quadrature of the profile on each edge.
double quad_symmetric_energy(const SymmetricState& s, const ModelParams& p) {
  boost::math::quadrature::exp_sinh<double> q;
  const SolitonParams sp{s.omega, s.shift};
  const double mu = p.mu;
  const double per_edge = q.integrate([&](double x) {
    const double v = soliton_value(sp, mu, x);
    const double d = soliton_derivative(sp, mu, x);
    return 0.5 * d * d - std::pow(v, 2.0 * mu + 2.0) / (2.0 * mu + 2.0);
  });
  return p.edges * per_edge - 0.5 * p.alpha * s.vertex_value * s.vertex_value;
}

ModelParams model(int n, double alpha, double mu) {
  ModelParams p;
  p.edges = n;
  p.alpha = alpha;
  p.mu = mu;
  return p;
}

}  // namespace

TEST_CASE("symmetric state at omega = 1 for N = 3, alpha = 1, cubic") {
  const ModelParams p;
  const auto s = symmetric_state(1.0, p);
  CHECK(s.mass == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(s.shift == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
  CHECK(s.vertex_value == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(symmetric_state_energy(4.0, p) == doctest::Approx(-26.0 / 27.0).epsilon(1e-10));
}

TEST_CASE("cubic mass-frequency relation in closed form") {
  for (auto p : {model(3, 1.0, 1.0), model(2, 0.5, 1.0), model(5, 2.0, 1.0)}) {
    for (double omega : {0.2, 1.0, 3.7}) {
      if (omega <= p.frequency_floor()) continue;
      const double expected = 2.0 * p.edges * std::sqrt(omega) - 2.0 * p.alpha;
      CHECK(mass_of_omega(omega, p) == doctest::Approx(expected).epsilon(1e-12));
      CHECK(omega_of_mass(expected, p) == doctest::Approx(omega).epsilon(1e-11));
    }
  }
  for (double M : {0.5, 4.0, 11.0}) CHECK(omega_line_of_mass(M, 1.0) == doctest::Approx(M * M / 16.0));
}

TEST_CASE("vertex condition holds for symmetric states") {
  // N phi'(0) = -alpha phi(0) on every edge
  for (auto p : {model(3, 1.0, 1.0), model(4, 0.7, 0.5), model(2, 1.3, 1.6)}) {
    for (double excess : {0.05, 1.0, 6.0}) {
      const auto s = symmetric_state(p.frequency_floor() + excess, p);
      const SolitonParams sp{s.omega, s.shift};
      CHECK(soliton_value(sp, p.mu, 0.0) == doctest::Approx(s.vertex_value).epsilon(1e-12));
      CHECK(p.edges * soliton_derivative(sp, p.mu, 0.0) ==
            doctest::Approx(-p.alpha * s.vertex_value).epsilon(1e-11));
      CHECK(s.mass == doctest::Approx(p.edges * halfline_mass(sp, p.mu)).epsilon(1e-12));
    }
  }
}

TEST_CASE("omega_of_mass inverts mass_of_omega and is increasing") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lu(std::log(1e-3), std::log(1e2));
  for (auto p : {model(3, 1.0, 1.0), model(4, 0.7, 0.5), model(2, 1.3, 1.6), model(6, 0.2, 1.2)}) {
    double prev_mass = 0.0;
    for (double e = 1e-3; e < 50.0; e *= 3.0) {
      const double M = mass_of_omega(p.frequency_floor() + e, p);
      CHECK(M > prev_mass);
      prev_mass = M;
    }
    for (int i = 0; i < 50; ++i) {
      const double omega = p.frequency_floor() + std::exp(lu(rng));
      const double M = mass_of_omega(omega, p);
      CHECK(omega_of_mass(M, p) == doctest::Approx(omega).epsilon(1e-10));
    }
    CHECK(line_soliton_mass(omega_line_of_mass(3.0, p.mu), p.mu) == doctest::Approx(3.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(symmetric_state(1.0 / 9.0, ModelParams{}), DomainError);
  CHECK_THROWS_AS(omega_of_mass(-1.0, ModelParams{}), DomainError);
}

TEST_CASE("tilde point agrees with the symmetric state") {
  for (auto p : {model(3, 1.0, 1.0), model(4, 0.7, 0.5), model(2, 1.3, 1.6)}) {
    for (double M : {0.5, 4.0, 9.0}) {
      const auto tp = tilde_point(M, p);
      const auto s = symmetric_state_of_mass(M, p);
      REQUIRE(tp.masses.size() == std::size_t(p.edges - 1));
      for (double m : tp.masses) CHECK(m == doctest::Approx(M / p.edges).epsilon(1e-12));
      CHECK(tp.vertex_value == doctest::Approx(s.vertex_value).epsilon(1e-9));
      CHECK(reduced_energy(tp, p) == doctest::Approx(symmetric_state_energy(M, p)).epsilon(1e-10));
    }
  }
}

TEST_CASE("symmetric state energy against quadrature") {
  for (auto p : {model(3, 1.0, 1.0), model(4, 0.7, 0.5), model(2, 1.3, 1.6)}) {
    for (double M : {1.0, 4.0, 8.0}) {
      const auto s = symmetric_state_of_mass(M, p);
      CHECK(symmetric_state_energy(M, p) == doctest::Approx(quad_symmetric_energy(s, p)).epsilon(1e-10));
    }
  }
}

TEST_CASE("tilde point is a critical point with the expected Hessian") {
  const ModelParams p;
  const auto tp = tilde_point(4.0, p);
  const Eigen::VectorXd g = reduced_gradient(tp, p);
  CHECK(g.norm() < 1e-8);
  const Eigen::MatrixXd H = reduced_hessian(tp, p);
  CHECK((H - H.transpose()).norm() < 1e-8);
  // mass block d (I + 1 1^T), decoupled from the vertex direction
  const double d = H(0, 1);
  CHECK(H(0, 0) == doctest::Approx(2.0 * d).epsilon(1e-6));
  CHECK(H(1, 1) == doctest::Approx(2.0 * d).epsilon(1e-6));
  CHECK(std::abs(H(0, 2)) < 1e-6);
  CHECK(std::abs(H(1, 2)) < 1e-6);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const auto ev = es.eigenvalues();
  CHECK(ev[0] == doctest::Approx(d).epsilon(1e-6));
  CHECK(ev[1] == doctest::Approx(3.0 * d).epsilon(1e-6));
  CHECK(ev[0] > 0.0);

  // independent five-point second differences of the reduced energy
  const Eigen::VectorXd x0 = tp.coordinates();
  const double h = 1e-3;
  auto E = [&](const Eigen::VectorXd& x) {
    return reduced_energy(ManifoldPoint::from_coordinates(x, 4.0), p);
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd ei = Eigen::VectorXd::Zero(3), ej = Eigen::VectorXd::Zero(3);
      ei[i] = h;
      ej[j] = h;
      const double fd =
          (E(x0 + ei + ej) - E(x0 + ei - ej) - E(x0 - ei + ej) + E(x0 - ei - ej)) / (4.0 * h * h);
      CHECK(H(i, j) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("reduced gradient matches finite differences away from the critical point") {
  const ModelParams p = model(4, 0.7, 0.8);
  ManifoldPoint q;
  q.total_mass = 5.0;
  q.masses = {1.0, 1.5, 0.9};
  q.vertex_value = 0.8;
  const Eigen::VectorXd g = reduced_gradient(q, p);
  const Eigen::VectorXd x0 = q.coordinates();
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
    e[i] = 1e-5;
    const double fd = (reduced_energy(ManifoldPoint::from_coordinates(x0 + e, 5.0), p) -
                       reduced_energy(ManifoldPoint::from_coordinates(x0 - e, 5.0), p)) /
                      2e-5;
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("manifold point validation") {
  const ModelParams p;
  ManifoldPoint q;
  q.total_mass = 3.0;
  q.masses = {1.0, 1.0};
  q.vertex_value = 1.0;
  CHECK_NOTHROW(q.validate(p));
  CHECK(q.last_mass() == doctest::Approx(1.0));
  CHECK(q.edge_mass(2) == doctest::Approx(1.0));
  auto bad = q;
  bad.masses = {1.0};
  CHECK_THROWS_AS(bad.validate(p), DomainError);
  bad = q;
  bad.masses = {2.0, 1.0};
  CHECK_THROWS_AS(bad.validate(p), DomainError);
  bad = q;
  bad.vertex_value = 0.0;
  CHECK_THROWS_AS(bad.validate(p), DomainError);
  const auto back = ManifoldPoint::from_coordinates(q.coordinates(), 3.0);
  CHECK(back.masses == q.masses);
  CHECK(back.vertex_value == q.vertex_value);
}

TEST_CASE("threshold mass for the cubic star with three edges") {
  const ModelParams p;
  const double oracle = bisect(4.0, 10.0, [&](double M) { return cubic_margin(M, p); });
  CHECK(threshold_mass(p) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(threshold_mass(p) == doctest::Approx(6.3191835884530878).epsilon(1e-12));
  CHECK(ground_state_inequality(4.0, p).holds);
  CHECK_FALSE(ground_state_inequality(8.0, p).holds);
  const auto at4 = ground_state_inequality(4.0, p);
  CHECK(at4.rhs - at4.lhs == doctest::Approx(cubic_margin(4.0, p)).epsilon(1e-12));
}

TEST_CASE("threshold mass for other cubic stars") {
  for (auto p : {model(4, 0.5, 1.0), model(5, 2.0, 1.0), model(8, 1.0, 1.0)}) {
    const double oracle = bisect(1e-6, 1e3, [&](double M) { return cubic_margin(M, p); });
    CHECK(threshold_mass(p) == doctest::Approx(oracle).epsilon(1e-10));
  }
  for (double M : {0.1, 5.0, 80.0}) CHECK(ground_state_inequality(M, model(2, 1.0, 1.0)).holds);
  CHECK_THROWS_AS(threshold_mass(model(2, 1.0, 1.0)), DomainError);
}

TEST_CASE("sampled multi-soliton has the prescribed edge data") {
  const ModelParams p;
  ManifoldPoint q;
  q.total_mass = 4.0;
  q.masses = {1.0, 1.6};
  q.vertex_value = 1.1;
  const Grid grid{40.0, 0.01};
  const auto f = build_multisoliton(q, p, grid);
  CHECK_NOTHROW(f.validate());
  CHECK(std::abs(f.vertex_value() - cplx(1.1, 0.0)) < 1e-14);
  for (std::size_t j = 0; j < 3; ++j) CHECK(edge_mass(f, j) == doctest::Approx(q.edge_mass(j)).epsilon(1e-10));
  CHECK(graph_mass(f) == doctest::Approx(4.0).epsilon(1e-10));
  // reduced energy is the graph energy of the multi-soliton
  CHECK(graph_energy(f).total == doctest::Approx(reduced_energy(q, p)).epsilon(1e-9));
  CHECK_THROWS_AS(build_multisoliton(tilde_point(0.05, model(3, 0.05, 1.0)), model(3, 0.05, 1.0), {10.0, 0.01}),
                  DomainError);
}
