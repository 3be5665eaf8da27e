// Command-line front end: constraint solver, symmetric states, reduced
// Hessian, ground-state threshold, evolution and local-minimality probes.

#include <CLI11.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "starnls/errors.hpp"
#include "starnls/field_io.hpp"
#include "starnls/graph_states.hpp"
#include "starnls/run_config.hpp"
#include "starnls/soliton.hpp"
#include "starnls/stability.hpp"
#include "starnls/transform.hpp"

namespace {

using namespace starnls;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitFailed = 4;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void line(const std::string& key, double v) { std::cout << key << " = " << num(v) << "\n"; }

// Flags registered on a subcommand; each one overrides the config only if given.
class Overrides {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& name, std::function<void(RunConfig&, const T&)> set,
           const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    apply_.push_back([opt, value, set](RunConfig& c) {
      if (opt->count() > 0) set(c, *value);
    });
  }

  void apply(RunConfig& c) const {
    for (const auto& f : apply_) f(c);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> apply_;
};

struct Command {
  CLI::App* app = nullptr;
  Overrides overrides;
  std::string config_path;
  double default_length = 40.0;

  RunConfig resolve() const {
    RunConfig base;
    base.grid.length = default_length;
    RunConfig c = config_path.empty() ? base : load_run_config(config_path, base);
    overrides.apply(c);
    if (c.output.empty()) {
      const char* env = std::getenv("STARNLS_OUTPUT_DIR");
      c.output = env && *env ? env : ".";
    }
    c.validate();
    return c;
  }
};

void add_model_flags(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_path, "TOML run configuration")->check(CLI::ExistingFile);
  cmd.overrides.add<int>(cmd.app, "--n", [](RunConfig& c, const int& v) { c.model.edges = v; },
                         "number of edges N");
  cmd.overrides.add<double>(cmd.app, "--alpha", [](RunConfig& c, const double& v) { c.model.alpha = v; },
                            "vertex strength alpha");
  cmd.overrides.add<double>(cmd.app, "--mu", [](RunConfig& c, const double& v) { c.model.mu = v; },
                            "nonlinearity exponent mu");
}

void add_grid_flags(Command& cmd) {
  cmd.overrides.add<double>(cmd.app, "--length", [](RunConfig& c, const double& v) { c.grid.length = v; },
                            "edge truncation L");
  cmd.overrides.add<double>(cmd.app, "--dx", [](RunConfig& c, const double& v) { c.grid.step = v; },
                            "grid spacing");
}

void add_propagation_flags(Command& cmd) {
  cmd.overrides.add<double>(cmd.app, "--dt", [](RunConfig& c, const double& v) { c.dt = v; }, "time step");
  cmd.overrides.add<double>(cmd.app, "--horizon", [](RunConfig& c, const double& v) { c.horizon = v; },
                            "final time T");
  cmd.overrides.add<double>(cmd.app, "--wall-threshold",
                            [](RunConfig& c, const double& v) { c.wall_threshold = v; },
                            "abort when the amplitude next to the far wall exceeds this");
  cmd.overrides.add<int>(cmd.app, "--sample-every",
                         [](RunConfig& c, const int& v) { c.sample_every = v; },
                         "steps between orbital-distance samples");
}

void add_output_flags(Command& cmd) {
  cmd.overrides.add<std::string>(cmd.app, "--output",
                                 [](RunConfig& c, const std::string& v) { c.output = v; },
                                 "output directory (default $STARNLS_OUTPUT_DIR or .)");
  cmd.overrides.add<std::uint64_t>(cmd.app, "--seed",
                                   [](RunConfig& c, const std::uint64_t& v) { c.seed = v; },
                                   "random seed");
}

void add_mass_flag(Command& cmd) {
  cmd.overrides.add<double>(cmd.app, "--mass", [](RunConfig& c, const double& v) { c.mass = v; },
                            "total mass M");
}

std::filesystem::path output_file(const RunConfig& c, const std::string& name) {
  const std::filesystem::path dir(c.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DomainError("cannot create output directory " + c.output + ": " + ec.message());
  return dir / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw DomainError("cannot write " + p.string());
  out << text;
}

double require_mass(const RunConfig& c) {
  if (!c.mass) throw DomainError("--mass is required");
  return *c.mass;
}

int cmd_solve(double m, double a, double mu) {
  const SolitonParams sp = solve_constraint({m, a}, mu);
  line("omega", sp.omega);
  line("xi", sp.shift);
  const double m_back = halfline_mass(sp, mu);
  const double a_back = soliton_value(sp, mu, 0.0);
  line("mass_residual", std::abs(m_back - m) / m);
  line("vertex_residual", std::abs(a_back - a) / a);
  return kExitOk;
}

int cmd_state(const RunConfig& c, const std::string& save_path) {
  if (c.omega && c.mass) throw DomainError("give either --omega or --mass, not both");
  const SymmetricState s = c.omega ? symmetric_state(*c.omega, c.model)
                                   : symmetric_state_of_mass(require_mass(c), c.model);
  line("omega", s.omega);
  line("mass", s.mass);
  line("zeta", s.shift);
  line("vertex_value", s.vertex_value);
  line("energy", symmetric_state_energy(s.mass, c.model));
  if (!save_path.empty()) {
    save_field(save_path, sample_symmetric_state(s, c.model, c.grid));
    std::printf("field = %s\n", save_path.c_str());
  }
  return kExitOk;
}

int cmd_energy(const RunConfig& c, const std::string& field_path) {
  if (!field_path.empty()) {
    const GraphField f = load_field(field_path);
    const EnergyReport e = graph_energy(f);
    line("mass", e.mass);
    line("kinetic", e.kinetic);
    line("nonlinear", e.nonlinear);
    line("vertex", e.vertex);
    line("total", e.total);
    if (std::abs(f.vertex_value()) > 0.0) line("transformed_total", graph_energy(multisoliton_transform(f)).total);
    return kExitOk;
  }
  const double mass = c.omega ? mass_of_omega(*c.omega, c.model) : require_mass(c);
  const SymmetricState s = symmetric_state_of_mass(mass, c.model);
  const GraphField psi = sample_symmetric_state(s, c.model, c.grid);
  const double omega_line = omega_line_of_mass(mass, c.model.mu);
  line("mass", mass);
  line("reduced_energy", symmetric_state_energy(mass, c.model));
  line("quadrature_energy", graph_energy(psi).total);
  line("line_soliton_energy", line_soliton_energy(omega_line, c.model.mu));
  return kExitOk;
}

int cmd_hessian(const RunConfig& c) {
  const double mass = require_mass(c);
  const ManifoldPoint p = tilde_point(mass, c.model);
  const Eigen::VectorXd g = reduced_gradient(p, c.model);
  const Eigen::MatrixXd h = reduced_hessian(p, c.model);
  line("mass", mass);
  line("vertex_value", p.vertex_value);
  line("gradient_norm", g.norm());
  std::cout << "hessian =\n";
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) std::cout << (j ? " " : "  ") << num(h(i, j));
    std::cout << "\n";
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  std::cout << "eigenvalues =";
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) std::cout << " " << num(es.eigenvalues()[i]);
  std::cout << "\n";
  line("min_eigenvalue", es.eigenvalues().minCoeff());
  return es.eigenvalues().minCoeff() > 0.0 ? kExitOk : kExitFailed;
}

int cmd_threshold(const RunConfig& c, int points) {
  const double ms = threshold_mass(c.model);
  line("threshold_mass", ms);
  std::cout << "mass,lhs,rhs,holds\n";
  for (int i = 0; i < points; ++i) {
    const double f = 0.25 + 1.75 * i / std::max(1, points - 1);
    const auto g = ground_state_inequality(f * ms, c.model);
    std::cout << num(f * ms) << "," << num(g.lhs) << "," << num(g.rhs) << "," << (g.holds ? 1 : 0) << "\n";
  }
  return kExitOk;
}

std::string pass_line(const std::string& what, bool pass, const StabilityTrace& tr) {
  std::ostringstream os;
  os << (pass ? "PASS " : "FAIL ") << what << " initial_distance=" << num(tr.initial_distance)
     << " max_distance=" << num(tr.max_distance) << " max_mass_drift=" << num(tr.max_mass_drift)
     << " max_energy_drift=" << num(tr.max_energy_drift);
  return os.str();
}

int cmd_evolve(const RunConfig& c) {
  const double mass = require_mass(c);
  const StabilityTrace tr = stability_run(mass, c.eps, c.model, c.stability());
  const auto trace_path = output_file(c, "evolve_trace.csv");
  std::ofstream out(trace_path);
  if (!out) throw DomainError("cannot write " + trace_path.string());
  write_trace_csv(out, tr);
  write_text(output_file(c, "evolve_manifest.json"), run_manifest_json(c, "evolve"));
  std::cout << pass_line("evolve mass=" + num(mass) + " eps=" + num(c.eps), tr.pass, tr) << "\n";
  std::cout << "trace = " << trace_path.string() << "\n";
  return tr.pass ? kExitOk : kExitFailed;
}

int cmd_probe(const RunConfig& c) {
  const double mass = require_mass(c);
  const ProbeReport rep = local_min_probe(mass, c.radius, c.samples, c.model, c.grid, c.seed);
  const auto path = output_file(c, "probe_samples.csv");
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "size,distance,gap\n";
  for (const auto& s : rep.samples) out << num(s.size) << "," << num(s.distance) << "," << num(s.gap) << "\n";
  write_text(output_file(c, "probe_manifest.json"), run_manifest_json(c, "probe"));
  const bool pass = rep.min_gap >= -1e-10 && (rep.count_beyond == 0 || rep.min_gap_beyond > 0.0);
  std::cout << (pass ? "PASS" : "FAIL") << " probe mass=" << num(mass) << " min_gap=" << num(rep.min_gap)
            << " min_gap_beyond=" << num(rep.min_gap_beyond) << " beyond=" << rep.count_beyond << "/"
            << rep.samples.size() << "\n";
  std::cout << "samples = " << path.string() << "\n";
  return pass ? kExitOk : kExitFailed;
}

int cmd_sweep(const RunConfig& c, const std::vector<double>& masses, const std::vector<double>& eps_list,
              int jobs) {
  if (masses.empty() || eps_list.empty()) throw DomainError("sweep needs --masses and --eps-list");
  if (jobs < 1) throw DomainError("--jobs must be >= 1");
  struct Point {
    double mass;
    double eps;
  };
  std::vector<Point> points;
  for (double m : masses)
    for (double e : eps_list) points.push_back({m, e});
  std::vector<StabilityTrace> traces(points.size());
  for (std::size_t start = 0; start < points.size(); start += std::size_t(jobs)) {
    std::vector<std::future<StabilityTrace>> running;
    for (std::size_t i = start; i < std::min(points.size(), start + std::size_t(jobs)); ++i)
      running.push_back(std::async(std::launch::async, [&c, p = points[i]] {
        return stability_run(p.mass, p.eps, c.model, c.stability());
      }));
    for (std::size_t k = 0; k < running.size(); ++k) traces[start + k] = running[k].get();
  }
  const auto path = output_file(c, "sweep.csv");
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "mass,eps,initial_distance,max_distance,max_mass_drift,max_energy_drift,pass\n";
  bool all = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& t = traces[i];
    out << num(points[i].mass) << "," << num(points[i].eps) << "," << num(t.initial_distance) << ","
        << num(t.max_distance) << "," << num(t.max_mass_drift) << "," << num(t.max_energy_drift) << ","
        << (t.pass ? 1 : 0) << "\n";
    std::cout << pass_line("sweep mass=" + num(points[i].mass) + " eps=" + num(points[i].eps), t.pass, t)
              << "\n";
    all = all && t.pass;
  }
  write_text(output_file(c, "sweep_manifest.json"), run_manifest_json(c, "sweep"));
  return all ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Standing waves of the NLS on a star graph with a delta vertex"};
  app.require_subcommand(1);

  double solve_m = 0.0, solve_a = 0.0, solve_mu = 1.0;
  CLI::App* solve = app.add_subcommand("solve", "soliton piece with given half-line mass and vertex value");
  solve->add_option("--m", solve_m, "half-line mass")->required();
  solve->add_option("--a", solve_a, "vertex value")->required();
  solve->add_option("--mu", solve_mu, "nonlinearity exponent");

  Command state{app.add_subcommand("state", "symmetric stationary state")};
  std::string save_path;
  add_model_flags(state);
  add_grid_flags(state);
  add_mass_flag(state);
  state.app->add_option("--save-field", save_path, "write the sampled state as field CSV");
  state.overrides.add<double>(state.app, "--omega", [](RunConfig& c, const double& v) { c.omega = v; },
                              "frequency");

  Command energy{app.add_subcommand("energy", "energies of the symmetric state or of a field file")};
  std::string field_path;
  add_model_flags(energy);
  add_grid_flags(energy);
  add_mass_flag(energy);
  energy.overrides.add<double>(energy.app, "--omega", [](RunConfig& c, const double& v) { c.omega = v; },
                               "frequency");
  energy.app->add_option("--field", field_path, "field CSV to evaluate")->check(CLI::ExistingFile);

  Command hessian{app.add_subcommand("hessian", "reduced-energy gradient and Hessian at the symmetric point")};
  add_model_flags(hessian);
  add_mass_flag(hessian);

  Command threshold{app.add_subcommand("threshold", "mass above which the ground-state inequality fails")};
  int table_points = 8;
  add_model_flags(threshold);
  threshold.app->add_option("--points", table_points, "rows of the inequality table")->check(CLI::PositiveNumber);

  auto stability_flags = [](Command& cmd) {
    add_model_flags(cmd);
    add_grid_flags(cmd);
    add_propagation_flags(cmd);
    add_output_flags(cmd);
    cmd.overrides.add<bool>(cmd.app, "--complex",
                            [](RunConfig& c, const bool& v) { c.complex_perturbation = v; },
                            "complex-valued perturbation");
  };

  Command evolve{app.add_subcommand("evolve", "perturbed symmetric state, orbital distance trace"), {}, {}, 160.0};
  stability_flags(evolve);
  add_mass_flag(evolve);
  evolve.overrides.add<double>(evolve.app, "--eps", [](RunConfig& c, const double& v) { c.eps = v; },
                               "relative H1 perturbation size");

  Command probe{app.add_subcommand("probe", "energy gaps of random mass-preserving perturbations")};
  add_model_flags(probe);
  add_grid_flags(probe);
  add_output_flags(probe);
  add_mass_flag(probe);
  probe.overrides.add<double>(probe.app, "--radius", [](RunConfig& c, const double& v) { c.radius = v; },
                              "maximal H1 size of the perturbations");
  probe.overrides.add<int>(probe.app, "--samples", [](RunConfig& c, const int& v) { c.samples = v; },
                           "number of perturbations");

  Command sweep{app.add_subcommand("sweep", "stability runs over a grid of masses and sizes"), {}, {}, 160.0};
  std::vector<double> sweep_masses, sweep_eps;
  int jobs = 1;
  stability_flags(sweep);
  sweep.app->add_option("--masses", sweep_masses, "masses")->delimiter(',')->required();
  sweep.app->add_option("--eps-list", sweep_eps, "perturbation sizes")->delimiter(',')->required();
  sweep.app->add_option("--jobs", jobs, "parallel runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitDomain;
  }

  try {
    if (*solve) return cmd_solve(solve_m, solve_a, solve_mu);
    if (*state.app) return cmd_state(state.resolve(), save_path);
    if (*energy.app) return cmd_energy(energy.resolve(), field_path);
    if (*hessian.app) return cmd_hessian(hessian.resolve());
    if (*threshold.app) return cmd_threshold(threshold.resolve(), table_points);
    if (*evolve.app) return cmd_evolve(evolve.resolve());
    if (*probe.app) return cmd_probe(probe.resolve());
    if (*sweep.app) return cmd_sweep(sweep.resolve(), sweep_masses, sweep_eps, jobs);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitDomain;
}
