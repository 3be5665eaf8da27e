#include "starnls/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "starnls/errors.hpp"
#include <toml.hpp>

namespace starnls {
namespace {

void check_keys(const toml::table& t, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : t) {
    (void)v;
    if (!allowed.count(std::string(k.str())))
      throw DomainError("config: unknown key '" + std::string(k.str()) + "' in [" + name + "]");
  }
}

const toml::table* section(const toml::table& root, const std::string& name) {
  const auto* node = root.get(name);
  if (!node) return nullptr;
  const auto* t = node->as_table();
  if (!t) throw DomainError("config: [" + name + "] must be a table");
  return t;
}

double get_real(const toml::table& t, const std::string& sec, const std::string& key, double fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (auto v = node->value<double>()) return *v;  // accepts integers too
  throw DomainError("config: " + sec + "." + key + " must be a number");
}

std::int64_t get_int(const toml::table& t, const std::string& sec, const std::string& key,
                     std::int64_t fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (node->is_integer()) return *node->value<std::int64_t>();
  throw DomainError("config: " + sec + "." + key + " must be an integer");
}

}  // namespace

PropagatorConfig RunConfig::propagator() const {
  PropagatorConfig p;
  p.length = grid.length;
  p.step = grid.step;
  p.dt = dt;
  p.horizon = horizon;
  p.tolerance = tolerance;
  p.max_iterations = max_iterations;
  p.wall_threshold = wall_threshold;
  return p;
}

StabilityConfig RunConfig::stability() const {
  StabilityConfig s;
  s.propagation = propagator();
  s.perturbation.seed = seed;
  s.perturbation.complex_valued = complex_perturbation;
  s.sample_every = sample_every;
  return s;
}

void RunConfig::validate() const {
  model.validate();
  grid.validate();
  propagator().validate();
  if (sample_every < 1) throw DomainError("config: propagation.sample_every must be >= 1");
  if (mass && !(*mass > 0.0)) throw DomainError("config: task.mass must be > 0");
  if (omega && !(*omega > model.frequency_floor()))
    throw DomainError("config: task.omega must exceed alpha^2/N^2");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("config: task.eps must be >= 0");
  if (!(radius > 0.0) || radius > 0.1) throw DomainError("config: task.radius must lie in (0, 0.1]");
  if (samples < 1) throw DomainError("config: task.samples must be >= 1");
}

RunConfig parse_run_config(const std::string& text, const std::string& source, RunConfig base) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << e.description() << " at " << source << ":" << e.source().begin.line;
    throw DomainError(os.str());
  }
  check_keys(root, "root", {"model", "grid", "propagation", "task"});
  RunConfig c = std::move(base);
  if (const auto* t = section(root, "model")) {
    check_keys(*t, "model", {"n", "alpha", "mu"});
    c.model.edges = int(get_int(*t, "model", "n", c.model.edges));
    c.model.alpha = get_real(*t, "model", "alpha", c.model.alpha);
    c.model.mu = get_real(*t, "model", "mu", c.model.mu);
  }
  if (const auto* t = section(root, "grid")) {
    check_keys(*t, "grid", {"length", "dx"});
    c.grid.length = get_real(*t, "grid", "length", c.grid.length);
    c.grid.step = get_real(*t, "grid", "dx", c.grid.step);
  }
  if (const auto* t = section(root, "propagation")) {
    check_keys(*t, "propagation",
               {"dt", "horizon", "tolerance", "max_iterations", "wall_threshold", "sample_every"});
    c.dt = get_real(*t, "propagation", "dt", c.dt);
    c.horizon = get_real(*t, "propagation", "horizon", c.horizon);
    c.tolerance = get_real(*t, "propagation", "tolerance", c.tolerance);
    c.max_iterations = int(get_int(*t, "propagation", "max_iterations", c.max_iterations));
    c.wall_threshold = get_real(*t, "propagation", "wall_threshold", c.wall_threshold);
    c.sample_every = int(get_int(*t, "propagation", "sample_every", c.sample_every));
  }
  if (const auto* t = section(root, "task")) {
    check_keys(*t, "task",
               {"mass", "omega", "eps", "radius", "samples", "seed", "complex", "output"});
    if (t->get("mass")) c.mass = get_real(*t, "task", "mass", 0.0);
    if (t->get("omega")) c.omega = get_real(*t, "task", "omega", 0.0);
    c.eps = get_real(*t, "task", "eps", c.eps);
    c.radius = get_real(*t, "task", "radius", c.radius);
    c.samples = int(get_int(*t, "task", "samples", c.samples));
    const auto seed = get_int(*t, "task", "seed", std::int64_t(c.seed));
    if (seed < 0) throw DomainError("config: task.seed must be >= 0");
    c.seed = std::uint64_t(seed);
    if (const auto* node = t->get("complex")) {
      if (!node->is_boolean()) throw DomainError("config: task.complex must be a boolean");
      c.complex_perturbation = *node->value<bool>();
    }
    if (const auto* node = t->get("output")) {
      if (!node->is_string()) throw DomainError("config: task.output must be a string");
      c.output = *node->value<std::string>();
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path, std::move(base));
}

std::string run_manifest_json(const RunConfig& c, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["model"] = {{"n", c.model.edges}, {"alpha", c.model.alpha}, {"mu", c.model.mu}};
  j["grid"] = {{"length", c.grid.length}, {"dx", c.grid.step}};
  j["propagation"] = {{"dt", c.dt},
                      {"horizon", c.horizon},
                      {"tolerance", c.tolerance},
                      {"max_iterations", c.max_iterations},
                      {"wall_threshold", c.wall_threshold},
                      {"sample_every", c.sample_every}};
  nlohmann::ordered_json task;
  if (c.mass) task["mass"] = *c.mass;
  if (c.omega) task["omega"] = *c.omega;
  task["eps"] = c.eps;
  task["radius"] = c.radius;
  task["samples"] = c.samples;
  task["seed"] = c.seed;
  task["complex"] = c.complex_perturbation;
  j["task"] = task;
  return j.dump(2) + "\n";
}

}  // namespace starnls
