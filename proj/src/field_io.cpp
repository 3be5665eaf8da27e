#include "starnls/field_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "starnls/errors.hpp"

namespace starnls {
namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError("field csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

}  // namespace

void write_field_csv(std::ostream& out, const GraphField& f) {
  nlohmann::ordered_json meta;
  meta["N"] = f.params().edges;
  meta["alpha"] = f.params().alpha;
  meta["mu"] = f.params().mu;
  meta["L"] = f.grid().length;
  meta["dx"] = f.grid().step;
  out << "# " << meta.dump() << "\n";
  out << "edge,x,re,im\n";
  for (std::size_t j = 0; j < f.edges(); ++j) {
    const auto e = f.edge(j);
    for (std::size_t k = 0; k < e.size(); ++k)
      out << j << ',' << fmt17(f.grid().x(k)) << ',' << fmt17(e[k].real()) << ','
          << fmt17(e[k].imag()) << '\n';
  }
}

GraphField read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw DomainError("field csv: missing metadata line");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(line.substr(2));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("field csv: bad metadata: ") + e.what());
  }
  ModelParams params;
  Grid grid;
  try {
    params.edges = meta.at("N").get<int>();
    params.alpha = meta.at("alpha").get<double>();
    params.mu = meta.at("mu").get<double>();
    grid.length = meta.at("L").get<double>();
    grid.step = meta.at("dx").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("field csv: incomplete metadata: ") + e.what());
  }
  GraphField f(params, grid);  // validates params and grid

  if (!std::getline(in, line) || line != "edge,x,re,im")
    throw DomainError("field csv: missing column header");
  std::vector<bool> seen(f.data().size(), false);
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() != 4) throw DomainError("field csv line " + std::to_string(lineno) + ": expected 4 columns");
    std::size_t j = 0;
    const auto [ptr, ec] = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), j);
    if (ec != std::errc() || ptr != cols[0].data() + cols[0].size() || j >= f.edges())
      throw DomainError("field csv line " + std::to_string(lineno) + ": bad edge index");
    const double x = parse_double(cols[1], lineno);
    const double kd = x / grid.step;
    const auto k = std::size_t(std::llround(kd));
    if (std::abs(kd - double(k)) > 1e-6 || k >= f.points())
      throw DomainError("field csv line " + std::to_string(lineno) + ": x off the grid");
    f.edge(j)[k] = {parse_double(cols[2], lineno), parse_double(cols[3], lineno)};
    seen[j * f.points() + k] = true;
  }
  for (bool s : seen)
    if (!s) throw DomainError("field csv: missing samples");
  f.validate();
  return f;
}

void save_field(const std::string& path, const GraphField& f) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open " + path + " for writing");
  write_field_csv(out, f);
  if (!out) throw DomainError("write to " + path + " failed");
}

GraphField load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  return read_field_csv(in);
}

}  // namespace starnls
