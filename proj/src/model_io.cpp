#include "hopfcone/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hopfcone/errors.hpp"

namespace hopfcone {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string field(const std::string& section, const std::string& key) { return section + "." + key; }

double as_number(const Json& j, const std::string& name) {
  if (!j.is_number()) throw ValidationError(name + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(name + ": must be finite");
  return v;
}

std::vector<double> as_numbers(const Json& j, const std::string& name) {
  if (j.is_number()) return {as_number(j, name)};
  if (!j.is_array()) throw ValidationError(name + ": expected a list of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(as_number(v, name));
  return out;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
  ConfigFile cfg;
  cfg.text_ = std::string(text);
  std::istringstream in(cfg.text_);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string s = trim(line);
    if (s.empty()) continue;
    const std::string where = "config line " + std::to_string(lineno);
    if (s.front() == '[') {
      if (s.back() != ']') throw ValidationError(where + ": unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (section.empty()) throw ValidationError(where + ": empty section name");
      cfg.values_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError(where + ": expected key = value");
    if (section.empty()) throw ValidationError(where + ": key outside any section");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string raw = trim(std::string_view(s).substr(eq + 1));
    if (key.empty() || raw.empty()) throw ValidationError(where + ": empty key or value");
    auto& slot = cfg.values_[section];
    if (slot.count(key)) throw ValidationError(where + ": duplicate key " + field(section, key));
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
      if (raw.find_first_of("[]{},\"") != std::string::npos)
        throw ValidationError(where + ": malformed value for " + field(section, key));
      value = raw;
    }
    slot[key] = std::move(value);
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto it = values_.find(section);
  return it != values_.end() && it->second.count(key) != 0;
}

const Json& ConfigFile::get(const std::string& section, const std::string& key) const {
  const auto it = values_.find(section);
  if (it == values_.end() || !it->second.count(key)) throw ValidationError(field(section, key) + ": missing");
  return it->second.at(key);
}

double ConfigFile::number(const std::string& section, const std::string& key) const {
  return as_number(get(section, key), field(section, key));
}

double ConfigFile::number(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

std::size_t ConfigFile::count(const std::string& section, const std::string& key) const {
  const Json& j = get(section, key);
  if (!j.is_number_unsigned()) throw ValidationError(field(section, key) + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::size_t ConfigFile::count(const std::string& section, const std::string& key, std::size_t fallback) const {
  return has(section, key) ? count(section, key) : fallback;
}

std::string ConfigFile::word(const std::string& section, const std::string& key, const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  const Json& j = get(section, key);
  if (!j.is_string()) throw ValidationError(field(section, key) + ": expected a word");
  return j.get<std::string>();
}

std::vector<double> ConfigFile::numbers(const std::string& section, const std::string& key) const {
  return as_numbers(get(section, key), field(section, key));
}

void ConfigFile::require_known(const std::string& section, const std::set<std::string>& allowed) const {
  const auto it = values_.find(section);
  if (it == values_.end()) return;
  for (const auto& [key, value] : it->second)
    if (!allowed.count(key)) throw ValidationError(field(section, key) + ": unknown key");
}

// ------------------------------------------------------------------ model

InteractionSpec parse_spec(const ConfigFile& cfg) {
  cfg.require_known("model", {"K", "L", "p", "A"});
  const std::size_t K = cfg.count("model", "K");
  const std::size_t p = cfg.count("model", "p");
  if (K == 0 || p == 0) throw ValidationError("model.K and model.p must be positive");
  const Json& a = cfg.has("model", "A") ? cfg.get("model", "A") : Json("diagonal-indicator");
  if (a.is_string()) {
    const auto kind = a.get<std::string>();
    if (cfg.has("model", "L")) throw ValidationError("model.L: only allowed with an explicit A");
    if (kind == "diagonal-indicator") return InteractionSpec::diagonal_indicator(K, p);
    if (kind == "chain") {
      if (p != 2) throw ValidationError("model.A: chain requires p = 2");
      return InteractionSpec::chain(K);
    }
    throw ValidationError("model.A: unknown kind '" + kind + "'");
  }
  if (!a.is_array() || a.empty()) throw ValidationError("model.A: expected a nonempty list of rows");
  const std::size_t rows = a.size();
  const std::size_t L = a[0].is_array() ? a[0].size() : 1;
  if (cfg.has("model", "L") && cfg.count("model", "L") != L) throw ValidationError("model.L: disagrees with A");
  std::vector<double> data;
  for (const auto& row : a) {
    const auto r = as_numbers(row, "model.A");
    if (r.size() != L) throw ValidationError("model.A: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return InteractionSpec(K, L, p, Matrix(rows, L, std::move(data)));
}

DiscretePrior parse_prior(const ConfigFile& cfg, std::size_t K) {
  cfg.require_known("prior", {"kind", "atoms", "weights"});
  const std::string kind = cfg.word("prior", "kind", cfg.has("prior", "atoms") ? "atoms" : "rademacher");
  if (kind == "rademacher") {
    if (cfg.has("prior", "atoms") || cfg.has("prior", "weights"))
      throw ValidationError("prior.atoms: not allowed with kind = rademacher");
    return DiscretePrior::rademacher(K);
  }
  if (kind != "atoms") throw ValidationError("prior.kind: expected rademacher or atoms");
  const Json& atoms = cfg.get("prior", "atoms");
  if (!atoms.is_array() || atoms.empty()) throw ValidationError("prior.atoms: expected a nonempty list");
  std::vector<std::vector<double>> list;
  for (const auto& a : atoms) {
    auto v = as_numbers(a, "prior.atoms");
    if (v.size() != K) throw ValidationError("prior.atoms: every atom must have K entries");
    list.push_back(std::move(v));
  }
  std::vector<double> weights;
  if (cfg.has("prior", "weights")) {
    weights = cfg.numbers("prior", "weights");
  } else {
    weights.assign(list.size(), 1.0 / static_cast<double>(list.size()));
  }
  return DiscretePrior(std::move(list), std::move(weights));
}

SolverConfig parse_solver(const ConfigFile& cfg) {
  cfg.require_known("solver", {"outer_radius", "grid_resolution", "rotations", "multistarts", "shrink",
                               "sufficient_decrease", "inner_tolerance", "outer_tolerance", "screen_tolerance",
                               "inner_max_iterations", "outer_max_iterations", "layered_grid"});
  SolverConfig s;
  s.outer_radius = cfg.number("solver", "outer_radius", s.outer_radius);
  s.grid_resolution = cfg.count("solver", "grid_resolution", s.grid_resolution);
  s.rotations = cfg.count("solver", "rotations", s.rotations);
  s.multistarts = cfg.count("solver", "multistarts", s.multistarts);
  s.shrink = cfg.number("solver", "shrink", s.shrink);
  s.sufficient_decrease = cfg.number("solver", "sufficient_decrease", s.sufficient_decrease);
  s.inner_tolerance = cfg.number("solver", "inner_tolerance", s.inner_tolerance);
  s.outer_tolerance = cfg.number("solver", "outer_tolerance", s.outer_tolerance);
  s.screen_tolerance = cfg.number("solver", "screen_tolerance", s.screen_tolerance);
  s.inner_max_iterations = cfg.count("solver", "inner_max_iterations", s.inner_max_iterations);
  s.outer_max_iterations = cfg.count("solver", "outer_max_iterations", s.outer_max_iterations);
  s.layered_grid = cfg.count("solver", "layered_grid", s.layered_grid);
  s.validate();
  return s;
}

SymMatrix json_to_sym(const Json& j, std::size_t K, const std::string& name) {
  if (j.is_number()) {
    if (K != 1) throw ValidationError(name + ": a scalar is only a matrix when K = 1");
    return SymMatrix(1, {as_number(j, name)});
  }
  if (!j.is_array()) throw ValidationError(name + ": expected a matrix");
  std::vector<double> flat;
  if (!j.empty() && j[0].is_array()) {
    if (j.size() != K) throw ValidationError(name + ": expected K rows");
    for (const auto& row : j) {
      const auto r = as_numbers(row, name);
      if (r.size() != K) throw ValidationError(name + ": expected K columns");
      flat.insert(flat.end(), r.begin(), r.end());
    }
  } else {
    flat = as_numbers(j, name);
    if (flat.size() != K * K) throw ValidationError(name + ": expected K*K entries");
  }
  try {
    return SymMatrix::from_dense(Matrix(K, K, std::move(flat)), 1e-12);
  } catch (const ValidationError& e) {
    throw ValidationError(name + ": " + e.what());
  }
}

std::vector<SymMatrix> json_to_sym_list(const Json& j, std::size_t K, const std::string& name) {
  if (!j.is_array() || j.empty()) throw ValidationError(name + ": expected a nonempty list of matrices");
  std::vector<SymMatrix> out;
  for (const auto& m : j) out.push_back(json_to_sym(m, K, name));
  return out;
}

}  // namespace hopfcone
