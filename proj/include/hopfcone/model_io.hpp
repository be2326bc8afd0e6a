#pragma once

// Run configuration files: `[section]` headers and `key = value` lines, with
// values written as JSON literals (numbers, nested lists) or bare words.
// `#` starts a comment.
//
//   [model]
//   K = 1
//   p = 2
//   A = diagonal-indicator      # or chain, or a K^p x L row-major list
//
//   [prior]
//   kind = rademacher           # or atoms, with atoms = [[1],[-1]] and weights

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hopfcone/hopf_solver.hpp"
#include "hopfcone/model.hpp"
#include "hopfcone/symcone.hpp"

namespace hopfcone {

using Json = nlohmann::json;

class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text);
  static ConfigFile load(const std::filesystem::path& path);

  const std::string& text() const noexcept { return text_; }
  bool has(const std::string& section) const { return values_.count(section) != 0; }
  bool has(const std::string& section, const std::string& key) const;
  /// Throws ValidationError naming section.key when absent.
  const Json& get(const std::string& section, const std::string& key) const;

  double number(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  std::size_t count(const std::string& section, const std::string& key) const;
  std::size_t count(const std::string& section, const std::string& key, std::size_t fallback) const;
  std::string word(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;

  /// Throws ValidationError on any key of `section` outside `allowed`.
  void require_known(const std::string& section, const std::set<std::string>& allowed) const;

 private:
  std::string text_;
  std::map<std::string, std::map<std::string, Json>> values_;
};

/// `[model]`: K, p, optional L and A.
InteractionSpec parse_spec(const ConfigFile& cfg);
/// `[prior]` for a K-dimensional row.
DiscretePrior parse_prior(const ConfigFile& cfg, std::size_t K);
/// `[solver]` overrides on the defaults.
SolverConfig parse_solver(const ConfigFile& cfg);

/// A K×K symmetric matrix from a nested list, a flat list of K² entries, or a scalar (K = 1).
SymMatrix json_to_sym(const Json& j, std::size_t K, const std::string& field);
/// A list of such matrices.
std::vector<SymMatrix> json_to_sym_list(const Json& j, std::size_t K, const std::string& field);

}  // namespace hopfcone
