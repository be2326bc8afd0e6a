#include "hopfcone/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include "hopfcone/errors.hpp"
#include "hopfcone/free_energy.hpp"
#include "hopfcone/hj_checker.hpp"
#include "hopfcone/hopf_solver.hpp"
#include "hopfcone/initial_condition.hpp"
#include "hopfcone/model_io.hpp"
#include "hopfcone/parallel.hpp"
#include "hopfcone/report.hpp"

namespace hopfcone {

namespace {

struct Options {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  unsigned threads = default_threads();
  std::string format = "both";
};

struct Context {
  const Options& opt;
  std::optional<ConfigFile> config;
  std::string config_hash;

  const ConfigFile& cfg() const {
    if (!config) throw ValidationError("--config: required for subcommand " + opt.subcommand);
    return *config;
  }
};

std::vector<std::string> sym_columns(const std::string& prefix, std::size_t K) {
  std::vector<std::string> out;
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = a; b < K; ++b) out.push_back(prefix + "_" + std::to_string(a) + std::to_string(b));
  return out;
}

void append_sym(std::vector<Table::Cell>& row, const SymMatrix& m) {
  for (double v : m.packed()) row.emplace_back(v);
}

void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }

void provenance(std::vector<Table::Cell>& row, const Context& ctx) {
  row.emplace_back(ctx.opt.seed);
  row.emplace_back(ctx.config_hash);
}

void emit(const Context& ctx, const std::string& name, const Table& table, bool echo = true) {
  const std::filesystem::path dir(ctx.opt.out_dir);
  if (ctx.opt.format != "json") write_file(dir / (name + ".csv"), table.to_csv());
  if (ctx.opt.format != "csv") write_file(dir / (name + ".json"), table.to_json());
  if (echo)
    for (std::size_t r = 0; r < table.rows().size(); ++r) std::cout << table.summary(r) << '\n';
}

std::vector<double> t_list(const ConfigFile& cfg, const std::string& section) {
  auto ts = cfg.numbers(section, "t");
  for (double t : ts)
    if (t < 0.0) throw ValidationError(section + ".t: must be nonnegative");
  return ts;
}

void require_psd(const SymMatrix& h, const std::string& name) {
  if (!is_psd(h, kPsdTolerance * (1.0 + h.norm()))) throw ValidationError(name + ": not PSD");
}

// ------------------------------------------------------------ subcommands

void cmd_psi(const Context& ctx) {
  const auto& cfg = ctx.cfg();
  cfg.require_known("psi", {"h", "mode", "nodes", "samples"});
  const auto spec = parse_spec(cfg);
  const auto prior = parse_prior(cfg, spec.K());
  const auto hs = json_to_sym_list(cfg.get("psi", "h"), spec.K(), "psi.h");
  for (const auto& h : hs) require_psd(h, "psi.h");
  const std::string mode = cfg.word("psi", "mode", "gauss-hermite");
  EvalMode eval;
  if (mode == "gauss-hermite") {
    eval = GaussHermiteMode{cfg.count("psi", "nodes", 64)};
  } else if (mode == "monte-carlo") {
    eval = MonteCarloMode{cfg.count("psi", "samples", 10000), ctx.opt.seed};
  } else {
    throw ValidationError("psi.mode: expected gauss-hermite or monte-carlo");
  }
  const InitialCondition ic(prior, eval);

  std::vector<std::string> cols = sym_columns("h", spec.K());
  append(cols, {"value", "std_error"});
  append(cols, sym_columns("grad", spec.K()));
  append(cols, {"seed", "config_hash"});
  Table table(cols);
  for (const auto& h : hs) {
    const auto e = ic.estimate(h);
    std::vector<Table::Cell> row;
    append_sym(row, h);
    row.emplace_back(e.value);
    row.emplace_back(e.std_error);
    append_sym(row, e.gradient);
    provenance(row, ctx);
    table.add_row(std::move(row));
  }
  emit(ctx, "psi", table);
}

void cmd_free_energy(const Context& ctx) {
  const auto& cfg = ctx.cfg();
  cfg.require_known("free-energy", {"N", "n_disorder", "t", "h"});
  const auto spec = parse_spec(cfg);
  const auto prior = parse_prior(cfg, spec.K());
  const std::size_t N = cfg.count("free-energy", "N");
  const std::size_t n = cfg.count("free-energy", "n_disorder");
  if (n == 0) throw ValidationError("free-energy.n_disorder: must be positive");
  checked_power(prior.size(), N, kMaxConfigurations);
  const auto ts = t_list(cfg, "free-energy");
  const auto hs = json_to_sym_list(cfg.get("free-energy", "h"), spec.K(), "free-energy.h");
  for (const auto& h : hs) require_psd(h, "free-energy.h");

  std::vector<std::string> cols{"N", "t"};
  append(cols, sym_columns("h", spec.K()));
  append(cols, {"value", "std_error", "n_disorder", "method", "seed", "config_hash"});
  Table table(cols);
  for (double t : ts)
    for (const auto& h : hs) {
      const auto e = mean_free_energy(spec, prior, N, t, h, n, ctx.opt.seed, ctx.opt.threads);
      std::vector<Table::Cell> row{static_cast<std::uint64_t>(N), t};
      append_sym(row, h);
      row.emplace_back(e.value);
      row.emplace_back(e.std_error);
      row.emplace_back(static_cast<std::uint64_t>(n));
      row.emplace_back(e.method);
      provenance(row, ctx);
      table.add_row(std::move(row));
    }
  emit(ctx, "free-energy", table);
}

void cmd_hopf(const Context& ctx) {
  const auto& cfg = ctx.cfg();
  cfg.require_known("hopf", {"t", "h"});
  const auto spec = parse_spec(cfg);
  const auto prior = parse_prior(cfg, spec.K());
  auto solver = parse_solver(cfg);
  solver.threads = ctx.opt.threads;
  const auto ts = t_list(cfg, "hopf");
  const auto hs = json_to_sym_list(cfg.get("hopf", "h"), spec.K(), "hopf.h");
  for (const auto& h : hs) require_psd(h, "hopf.h");
  const InitialCondition psi(prior);

  const std::size_t K = spec.K();
  std::vector<std::string> cols{"t"};
  append(cols, sym_columns("h", K));
  append(cols, {"value", "gap_estimate"});
  append(cols, sym_columns("h_outer", K));
  append(cols, sym_columns("h_inner", K));
  append(cols, {"outer_starts", "inner_iterations", "seed", "config_hash"});
  Table table(cols);
  for (double t : ts)
    for (const auto& h : hs) {
      const auto r = hopf_value(psi, spec, t, h, solver);
      std::vector<Table::Cell> row{t};
      append_sym(row, h);
      row.emplace_back(r.value);
      row.emplace_back(r.gap_estimate);
      append_sym(row, r.h_outer);
      append_sym(row, r.h_inner);
      row.emplace_back(static_cast<std::uint64_t>(r.outer_starts));
      row.emplace_back(static_cast<std::uint64_t>(r.inner_iterations));
      provenance(row, ctx);
      table.add_row(std::move(row));
    }
  emit(ctx, "hopf", table);
}

void cmd_hopf_diagonal(const Context& ctx) {
  const auto& cfg = ctx.cfg();
  cfg.require_known("hopf-diagonal", {"t", "x"});
  const auto spec = parse_spec(cfg);
  const auto prior = parse_prior(cfg, spec.K());
  auto solver = parse_solver(cfg);
  solver.threads = ctx.opt.threads;
  const std::size_t K = spec.K();
  const auto ts = t_list(cfg, "hopf-diagonal");
  const Json& xs_json = cfg.get("hopf-diagonal", "x");
  if (!xs_json.is_array() || xs_json.empty()) throw ValidationError("hopf-diagonal.x: expected a list of vectors");
  std::vector<std::vector<double>> xs;
  for (const auto& x : xs_json) {
    std::vector<double> v;
    if (x.is_number()) v.push_back(x.get<double>());
    else if (x.is_array())
      for (const auto& e : x) {
        if (!e.is_number()) throw ValidationError("hopf-diagonal.x: expected numbers");
        v.push_back(e.get<double>());
      }
    if (v.size() != K) throw ValidationError("hopf-diagonal.x: every point needs K entries");
    for (double e : v)
      if (!(e >= 0.0)) throw ValidationError("hopf-diagonal.x: entries must be nonnegative");
    xs.push_back(std::move(v));
  }
  if (!depends_only_on_diagonal(spec)) throw ValidationError("model.A: H depends on off-diagonal entries");
  const InitialCondition psi(prior);

  std::vector<std::string> cols{"t"};
  for (std::size_t k = 0; k < K; ++k) cols.push_back("x_" + std::to_string(k));
  append(cols, {"value", "gap_estimate"});
  for (std::size_t k = 0; k < K; ++k) cols.push_back("x_outer_" + std::to_string(k));
  for (std::size_t k = 0; k < K; ++k) cols.push_back("x_inner_" + std::to_string(k));
  append(cols, {"seed", "config_hash"});
  Table table(cols);
  for (double t : ts)
    for (const auto& x : xs) {
      const auto r = hopf_diagonal(psi, spec, t, x, solver);
      std::vector<Table::Cell> row{t};
      for (double v : x) row.emplace_back(v);
      row.emplace_back(r.value);
      row.emplace_back(r.gap_estimate);
      for (double v : r.h_outer.diagonal_entries()) row.emplace_back(v);
      for (double v : r.h_inner.diagonal_entries()) row.emplace_back(v);
      provenance(row, ctx);
      table.add_row(std::move(row));
    }
  emit(ctx, "hopf-diagonal", table);
}

void cmd_layered(const Context& ctx) {
  const auto& cfg = ctx.cfg();
  cfg.require_known("layered", {"t", "nodes"});
  const auto spec = parse_spec(cfg);
  const auto prior = parse_prior(cfg, spec.K());
  auto solver = parse_solver(cfg);
  solver.threads = ctx.opt.threads;
  if (spec.K() < 2) throw ValidationError("model.K: layered needs K >= 2");
  if (!prior.has_independent_coordinates()) throw ValidationError("prior: layered needs independent coordinates");
  const auto ts = t_list(cfg, "layered");
  const std::size_t nodes = cfg.count("layered", "nodes", 64);
  std::vector<ScalarConvexFunction> layers;
  for (std::size_t k = 0; k < spec.K(); ++k) layers.push_back(layer_function(prior.marginal(k), nodes));

  Table table({"t", "value", "seed", "config_hash"});
  for (double t : ts) {
    std::vector<Table::Cell> row{t, layered_reduced(t, layers, solver)};
    provenance(row, ctx);
    table.add_row(std::move(row));
  }
  emit(ctx, "layered", table);
}

void cmd_residual(const Context& ctx) {
  const auto& cfg = ctx.cfg();
  cfg.require_known("residual", {"t_min", "t_max", "n_t", "slice", "s_min", "s_max", "n_h", "delta", "tolerance"});
  const auto spec = parse_spec(cfg);
  const auto prior = parse_prior(cfg, spec.K());
  auto solver = parse_solver(cfg);
  GridSpec grid;
  grid.t_min = cfg.number("residual", "t_min", grid.t_min);
  grid.t_max = cfg.number("residual", "t_max", grid.t_max);
  grid.n_t = cfg.count("residual", "n_t", grid.n_t);
  grid.s_min = cfg.number("residual", "s_min", grid.s_min);
  grid.s_max = cfg.number("residual", "s_max", grid.s_max);
  grid.n_h = cfg.count("residual", "n_h", grid.n_h);
  grid.delta = cfg.number("residual", "delta", grid.delta);
  grid.tolerance = cfg.number("residual", "tolerance", grid.tolerance);
  grid.seed = ctx.opt.seed;
  grid.threads = ctx.opt.threads;
  const std::string slice = cfg.word("residual", "slice", "diagonal");
  if (slice == "diagonal") grid.slice = SliceKind::diagonal;
  else if (slice == "random-psd") grid.slice = SliceKind::random_psd;
  else throw ValidationError("residual.slice: expected diagonal or random-psd");
  grid.validate(spec.K());
  const InitialCondition psi(prior);
  const ValueFunction f = [&](double t, const SymMatrix& h) { return hopf_value(psi, spec, t, h, solver).value; };
  const auto rep = residual_grid(f, spec, grid);

  std::vector<std::string> cols{"t"};
  append(cols, sym_columns("h", spec.K()));
  append(cols, {"dt"});
  append(cols, sym_columns("grad", spec.K()));
  append(cols, {"residual", "residual_half_step", "kink", "pass", "seed", "config_hash"});
  Table table(cols);
  for (const auto& p : rep.points) {
    std::vector<Table::Cell> row{p.t};
    append_sym(row, p.h);
    row.emplace_back(p.dt);
    append_sym(row, p.grad);
    row.emplace_back(p.residual);
    row.emplace_back(p.residual_half);
    row.emplace_back(std::int64_t{p.kink});
    row.emplace_back(std::int64_t{p.pass});
    provenance(row, ctx);
    table.add_row(std::move(row));
  }
  emit(ctx, "residual", table, false);
  Table summary({"points", "kinks", "pass_fraction", "median_abs", "q90_abs", "max_abs", "delta", "tolerance", "seed",
                 "config_hash"});
  std::vector<Table::Cell> row{static_cast<std::uint64_t>(rep.points.size()), static_cast<std::uint64_t>(rep.kinks),
                               rep.pass_fraction, rep.median_abs, rep.q90_abs, rep.max_abs, grid.delta, grid.tolerance};
  provenance(row, ctx);
  summary.add_row(std::move(row));
  emit(ctx, "residual-summary", summary);
}

void cmd_converge(const Context& ctx) {
  const auto& cfg = ctx.cfg();
  cfg.require_known("converge", {"t", "h", "N", "n_disorder"});
  const auto spec = parse_spec(cfg);
  const auto prior = parse_prior(cfg, spec.K());
  auto solver = parse_solver(cfg);
  solver.threads = ctx.opt.threads;
  const double t = cfg.number("converge", "t");
  if (t < 0.0) throw ValidationError("converge.t: must be nonnegative");
  const SymMatrix h = json_to_sym(cfg.get("converge", "h"), spec.K(), "converge.h");
  require_psd(h, "converge.h");
  std::vector<std::size_t> Ns;
  for (double v : cfg.numbers("converge", "N")) {
    if (v < 1.0 || v != std::floor(v)) throw ValidationError("converge.N: expected positive integers");
    Ns.push_back(static_cast<std::size_t>(v));
  }
  const std::size_t n = cfg.count("converge", "n_disorder");
  if (n == 0) throw ValidationError("converge.n_disorder: must be positive");
  const auto rep = convergence_report(spec, prior, t, h, Ns, n, ctx.opt.seed, solver);

  std::vector<std::string> cols{"N", "t"};
  append(cols, sym_columns("h", spec.K()));
  append(cols, {"free_energy", "std_error", "hopf", "gap", "n_disorder", "seed", "config_hash"});
  Table table(cols);
  for (const auto& r : rep.rows) {
    std::vector<Table::Cell> row{static_cast<std::uint64_t>(r.N), t};
    append_sym(row, h);
    row.emplace_back(r.free_energy);
    row.emplace_back(r.std_error);
    row.emplace_back(r.hopf);
    row.emplace_back(r.gap);
    row.emplace_back(static_cast<std::uint64_t>(n));
    provenance(row, ctx);
    table.add_row(std::move(row));
  }
  emit(ctx, "converge", table);
  Table trend({"nonincreasing_3se", "last_below_first", "last_within_3se", "seed", "config_hash"});
  std::vector<Table::Cell> row{std::int64_t{rep.nonincreasing_3se}, std::int64_t{rep.last_below_first},
                               std::int64_t{rep.last_within_3se}};
  provenance(row, ctx);
  trend.add_row(std::move(row));
  emit(ctx, "converge-trend", trend);
}

void cmd_hopflax_demo(const Context& ctx) {
  std::vector<double> ts{0.25, 1.0};
  std::size_t n_x = 61;
  if (ctx.config) {
    ctx.config->require_known("hopflax-demo", {"t", "n_x"});
    if (ctx.config->has("hopflax-demo", "t")) ts = t_list(*ctx.config, "hopflax-demo");
    n_x = ctx.config->count("hopflax-demo", "n_x", n_x);
  }
  for (double t : ts)
    if (!(t > 0.0)) throw ValidationError("hopflax-demo.t: must be positive");
  if (n_x < 2) throw ValidationError("hopflax-demo.n_x: must be at least 2");
  const auto g = [](double y) { return std::abs(y); };
  Table table({"t", "x", "value", "closed_form", "abs_error", "seed", "config_hash"});
  for (double t : ts)
    for (std::size_t i = 0; i < n_x; ++i) {
      const double x = -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(n_x - 1);
      const double v = hopf_lax_1d(g, 1.0, t, x);
      const double exact = std::abs(x) <= 2.0 * t ? x * x / (4.0 * t) : std::abs(x) - t;
      std::vector<Table::Cell> row{t, x, v, exact, std::abs(v - exact)};
      provenance(row, ctx);
      table.add_row(std::move(row));
    }
  emit(ctx, "hopflax-demo", table);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  Options opt;
  CLI::App app{"Hopf-formula limits of finite-rank tensor inference free energies"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", opt.config_path, "Run configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "Output directory");
  app.add_option("--seed", opt.seed, "Random seed");
  app.add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json", "both"}));
  const std::vector<std::pair<std::string, std::string>> subcommands{
      {"psi", "Evaluate the initial condition and its gradient"},
      {"free-energy", "Disorder-averaged finite-N free energy by enumeration"},
      {"hopf", "Hopf formula on the PSD cone"},
      {"hopf-diagonal", "Hopf formula on the nonnegative orthant"},
      {"layered", "Layered one-dimensional reduction"},
      {"residual", "Finite-difference equation residual of the Hopf solution"},
      {"converge", "Finite-N free energies against the Hopf value"},
      {"hopflax-demo", "Scalar Hopf-Lax formula for g = |x|"}};
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opt.subcommand = app.get_subcommands().front()->get_name();

  try {
    Context ctx{opt, std::nullopt, ""};
    if (!opt.config_path.empty()) {
      ctx.config = ConfigFile::load(opt.config_path);
      ctx.config_hash = hash_hex(fnv1a(ctx.config->text()));
    } else {
      ctx.config_hash = hash_hex(fnv1a(""));
    }
    if (opt.subcommand == "psi") cmd_psi(ctx);
    else if (opt.subcommand == "free-energy") cmd_free_energy(ctx);
    else if (opt.subcommand == "hopf") cmd_hopf(ctx);
    else if (opt.subcommand == "hopf-diagonal") cmd_hopf_diagonal(ctx);
    else if (opt.subcommand == "layered") cmd_layered(ctx);
    else if (opt.subcommand == "residual") cmd_residual(ctx);
    else if (opt.subcommand == "converge") cmd_converge(ctx);
    else cmd_hopflax_demo(ctx);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SolverCapError& e) {
    std::cerr << "solver cap: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hopfcone
