// Acceptance gate: every criterion runs at its stated tolerance and budget and
// prints one PASS/FAIL line.  Criterion 11 replays 1-10 with two worker
// threads and compares 17-digit fingerprints, then checks CLI output bytes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "hopfcone/cli.hpp"
#include "hopfcone/free_energy.hpp"
#include "hopfcone/hj_checker.hpp"
#include "hopfcone/hopf_solver.hpp"
#include "hopfcone/initial_condition.hpp"
#include "hopfcone/report.hpp"
#include "hopfcone/rng.hpp"

using namespace hopfcone;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string fingerprint;
};

class Fingerprint {
 public:
  void add(double v) { text_ += format_double(v) + ';'; }
  void add(const SymMatrix& m) {
    for (double v : m.packed()) add(v);
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

SymMatrix random_psd(std::size_t K, const CounterRng& rng, std::uint64_t& index, double scale) {
  Matrix g(K, K);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) g(i, j) = rng.normal(index++);
  return scale * gram(g);
}

double sym_entry(const SymMatrix& m) { return m(0, 0); }

// 1. Hopf–Lax closed form for g = |x|.
Outcome hopf_lax(unsigned) {
  const auto g = [](double y) { return std::abs(y); };
  double worst = 0.0;
  Fingerprint fp;
  for (double t : {0.25, 0.5, 1.0})
    for (int i = 0; i <= 60; ++i) {
      const double x = -3.0 + 6.0 * i / 60.0;
      const double v = hopf_lax_1d(g, 1.0, t, x);
      const double exact = std::abs(x) <= 2.0 * t ? x * x / (4.0 * t) : std::abs(x) - t;
      worst = std::max(worst, std::abs(v - exact));
      fp.add(v);
    }
  return {worst <= 1e-8, "max abs error " + fmt(worst) + " over 61x3 points (tol 1e-8)", fp.str()};
}

// 2. f(0,h) = ψ(h).
Outcome initial_identity(unsigned threads) {
  SolverConfig cfg;
  cfg.threads = threads;
  double worst = 0.0;
  Fingerprint fp;
  {
    const InitialCondition psi(DiscretePrior::rademacher(1));
    const auto spec = InteractionSpec::diagonal_indicator(1, 2);
    for (int j = 0; j < 10; ++j) {
      const SymMatrix h(1, {0.2 * j});
      const double v = hopf_value(psi, spec, 0.0, h, cfg).value;
      worst = std::max(worst, std::abs(v - psi.psi(h)));
      fp.add(v);
    }
  }
  {
    const InitialCondition psi(DiscretePrior::rademacher(2));
    const auto spec = InteractionSpec::diagonal_indicator(2, 2);
    const CounterRng rng(2002, 0);
    std::uint64_t index = 0;
    for (int j = 0; j < 10; ++j) {
      const SymMatrix h = random_psd(2, rng, index, 0.3);
      const double v = hopf_value(psi, spec, 0.0, h, cfg).value;
      worst = std::max(worst, std::abs(v - psi.psi(h)));
      fp.add(v);
    }
  }
  return {worst <= 1e-5, "max |f(0,h) - psi(h)| " + fmt(worst) + " over 10 K=1 + 10 K=2 points (tol 1e-5)", fp.str()};
}

// 3. Gibbs brackets against common-random-number finite differences.
Outcome derivative_identities(unsigned threads) {
  const std::size_t N = 6, n = 400;
  const double delta = 1e-4;
  const std::vector<std::pair<double, double>> points{{0.2, 0.1}, {0.4, 0.3}, {0.6, 0.5}, {0.8, 0.2}, {1.0, 0.4}};
  const auto prior = DiscretePrior::rademacher(1);
  bool pass = true;
  double worst_z = 0.0;
  Fingerprint fp;
  for (std::size_t p : {2, 3}) {
    const auto spec = InteractionSpec::diagonal_indicator(1, p);
    for (const auto& [t, s] : points) {
      const SymMatrix h(1, {s}), hp(1, {s + delta}), hm(1, {s - delta});
      std::vector<double> d_t(n), d_h(n);
      for_each_disorder(spec, prior, N, n, 3000 + p, threads, [&](std::size_t i, const QuenchedSystem& q) {
        const auto g = q.gibbs(t, h);
        d_t[i] = g.dt - (q.log_partition(t + delta, h) - q.log_partition(t - delta, h)) / (2.0 * delta);
        d_h[i] = sym_entry(g.grad) - (q.log_partition(t, hp) - q.log_partition(t, hm)) / (2.0 * delta);
      });
      for (const auto& d : {d_t, d_h}) {
        const auto e = mean_and_error(d);
        const double z = std::abs(e.value) / e.std_error;
        worst_z = std::max(worst_z, z);
        if (!(std::abs(e.value) <= 3.0 * e.std_error)) pass = false;
        fp.add(e.value);
        fp.add(e.std_error);
      }
    }
  }
  return {pass, "largest |gibbs - FD| / paired SE " + fmt(worst_z) + " over 10 points x {dt, grad} (tol 3)", fp.str()};
}

// 4. Convexity, monotone gradients and positivity of F̄_N.
Outcome structural(unsigned threads) {
  const std::size_t n = 200;
  const auto prior = DiscretePrior::rademacher(1);
  const CounterRng rng(4004, 31);
  std::uint64_t index = 0;
  struct Triple {
    double t1, h1, t2, h2;
  };
  std::vector<Triple> triples;
  for (int i = 0; i < 50; ++i) {
    Triple tr{};
    tr.t1 = 1.5 * rng.uniform(index++);
    tr.h1 = 1.5 * rng.uniform(index++);
    tr.t2 = 1.5 * rng.uniform(index++);
    tr.h2 = 1.5 * rng.uniform(index++);
    triples.push_back(tr);
  }
  std::vector<Triple> pairs;
  for (int i = 0; i < 25; ++i) {
    Triple pr{};
    pr.t1 = rng.uniform(index++);
    pr.h1 = rng.uniform(index++);
    pr.t2 = pr.t1 + 0.5 * rng.uniform(index++);
    pr.h2 = pr.h1 + 0.5 * rng.uniform(index++);
    pairs.push_back(pr);
  }

  std::size_t convex_fail = 0, order_fail = 0, positive_fail = 0;
  Fingerprint fp;
  for (std::size_t p : {2, 3})
    for (std::size_t N : {4, 8}) {
      const auto spec = InteractionSpec::diagonal_indicator(1, p);
      const std::uint64_t seed = 4100 + 10 * p + N;
      std::vector<std::vector<double>> mid(triples.size(), std::vector<double>(n));
      std::vector<std::vector<double>> dt1(pairs.size(), std::vector<double>(n)), dt2 = dt1, g1 = dt1, g2 = dt1;
      for_each_disorder(spec, prior, N, n, seed, threads, [&](std::size_t i, const QuenchedSystem& q) {
        for (std::size_t k = 0; k < triples.size(); ++k) {
          const auto& tr = triples[k];
          const double a = q.log_partition(tr.t1, SymMatrix(1, {tr.h1}));
          const double b = q.log_partition(tr.t2, SymMatrix(1, {tr.h2}));
          const double m = q.log_partition(0.5 * (tr.t1 + tr.t2), SymMatrix(1, {0.5 * (tr.h1 + tr.h2)}));
          mid[k][i] = m - 0.5 * (a + b);
        }
        for (std::size_t k = 0; k < pairs.size(); ++k) {
          const auto& pr = pairs[k];
          const auto x = q.gibbs(pr.t1, SymMatrix(1, {pr.h1}));
          const auto y = q.gibbs(pr.t2, SymMatrix(1, {pr.h2}));
          dt1[k][i] = x.dt;
          dt2[k][i] = y.dt;
          g1[k][i] = sym_entry(x.grad);
          g2[k][i] = sym_entry(y.grad);
        }
      });
      for (const auto& d : mid) {
        const auto e = mean_and_error(d);
        if (!(e.value <= 3.0 * e.std_error)) ++convex_fail;
        fp.add(e.value);
      }
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        std::vector<double> ddt(n), dg(n);
        for (std::size_t i = 0; i < n; ++i) {
          ddt[i] = dt2[k][i] - dt1[k][i];
          dg[i] = g2[k][i] - g1[k][i];
        }
        for (const auto& d : {ddt, dg}) {
          const auto e = mean_and_error(d);
          if (!(e.value >= -3.0 * e.std_error)) ++order_fail;
          fp.add(e.value);
        }
        for (const auto* v : {&dt1[k], &dt2[k], &g1[k], &g2[k]}) {
          const auto e = mean_and_error(*v);
          if (!(e.value >= -3.0 * e.std_error)) ++positive_fail;
        }
      }
    }
  const bool pass = convex_fail == 0 && order_fail == 0 && positive_fail == 0;
  return {pass,
          "violations: convexity " + std::to_string(convex_fail) + "/200, order " + std::to_string(order_fail) +
              "/200, positivity " + std::to_string(positive_fail) + "/400 (N in {4,8}, p in {2,3}, 3 SE)",
          fp.str()};
}

// 5 and 6. |F̄_N − f| does not grow from the smallest to the largest N.
Outcome convergence(std::size_t p, const std::vector<std::size_t>& Ns, unsigned threads) {
  SolverConfig cfg;
  cfg.threads = threads;
  const auto spec = InteractionSpec::diagonal_indicator(1, p);
  bool pass = true;
  std::size_t strict = 0;
  std::string detail;
  Fingerprint fp;
  for (const auto& [t, s] : std::vector<std::pair<double, double>>{{0.25, 0.0}, {0.5, 0.1}, {1.0, 0.5}}) {
    const auto rep = convergence_report(spec, DiscretePrior::rademacher(1), t, SymMatrix(1, {s}), Ns, 400, 5000 + p, cfg);
    pass = pass && rep.last_within_3se;
    strict += rep.last_below_first ? 1 : 0;
    const auto &a = rep.rows.front(), &b = rep.rows.back();
    detail += " (" + fmt(t, 2) + "," + fmt(s, 2) + "): " + fmt(a.gap) + "+-" + fmt(a.std_error, 2) + " -> " +
              fmt(b.gap) + "+-" + fmt(b.std_error, 2) + ";";
    for (const auto& r : rep.rows) {
      fp.add(r.free_energy);
      fp.add(r.std_error);
    }
    fp.add(rep.rows.front().hopf);
  }
  return {pass,
          "gap N=" + std::to_string(Ns.front()) + " -> N=" + std::to_string(Ns.back()) + detail +
              " point estimate smaller at " + std::to_string(strict) + "/3",
          fp.str()};
}

Outcome convergence_even(unsigned threads) { return convergence(2, {2, 4, 6, 8, 10, 12}, threads); }
Outcome convergence_odd(unsigned threads) { return convergence(3, {2, 4, 6, 8, 10}, threads); }

// 7. Finite-N equation residual decays.
Outcome residual_decay(unsigned threads) {
  const auto spec = InteractionSpec::diagonal_indicator(1, 2);
  const auto prior = DiscretePrior::rademacher(1);
  const SymMatrix h(1, {0.2});
  const auto a = hj_residual_N(spec, prior, 2, 0.5, h, 400, 7002, threads);
  const auto b = hj_residual_N(spec, prior, 10, 0.5, h, 400, 7002, threads);
  const bool pass = std::abs(b.value) <= std::abs(a.value) + 3.0 * std::hypot(a.std_error, b.std_error);
  Fingerprint fp;
  for (double v : {a.value, a.std_error, b.value, b.std_error}) fp.add(v);
  return {pass,
          "residual N=2 " + fmt(a.value) + "+-" + fmt(a.std_error, 2) + ", N=10 " + fmt(b.value) + "+-" +
              fmt(b.std_error, 2) + (std::abs(b.value) < std::abs(a.value) ? " (point estimate smaller)" : ""),
          fp.str()};
}

// 8. The Hopf value solves ∂_t f = H(∇f).
Outcome hopf_residual(unsigned threads) {
  SolverConfig cfg;
  const InitialCondition psi(DiscretePrior::rademacher(1));
  bool pass = true;
  std::string detail;
  Fingerprint fp;
  for (std::size_t p : {2, 3}) {
    const auto spec = InteractionSpec::diagonal_indicator(1, p);
    GridSpec grid;
    grid.threads = threads;
    const ValueFunction f = [&](double t, const SymMatrix& h) { return hopf_value(psi, spec, t, h, cfg).value; };
    const auto rep = residual_grid(f, spec, grid);
    pass = pass && rep.pass_fraction >= 0.9;
    detail += " p=" + std::to_string(p) + ": pass " + fmt(rep.pass_fraction) + ", kinks " + std::to_string(rep.kinks) +
              ", max|r| " + fmt(rep.max_abs) + ";";
    for (const auto& pt : rep.points) fp.add(pt.residual);
  }
  return {pass, "10x10 grid, delta 1e-3, |r| <= 1e-3, need >= 0.9:" + detail, fp.str()};
}

// ψ_k* tabulated on [0, M_k]; the 3-D grid maximum of the physicists' formula.
double brute_force_layered(double t, const ScalarConvexFunction& layer, std::size_t points) {
  const double M = layer.lipschitz;
  std::vector<double> y(points), conj(points);
  for (std::size_t j = 0; j < points; ++j) {
    y[j] = M * static_cast<double>(j) / static_cast<double>(points - 1);
    conj[j] = conjugate_1d(layer, y[j]);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < points; ++a)
    for (std::size_t b = 0; b < points; ++b) {
      const double head = -conj[a] - conj[b] + t * y[a] * y[b];
      for (std::size_t c = 0; c < points; ++c) best = std::max(best, head - conj[c] + t * y[b] * y[c]);
    }
  return best;
}

// 9. Orthant, layered and brute-force reductions agree.
Outcome reductions(unsigned threads) {
  SolverConfig cfg;
  cfg.threads = threads;
  Fingerprint fp;
  double diag_worst = 0.0;
  {
    const InitialCondition psi(DiscretePrior::rademacher(1));
    const std::vector<std::tuple<std::size_t, double, double>> pts{
        {2, 0.3, 0.1}, {2, 0.6, 0.4}, {2, 1.0, 0.2}, {3, 0.8, 0.9}, {3, 0.2, 1.2}};
    for (const auto& [p, t, x] : pts) {
      const auto spec = InteractionSpec::diagonal_indicator(1, p);
      const std::vector<double> xv{x};
      const double a = hopf_diagonal(psi, spec, t, xv, cfg).value;
      const double b = hopf_value(psi, spec, t, SymMatrix::diagonal(xv), cfg).value;
      diag_worst = std::max(diag_worst, std::abs(a - b));
      fp.add(a);
      fp.add(b);
    }
  }
  {
    const InitialCondition psi(DiscretePrior::rademacher(2));
    const auto spec = InteractionSpec::chain(2);
    const std::vector<std::pair<double, std::vector<double>>> pts{
        {0.5, {0.1, 0.3}}, {1.0, {0.2, 0.2}}, {0.3, {0.5, 0.1}}, {0.8, {0.0, 0.4}}, {0.6, {0.3, 0.6}}};
    for (const auto& [t, x] : pts) {
      const double a = hopf_diagonal(psi, spec, t, x, cfg).value;
      const double b = hopf_value(psi, spec, t, SymMatrix::diagonal(x), cfg).value;
      diag_worst = std::max(diag_worst, std::abs(a - b));
      fp.add(a);
      fp.add(b);
    }
  }

  double layered2_worst = 0.0;
  {
    const DiscretePrior prior({{1.0, 0.0}, {1.0, 1.0}, {-1.0, 0.0}, {-1.0, 1.0}}, {0.25, 0.25, 0.25, 0.25});
    const InitialCondition psi(prior);
    const auto spec = InteractionSpec::chain(2);
    const std::vector<ScalarConvexFunction> layers{layer_function(prior.marginal(0)), layer_function(prior.marginal(1))};
    const std::vector<double> origin{0.0, 0.0};
    for (double t : {0.5, 1.0}) {
      const double a = layered_reduced(t, layers, cfg);
      const double b = hopf_diagonal(psi, spec, t, origin, cfg).value;
      layered2_worst = std::max(layered2_worst, std::abs(a - b));
      fp.add(a);
      fp.add(b);
    }
  }

  double layered3_worst = 0.0;
  {
    const auto layer = layer_function(DiscretePrior::rademacher(1));
    const std::vector<ScalarConvexFunction> layers(3, layer);
    for (double t : {0.5, 1.0}) {
      const double a = layered_reduced(t, layers, cfg);
      const double b = brute_force_layered(t, layer, 200);
      layered3_worst = std::max(layered3_worst, std::abs(a - b));
      fp.add(a);
      fp.add(b);
    }
  }
  const bool pass = diag_worst <= 2e-5 && layered2_worst <= 1e-4 && layered3_worst <= 1e-3;
  return {pass,
          "orthant vs cone " + fmt(diag_worst) + " (tol 2e-5, 10 points); layered K=2 vs orthant " +
              fmt(layered2_worst) + " (tol 1e-4); layered K=3 vs 200^3 grid " + fmt(layered3_worst) + " (tol 1e-3)",
          fp.str()};
}

// 10. ψ** = ψ for two layer priors.
Outcome biconjugation(unsigned) {
  double worst = 0.0;
  Fingerprint fp;
  for (const auto& prior : {DiscretePrior::rademacher(1), DiscretePrior({{0.0}, {1.0}}, {0.5, 0.5})}) {
    const auto f = layer_function(prior);
    const auto fs = conjugate_function(f);
    for (int i = 0; i < 50; ++i) {
      const double x = 3.0 * i / 49.0;
      const double v = conjugate_1d(fs, x);
      worst = std::max(worst, std::abs(v - f(x)));
      fp.add(v);
    }
  }
  return {worst <= 2e-6, "max |psi** - psi| " + fmt(worst) + " on 50 points in [0,3], Rademacher and Bernoulli (tol 2e-6)",
          fp.str()};
}

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome(unsigned)> run;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hopfcone");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

// Runs the same CLI invocations twice (1 and 2 threads) and compares every output file.
std::string cli_replay_mismatch() {
  const fs::path root = fs::temp_directory_path() / ("hopfcone_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "run.cfg";
  std::ofstream(cfg) << "[model]\nK = 1\np = 3\n\n[prior]\nkind = rademacher\n\n"
                        "[hopf]\nt = [0.25, 1]\nh = [0, 0.5]\n\n"
                        "[converge]\nt = 0.5\nh = 0.1\nN = [2, 6]\nn_disorder = 100\n";
  const std::vector<std::vector<std::string>> runs{
      {"hopflax-demo"}, {"hopf", "--config", cfg.string()}, {"converge", "--config", cfg.string()}};
  std::string mismatch;
  std::streambuf* saved = std::cout.rdbuf();
  std::ostringstream sink;
  std::cout.rdbuf(sink.rdbuf());
  for (const auto& r : runs)
    for (const std::string threads : {"1", "2"}) {
      auto args = r;
      for (const std::string& a : {std::string("--out"), (root / ("t" + threads)).string(), std::string("--seed"),
                                   std::string("11"), std::string("--threads"), threads})
        args.push_back(a);
      if (cli(args) != 0) mismatch += r.front() + " failed; ";
    }
  std::cout.rdbuf(saved);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(root / "t1")) {
    ++files;
    if (slurp(e.path()) != slurp(root / "t2" / e.path().filename())) mismatch += e.path().filename().string() + "; ";
  }
  if (files == 0) mismatch += "no output files; ";
  fs::remove_all(root);
  return mismatch;
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  const std::vector<Criterion> criteria{
      {1, "Hopf-Lax closed form", 1.0, hopf_lax},
      {2, "initial-condition identity", 60.0, initial_identity},
      {3, "derivative identities", 120.0, derivative_identities},
      {4, "structural properties of F_N", 300.0, structural},
      {5, "convergence trend, p=2", 600.0, convergence_even},
      {6, "convergence trend, p=3", 600.0, convergence_odd},
      {7, "finite-N residual decay", 180.0, residual_decay},
      {8, "Hopf value solves the equation", 180.0, hopf_residual},
      {9, "reduction equivalences", 600.0, reductions},
      {10, "biconjugation", 30.0, biconjugation},
  };

  bool all = true;
  std::vector<std::string> fingerprints;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome out;
    try {
      out = c.run(1);
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what(), ""};
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_budget = elapsed <= c.budget_s;
    const bool pass = out.pass && in_budget;
    all = all && pass;
    fingerprints.push_back(out.fingerprint);
    std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << "  " << c.name << ": " << out.detail << "  ["
              << fmt(elapsed) << " s, budget " << fmt(c.budget_s) << " s" << (in_budget ? "" : ", OVER BUDGET") << "]"
              << std::endl;
  }

  {
    const auto start = Clock::now();
    std::string mismatch;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      std::string again;
      try {
        again = criteria[i].run(2).fingerprint;
      } catch (const std::exception& e) {
        again = std::string("threw: ") + e.what();
      }
      if (fingerprints[i].empty() || again != fingerprints[i]) mismatch += std::to_string(criteria[i].id) + " ";
    }
    const std::string cli_mismatch = cli_replay_mismatch();
    const bool pass = mismatch.empty() && cli_mismatch.empty();
    all = all && pass;
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    std::cout << "criterion 11 " << (pass ? "PASS" : "FAIL") << "  determinism: criteria 1-10 replayed with 2 threads"
              << (mismatch.empty() ? " match bit for bit" : ", mismatched: " + mismatch)
              << "; CLI outputs " << (cli_mismatch.empty() ? "byte-identical" : "differ: " + cli_mismatch) << "  ["
              << fmt(elapsed) << " s]" << std::endl;
  }
  std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
  return all ? 0 : 1;
}
