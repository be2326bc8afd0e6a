#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hopfcone/cli.hpp"
#include "hopfcone/model_io.hpp"

namespace fs = std::filesystem;
using namespace hopfcone;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("hopfcone_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static inline int counter = 0;
};

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "hopfcone");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const TempDir& dir, const std::string& text) {
  const auto p = dir.path / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("hopflax-demo matches the closed form") {
  TempDir dir;
  const auto out = (dir.path / "out").string();
  REQUIRE(run({"hopflax-demo", "--out", out, "--format", "json"}) == 0);
  CHECK_FALSE(fs::exists(dir.path / "out" / "hopflax-demo.csv"));
  const auto j = Json::parse(slurp(dir.path / "out" / "hopflax-demo.json"));
  REQUIRE(j.size() == 122);
  for (const auto& row : j) {
    const double t = row["t"], x = row["x"], v = row["value"];
    const double exact = std::abs(x) <= 2 * t ? x * x / (4 * t) : std::abs(x) - t;
    CHECK(std::abs(v - exact) <= 1e-8);
    CHECK(row["seed"] == 0);
    CHECK(row["config_hash"].get<std::string>().size() == 16);
  }
}

TEST_CASE("repeated runs produce byte-identical files") {
  TempDir dir;
  const auto cfg = write_config(dir, "[model]\nK = 1\np = 2\n\n[prior]\nkind = rademacher\n\n"
                                     "[hopf]\nt = [0.5]\nh = [0.1, 0.4]\n\n"
                                     "[free-energy]\nN = 3\nn_disorder = 20\nt = [0, 0.5]\nh = [0, 0.2]\n");
  for (const std::string cmd : {"hopf", "free-energy"}) {
    const auto a = (dir.path / "a").string(), b = (dir.path / "b").string();
    REQUIRE(run({cmd, "--config", cfg.string(), "--out", a, "--seed", "5", "--threads", "1"}) == 0);
    REQUIRE(run({cmd, "--config", cfg.string(), "--out", b, "--seed", "5", "--threads", "2"}) == 0);
    for (const std::string ext : {".csv", ".json"})
      CHECK(slurp(dir.path / "a" / (cmd + ext)) == slurp(dir.path / "b" / (cmd + ext)));
  }
  const auto j = Json::parse(slurp(dir.path / "a" / "free-energy.json"));
  REQUIRE(j.size() == 4);
  // No signal and no side channel: every configuration has zero energy.
  CHECK(std::abs(j[0]["value"].get<double>()) < 1e-14);
  CHECK(j[0]["seed"] == 5);
}

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(run({}) == 2);
  CHECK(run({"no-such-command"}) == 2);
  CHECK(run({"hopf"}) == 2);
  CHECK(run({"hopf", "--config", (dir.path / "missing.cfg").string()}) == 2);
  const auto out = (dir.path / "out").string();
  {
    const auto cfg = write_config(dir, "[model]\nK = 1\np = 2\n\n[hopf]\nt = [0.5]\nh = [-0.5]\n");
    CHECK(run({"hopf", "--config", cfg.string(), "--out", out}) == 2);
  }
  {
    const auto cfg = write_config(dir, "[model]\nK = 1\np = 2\n\n[hopf]\nt = [0.5]\nh = [0.5]\nextra = 1\n");
    CHECK(run({"hopf", "--config", cfg.string(), "--out", out}) == 2);
  }
  {
    const auto cfg = write_config(dir, "[model]\nK = 1\np = 2\n\n[free-energy]\nN = 40\nn_disorder = 1\n"
                                       "t = [0.5]\nh = [0.5]\n");
    CHECK(run({"free-energy", "--config", cfg.string(), "--out", out}) == 2);
  }
  {
    const auto cfg = write_config(dir, "[model]\nK = 1\np = 2\n\n[solver]\ninner_max_iterations = 1\n"
                                       "inner_tolerance = 1e-15\n\n[hopf]\nt = [0.5]\nh = [0.7]\n");
    CHECK(run({"hopf", "--config", cfg.string(), "--out", out}) == 3);
  }
}
