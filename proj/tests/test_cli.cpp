#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "ringsnake/export.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ringsnake_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(RINGSNAKE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("diagram writes every format by default") {
    const auto dir = scratch("diagram");
    REQUIRE(run("--N 6 --m 1 --d 0.005 --out " + dir.string() + " diagram") == 0);
    for (const char* f : {"diagram.json", "diagram.csv", "diagram.svg", "summary.txt"})
      CHECK(fs::exists(dir / f));
    const auto j = nlohmann::json::parse(ringsnake::read_file(dir / "diagram.json"));
    CHECK(j["model"]["N"] == 6);
    CHECK(j["summary"]["gamma_match"] == "Sparse");

    const auto plotted = scratch("plot");
    CHECK(run("--out " + plotted.string() + " plot --from " + (dir / "diagram.json").string()) == 0);
    CHECK(fs::exists(plotted / "diagram.svg"));
    fs::remove_all(dir);
    fs::remove_all(plotted);
  }

  TEST_CASE("output toggles") {
    const auto dir = scratch("toggles");
    REQUIRE(run("--N 6 --m 1 --d 0.005 --csv --out " + dir.string() + " diagram") == 0);
    CHECK(fs::exists(dir / "diagram.csv"));
    CHECK_FALSE(fs::exists(dir / "diagram.json"));
    CHECK_FALSE(fs::exists(dir / "diagram.svg"));
    fs::remove_all(dir);
  }

  TEST_CASE("branch from a seed label") {
    const auto dir = scratch("branch");
    CHECK(run("--N 6 --m 1 --d 0.005 --seed U:2 --out " + dir.string() + " branch") == 0);
    CHECK(fs::exists(dir / "branch.json"));
    CHECK(run("--N 6 --m 1 --d 0.005 --seed U:99 --out " + dir.string() + " branch") == 1);
    CHECK(run("--N 6 --m 1 --d 0.005 --seed Q:1 --out " + dir.string() + " branch") == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("configuration errors exit 1") {
    const auto dir = scratch("config");
    CHECK(run("--out " + dir.string()) == 1);
    CHECK(run("--bogus diagram") == 1);
    CHECK(run("--N 6 --m 5 --out " + dir.string() + " diagram") == 1);
    CHECK(run("--N 6 --m 1 --d -1 --out " + dir.string() + " diagram") == 1);
    CHECK(run("--N 6 --m 1 --nonlinearity sine --out " + dir.string() + " diagram") == 1);
    CHECK(run("--N 6 --m 1 --d-sweep 0.001,0.002 --out " + dir.string() + " verify") == 1);
    CHECK(run("--model " + (dir / "none.json").string() + " diagram") == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("verify exit status follows the exponent checks") {
    const auto dir = scratch("verify");
    // Nearest-neighbour left folds carry an O(d) shift that bends the fitted
    // exponent away from 2/3 over this sweep.
    CHECK(run("--N 6 --m 1 --d-sweep 0.001,0.003,0.01 --out " + dir.string() + " verify") == 3);
    CHECK(fs::exists(dir / "verify.json"));
    CHECK(fs::exists(dir / "verify.csv"));
    const auto j = nlohmann::json::parse(ringsnake::read_file(dir / "verify.json"));
    CHECK(j["exponents_ok"] == false);
    CHECK(run("--N 6 --alltoall --d-sweep 0.001,0.003,0.01 --out " + dir.string() + " verify") == 0);
    fs::remove_all(dir);
  }
}
