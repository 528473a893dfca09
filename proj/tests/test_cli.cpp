#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gclab/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Out {
  int code;
  std::string out, err;
};

Out cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gclab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = gclab::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir() {
  fs::path d = fs::temp_directory_path() / "gclab_cli_test";
  fs::create_directories(d);
  return d;
}

std::string fixture(const std::string& name) { return std::string(GCLAB_SCENARIO_DIR) + "/" + name + ".scn"; }

}  // namespace

TEST_CASE("run: violation names the node and writes a replayable counterexample") {
  fs::path cx = temp_dir() / "dijkstra.cx.scn";
  fs::path report = temp_dir() / "dijkstra.json";
  auto r = cli({"run", fixture("dijkstra_bug"), "--counterexample-out", cx.string(), "--report-out",
                report.string()});
  CHECK(r.code == gclab::kExitViolation);
  CHECK(r.out.find("violation Safety nodes=E") != std::string::npos);
  REQUIRE(fs::exists(cx));
  auto j = nlohmann::json::parse(std::ifstream(report));
  CHECK(j["invariants"]["Safety"]["status"] == "fail");

  auto again = cli({"run", cx.string(), "--counterexample-out", (temp_dir() / "again.scn").string()});
  CHECK(again.code == gclab::kExitViolation);
}

TEST_CASE("run: overrides and builtins") {
  CHECK(cli({"run", fixture("dijkstra_bug"), "--barrier", "dijkstra"}).code == gclab::kExitPass);
  auto r = cli({"run", "--builtin", "two_cycle_floating"});
  CHECK(r.code == gclab::kExitPass);
  CHECK(r.out.find("cycle 1 recycled={X,Y}") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(cli({"run"}).code == gclab::kExitUsage);
  CHECK(cli({"run", fixture("root_race"), "--builtin", "root_race"}).code == gclab::kExitUsage);
  CHECK(cli({"run", "--builtin", "root_race", "--barrier", "bogus"}).code == gclab::kExitUsage);
  CHECK(cli({"run", "--builtin", "nope"}).code == gclab::kExitUsage);
  CHECK(cli({"frobnicate"}).code == gclab::kExitUsage);
  CHECK(cli({"run", (temp_dir() / "missing.scn").string()}).code == gclab::kExitUsage);

  fs::path bad = temp_dir() / "bad.scn";
  std::ofstream(bad) << "[graph]\nA: B\n[mutator 1]\naddArc A\n";
  auto r = cli({"run", bad.string()});
  CHECK(r.code == gclab::kExitUsage);
  CHECK(r.err.find("line") != std::string::npos);
}

TEST_CASE("help exits 0") { CHECK(cli({"--help"}).code == gclab::kExitPass); }

TEST_CASE("explore: complete, violating and incomplete") {
  CHECK(cli({"explore", "--builtin", "dijkstra_bug", "--barrier", "steele"}).code == gclab::kExitPass);
  CHECK(cli({"explore", "--builtin", "dijkstra_bug", "--no-minimize", "--counterexample-out",
             (temp_dir() / "ex.scn").string()})
            .code == gclab::kExitViolation);
  CHECK(cli({"explore", "--builtin", "dijkstra_bug", "--barrier", "dijkstra", "--max-states", "5"}).code ==
        gclab::kExitIncomplete);
}

TEST_CASE("matrix") {
  auto ok = cli({"matrix", "--builtin", "dijkstra_bug", "--barriers", "dijkstra,steele,yuasa", "--granularities",
                 "coarse,fine", "--gray-policies", "stack,queue,scan"});
  CHECK(ok.code == gclab::kExitPass);
  CHECK(ok.out.find("18 cells") != std::string::npos);
  auto bad = cli({"matrix", "--builtin", "dijkstra_bug", "--barriers", "none,dijkstra"});
  CHECK(bad.code == gclab::kExitViolation);
}

TEST_CASE("selftest passes") {
  auto r = cli({"selftest"});
  CHECK(r.code == gclab::kExitPass);
}
