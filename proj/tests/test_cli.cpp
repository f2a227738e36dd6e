#include <doctest.h>

#include "gosp/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gosp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("gosp_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json minimal() {
  return {{"model", {{"d", 2}, {"X", {{0, 1}, {1, 1}}}}},
          {"estimator", "survival"},
          {"p", 0.8},
          {"T", 40},
          {"reps", 300},
          {"seed", 5}};
}

int call(std::vector<std::string> args) {
  args.insert(args.begin(), "gosp");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config schema") {
  auto plan = cli::plan_from_json(minimal());
  CHECK(plan.estimator == "survival");
  CHECK(plan.reps == 300);
  CHECK(plan.config.at("dual") == false);
  CHECK(plan.model_hash.rfind("sha256:", 0) == 0);

  auto bad = minimal();
  bad["foo"] = 1;
  try {
    cli::plan_from_json(bad);
    FAIL("unknown key accepted");
  } catch (const cli::SchemaError& e) {
    CHECK(e.pointer() == "/foo");
  }
  auto missing = minimal();
  missing.erase("T");
  CHECK_THROWS_AS(cli::plan_from_json(missing), cli::SchemaError);
  auto wrong = minimal();
  wrong["reps"] = "many";
  try {
    cli::plan_from_json(wrong);
    FAIL("string reps accepted");
  } catch (const cli::SchemaError& e) {
    CHECK(e.pointer() == "/reps");
  }
  auto sub = minimal();
  sub["model"]["X"] = {{-1, 1}, {1, 1}};
  try {
    cli::plan_from_json(sub);
    FAIL("sublattice model accepted");
  } catch (const ModelError& e) {
    CHECK(e.kind() == ModelErrorKind::ProperSublattice);
    CHECK(e.index() == 2);
  }
  CHECK(cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config files resolve model paths") {
  auto dir = scratch("paths");
  std::ofstream(dir / "m.json") << R"({"d":2,"X":[[0,1],[1,1]]})";
  auto cfg = minimal();
  cfg["model"] = "m.json";
  std::ofstream(dir / "c.json") << cfg.dump();
  auto plan = cli::parse_config(dir / "c.json");
  CHECK(plan.model.R == 1);
  CHECK(plan.model_hash == "sha256:" + cli::sha256_hex(R"({"d":2,"X":[[0,1],[1,1]]})"));
}

TEST_CASE("outputs do not depend on parallelism and replay from the manifest") {
  auto dir = scratch("det");
  std::ostringstream log;
  auto plan = cli::plan_from_json(minimal());
  REQUIRE(cli::run(plan, 1, dir / "a", log) == 0);
  REQUIRE(cli::run(plan, 8, dir / "b", log) == 0);
  for (const char* f : {"results.jsonl", "summary.csv", "details.json"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  auto csv = slurp(dir / "a" / "summary.csv");
  CHECK(csv.rfind("estimator,p,T,reps,mean,stderr,ci_lo,ci_hi,seed\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  for (const auto& e : fs::directory_iterator(dir / "a")) CHECK(e.path().extension() != ".partial");

  auto man = json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(man.at("status") == "complete");
  CHECK(man.at("mixer") == std::string(kMixerId));
  auto replay = cli::plan_from_manifest(dir / "a" / "manifest.json");
  REQUIRE(cli::run(replay, 3, dir / "c", log) == 0);
  CHECK(slurp(dir / "a" / "results.jsonl") == slurp(dir / "c" / "results.jsonl"));
  CHECK(slurp(dir / "a" / "summary.csv") == slurp(dir / "c" / "summary.csv"));

  // records are in replica order, one per line, no trailing whitespace
  std::istringstream lines(slurp(dir / "a" / "results.jsonl"));
  std::string line;
  std::size_t i = 0;
  while (std::getline(lines, line)) {
    CHECK(json::parse(line).at("replica") == i++);
    CHECK(line.back() == '}');
  }
  CHECK(i == 300);
}

TEST_CASE("p = 1 survival has summary mean 1") {
  auto dir = scratch("p1");
  auto cfg = minimal();
  cfg["p"] = 1.0;
  std::ostringstream log;
  REQUIRE(cli::run(cli::plan_from_json(cfg), 2, dir, log) == 0);
  auto csv = slurp(dir / "summary.csv");
  CHECK(csv.find("\nsurvival,1,40,300,1,0,") != std::string::npos);
}

TEST_CASE("exit codes") {
  auto dir = scratch("exit");
  std::ofstream(dir / "m.json") << R"({"d":2,"X":[[0,1],[1,1]]})";
  std::ofstream(dir / "bad.json") << R"({"d":2,"X":[[-1,1],[1,1]]})";
  const std::string m = (dir / "m.json").string();
  CHECK(call({"survival", "--model", m, "--p", "0.7", "--T", "10", "--reps", "20", "--out",
              (dir / "ok").string()}) == 0);
  // refusal: nothing survives at p = 0.3
  CHECK(call({"deathfit", "--model", m, "--p", "0.3", "--T", "100", "--reps", "50", "--out",
              (dir / "refused").string()}) == 2);
  auto man = json::parse(slurp(dir / "refused" / "manifest.json"));
  CHECK(man.at("status") == "refused");
  CHECK(man.at("refusal").at("kind") == "SubcriticalRefused");
  CHECK_FALSE(fs::exists(dir / "refused" / "results.jsonl"));
  CHECK(call({"validate", "--model", (dir / "bad.json").string()}) == 2);
  CHECK(call({"validate", "--model", m}) == 0);
  std::ofstream(dir / "c.json") << R"({"model":"m.json","estimator":"survival","p":0.8,"T":5,"reps":3,"foo":1})";
  CHECK(call({"survival", "--config", (dir / "c.json").string(), "--out", (dir / "c").string()}) == 2);
  CHECK(call({"survival", "--model", m, "--p", "1.5", "--T", "10", "--reps", "5", "--out",
              (dir / "p").string()}) == 2);
}
