#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "truncchain/function_class.hpp"
#include "truncchain/serialize.hpp"
#include "truncchain_cli/cli.hpp"

namespace fs = std::filesystem;
using truncchain::cli::Options;

namespace {

struct Workspace {
  fs::path dir;

  explicit Workspace(const std::string& name)
      : dir(fs::temp_directory_path() / ("truncchain_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }

  std::string write(const std::string& name, const std::string& body) const {
    std::ofstream(dir / name, std::ios::binary) << body;
    return (dir / name).string();
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir / name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(const std::string& experiment, const std::string& config, const fs::path& out_dir,
           std::optional<std::uint64_t> seed = std::nullopt) {
  Options o;
  o.experiment = experiment;
  o.config_path = config;
  o.out_dir = out_dir.string();
  o.seed = seed;
  std::ostringstream out, err;
  const int code = truncchain::cli::run(o, out, err);
  return {code, out.str(), err.str()};
}

Result validate(const std::string& config) {
  std::ostringstream out, err;
  const int code = truncchain::cli::validate(config, out, err);
  return {code, out.str(), err.str()};
}

Result main_with(std::vector<std::string> args) {
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = truncchain::cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("chain-info reports the sequence") {
  Workspace ws("chain_info");
  const auto cfg = ws.write("c.json", R"({"class": {"generator": "interval_indicators", "d": 8}, "seed": 7})");
  const auto r = run("chain-info", cfg, ws.dir);
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(ws.read("chain-info.json"));
  CHECK(summary["results"]["s_max"] == 3);
  CHECK(summary["results"]["gamma2"].get<double>() > 1.0);
  CHECK(summary["results"]["level_sizes"] == nlohmann::json::array({1, 4, 16, 37}));
  CHECK(summary["version"] == "0.1.0");
  CHECK(summary["config"]["class"]["d"] == 8);
  CHECK(summary["config"]["seed"] == 7);
  CHECK(ws.read("chain-info.csv").rfind("level,size,max_distance,distinct_increments\n", 0) == 0);
}

TEST_CASE("necessity exits 0 and records verdicts") {
  Workspace ws("necessity");
  const auto cfg = ws.write("n.json", R"({"class": {"generator": "heavy_tail"},
    "b_exponents": [0.5, 0.25], "n_grid": [16, 256, 4096, 65536]})");
  const auto r = run("necessity", cfg, ws.dir, 12345);
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(ws.read("necessity.json"));
  CHECK(summary["results"]["verdicts"].contains("b=0.25"));
  CHECK(summary["results"]["verdicts"]["b=0.5"] == "BOUNDED");
  CHECK(summary["config"]["class"]["mass_scale"].get<double>() > 0.0);
}

TEST_CASE("missing seed is a config error") {
  Workspace ws("seed");
  const auto cfg = ws.write("c.json", R"({"class": {"generator": "two_point"}})");
  const auto r = run("chain-info", cfg, ws.dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("seed") != std::string::npos);
  CHECK_FALSE(fs::exists(ws.dir / "chain-info.csv"));
  CHECK(run("chain-info", cfg, ws.dir, 1).code == 0);
}

TEST_CASE("parse errors carry line and column") {
  Workspace ws("parse");
  const auto cfg = ws.write("bad.json", "{\"class\": {\"generator\": \"two_point\"},\n  \"seed\": 1,,\n}");
  const auto r = run("chain-info", cfg, ws.dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("2:13: malformed JSON") != std::string::npos);
  CHECK(r.err.find("\"seed\": 1,,") != std::string::npos);

  const auto typo = ws.write("typo.json", "{\"class\": {\"generator\": \"two_point\"},\n \"sed\": 1}");
  const auto t = run("chain-info", typo, ws.dir, 1);
  CHECK(t.code == 2);
  CHECK(t.err.find("typo.json:2:2: error: unknown key \"sed\"") != std::string::npos);

  const auto gen = ws.write("gen.json", R"({"class": {"generator": "spiral"}, "seed": 1})");
  CHECK(run("chain-info", gen, ws.dir).code == 2);
}

TEST_CASE("validate") {
  Workspace ws("validate");
  SUBCASE("well-formed") {
    const auto r = validate(ws.write("c.json", R"({"class": {"generator": "interval_indicators"}})"));
    CHECK(r.code == 0);
    CHECK(r.out.rfind("OK\n", 0) == 0);
    CHECK(r.out.find("s_max 3") != std::string::npos);
  }
  SUBCASE("u at or below one half") {
    const auto r = validate(ws.write("u.json", R"({"experiment": "lemma21",
      "class": {"generator": "interval_indicators"}, "estimator": {"n": 256}, "u_grid": [0.4, 1]})"));
    CHECK(r.code == 2);
    CHECK(r.err.find("u > 1/2") != std::string::npos);
  }
  SUBCASE("infeasible enumeration") {
    const auto r = validate(ws.write("e.json", R"({"experiment": "estimate",
      "class": {"generator": "interval_indicators"}, "estimator": {"n": 10},
      "oracle": {"function": 3}})"));
    CHECK(r.code == 0);
    CHECK(r.err.find("enumeration infeasible") != std::string::npos);
  }
  SUBCASE("missing experiment keys") {
    const auto r = validate(ws.write("m.json", R"({"experiment": "clt-test",
      "class": {"generator": "interval_indicators"}})"));
    CHECK(r.code == 2);
    CHECK(r.err.find("subset") != std::string::npos);
  }
}

TEST_CASE("infeasible enumeration is refused before any work") {
  Workspace ws("infeasible");
  const auto cfg = ws.write("e.json", R"({"class": {"generator": "interval_indicators"},
    "estimator": {"n": 10}, "oracle": {"function": 3}, "seed": 2})");
  const auto r = run("estimate", cfg, ws.dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("enumeration infeasible") != std::string::npos);
  CHECK_FALSE(fs::exists(ws.dir / "estimate.csv"));
}

TEST_CASE("estimate with oracle, reproducible across thread counts") {
  Workspace ws("estimate");
  const auto cfg = ws.write("e.json", R"({"class": {"generator": "two_point"},
    "estimator": {"n": 6}, "oracle": {"function": 1, "replicates": 20000}, "seed": 99})");
  ::setenv("TRUNCCHAIN_THREADS", "1", 1);
  REQUIRE(run("estimate", cfg, ws.dir / "a").code == 0);
  ::setenv("TRUNCCHAIN_THREADS", "4", 1);
  REQUIRE(run("estimate", cfg, ws.dir / "b").code == 0);
  ::unsetenv("TRUNCCHAIN_THREADS");
  CHECK(ws.read("a/estimate.csv") == ws.read("b/estimate.csv"));
  CHECK(ws.read("a/estimate_oracle.csv") == ws.read("b/estimate_oracle.csv"));
  const auto summary = nlohmann::json::parse(ws.read("a/estimate.json"));
  CHECK(summary["verdict"] == "PASS");
}

TEST_CASE("failed verdict exits 1") {
  Workspace ws("clt_fail");
  // One observation of a two-valued variable is far from normal.
  const auto cfg = ws.write("c.json", R"({"class": {"generator": "two_point"},
    "estimator": {"n": 1}, "subset": [1], "replicates": 500, "seed": 5})");
  const auto r = run("clt-test", cfg, ws.dir);
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL") != std::string::npos);
  CHECK(nlohmann::json::parse(ws.read("clt-test.json"))["verdict"] == "FAIL");
}

TEST_CASE("class files resolve relative to the config") {
  Workspace ws("file");
  ws.write("cls.json", truncchain::class_to_json(*truncchain::interval_indicators(4)));
  const auto cfg = ws.write("c.json", R"({"class": {"file": "cls.json"}, "n_grid": [4, 64],
    "estimator": {"n": 1}, "seed": 3})");
  CHECK(run("bias-sweep", cfg, ws.dir / "out").code == 0);
  CHECK(ws.read("out/bias-sweep.csv").rfind("n,scaled_sup_bias,identity_regime\n", 0) == 0);
}

TEST_CASE("command line") {
  Workspace ws("argv");
  const auto cfg = ws.write("c.json", R"({"class": {"generator": "two_point"}})");
  const auto out = (ws.dir / "o").string();
  CHECK(main_with({"truncchain", "chain-info", "--config", cfg, "--seed", "4", "--out", out}).code == 0);
  CHECK(fs::exists(ws.dir / "o" / "chain-info.json"));
  CHECK(main_with({"truncchain", "chain-info", "--config", cfg, "--out", out}).code == 2);
  CHECK(main_with({"truncchain", "chain-info"}).code == 2);
  CHECK(main_with({"truncchain", "bogus", "--config", cfg}).code == 2);
  const auto v = main_with({"truncchain", "validate", "--config", cfg});
  CHECK(v.code == 0);
  CHECK(v.out.rfind("OK", 0) == 0);
}
