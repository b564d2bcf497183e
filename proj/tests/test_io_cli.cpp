#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "rolesim/commands.hpp"
#include "rolesim/errors.hpp"
#include "rolesim/io.hpp"

using namespace rolesim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* root = std::getenv("ROLESIM_TEST_TMP");
  const fs::path dir = fs::path(root ? root : fs::temp_directory_path().string()) / "unit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("grid specifications") {
  CHECK(parse_grid("0.5") == std::vector<double>{0.5});
  CHECK(parse_grid("0,0.1,0.7") == std::vector<double>{0, 0.1, 0.7});
  const auto g = parse_grid("0:1:0.1");
  REQUIRE(g.size() == 11);
  CHECK(g[3] == 0.3);
  CHECK(g.back() == 1.0);
  const auto l = parse_grid("0.1:100:log30");
  REQUIRE(l.size() == 30);
  CHECK(l.front() == 0.1);
  CHECK(l.back() == 100.0);
  CHECK(l[1] / l[0] == doctest::Approx(l[29] / l[28]));
  for (const char* bad : {"", "a", "0:1", "0:1:0", "1:0:0.1", "0:1:-1", "0,,1", "0:1:log1",
                          "0:1:log5", "0:1:0.1:2", "1e400"})
    CHECK_THROWS_AS(parse_grid(bad), ConfigError);
}

TEST_CASE("numbers print round-trip and NaN prints empty") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::nan("")) == "");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("sha256 of a known string") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("hpt csv round trip") {
  HeuristicPayoffTable t;
  t.m = 2;
  t.conflict_probability = 0.3;
  t.rows = {{0, 2, std::nullopt, 0.0, 4}, {1, 1, 0.25, 0.125, 4}, {2, 0, 0.5, std::nullopt, 4}};
  const auto back = parse_hpt_csv(hpt_csv({t}));
  REQUIRE(back.size() == 1);
  CHECK(back[0].m == 2);
  CHECK(back[0].conflict_probability == 0.3);
  REQUIRE(back[0].rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[0].rows[i].u_building == t.rows[i].u_building);
    CHECK(back[0].rows[i].u_sharing == t.rows[i].u_sharing);
    CHECK(back[0].rows[i].samples == 4);
  }
  CHECK_THROWS_AS(parse_hpt_csv("nonsense\n1,2\n"), ConfigError);
  CHECK_THROWS_AS(parse_hpt_csv("p_C,N1,N2,U1,U2,samples\n0.1,0,2,,1,1\n0.1,1,2,1,1,1\n"), ConfigError);
}

TEST_CASE("simulate writes verified outputs and reruns identically") {
  const auto dir = scratch("simulate");
  const auto out = (dir / "a").string();
  REQUIRE(run_cli({"simulate", "--builders", "3", "--searchers", "4", "--pc", "0.8", "--rounds",
                   "300", "--seed", "7", "--rounds-csv", "--out", out}) == 0);
  for (const char* f : {"metrics.csv", "rounds.csv", "pools.json", "manifest.json"})
    CHECK(fs::exists(fs::path(out) / f));
  CHECK(verify_manifest(out).empty());
  const auto metrics = read_text_file(fs::path(out) / "metrics.csv");
  CHECK(metrics.rfind("round,bid_ratio,rebate_ratio", 0) == 0);
  CHECK(line_count(metrics) == 301);
  CHECK(line_count(read_text_file(fs::path(out) / "rounds.csv")) == 1 + 300 * 7);

  const auto again = (dir / "b").string();
  REQUIRE(run_cli({"simulate", "--builders", "3", "--searchers", "4", "--pc", "0.8", "--rounds",
                   "300", "--seed", "7", "--rounds-csv", "--out", again}) == 0);
  for (const char* f : {"metrics.csv", "rounds.csv", "pools.json"})
    CHECK(read_text_file(fs::path(out) / f) == read_text_file(fs::path(again) / f));

  // a manifest catches a modified output
  write_text_file(fs::path(out) / "metrics.csv", "tampered\n");
  CHECK(verify_manifest(out) == std::vector<std::string>{"metrics.csv"});
}

TEST_CASE("config file with flag overrides") {
  const auto dir = scratch("config");
  write_text_file(dir / "run.yaml", "builders: 2\nsearchers: 2\nrounds: 50\npc: 0.25\nseed: 3\n");
  REQUIRE(run_cli({"simulate", "--config", (dir / "run.yaml").string(), "--rounds", "20", "--out",
                   (dir / "o").string()}) == 0);
  const auto manifest = nlohmann::json::parse(read_text_file(dir / "o" / "manifest.json"));
  CHECK(manifest["config"]["rounds"] == 20);
  CHECK(manifest["config"]["pc"] == 0.25);
  CHECK(manifest["config"]["builders"] == 2);
  CHECK(manifest["master_seed"] == 3);
}

TEST_CASE("configuration errors point at the offending line") {
  const auto dir = scratch("badconfig");
  write_text_file(dir / "bad.yaml", "rounds: 10\n\nlambda: -3\n");
  Settings s = load_settings_file(dir / "bad.yaml");
  try {
    (void)sim_config_from(s);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.yaml:3:") != std::string::npos);
  }
  write_text_file(dir / "unknown.yaml", "rounds: 10\ncolour: blue\n");
  try {
    (void)load_settings_file(dir / "unknown.yaml");
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("unknown.yaml:2:") != std::string::npos);
  }
  CHECK(run_cli({"simulate", "--config", (dir / "bad.yaml").string(), "--out", (dir / "o").string()}) == 2);
  CHECK(run_cli({"simulate", "--config", (dir / "missing.yaml").string()}) == 3);
}

TEST_CASE("invalid arguments exit with status 2") {
  const auto out = scratch("invalid").string();
  CHECK(run_cli({"simulate", "--rounds", "0", "--out", out}) == 2);
  CHECK(run_cli({"simulate", "--pc", "0.1,0.2", "--out", out}) == 2);
  CHECK(run_cli({"simulate", "--rounds", "ten", "--out", out}) == 2);
  CHECK(run_cli({"sweep", "--pc", "0:1", "--out", out}) == 2);
  CHECK(run_cli({"sweep", "--pc", "0:2:0.5", "--out", out}) == 2);
  CHECK(run_cli({"egta", "--agents", "1", "--out", out}) == 2);
  CHECK(run_cli({"egta", "--fixation", "sideways", "--out", out}) == 2);
  CHECK(run_cli({"simulate", "--no-such-flag"}) == 2);
  CHECK(run_cli({}) == 2);
}

TEST_CASE("unwritable output exits with status 3") {
  const auto dir = scratch("unwritable");
  write_text_file(dir / "file", "x");
  const auto blocked = (dir / "file" / "sub").string();
  CHECK(run_cli({"simulate", "--rounds", "5", "--out", blocked}) == 3);
  CHECK(run_cli({"verify-analytic", "--points", "5", "--mc-points", "0", "--fd-points", "0",
                 "--out", blocked}) == 3);
}

TEST_CASE("sweep table shape") {
  const auto out = scratch("sweep");
  REQUIRE(run_cli({"sweep", "--pc", "0.5", "--reps", "1", "--rounds", "50", "--out", out.string()}) == 0);
  const auto csv = read_text_file(out / "sweep.csv");
  CHECK(csv.rfind("p_C,repetition,metric,value\n", 0) == 0);
  CHECK(line_count(csv) == 1 + 5);
  REQUIRE(run_cli({"sweep", "--pc", "0:1:0.5", "--reps", "2", "--rounds", "50", "--out", out.string()}) == 0);
  CHECK(line_count(read_text_file(out / "sweep.csv")) == 1 + 3 * 2 * 5);
}

TEST_CASE("sweep and egta outputs do not depend on jobs") {
  const auto dir = scratch("jobs");
  for (const char* jobs : {"1", "3"}) {
    REQUIRE(run_cli({"sweep", "--pc", "0,1", "--reps", "3", "--rounds", "60", "--jobs", jobs,
                     "--out", (dir / (std::string("s") + jobs)).string()}) == 0);
    REQUIRE(run_cli({"egta", "--agents", "3", "--pc", "0.2", "--reps", "2", "--rounds", "60",
                     "--alpha", "0.1,10", "--jobs", jobs, "--out",
                     (dir / (std::string("e") + jobs)).string()}) == 0);
  }
  CHECK(read_text_file(dir / "s1" / "sweep.csv") == read_text_file(dir / "s3" / "sweep.csv"));
  CHECK(read_text_file(dir / "e1" / "hpt.csv") == read_text_file(dir / "e3" / "hpt.csv"));
  CHECK(read_text_file(dir / "e1" / "alpharank.csv") == read_text_file(dir / "e3" / "alpharank.csv"));
}

TEST_CASE("a symmetric payoff table ranks both roles equally") {
  const auto dir = scratch("hptfile");
  std::string table = "p_C,N1,N2,U1,U2,samples\n";
  for (int n1 = 0; n1 <= 10; ++n1)
    table += std::to_string(0.5).substr(0, 3) + "," + std::to_string(n1) + "," +
             std::to_string(10 - n1) + "," + (n1 > 0 ? "0.2" : "") + "," + (n1 < 10 ? "0.2" : "") +
             ",1\n";
  write_text_file(dir / "sym.csv", table);
  REQUIRE(run_cli({"egta", "--hpt-file", (dir / "sym.csv").string(), "--alpha", "0.1:100:log5",
                   "--out", (dir / "o").string()}) == 0);
  const auto csv = read_text_file(dir / "o" / "alpharank.csv");
  CHECK(line_count(csv) == 6);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    const auto c2 = line.find(',', line.find(',') + 1);
    const auto c3 = line.find(',', c2 + 1);
    CHECK(std::stod(line.substr(c2 + 1, c3 - c2 - 1)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::stod(line.substr(c3 + 1)) == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(rows == 5);
}

TEST_CASE("verify-analytic writes a report") {
  const auto out = scratch("verify");
  REQUIRE(run_cli({"verify-analytic", "--points", "40", "--mc-points", "2", "--mc-samples", "1e4",
                   "--fd-points", "5", "--out", out.string()}) == 0);
  const auto report = nlohmann::json::parse(read_text_file(out / "verify_analytic.json"));
  CHECK(report["summary"]["derivative_negative"] == 40);
  CHECK(report["config"]["mc_samples"] == 10000);
  CHECK(report["quadrature_vs_mc"].size() == 2);
  CHECK(verify_manifest(out).empty());
}

TEST_CASE("output directory falls back to the environment") {
  const auto dir = scratch("env");
  Settings s;
  ::setenv("ROLESIM_OUT_DIR", (dir / "from-env").string().c_str(), 1);
  CHECK(output_directory(s) == dir / "from-env");
  s.set("out", "explicit", "--out");
  CHECK(output_directory(s) == "explicit");
  ::unsetenv("ROLESIM_OUT_DIR");
  CHECK(output_directory(Settings{}) == "rolesim-out");
}
