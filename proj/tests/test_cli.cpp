#include "doctest.h"
#include "strobe/experiment.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace strobe;
using nlohmann::json;

namespace {

const std::string kPresets = STROBE_PRESET_DIR;

json tiny(long cycles) {
  json j = json::parse(R"({"id": "tiny", "units": "dimensionless",
    "model": {"type": "toric", "epsilon": 0.1},
    "schedule": {"R": [0.01, 0.4]},
    "bath": {"family": "ohmic", "eta": 0.02, "x_c": 0.02, "beta": 40},
    "run": {"steps_per_cycle": 20, "initial_state": "ghz"}})");
  j["run"]["cycles"] = cycles;
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::current_path() / ("cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(STROBE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

long count_lines(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

}  // namespace

TEST_CASE("shipped fig4A config parses to its caption parameters") {
  const ExperimentConfig c = parse_config_file(kPresets + "/fig4A.json");
  CHECK(c.id == "fig4A");
  CHECK(c.units == UnitSystem::dimensionless);
  CHECK(c.model == ModelKind::toric);
  CHECK(c.frequency == doctest::Approx(0.1));
  REQUIRE(c.bath);
  CHECK(c.bath->cutoffs == std::vector<double>{0.02});
  CHECK(c.bath->eta == doctest::Approx(0.02));
  CHECK(c.bath->beta == doctest::Approx(40));
  CHECK(c.R == std::vector<double>{0.01, 0.1, 0.4});
  CHECK(c.cycles == 500);
  const RunPoint p = make_point(c, 1.0, 0.1);
  CHECK(p.bath.nu_c == doctest::Approx(0.02));
  CHECK(p.model.omega_max == doctest::Approx(0.1));
}

TEST_CASE("dimensional configs convert per cycle time") {
  const ExperimentConfig c = parse_config_file(kPresets + "/fig4B.json");
  CHECK(c.units == UnitSystem::dimensional);
  REQUIRE(c.T.size() == 6);
  CHECK(c.T[0] == doctest::Approx(125e-9));
  CHECK(c.frequency == doctest::Approx(2e4));
  const RunPoint p = make_point(c, 5e-6, window_fractions(c, 5e-6)[0]);
  CHECK(p.model.omega_max == doctest::Approx(0.1));
  CHECK(p.bath.nu_c == doctest::Approx(0.02));
  CHECK(p.bath.beta == doctest::Approx(40));
  CHECK(p.R == doctest::Approx(0.01));
  CHECK(p.cycles == 100);
  CHECK(p.stride == 1);
  CHECK(make_point(c, 125e-9, 0.4).stride == 40);
}

TEST_CASE("quantities and units") {
  CHECK(parse_quantity("20 kHz", Dimension::frequency, "f") == doctest::Approx(2e4));
  CHECK(parse_quantity("5 us", Dimension::time, "t") == doctest::Approx(5e-6));
  CHECK(parse_quantity("0.2 ms", Dimension::time, "t") == doctest::Approx(2e-4));
  CHECK(std::isinf(parse_quantity("inf", Dimension::time, "t")));
  CHECK_THROWS_AS(parse_quantity("5 us", Dimension::frequency, "x"), ConfigError);
  CHECK_THROWS_AS(parse_quantity("5 parsecs", Dimension::time, "x"), ConfigError);
}

TEST_CASE("config errors name the field") {
  json j = json::parse(slurp(kPresets + "/fig4B.json"));
  j["schedule"].erase("T");
  try {
    parse_config(j);
    FAIL("accepted a dimensional config without T");
  } catch (const ConfigError& e) {
    CHECK(e.field == "schedule.T");
  }

  json bad_dt = tiny(2);
  bad_dt["run"].erase("steps_per_cycle");
  bad_dt["run"]["dt"] = 0.03;
  CHECK_THROWS_AS(parse_config(bad_dt), ConfigError);

  json few = tiny(2);
  few["run"]["steps_per_cycle"] = 10;
  CHECK_THROWS_AS(parse_config(few), ConfigError);

  json unknown = tiny(2);
  unknown["bath"]["nu_cutoff"] = 1;
  try {
    parse_config(unknown);
    FAIL("accepted an unknown field");
  } catch (const ConfigError& e) {
    CHECK(e.field == "bath.nu_cutoff");
  }

  json mixed = tiny(2);
  mixed["bath"]["x_c"] = "4 kHz";
  CHECK_THROWS_AS(parse_config(mixed), ConfigError);

  json window = tiny(2);
  window["schedule"]["R"] = 1.5;
  CHECK_THROWS_AS(parse_config(window), ConfigError);
}

TEST_CASE("parse, serialize, parse is the identity on every preset") {
  for (const auto& e : fs::directory_iterator(kPresets)) {
    const ExperimentConfig a = parse_config_file(e.path().string());
    const json s = serialize_config(a);
    const ExperimentConfig b = parse_config(s);
    CHECK_MESSAGE(serialize_config(b) == s, e.path().filename().string());
  }
}

TEST_CASE("run writes paired CSVs") {
  const fs::path dir = scratch("run");
  const ExperimentConfig c = parse_config(tiny(3));
  RunOptions o;
  o.out_dir = dir.string();
  const auto outputs = run_experiment(c, o);
  REQUIRE(outputs.size() == 3);
  const std::string tar = slurp(dir / "tiny_tar.csv");
  CHECK(first_line(tar) == "N,t,P_g,d_init,trace_dev,herm_dev,min_eig");
  CHECK(count_lines(tar) == 5);
  const std::string sim = slurp(dir / "tiny-R0.01_sim.csv");
  CHECK(first_line(sim) == "N,t,P_g,d_init,trace_dev,herm_dev,min_eig,d_cross");
  CHECK(fs::exists(dir / "tiny-R0.4_sim.csv"));
  CHECK(sim.find('\r') == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("CLI: exit codes, empty run, determinism and presets") {
  const fs::path dir = scratch("exe");

  SUBCASE("empty trajectory gives header and one row") {
    const fs::path cfg = write_config(dir, tiny(0));
    CHECK(cli("run " + cfg.string() + " --out " + (dir / "a").string(), dir / "log") == 0);
    CHECK(count_lines(slurp(dir / "a" / "tiny_tar.csv")) == 2);
    CHECK(count_lines(slurp(dir / "a" / "tiny-R0.4_sim.csv")) == 2);
    CHECK(slurp(dir / "log").find("tiny-R0.4") != std::string::npos);
  }

  SUBCASE("reruns are byte-identical") {
    const fs::path cfg = write_config(dir, tiny(4));
    CHECK(cli("run " + cfg.string() + " --out " + (dir / "a").string(), dir / "log") == 0);
    CHECK(cli("run " + cfg.string() + " --out " + (dir / "b").string(), dir / "log") == 0);
    for (const char* f : {"tiny_tar.csv", "tiny-R0.01_sim.csv", "tiny-R0.4_sim.csv"})
      CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    const std::string sim = slurp(dir / "a" / "tiny-R0.4_sim.csv");
    CHECK(first_line(sim).find("d_cross") != std::string::npos);
  }

  SUBCASE("STROBE_OUT redirects output") {
    const fs::path cfg = write_config(dir, tiny(0));
    const std::string env = "STROBE_OUT=" + (dir / "env").string() + " ";
    const std::string cmd = env + STROBE_CLI_PATH + " run " + cfg.string() + " > " + (dir / "log").string() + " 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "env" / "tiny_tar.csv"));
  }

  SUBCASE("config errors exit with 2") {
    json j = tiny(2);
    j["run"]["steps_per_cycle"] = 7;
    const fs::path cfg = write_config(dir, j);
    CHECK(cli("run " + cfg.string(), dir / "log") == 2);
    CHECK(slurp(dir / "log").find("run.") != std::string::npos);
    CHECK(cli("run " + (dir / "missing.json").string(), dir / "log") == 2);
    CHECK(cli("frobnicate", dir / "log") == 2);
  }

  SUBCASE("numerical aborts exit with 3 and leave diagnostics") {
    json j = tiny(30);
    j["model"]["epsilon"] = 1.0;
    j["bath"] = {{"family", "ohmic"}, {"eta", 50}, {"x_c", 20}, {"beta", 1}};
    const fs::path cfg = write_config(dir, j);
    CHECK(cli("run " + cfg.string() + " --out " + dir.string(), dir / "log") == 3);
    const json d = json::parse(slurp(dir / "tiny_diagnostics.json"));
    CHECK(d["id"] == "tiny");
    CHECK(d.contains("cycle"));
  }

  SUBCASE("bound report on fig4A is regime I") {
    CHECK(cli("bound fig4A --out " + dir.string(), dir / "log") == 0);
    const json b = json::parse(slurp(dir / "fig4A_bound.json"));
    CHECK(b == json::parse(slurp(dir / "log")));
    REQUIRE(b["reports"].size() == 3);
    for (const auto& r : b["reports"]) CHECK(r["regime"] == "I");
    CHECK_FALSE(fs::exists(dir / "fig4A_bound_sweep.csv"));
  }

  SUBCASE("bound sweep over N") {
    CHECK(cli("bound bound-sweep --out " + dir.string(), dir / "log") == 0);
    const std::string csv = slurp(dir / "bound-sweep_bound_sweep.csv");
    CHECK(first_line(csv) == "T,cutoff,R,value,stroboscopic,multi_gate,total");
    CHECK(count_lines(csv) == 1 + 3 * 9);
  }

  SUBCASE("presets list") {
    CHECK(cli("presets list", dir / "log") == 0);
    const std::string out = slurp(dir / "log");
    for (const char* name : {"fig4A", "fig4B", "fig5", "fig6A", "fig6B", "fig7A", "fig7B", "validate-toric", "bound-sweep"})
      CHECK(out.find(std::string(name) + "\n") != std::string::npos);
  }

  fs::remove_all(dir);
}
