// strobe — run stroboscopic simulator experiments, bound reports and oracle validations from JSON configs.
#include "strobe/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace strobe;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalAbort = 3;

std::string preset_dir() {
  if (const char* env = std::getenv("STROBE_PRESETS"); env && *env) return env;
  return STROBE_PRESET_DIR;
}

// A path, or the name of a shipped preset.
std::string resolve(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  const fs::path p = fs::path(preset_dir()) / (arg + ".json");
  if (fs::exists(p)) return p.string();
  return arg;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

template <class F>
int guarded(const std::string& config_arg, const std::string& out_dir, F body) {
  ExperimentConfig config;
  try {
    config = parse_config_file(resolve(config_arg));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  RunOptions options;
  options.out_dir = out_dir;
  options.log = &std::cout;
  try {
    body(config, options);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalAbort& e) {
    const std::string dir = output_directory(config, options);
    fs::create_directories(dir);
    const std::string path = dir + "/" + config.id + "_diagnostics.json";
    nlohmann::json d = {{"id", config.id}, {"message", e.what()}, {"cycle", e.cycle},
                        {"trace_dev", e.trace_dev}, {"herm_dev", e.herm_dev}};
    write_file(path, d.dump(2) + "\n");
    std::cerr << "numerical abort: " << e.what() << " (diagnostics in " << path << ")\n";
    return kNumericalAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stroboscopic digital quantum simulator experiments"};
  app.require_subcommand(1);

  std::string config_arg, out_dir;
  auto* run = app.add_subcommand("run", "evolve target and simulator, write metric CSVs");
  run->add_option("config", config_arg, "config file or preset name")->required();
  run->add_option("--out", out_dir, "output directory (overrides STROBE_OUT and the config)");

  auto* bound = app.add_subcommand("bound", "print the regime classification and error bound as JSON");
  bound->add_option("config", config_arg, "config file or preset name")->required();
  bound->add_option("--out", out_dir, "output directory");

  auto* validate = app.add_subcommand("validate", "compare TCL-2 with exact joint evolution on discrete modes");
  validate->add_option("config", config_arg, "config file or preset name")->required();
  validate->add_option("--out", out_dir, "output directory");

  auto* presets = app.add_subcommand("presets", "shipped experiment configs");
  presets->require_subcommand(1);
  auto* list = presets->add_subcommand("list", "list preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (*run) {
    return guarded(config_arg, out_dir, [](const ExperimentConfig& c, const RunOptions& o) { run_experiment(c, o); });
  }
  if (*bound) {
    return guarded(config_arg, out_dir, [](const ExperimentConfig& c, const RunOptions& o) {
      const auto entries = bound_entries(c);
      const std::string text = bound_json(c, entries).dump(2) + "\n";
      std::cout << text;
      const std::string dir = output_directory(c, o);
      fs::create_directories(dir);
      write_file(dir + "/" + c.id + "_bound.json", text);
      const std::string sweep = bound_sweep_csv(c, entries);
      if (!sweep.empty()) write_file(dir + "/" + c.id + "_bound_sweep.csv", sweep);
    });
  }
  if (*validate) {
    return guarded(config_arg, out_dir, [](const ExperimentConfig& c, const RunOptions& o) { run_validation(c, o); });
  }
  if (*list) {
    std::vector<std::string> names;
    if (fs::is_directory(preset_dir()))
      for (const auto& e : fs::directory_iterator(preset_dir()))
        if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
    std::sort(names.begin(), names.end());
    for (const auto& n : names) std::cout << n << "\n";
    return 0;
  }
  return 0;
}
