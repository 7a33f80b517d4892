// experiment.hpp — JSON experiment configs, sweeps over T and R, bound reports and oracle validation runs.
#pragma once

#include "strobe/bounds.hpp"
#include "strobe/tcl2.hpp"

#include "json.hpp"
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace strobe {

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field(field) {}
  std::string field;
};

enum class UnitSystem { dimensionless, dimensional };
enum class Dimension { none, frequency, time };

// "20 kHz" -> 2e4 (s⁻¹, no 2π), "5 us" -> 5e-6 (s), "inf" -> ∞; bare numbers pass through.
double parse_quantity(const std::string& text, Dimension expected, const std::string& field);

struct BathSection {
  BathSpec::Family family = BathSpec::Family::ohmic;
  double eta = 0;          // η̃, or η in s^{w-1}
  double w = 1;
  std::vector<double> cutoffs{1.0};  // x_c, or ν_c in s⁻¹; several values sweep
  double center = 0;       // x̄ or ν̄ (shifted family)
  double beta = kInfinity; // β̃, or β in s
  std::vector<DiscreteMode> modes;  // ω̃, g̃ or s⁻¹
  bool independent = true;
};

struct BoundSection {
  std::optional<long> N;       // defaults to the run length in cycles
  double margin = 0.2;
  std::string sweep_over;      // "", "N" or "R_M"
  std::vector<double> sweep_values;
};

struct OracleSection {
  int n_max = 4;
  long cycles = 20;
  std::vector<double> g_sweep;  // sets every mode coupling; empty keeps the bath couplings
};

struct ExperimentConfig {
  std::string id;
  UnitSystem units = UnitSystem::dimensionless;
  ModelKind model = ModelKind::toric;
  double frequency = 0;            // ε, or ω / γ in s⁻¹
  std::vector<double> T{1.0};      // cycle times; {1} when dimensionless
  std::vector<double> R;           // gate-window fractions ...
  std::vector<double> tau_g;       // ... or gate-window durations (dimensional only)
  GateSpacing spacing = GateSpacing::span;
  std::optional<BathSection> bath;
  int steps_per_cycle = 40;
  std::optional<long> cycles;      // N_max
  std::optional<double> duration;  // physical run length (dimensional only)
  std::optional<double> sample_interval;  // dimensional only; rows kept every δt
  std::string initial_state = "default";
  bool run_tar = true;
  bool run_sim = true;
  std::string output_dir = "out";
  std::optional<BoundSection> bound;
  std::optional<OracleSection> oracle;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_file(const std::string& path);
nlohmann::json serialize_config(const ExperimentConfig& config);

// One (T, R) point with every quantity in units of T.
struct RunPoint {
  double T_phys = 1;   // cycle time in config units
  double cutoff = 0;   // config units
  double R = 0;
  double tau_g = 0;    // in units of T, equals R
  ModelSpec model;
  BathSpec bath;
  long cycles = 0;
  long stride = 1;     // samples kept every `stride` cycles
};

// Dimensionless parameters for cycle time T (config units) and window fraction R.
RunPoint make_point(const ExperimentConfig& config, double T, double R, std::size_t cutoff_index = 0);
// Gate-window fractions for cycle time T.
std::vector<double> window_fractions(const ExperimentConfig& config, double T);

struct RunOutput {
  std::string label;  // file stem
  Picture picture = Picture::tar;
  double T = 1;       // config units
  double R = 0;       // NaN for the target
  double cutoff = 0;  // config units
  std::vector<MetricRow> rows;  // thinned to the sample interval, t in config units
  // over every stroboscopic sample, before thinning
  double max_trace_dev = 0;
  double max_herm_dev = 0;
  double min_eig = 0;
};

struct RunOptions {
  std::string out_dir;          // empty: STROBE_OUT or config.output_dir
  bool write = true;
  std::ostream* log = nullptr;  // summary lines
};

std::string output_directory(const ExperimentConfig& config, const RunOptions& options);

// Runs every requested trajectory; NumericalAbort propagates to the caller.
std::vector<RunOutput> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct BoundEntry {
  double T = 1;
  double cutoff = 0;
  double R = 0;
  RegimeParams params;
  BoundReport report;  // regime none leaves the terms at zero
};

std::vector<BoundEntry> bound_entries(const ExperimentConfig& config);
nlohmann::json bound_json(const ExperimentConfig& config, const std::vector<BoundEntry>& entries);
// T, cutoff, R, value, stroboscopic, multi_gate, total for the configured sweep; empty without one.
std::string bound_sweep_csv(const ExperimentConfig& config, const std::vector<BoundEntry>& entries);

struct ValidationEntry {
  double g = 0;
  Picture picture = Picture::tar;
  double max_deviation = 0;  // max_N trace distance between oracle and TCL-2
  double max_leakage = 0;
  bool leakage_flag = false;
  std::vector<MetricRow> rows;
  std::vector<double> leakage;
};

struct ValidationResult {
  std::vector<ValidationEntry> entries;
  double slope_tar = 0;  // least-squares log-log slope of max deviation in g; NaN with < 2 points
  double slope_sim = 0;
};

ValidationResult run_validation(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace strobe
