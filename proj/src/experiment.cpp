#include "strobe/experiment.hpp"

#include "strobe/csv.hpp"
#include "strobe/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

namespace strobe {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct UnitInfo {
  Dimension dim;
  double scale;
};

const std::map<std::string, UnitInfo>& unit_table() {
  static const std::map<std::string, UnitInfo> t{
      {"Hz", {Dimension::frequency, 1.0}},   {"kHz", {Dimension::frequency, 1e3}},
      {"MHz", {Dimension::frequency, 1e6}},  {"GHz", {Dimension::frequency, 1e9}},
      {"1/s", {Dimension::frequency, 1.0}},  {"s", {Dimension::time, 1.0}},
      {"ms", {Dimension::time, 1e-3}},       {"us", {Dimension::time, 1e-6}},
      {"µs", {Dimension::time, 1e-6}},       {"μs", {Dimension::time, 1e-6}},
      {"ns", {Dimension::time, 1e-9}},       {"ps", {Dimension::time, 1e-12}},
  };
  return t;
}

const char* dimension_name(Dimension d) {
  switch (d) {
    case Dimension::frequency: return "a frequency";
    case Dimension::time: return "a time";
    case Dimension::none: break;
  }
  return "a pure number";
}

std::string tag(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string time_tag(double seconds) {
  const std::pair<double, const char*> units[] = {{1e-9, "ns"}, {1e-6, "us"}, {1e-3, "ms"}, {1.0, "s"}};
  for (std::size_t i = 0; i < 4; ++i)
    if (i == 3 || seconds < units[i + 1].first) return tag(seconds / units[i].first) + units[i].second;
  return tag(seconds) + "s";
}

// integer n with x ≈ n, or -1
long as_integer(double x) {
  const double r = std::round(x);
  if (r < 1 || std::abs(x - r) > 1e-9 * r) return -1;
  return static_cast<long>(r);
}

double read_quantity(const std::string& text, Dimension expected, const std::string& field, bool& had_unit) {
  std::size_t a = text.find_first_not_of(" \t");
  if (a == std::string::npos) throw ConfigError(field, "empty quantity");
  const std::size_t b = text.find_last_not_of(" \t");
  const std::string s = text.substr(a, b - a + 1);
  if (s == "inf" || s == "infinity") return kInfinity;
  const char* begin = s.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin) throw ConfigError(field, "cannot read a number from '" + text + "'");
  std::string unit(end);
  unit.erase(0, std::min(unit.find_first_not_of(" \t"), unit.size()));
  had_unit = !unit.empty();
  if (unit.empty()) return x;
  const auto it = unit_table().find(unit);
  if (it == unit_table().end()) throw ConfigError(field, "unknown unit '" + unit + "'");
  if (it->second.dim != expected)
    throw ConfigError(field, std::string("inconsistent units: expected ") + dimension_name(expected) + ", got '" + unit + "'");
  return x * it->second.scale;
}

class Reader {
 public:
  Reader(const json& obj, std::string path, UnitSystem units) : obj_(obj), path_(std::move(path)), units_(units) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const {
    used_.insert(key);
    return obj_.contains(key);
  }
  const json& get(const std::string& key) const {
    if (!has(key)) throw ConfigError(field(key), "missing");
    return obj_.at(key);
  }

  double number(const json& v, const std::string& f, Dimension dim) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      bool had_unit = false;
      const double x = read_quantity(v.get<std::string>(), dim, f, had_unit);
      if (had_unit && units_ == UnitSystem::dimensionless)
        throw ConfigError(f, "inconsistent units: physical unit given in a dimensionless config");
      return x;
    }
    throw ConfigError(f, "expected a number");
  }
  double number(const std::string& key, Dimension dim) const { return number(get(key), field(key), dim); }

  std::vector<double> numbers(const std::string& key, Dimension dim) const {
    const json& v = get(key);
    std::vector<double> out;
    if (v.is_array()) {
      if (v.empty()) throw ConfigError(field(key), "empty list");
      for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field(key) + "[" + std::to_string(i) + "]", dim));
    } else {
      out.push_back(number(v, field(key), dim));
    }
    return out;
  }

  long integer(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v.get<long>();
  }
  std::string string(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }
  bool boolean(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v.get<bool>();
  }
  Reader child(const std::string& key) const { return Reader(get(key), field(key), units_); }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
  }

 private:
  const json& obj_;
  std::string path_;
  UnitSystem units_;
  mutable std::set<std::string> used_;
};

json quantity_json(double x) {
  if (std::isinf(x)) return "inf";
  return x;
}

json list_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(quantity_json(x));
  return a;
}

const char* family_name(BathSpec::Family f) {
  switch (f) {
    case BathSpec::Family::ohmic: return "ohmic";
    case BathSpec::Family::shifted: return "shifted";
    case BathSpec::Family::discrete: return "discrete";
  }
  return "ohmic";
}

BathSection parse_bath(const Reader& r, bool dimensional) {
  BathSection b;
  const std::string family = r.string("family");
  if (family == "ohmic") b.family = BathSpec::Family::ohmic;
  else if (family == "shifted") b.family = BathSpec::Family::shifted;
  else if (family == "discrete") b.family = BathSpec::Family::discrete;
  else throw ConfigError(r.field("family"), "expected ohmic, shifted or discrete");
  const std::string cutoff = dimensional ? "nu_c" : "x_c";
  const std::string center = dimensional ? "nu_bar" : "x_bar";
  if (r.has("beta")) b.beta = r.number("beta", Dimension::time);
  if (r.has("independent")) b.independent = r.boolean("independent");
  if (b.family == BathSpec::Family::discrete) {
    const json& modes = r.get("modes");
    if (!modes.is_array() || modes.empty()) throw ConfigError(r.field("modes"), "expected a nonempty list");
    for (std::size_t i = 0; i < modes.size(); ++i) {
      Reader m(modes[i], r.field("modes") + "[" + std::to_string(i) + "]", dimensional ? UnitSystem::dimensional : UnitSystem::dimensionless);
      DiscreteMode dm;
      dm.omega = m.number("omega", Dimension::frequency);
      const json& g = m.get("g");
      if (g.is_array()) {
        if (g.size() != 2) throw ConfigError(m.field("g"), "expected a number or [re, im]");
        dm.g = {m.number(g[0], m.field("g") + "[0]", Dimension::frequency), m.number(g[1], m.field("g") + "[1]", Dimension::frequency)};
      } else {
        dm.g = m.number(g, m.field("g"), Dimension::frequency);
      }
      m.finish();
      b.modes.push_back(dm);
    }
  } else {
    b.eta = r.number("eta", Dimension::none);
    if (r.has("w")) b.w = r.number("w", Dimension::none);
    b.cutoffs = r.numbers(cutoff, Dimension::frequency);
    if (b.family == BathSpec::Family::shifted) b.center = r.number(center, Dimension::frequency);
  }
  r.finish();
  return b;
}

json bath_json(const BathSection& b, bool dimensional) {
  json j;
  j["family"] = family_name(b.family);
  j["beta"] = quantity_json(b.beta);
  j["independent"] = b.independent;
  if (b.family == BathSpec::Family::discrete) {
    json modes = json::array();
    for (const auto& m : b.modes) {
      json e;
      e["omega"] = m.omega;
      if (m.g.imag() == 0) e["g"] = m.g.real();
      else e["g"] = json::array({m.g.real(), m.g.imag()});
      modes.push_back(e);
    }
    j["modes"] = modes;
  } else {
    j["eta"] = b.eta;
    j["w"] = b.w;
    j[dimensional ? "nu_c" : "x_c"] = b.cutoffs.size() == 1 ? json(b.cutoffs.front()) : list_json(b.cutoffs);
    if (b.family == BathSpec::Family::shifted) j[dimensional ? "nu_bar" : "x_bar"] = b.center;
  }
  return j;
}

void check_config(const ExperimentConfig& c) {
  const bool dimensional = c.units == UnitSystem::dimensional;
  if (c.id.empty()) throw ConfigError("id", "must be nonempty");
  if (c.id.find('/') != std::string::npos) throw ConfigError("id", "must not contain '/'");
  if (!(c.frequency > 0) || !std::isfinite(c.frequency)) throw ConfigError("model", "frequency must be positive");
  for (double T : c.T)
    if (!(T > 0) || !std::isfinite(T)) throw ConfigError("schedule.T", "cycle times must be positive");
  if (c.R.empty() == c.tau_g.empty()) throw ConfigError("schedule", "give exactly one of R and tau_g");
  for (double R : c.R)
    if (!(R >= 0 && R <= 1)) throw ConfigError("schedule.R", "need 0 ≤ R ≤ 1");
  for (double tg : c.tau_g)
    for (double T : c.T)
      if (!(tg >= 0 && tg <= T)) throw ConfigError("schedule.tau_g", "need 0 ≤ τ_g ≤ T for every T");
  if (c.steps_per_cycle < 20) throw ConfigError("run.steps_per_cycle", "T/Δt must be an integer of at least 20");
  if (c.cycles.has_value() == c.duration.has_value()) throw ConfigError("run", "give exactly one of cycles and duration");
  if (c.cycles && *c.cycles < 0) throw ConfigError("run.cycles", "must be nonnegative");
  for (double T : c.T) {
    if (c.duration) {
      if (*c.duration == 0) continue;
      if (as_integer(*c.duration / T) < 0) throw ConfigError("run.duration", "must be a multiple of every T");
    }
    if (c.sample_interval && as_integer(*c.sample_interval / T) < 0)
      throw ConfigError("run.sample_interval", "must be a multiple of every T");
  }
  if (!dimensional && (c.duration || c.sample_interval))
    throw ConfigError("run", "duration and sample_interval need dimensional units");
  if (!c.run_tar && !c.run_sim) throw ConfigError("run.pictures", "nothing to run");
  if (c.bath) {
    for (double T : c.T) {
      try {
        for (std::size_t k = 0; k < c.bath->cutoffs.size(); ++k) (void)make_point(c, T, window_fractions(c, T).front(), k);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("bath", e.what());
      }
    }
  }
  try {
    const ModelSpec m = c.model == ModelKind::toric ? toric_vertex_model(1.0) : five_qubit_model(1.0);
    (void)initial_state(m, c.initial_state);
  } catch (const std::exception& e) {
    throw ConfigError("run.initial_state", e.what());
  }
  if (c.bound) {
    if (!(c.bound->margin > 0)) throw ConfigError("bound.margin", "must be positive");
    if (c.bound->N && *c.bound->N < 0) throw ConfigError("bound.N", "must be nonnegative");
    for (double v : c.bound->sweep_values)
      if (!(v >= 0)) throw ConfigError("bound.sweep.values", "must be nonnegative");
  }
  if (c.oracle) {
    if (c.oracle->n_max < 2) throw ConfigError("oracle.n_max", "need at least two levels");
    if (c.oracle->cycles < 0) throw ConfigError("oracle.cycles", "must be nonnegative");
    if (!c.bath || c.bath->family != BathSpec::Family::discrete)
      throw ConfigError("bath.family", "the oracle needs discrete modes");
    if (c.bath->independent) throw ConfigError("bath.independent", "the oracle couples every site to the same modes");
  }
}

}  // namespace

double parse_quantity(const std::string& text, Dimension expected, const std::string& field) {
  bool had_unit = false;
  return read_quantity(text, expected, field, had_unit);
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  {
    const json& u = j.contains("units") ? j.at("units") : json("dimensionless");
    if (u == "dimensionless") c.units = UnitSystem::dimensionless;
    else if (u == "dimensional") c.units = UnitSystem::dimensional;
    else throw ConfigError("units", "expected dimensionless or dimensional");
  }
  const bool dimensional = c.units == UnitSystem::dimensional;
  Reader top(j, "", c.units);
  top.has("units");
  c.id = top.string("id");

  {
    Reader m = top.child("model");
    const std::string type = m.string("type");
    if (type == "toric") c.model = ModelKind::toric;
    else if (type == "five_qubit") c.model = ModelKind::five_qubit;
    else throw ConfigError(m.field("type"), "expected toric or five_qubit");
    const std::string key = !dimensional ? "epsilon" : (c.model == ModelKind::toric ? "omega" : "gamma");
    c.frequency = m.number(key, Dimension::frequency);
    m.finish();
  }
  {
    Reader s = top.child("schedule");
    if (dimensional) c.T = s.numbers("T", Dimension::time);
    else if (s.has("T")) throw ConfigError(s.field("T"), "T is the unit of time in dimensionless configs");
    if (s.has("R")) c.R = s.numbers("R", Dimension::none);
    if (s.has("tau_g")) {
      if (!dimensional) throw ConfigError(s.field("tau_g"), "dimensionless configs give R");
      c.tau_g = s.numbers("tau_g", Dimension::time);
    }
    if (s.has("spacing")) {
      const std::string sp = s.string("spacing");
      if (sp == "span") c.spacing = GateSpacing::span;
      else if (sp == "cells") c.spacing = GateSpacing::cells;
      else throw ConfigError(s.field("spacing"), "expected span or cells");
    }
    s.finish();
  }
  if (top.has("bath")) c.bath = parse_bath(top.child("bath"), dimensional);
  {
    Reader r = top.child("run");
    if (r.has("steps_per_cycle")) c.steps_per_cycle = static_cast<int>(r.integer("steps_per_cycle"));
    if (r.has("dt")) {
      if (r.has("steps_per_cycle")) throw ConfigError(r.field("dt"), "give either dt or steps_per_cycle");
      const double dt = r.number("dt", Dimension::time);
      if (!(dt > 0)) throw ConfigError(r.field("dt"), "must be positive");
      long steps = -1;
      for (double T : c.T) {
        const long n = as_integer(T / dt);
        if (n < 0 || (steps >= 0 && n != steps)) throw ConfigError(r.field("dt"), "Δt must divide T into the same integer count for every T");
        steps = n;
      }
      c.steps_per_cycle = static_cast<int>(steps);
    }
    if (r.has("cycles")) c.cycles = r.integer("cycles");
    if (r.has("duration")) c.duration = r.number("duration", Dimension::time);
    if (r.has("sample_interval")) c.sample_interval = r.number("sample_interval", Dimension::time);
    if (r.has("initial_state")) c.initial_state = r.string("initial_state");
    if (r.has("pictures")) {
      const json& p = r.get("pictures");
      if (!p.is_array()) throw ConfigError(r.field("pictures"), "expected a list");
      c.run_tar = c.run_sim = false;
      for (const auto& e : p) {
        if (e == "tar") c.run_tar = true;
        else if (e == "sim") c.run_sim = true;
        else throw ConfigError(r.field("pictures"), "expected entries tar or sim");
      }
    }
    r.finish();
  }
  if (top.has("output")) {
    Reader o = top.child("output");
    if (o.has("directory")) c.output_dir = o.string("directory");
    o.finish();
  }
  if (top.has("bound")) {
    Reader b = top.child("bound");
    BoundSection bs;
    if (b.has("N")) bs.N = b.integer("N");
    if (b.has("margin")) bs.margin = b.number("margin", Dimension::none);
    if (b.has("sweep")) {
      Reader sw = b.child("sweep");
      bs.sweep_over = sw.string("over");
      if (bs.sweep_over != "N" && bs.sweep_over != "R_M") throw ConfigError(sw.field("over"), "expected N or R_M");
      bs.sweep_values = sw.numbers("values", Dimension::none);
      sw.finish();
    }
    b.finish();
    c.bound = bs;
  }
  if (top.has("oracle")) {
    Reader o = top.child("oracle");
    OracleSection os;
    if (o.has("n_max")) os.n_max = static_cast<int>(o.integer("n_max"));
    if (o.has("cycles")) os.cycles = o.integer("cycles");
    if (o.has("g_sweep")) os.g_sweep = o.numbers("g_sweep", Dimension::frequency);
    o.finish();
    c.oracle = os;
  }
  top.finish();
  check_config(c);
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

json serialize_config(const ExperimentConfig& c) {
  const bool dimensional = c.units == UnitSystem::dimensional;
  json j;
  j["id"] = c.id;
  j["units"] = dimensional ? "dimensional" : "dimensionless";
  j["model"]["type"] = c.model == ModelKind::toric ? "toric" : "five_qubit";
  j["model"][!dimensional ? "epsilon" : (c.model == ModelKind::toric ? "omega" : "gamma")] = c.frequency;
  if (dimensional) j["schedule"]["T"] = list_json(c.T);
  if (!c.R.empty()) j["schedule"]["R"] = list_json(c.R);
  if (!c.tau_g.empty()) j["schedule"]["tau_g"] = list_json(c.tau_g);
  j["schedule"]["spacing"] = c.spacing == GateSpacing::span ? "span" : "cells";
  if (c.bath) j["bath"] = bath_json(*c.bath, dimensional);
  json& r = j["run"];
  r["steps_per_cycle"] = c.steps_per_cycle;
  if (c.cycles) r["cycles"] = *c.cycles;
  if (c.duration) r["duration"] = *c.duration;
  if (c.sample_interval) r["sample_interval"] = *c.sample_interval;
  r["initial_state"] = c.initial_state;
  json pics = json::array();
  if (c.run_tar) pics.push_back("tar");
  if (c.run_sim) pics.push_back("sim");
  r["pictures"] = pics;
  j["output"]["directory"] = c.output_dir;
  if (c.bound) {
    json& b = j["bound"];
    if (c.bound->N) b["N"] = *c.bound->N;
    b["margin"] = c.bound->margin;
    if (!c.bound->sweep_over.empty()) {
      b["sweep"]["over"] = c.bound->sweep_over;
      b["sweep"]["values"] = list_json(c.bound->sweep_values);
    }
  }
  if (c.oracle) {
    json& o = j["oracle"];
    o["n_max"] = c.oracle->n_max;
    o["cycles"] = c.oracle->cycles;
    if (!c.oracle->g_sweep.empty()) o["g_sweep"] = list_json(c.oracle->g_sweep);
  }
  return j;
}

std::vector<double> window_fractions(const ExperimentConfig& config, double T) {
  if (!config.R.empty()) return config.R;
  std::vector<double> out;
  for (double tg : config.tau_g) out.push_back(tg / T);
  return out;
}

RunPoint make_point(const ExperimentConfig& c, double T, double R, std::size_t cutoff_index) {
  RunPoint p;
  p.T_phys = T;
  p.R = R;
  p.tau_g = R;
  const bool dimensional = c.units == UnitSystem::dimensional;
  const double scale = dimensional ? T : 1.0;
  const double eps = c.frequency * scale;
  p.model = c.model == ModelKind::toric ? toric_vertex_model(eps) : five_qubit_model(eps);
  if (c.bath) {
    const BathSection& b = *c.bath;
    UnitParams u;
    u.frequency = c.frequency;
    if (cutoff_index >= b.cutoffs.size()) throw std::out_of_range("make_point: cutoff index");
    p.cutoff = b.cutoffs[cutoff_index];
    u.cutoff = p.cutoff;
    u.beta = b.beta;
    u.eta = b.eta;
    u.w = b.w;
    if (dimensional) u = convert_units(u, UnitDirection::to_dimensionless, T);
    BathSpec& s = p.bath;
    s.family = b.family;
    s.beta = u.beta;
    s.independent = b.independent;
    if (b.family == BathSpec::Family::discrete) {
      for (const auto& m : b.modes) s.modes.push_back({m.omega * scale, m.g * scale});
    } else {
      s.eta = u.eta;
      s.w = u.w;
      s.nu_c = u.cutoff;
      s.center = b.center * scale;
    }
    validate(s);
  }
  if (c.cycles) p.cycles = *c.cycles;
  else p.cycles = *c.duration == 0 ? 0 : as_integer(*c.duration / T);
  p.stride = c.sample_interval ? as_integer(*c.sample_interval / T) : 1;
  return p;
}

std::string output_directory(const ExperimentConfig& config, const RunOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  if (const char* env = std::getenv("STROBE_OUT"); env && *env) return env;
  return config.output_dir;
}

namespace {

std::vector<MetricRow> thin(std::vector<MetricRow> rows, long stride, double T) {
  std::vector<MetricRow> out;
  for (auto& r : rows)
    if (r.N % stride == 0) {
      r.t = static_cast<double>(r.N) * T;
      out.push_back(r);
    }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void record_extremes(RunOutput& out, const std::vector<MetricRow>& all) {
  out.max_trace_dev = out.max_herm_dev = 0;
  out.min_eig = kInfinity;
  for (const auto& row : all) {
    out.max_trace_dev = std::max(out.max_trace_dev, row.trace_dev);
    out.max_herm_dev = std::max(out.max_herm_dev, row.herm_dev);
    out.min_eig = std::min(out.min_eig, row.min_eig);
  }
}

std::string summary_line(const RunOutput& r, bool paired) {
  const MetricRow& last = r.rows.back();
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: N=%ld P_g=%.6f d_cross=%s max_trace_dev=%.3e max_herm_dev=%.3e min_eig=%.3e",
                r.label.c_str(), last.N, last.P_g, paired ? tag(last.d_cross).c_str() : "-", r.max_trace_dev, r.max_herm_dev, r.min_eig);
  return buf;
}

}  // namespace

std::vector<RunOutput> run_experiment(const ExperimentConfig& c, const RunOptions& options) {
  if (!c.bath) throw ConfigError("bath", "missing");
  const std::string dir = output_directory(c, options);
  if (options.write) std::filesystem::create_directories(dir);
  const bool multi_T = c.T.size() > 1;
  std::vector<RunOutput> outputs;

  auto guarded = [](const std::string& label, auto&& fn) {
    try {
      return fn();
    } catch (const NumericalAbort& e) {
      throw NumericalAbort(label + ": " + e.what(), e.cycle, e.trace_dev, e.herm_dev);
    }
  };

  const std::size_t n_cut = c.bath->family == BathSpec::Family::discrete ? 1 : c.bath->cutoffs.size();
  for (std::size_t k = 0; k < n_cut; ++k)
  for (double T : c.T) {
    const std::vector<double> Rs = window_fractions(c, T);
    const RunPoint base = make_point(c, T, Rs.front(), k);
    std::string stem = c.id;
    if (n_cut > 1) stem += (c.units == UnitSystem::dimensional ? "-nuc" : "-xc") + tag(base.cutoff);
    if (multi_T) stem += "-T" + (c.units == UnitSystem::dimensional ? time_tag(T) : tag(T));
    const Operator rho0 = initial_state(base.model, c.initial_state);
    const double dt = 1.0 / c.steps_per_cycle;

    std::optional<TrajectoryRecord> tar;
    if (c.run_tar) {
      RunOutput out;
      out.label = stem + "_tar";
      out.picture = Picture::tar;
      out.T = T;
      out.cutoff = base.cutoff;
      out.R = kNaN;
      tar = guarded(out.label, [&] { return evolve(rho0, Picture::tar, base.model, nullptr, base.bath, 1.0, dt, base.cycles); });
      const auto all = metrics(*tar, base.model);
      record_extremes(out, all);
      out.rows = thin(all, base.stride, T);
      if (options.write) write_text(dir + "/" + out.label + ".csv", metrics_csv(out.rows, false));
      if (options.log) *options.log << summary_line(out, false) << "\n";
      outputs.push_back(std::move(out));
    }
    if (c.run_sim) {
      for (double R : Rs) {
        const RunPoint p = make_point(c, T, R, k);
        const PulseSchedule sched = gate_schedule(p.model, 1.0, p.tau_g, c.spacing);
        RunOutput out;
        out.label = stem + "-R" + tag(R) + "_sim";
        out.picture = Picture::sim;
        out.T = T;
        out.cutoff = base.cutoff;
        out.R = R;
        const TrajectoryRecord sim =
            guarded(out.label, [&] { return evolve(rho0, Picture::sim, p.model, &sched, p.bath, 1.0, dt, p.cycles); });
        const auto all = metrics(sim, p.model, tar ? &*tar : nullptr);
        record_extremes(out, all);
        out.rows = thin(all, p.stride, T);
        if (options.write) write_text(dir + "/" + out.label + ".csv", metrics_csv(out.rows, tar.has_value()));
        if (options.log) *options.log << summary_line(out, tar.has_value()) << "\n";
        outputs.push_back(std::move(out));
      }
    }
  }
  return outputs;
}

std::vector<BoundEntry> bound_entries(const ExperimentConfig& c) {
  if (!c.bath) throw ConfigError("bath", "missing");
  const BoundSection bs = c.bound.value_or(BoundSection{});
  std::vector<BoundEntry> out;
  const std::size_t n_cut = c.bath->family == BathSpec::Family::discrete ? 1 : c.bath->cutoffs.size();
  for (std::size_t k = 0; k < n_cut; ++k)
  for (double T : c.T) {
    for (double R : window_fractions(c, T)) {
      const RunPoint p = make_point(c, T, R, k);
      BoundEntry e;
      e.T = T;
      e.cutoff = p.cutoff;
      e.R = R;
      const double N = static_cast<double>(bs.N.value_or(p.cycles));
      e.params = regime_params(p.model, p.bath, 1.0, N, R);
      const bool one_sided = p.bath.family == BathSpec::Family::ohmic;
      e.report.check = classify_regime(e.params.eps_max, e.params.x_bar, e.params.x_c, bs.margin, one_sided);
      if (e.report.check.regime != Regime::none) e.report = table_bound(e.params, bs.margin, one_sided);
      out.push_back(e);
    }
  }
  return out;
}

json bound_json(const ExperimentConfig& c, const std::vector<BoundEntry>& entries) {
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json reports = json::array();
  for (const auto& e : entries) {
    const auto& k = e.report.check;
    json r;
    r["T"] = e.T;
    r["cutoff"] = e.cutoff;
    r["R"] = e.R;
    r["N"] = e.params.N;
    r["regime"] = regime_name(e.report.regime);
    r["ratios"] = {{"eps_max", num(e.params.eps_max)}, {"x_bar", num(e.params.x_bar)}, {"x_c", num(e.params.x_c)},
                   {"scale", num(k.scale)}, {"scale_over_eps", num(k.scale_over_eps)}, {"eps_over_scale", num(k.eps_over_scale)}};
    r["flags"] = {{"regime_I", k.regime_I}, {"regime_II", k.regime_II}, {"regime_III", k.regime_III},
                  {"one_sided_caveat", k.one_sided_caveat}};
    r["inputs"] = {{"C", e.params.C}, {"f0", num(e.params.f0)}, {"sup_pos", num(e.params.sup_pos)},
                   {"sup_all", num(e.params.sup_all)}, {"a_B", num(e.params.a_B)}, {"R_M", e.params.R_M}};
    const bool ok = e.report.regime != Regime::none;
    r["terms"] = {{"stroboscopic", ok ? json(e.report.stroboscopic) : json(nullptr)},
                  {"multi_gate", ok ? json(e.report.multi_gate) : json(nullptr)}};
    r["total"] = ok ? json(e.report.total) : json(nullptr);
    reports.push_back(r);
  }
  return {{"id", c.id}, {"reports", reports}};
}

std::string bound_sweep_csv(const ExperimentConfig& c, const std::vector<BoundEntry>& entries) {
  if (!c.bound || c.bound->sweep_over.empty()) return "";
  CsvWriter csv({"T", "cutoff", "R", "value", "stroboscopic", "multi_gate", "total"});
  for (const auto& e : entries) {
    for (double v : c.bound->sweep_values) {
      RegimeParams p = e.params;
      (c.bound->sweep_over == "N" ? p.N : p.R_M) = v;
      if (e.report.regime == Regime::none) {
        csv.add_row({e.T, e.cutoff, e.R, v, kNaN, kNaN, kNaN});
        continue;
      }
      const BoundReport b = table_bound(p, c.bound->margin, c.bath->family == BathSpec::Family::ohmic);
      csv.add_row({e.T, e.cutoff, e.R, v, b.stroboscopic, b.multi_gate, b.total});
    }
  }
  return csv.str();
}

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return kNaN;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ValidationResult run_validation(const ExperimentConfig& c, const RunOptions& options) {
  if (!c.oracle) throw ConfigError("oracle", "missing");
  const std::string dir = output_directory(c, options);
  if (options.write) std::filesystem::create_directories(dir);
  const double T = c.T.front();
  const double R = window_fractions(c, T).front();
  const RunPoint base = make_point(c, T, R);
  const PulseSchedule sched = gate_schedule(base.model, 1.0, base.tau_g, c.spacing);
  const Operator rho0 = initial_state(base.model, c.initial_state);
  const double dt = 1.0 / c.steps_per_cycle;
  const long cycles = c.oracle->cycles;

  std::vector<double> gs = c.oracle->g_sweep;
  const bool swept = !gs.empty();
  if (!swept) gs.push_back(std::abs(c.bath->modes.front().g));

  ValidationResult result;
  std::vector<double> g_tar, d_tar, g_sim, d_sim;
  CsvWriter summary({"g", "max_d_tar", "max_d_sim", "max_leakage"});
  for (double g : gs) {
    JointSpec spec;
    spec.model = &base.model;
    spec.n_max = c.oracle->n_max;
    spec.beta = base.bath.beta;
    const double scale = c.units == UnitSystem::dimensional ? T : 1.0;
    for (const auto& m : base.bath.modes) spec.modes.push_back({m.omega, swept ? cplx(g * scale) : m.g});
    const BathSpec bath = spec.equivalent_bath();
    double row_d[2] = {kNaN, kNaN}, leak = 0;
    for (Picture mu : {Picture::tar, Picture::sim}) {
      if ((mu == Picture::tar && !c.run_tar) || (mu == Picture::sim && !c.run_sim)) continue;
      const PulseSchedule* s = mu == Picture::sim ? &sched : nullptr;
      const TrajectoryRecord tcl = evolve(rho0, mu, base.model, s, bath, 1.0, dt, cycles);
      const OracleRecord orc = exact_reduced_evolution(rho0, spec, s, mu, 1.0, cycles);
      TrajectoryRecord rec = tcl;
      rec.samples = orc.samples;
      for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        const Operator& rho = rec.samples[i];
        rec.trace_dev[i] = std::abs(rho.trace() - 1.0);
        rec.herm_dev[i] = (rho - rho.adjoint()).norm();
        rec.min_eig[i] = Eigen::SelfAdjointEigenSolver<Operator>(0.5 * (rho + rho.adjoint())).eigenvalues()(0);
      }
      ValidationEntry e;
      e.g = g;
      e.picture = mu;
      e.rows = thin(metrics(rec, base.model, &tcl), 1, T);
      e.leakage = orc.leakage;
      e.leakage_flag = orc.leakage_flag;
      for (const auto& r : e.rows) e.max_deviation = std::max(e.max_deviation, r.d_cross);
      e.max_leakage = *std::max_element(orc.leakage.begin(), orc.leakage.end());
      leak = std::max(leak, e.max_leakage);
      row_d[mu == Picture::tar ? 0 : 1] = e.max_deviation;
      (mu == Picture::tar ? g_tar : g_sim).push_back(g);
      (mu == Picture::tar ? d_tar : d_sim).push_back(e.max_deviation);

      if (options.write) {
        CsvWriter csv({"N", "t", "P_g", "d_init", "trace_dev", "herm_dev", "min_eig", "d_cross", "leakage"});
        for (std::size_t i = 0; i < e.rows.size(); ++i) {
          const auto& r = e.rows[i];
          csv.add_row({static_cast<double>(r.N), r.t, r.P_g, r.d_init, r.trace_dev, r.herm_dev, r.min_eig, r.d_cross, e.leakage[i]});
        }
        csv.save(dir + "/" + c.id + "-g" + tag(g) + "_oracle_" + (mu == Picture::tar ? "tar" : "sim") + ".csv");
      }
      if (options.log) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "%s g=%s %s: max_d=%.3e max_leakage=%.3e%s", c.id.c_str(), tag(g).c_str(),
                      mu == Picture::tar ? "tar" : "sim", e.max_deviation, e.max_leakage, e.leakage_flag ? " LEAKAGE" : "");
        *options.log << buf << "\n";
      }
      result.entries.push_back(std::move(e));
    }
    summary.add_row({g, row_d[0], row_d[1], leak});
  }
  result.slope_tar = loglog_slope(g_tar, d_tar);
  result.slope_sim = loglog_slope(g_sim, d_sim);
  if (options.write) summary.save(dir + "/" + c.id + "_validate.csv");
  if (options.log && gs.size() > 1) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s slope: tar=%.3f sim=%.3f", c.id.c_str(), result.slope_tar, result.slope_sim);
    *options.log << buf << "\n";
  }
  return result;
}

}  // namespace strobe
