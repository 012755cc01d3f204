#include "kisim/harness/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "kisim/error.hpp"

namespace kisim::harness {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::ConfigError, message); }

/// Object reader that remembers which keys were consumed so leftovers can be rejected.
class Section {
 public:
  Section(const json& node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node_.is_object()) config_error(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    if (!node_.contains(key)) return;
    out = convert<T>(node_.at(key), where_ + "." + key);
  }

  const json& child(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!used_.count(item.key())) config_error(where_ + ": unknown key '" + item.key() + "'");
    }
  }

  template <typename T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) config_error(where + ": expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) config_error(where + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
        config_error(where + ": expected a non-negative integer");
      } else {
        return static_cast<T>(v.get<std::int64_t>());
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) config_error(where + ": expected a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) config_error(where + ": expected a string");
      return v.get<std::string>();
    } else {
      if (!v.is_array()) config_error(where + ": expected a list");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
  }

 private:
  const json& node_;
  std::string where_;
  std::set<std::string> used_;
};

template <typename Fn>
void checked(const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    config_error(where + ": " + e.what());
  }
}

FilmSpec read_film(const json& node) {
  Section s(node, "film");
  std::string preset = "type_b";
  s.get("preset", preset);
  FilmSpec f;
  if (preset == "type_a") {
    f = type_a_film();
  } else if (preset == "type_b") {
    f = type_b_film();
  } else {
    config_error("film.preset: expected 'type_a' or 'type_b'");
  }
  s.get("width_um", f.width_um);
  s.get("length_um", f.length_um);
  s.get("thickness_nm", f.thickness_nm);
  s.get("critical_temperature_K", f.critical_temperature_K);
  s.get("sheet_lk0_nH", f.sheet_lk0_nH);
  s.get("critical_current_density_A_mm2", f.critical_current_density_A_mm2);
  s.get("nonlinearity_current_uA", f.nonlinearity_current_uA);
  s.get("normal_resistance_kOhm", f.normal_resistance_kOhm);
  s.finish();
  checked("film", [&] { f.validate(); });
  return f;
}

ResonatorSpec read_resonator(const json& node) {
  Section s(node, "resonator");
  ResonatorSpec r;
  s.get("coupling_capacitance_fF", r.coupling_capacitance_fF);
  s.get("resonator_capacitance_fF", r.resonator_capacitance_fF);
  s.get("parasitic_capacitance_fF", r.parasitic_capacitance_fF);
  s.get("contact_resistance_Ohm", r.contact_resistance_Ohm);
  s.get("line_impedance_Ohm", r.line_impedance_Ohm);
  s.finish();
  checked("resonator", [&] { r.validate(); });
  return r;
}

SetSpec read_set(const json& node) {
  Section s(node, "set");
  SetSpec d;
  s.get("gate_capacitance_aF", d.gate_capacitance_aF);
  s.get("source_capacitance_aF", d.source_capacitance_aF);
  s.get("drain_capacitance_aF", d.drain_capacitance_aF);
  s.get("peak_conductance_uS", d.peak_conductance_uS);
  s.get("electron_temperature_K", d.electron_temperature_K);
  s.get("off_resistance_GOhm", d.off_resistance_GOhm);
  s.get("charge_offset", d.charge_offset);
  s.finish();
  checked("set", [&] { d.validate(); });
  return d;
}

ChainSpec read_chain(const json& node) {
  Section s(node, "chain");
  ChainSpec c;
  s.get("system_gain_dB", c.system_gain_dB);
  s.get("noise_temperature_K", c.noise_temperature_K);
  s.get("sample_rate_Hz", c.sample_rate_Hz);
  s.finish();
  checked("chain", [&] { c.validate(); });
  return c;
}

ThermalState read_thermal(const json& node) {
  Section s(node, "thermal");
  ThermalState t;
  s.get("mxc_temperature_K", t.mxc_temperature_K);
  s.get("electron_temperature_K", t.electron_temperature_K);
  s.finish();
  if (!(t.mxc_temperature_K >= 0.0) || !(t.electron_temperature_K >= 0.0)) {
    config_error("thermal: temperatures must be >= 0");
  }
  return t;
}

SweepAxis read_axis(const json& node, const std::string& where) {
  Section s(node, where);
  SweepAxis a;
  std::string scale = "linear";
  if (!s.has("axis") || !s.has("start") || !s.has("stop") || !s.has("points")) {
    config_error(where + ": axis, start, stop and points are required");
  }
  s.get("axis", a.name);
  s.get("start", a.start);
  s.get("stop", a.stop);
  s.get("points", a.points);
  s.get("scale", scale);
  s.finish();
  const auto& names = sweep_axis_names();
  if (std::find(names.begin(), names.end(), a.name) == names.end()) {
    config_error(where + ".axis: unknown sweep axis '" + a.name + "'");
  }
  if (a.points < 2) config_error(where + ".points: need at least 2 points");
  if (scale == "log") {
    a.log = true;
    if (!(a.start > 0.0 && a.stop > 0.0)) config_error(where + ": log sweeps need positive start and stop");
  } else if (scale != "linear") {
    config_error(where + ".scale: expected 'linear' or 'log'");
  }
  return a;
}

void read_options(const json& node, IvOptions& o) {
  Section s(node, "iv");
  s.get("temperatures_K", o.temperatures_K);
  s.finish();
  if (o.temperatures_K.empty()) config_error("iv.temperatures_K: need at least one temperature");
  for (double t : o.temperatures_K)
    if (!(t >= 0.0)) config_error("iv.temperatures_K: temperatures must be >= 0");
}

void read_options(const json& node, S11Options& o) {
  Section s(node, "s11");
  s.get("drive_power_dBm", o.drive_power_dBm);
  s.finish();
}

void read_options(const json& node, StabilityOptions& o) {
  Section s(node, "stability_map");
  s.get("probe_frequency_Hz", o.probe_frequency_Hz);
  s.finish();
  if (!(o.probe_frequency_Hz >= 0.0)) config_error("stability_map.probe_frequency_Hz must be >= 0");
}

void read_options(const json& node, SnrOptions& o) {
  Section s(node, "snr_benchmark");
  s.get("samples", o.samples);
  s.get("windows", o.windows);
  s.get("shuffle", o.shuffle);
  s.get("split_dBm", o.split_dBm);
  s.get("dc_current_uA", o.dc_current_uA);
  s.get("search_lo_Hz", o.search_lo_Hz);
  s.get("search_hi_Hz", o.search_hi_Hz);
  s.get("search_points", o.search_points);
  s.get("peak_index", o.peak_index);
  s.get("background_offset_mV", o.background_offset_mV);
  s.finish();
  if (o.samples < 16) config_error("snr_benchmark.samples: need at least 16");
  if (o.windows.size() < 3) config_error("snr_benchmark.windows: need at least 3 windows");
  for (auto w : o.windows) {
    if (w < 1 || o.samples / w < 16) config_error("snr_benchmark.windows: each window must leave >= 16 samples");
  }
  if (!(o.search_lo_Hz > 0.0 && o.search_lo_Hz < o.search_hi_Hz) || o.search_points < 3) {
    config_error("snr_benchmark: need 0 < search_lo_Hz < search_hi_Hz and search_points >= 3");
  }
}

void read_options(const json& node, NonlinearSweepOptions& o) {
  Section s(node, "nonlinear");
  s.get("dc_current_uA", o.dc_current_uA);
  s.get("search_lo_Hz", o.search_lo_Hz);
  s.get("search_hi_Hz", o.search_hi_Hz);
  s.get("search_points", o.search_points);
  s.get("spectra", o.spectra);
  s.finish();
  if (!(o.search_lo_Hz > 0.0 && o.search_lo_Hz < o.search_hi_Hz) || o.search_points < 3) {
    config_error("nonlinear: need 0 < search_lo_Hz < search_hi_Hz and search_points >= 3");
  }
}

ExperimentConfig from_json(const json& root) {
  Section s(root, "config");
  ExperimentConfig c;
  s.get("seed", c.seed);
  s.get("output_path", c.output_path);
  if (s.has("film")) c.film = read_film(s.child("film"));
  if (s.has("resonator")) c.resonator = read_resonator(s.child("resonator"));
  if (s.has("set")) c.set = read_set(s.child("set"));
  if (s.has("chain")) c.chain = read_chain(s.child("chain"));
  if (s.has("thermal")) c.thermal = read_thermal(s.child("thermal"));
  if (s.has("sweep")) {
    const json& sweep = s.child("sweep");
    if (sweep.is_array()) {
      for (std::size_t i = 0; i < sweep.size(); ++i)
        c.sweeps.push_back(read_axis(sweep[i], "sweep[" + std::to_string(i) + "]"));
    } else {
      c.sweeps.push_back(read_axis(sweep, "sweep"));
    }
    std::set<std::string> seen;
    for (const auto& a : c.sweeps)
      if (!seen.insert(a.name).second) config_error("sweep: axis '" + a.name + "' given twice");
  }
  if (s.has("iv")) read_options(s.child("iv"), c.iv);
  if (s.has("s11")) read_options(s.child("s11"), c.s11);
  if (s.has("stability_map")) read_options(s.child("stability_map"), c.stability_map);
  if (s.has("snr_benchmark")) read_options(s.child("snr_benchmark"), c.snr_benchmark);
  if (s.has("nonlinear")) read_options(s.child("nonlinear"), c.nonlinear);
  s.finish();
  c.chain.rng_seed = c.seed;
  c.canonical = root.dump();
  return c;
}

}  // namespace

const std::vector<std::string>& sweep_axis_names() {
  static const std::vector<std::string> names{"temperature", "dc_current", "rf_power", "frequency",
                                              "V_GS",        "V_DS",       "W_BC"};
  return names;
}

Eigen::ArrayXd SweepAxis::values() const {
  if (log) {
    return Eigen::ArrayXd::LinSpaced(points, std::log10(start), std::log10(stop)).unaryExpr([](double e) {
      return std::pow(10.0, e);
    });
  }
  return Eigen::ArrayXd::LinSpaced(points, start, stop);
}

const SweepAxis* ExperimentConfig::find_axis(const std::string& name) const {
  for (const auto& a : sweeps)
    if (a.name == name) return &a;
  return nullptr;
}

const SweepAxis& ExperimentConfig::axis(const std::string& name) const {
  const SweepAxis* a = find_axis(name);
  if (a == nullptr) config_error("config: this experiment needs a '" + name + "' sweep axis");
  return *a;
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config: invalid JSON: ") + e.what());
  }
  return from_json(root);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_seed_override(ExperimentConfig& config, std::uint64_t seed) {
  json root = json::parse(config.canonical);
  root["seed"] = seed;
  config.seed = seed;
  config.chain.rng_seed = seed;
  config.canonical = root.dump();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ExperimentConfig& config) { return fnv1a_hex(config.canonical); }

}  // namespace kisim::harness
