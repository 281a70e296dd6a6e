#pragma once

/** @file
 * Serialization for the harness: ExperimentSpec as JSON (snake_case fields),
 * named presets, and a text instance dump.
 *
 * Requires nlohmann/json (vendor/json.hpp) on the include path.
 *
 * Instance dump layout:
 *   line 1: JSON header {"format":"jadce-instance-1","N":..,"M":..,"L":..,
 *           "seed":..,"noise_var":..,"energies":[..],"active_set":[..]}
 *   then for each of A, X, Y: a line "<name> <rows> <cols>" followed by
 *   <rows> lines of 2*<cols> numbers "re im re im ..." (%.17g).
 */

#include "drjadce/experiment.hpp"

#include "json.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace drjadce {

using json = nlohmann::json;

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline json config_to_json(const SystemConfig& c) {
  json j;
  j["n_devices"] = c.n_devices;
  j["n_antennas"] = c.n_antennas;
  j["pilot_len"] = c.pilot_len;
  if (const auto* e = std::get_if<ActivityProbability>(&c.activity)) {
    j["activity_prob"] = e->eps;
  } else {
    j["fixed_active"] = std::get<FixedActiveCount>(c.activity).k;
  }
  j["pilot_power_dbm"] = c.pilot_power_dbm;
  j["noise_psd_dbm_hz"] = c.noise_psd_dbm_hz;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["pathloss_db"] = c.pathloss_db;
  j["seed"] = c.seed;
  if (c.noise_var_override) j["noise_var"] = *c.noise_var_override;
  return j;
}

inline SystemConfig config_from_json(const json& j) {
  static const char* known[] = {"n_devices",    "n_antennas",      "pilot_len",        "activity_prob",
                                "fixed_active", "pilot_power_dbm", "noise_psd_dbm_hz", "bandwidth_hz",
                                "pathloss_db",  "seed",            "noise_var"};
  if (!j.is_object()) throw contract_error("base: expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known)) {
      throw contract_error("base: unknown field '" + key + "'");
    }
  }
  SystemConfig c;
  c.n_devices = j.value("n_devices", c.n_devices);
  c.n_antennas = j.value("n_antennas", c.n_antennas);
  c.pilot_len = j.value("pilot_len", c.pilot_len);
  if (j.contains("activity_prob") && j.contains("fixed_active")) {
    throw contract_error("base: set exactly one of activity_prob and fixed_active");
  }
  if (j.contains("activity_prob")) c.activity = ActivityProbability{j.at("activity_prob").get<double>()};
  if (j.contains("fixed_active")) c.activity = FixedActiveCount{j.at("fixed_active").get<Index>()};
  c.pilot_power_dbm = j.value("pilot_power_dbm", c.pilot_power_dbm);
  c.noise_psd_dbm_hz = j.value("noise_psd_dbm_hz", c.noise_psd_dbm_hz);
  c.bandwidth_hz = j.value("bandwidth_hz", c.bandwidth_hz);
  c.pathloss_db = j.value("pathloss_db", c.pathloss_db);
  c.seed = j.value("seed", c.seed);
  if (j.contains("noise_var")) c.noise_var_override = j.at("noise_var").get<double>();
  return c;
}

inline json spec_to_json(const ExperimentSpec& s) {
  json j;
  j["base"] = config_to_json(s.base);
  j["sweep_param"] = to_string(s.sweep_param);
  j["sweep_values"] = s.sweep_values;
  json algos = json::array();
  for (Algorithm a : s.algorithms) algos.push_back(to_string(a));
  j["algorithms"] = algos;
  j["trials"] = s.trials;
  j["seed"] = s.seed;
  j["out_path"] = s.out_path;
  return j;
}

inline ExperimentSpec spec_from_json(const json& j) {
  static const char* known[] = {"base", "sweep_param", "sweep_values", "algorithms", "trials", "seed", "out_path"};
  if (!j.is_object()) throw contract_error("spec: expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known)) {
      throw contract_error("spec: unknown field '" + key + "'");
    }
  }
  ExperimentSpec s;
  try {
    if (j.contains("base")) s.base = config_from_json(j.at("base"));
    if (j.contains("sweep_param")) s.sweep_param = parse_sweep_param(j.at("sweep_param").get<std::string>());
    if (j.contains("sweep_values")) s.sweep_values = j.at("sweep_values").get<std::vector<double>>();
    if (j.contains("algorithms")) {
      s.algorithms.clear();
      for (const auto& a : j.at("algorithms")) s.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    s.trials = j.value("trials", s.trials);
    s.seed = j.value("seed", s.seed);
    s.out_path = j.value("out_path", s.out_path);
  } catch (const json::exception& e) {
    throw contract_error(std::string("spec: ") + e.what());
  }
  return s;
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open spec file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw contract_error("spec file '" + path + "': " + e.what());
  }
  return spec_from_json(j);
}

struct Preset {
  std::string name;
  std::string description;
  ExperimentSpec spec;
};

/// Paper-scale experiment axes. Trials default low; raise with --trials for offline runs.
inline std::vector<Preset> presets() {
  std::vector<Preset> out;
  auto add = [&](std::string name, std::string desc, SystemConfig base, SweepParam p, std::vector<double> values,
                 std::vector<Algorithm> algos, int trials) {
    ExperimentSpec s;
    s.base = base;
    s.sweep_param = p;
    s.sweep_values = std::move(values);
    s.algorithms = std::move(algos);
    s.trials = trials;
    s.out_path = name + ".csv";
    out.push_back({std::move(name), std::move(desc), std::move(s)});
  };
  const std::vector<Algorithm> aer_algos{Algorithm::DrJadce, Algorithm::L21, Algorithm::Somp};
  const std::vector<Algorithm> nmse_algos{Algorithm::DrJadce, Algorithm::L21, Algorithm::OracleMmse};

  SystemConfig c;
  c.n_devices = 300;
  c.pilot_len = 90;
  c.n_antennas = 256;
  c.activity = FixedActiveCount{30};
  add("fig3_rank", "rank estimate vs pilot power, N=300 K=30 L=90 M=256", c, SweepParam::PowerDbm,
      {-3, -2, -1, 0, 1, 2, 3}, {Algorithm::RankOnly}, 100);

  c = {};
  c.n_devices = 400;
  c.n_antennas = 64;
  c.activity = ActivityProbability{0.1};
  c.pilot_power_dbm = 20.0;
  add("fig5_aer_vs_L", "AER vs pilot length, N=400 M=64 eps=0.1 p=20 dBm", c, SweepParam::PilotLen,
      {30, 35, 40, 45, 50, 55, 60}, aer_algos, 20);

  c = {};
  c.n_devices = 400;
  c.pilot_len = 45;
  c.activity = ActivityProbability{0.1};
  c.pilot_power_dbm = 15.0;
  add("fig6_aer_vs_M", "AER vs antennas, N=400 L=45 eps=0.1 p=15 dBm", c, SweepParam::NAntennas,
      {16, 32, 64, 96, 128}, aer_algos, 20);

  c = {};
  c.n_devices = 400;
  c.pilot_len = 45;
  c.n_antennas = 64;
  c.activity = ActivityProbability{0.1};
  add("fig7_aer_vs_p", "AER vs pilot power, N=400 L=45 M=64 eps=0.1", c, SweepParam::PowerDbm,
      {0, 3, 6, 9, 12, 15, 18, 21}, aer_algos, 20);

  c = {};
  c.pilot_len = 105;
  c.n_antennas = 128;
  c.activity = FixedActiveCount{100};
  c.pilot_power_dbm = 15.0;
  add("fig8_aer_vs_N", "AER vs potential devices, K=100 L=105 M=128 p=15 dBm", c, SweepParam::NDevices,
      {200, 300, 400, 500, 600}, aer_algos, 20);

  c = {};
  c.n_devices = 400;
  c.n_antennas = 128;
  c.activity = ActivityProbability{0.1};
  c.pilot_power_dbm = 15.0;
  add("fig9_nmse_vs_L", "NMSE vs pilot length, N=400 M=128 eps=0.1 p=15 dBm", c, SweepParam::PilotLen,
      {45, 60, 75, 90, 105}, nmse_algos, 20);

  c = {};
  c.n_devices = 400;
  c.pilot_len = 90;
  c.n_antennas = 128;
  c.pilot_power_dbm = 20.0;
  add("nmse_vs_eps", "NMSE vs activity probability, N=400 L=90 M=128 p=20 dBm", c, SweepParam::ActivityProb,
      {0.05, 0.1, 0.15, 0.2}, nmse_algos, 20);
  return out;
}

inline ExperimentSpec preset(const std::string& name) {
  for (const Preset& p : presets()) {
    if (p.name == name) return p.spec;
  }
  throw contract_error("unknown preset '" + name + "'");
}

inline void write_matrix(std::ostream& os, const char* name, const CMatrix& m) {
  os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.17g %.17g", j ? " " : "", m(i, j).real(), m(i, j).imag());
      os << buf;
    }
    os << '\n';
  }
}

inline void write_instance(std::ostream& os, const Instance& inst) {
  json h;
  h["format"] = "jadce-instance-1";
  h["N"] = inst.n();
  h["M"] = inst.m();
  h["L"] = inst.l();
  h["seed"] = inst.config.seed;
  h["noise_var"] = inst.noise_var;
  h["energies"] = inst.energies;
  h["active_set"] = inst.activity.active_set;
  h["config"] = config_to_json(inst.config);
  os << h.dump() << '\n';
  write_matrix(os, "A", inst.a);
  write_matrix(os, "X", inst.x);
  write_matrix(os, "Y", inst.y);
}

inline CMatrix read_matrix(std::istream& is, const std::string& expect) {
  std::string name;
  Index rows = 0, cols = 0;
  if (!(is >> name >> rows >> cols) || name != expect || rows < 0 || cols < 0) {
    throw io_error("instance dump: bad header for matrix " + expect);
  }
  CMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      double re = 0.0, im = 0.0;
      if (!(is >> re >> im)) throw io_error("instance dump: truncated matrix " + expect);
      m(i, j) = {re, im};
    }
  }
  return m;
}

/// Reads the header and matrices back; channels are not stored.
inline Instance read_instance(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw io_error("instance dump: empty input");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw io_error(std::string("instance dump: bad JSON header: ") + e.what());
  }
  if (h.value("format", "") != "jadce-instance-1") throw io_error("instance dump: unknown format");
  Instance inst;
  inst.config = config_from_json(h.at("config"));
  inst.noise_var = h.at("noise_var").get<double>();
  inst.energies = h.at("energies").get<std::vector<double>>();
  inst.activity.active_set = h.at("active_set").get<std::vector<Index>>();
  inst.a = read_matrix(is, "A");
  inst.x = read_matrix(is, "X");
  inst.y = read_matrix(is, "Y");
  inst.activity.indicators.assign(static_cast<std::size_t>(inst.n()), 0);
  for (Index k : inst.activity.active_set) inst.activity.indicators[static_cast<std::size_t>(k)] = 1;
  inst.channels.pathloss = inst.config.pathloss();
  return inst;
}

}  // namespace drjadce
