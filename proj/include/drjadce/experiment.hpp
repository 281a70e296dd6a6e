#pragma once

/** @file
 * Seeded Monte-Carlo sweeps. One CSV row per (sweep value, trial, algorithm),
 * written in that order by a single writer while worker threads run trials.
 * A trailing "# complete rows=<n>" line marks a clean finish.
 */

#include "drjadce/baselines.hpp"
#include "drjadce/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <condition_variable>
#include <ostream>
#include <string>
#include <thread>

namespace drjadce {

enum class SweepParam { PilotLen, NAntennas, PowerDbm, ActivityProb, NDevices, RankOverride };
enum class Algorithm { DrJadce, L21, Somp, OracleMmse, RankOnly };

inline const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::PilotLen: return "pilot_len";
    case SweepParam::NAntennas: return "n_antennas";
    case SweepParam::PowerDbm: return "power_dbm";
    case SweepParam::ActivityProb: return "activity_prob";
    case SweepParam::NDevices: return "n_devices";
    case SweepParam::RankOverride: return "rank_override";
  }
  return "?";
}

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::DrJadce: return "dr_jadce";
    case Algorithm::L21: return "l21";
    case Algorithm::Somp: return "somp";
    case Algorithm::OracleMmse: return "oracle_mmse";
    case Algorithm::RankOnly: return "rank_only";
  }
  return "?";
}

inline SweepParam parse_sweep_param(const std::string& s) {
  for (SweepParam p : {SweepParam::PilotLen, SweepParam::NAntennas, SweepParam::PowerDbm, SweepParam::ActivityProb,
                       SweepParam::NDevices, SweepParam::RankOverride}) {
    if (s == to_string(p)) return p;
  }
  throw contract_error("unknown sweep_param '" + s + "'");
}

inline Algorithm parse_algorithm(const std::string& s) {
  for (Algorithm a : {Algorithm::DrJadce, Algorithm::L21, Algorithm::Somp, Algorithm::OracleMmse, Algorithm::RankOnly}) {
    if (s == to_string(a)) return a;
  }
  throw contract_error("unknown algorithm '" + s + "'");
}

struct ExperimentSpec {
  SystemConfig base;
  SweepParam sweep_param = SweepParam::PilotLen;
  std::vector<double> sweep_values;
  std::vector<Algorithm> algorithms{Algorithm::DrJadce};
  int trials = 1;
  std::uint64_t seed = 1;
  std::string out_path = "experiment.csv";

  void validate() const {
    if (sweep_values.empty()) throw contract_error("ExperimentSpec: sweep_values is empty");
    if (trials < 1) throw contract_error("ExperimentSpec: trials must be >= 1");
    if (algorithms.empty()) throw contract_error("ExperimentSpec: no algorithms");
    for (double v : sweep_values) apply_sweep_value(v);
  }

  /// Config and rank override for one sweep value.
  std::pair<SystemConfig, std::optional<Index>> apply_sweep_value(double v) const {
    SystemConfig cfg = base;
    std::optional<Index> rank;
    auto as_count = [&](const char* what) {
      if (!(v >= 1.0) || v != std::floor(v)) {
        throw contract_error(std::string("ExperimentSpec: ") + what + " must be a positive integer");
      }
      return static_cast<Index>(v);
    };
    switch (sweep_param) {
      case SweepParam::PilotLen: cfg.pilot_len = as_count("pilot_len"); break;
      case SweepParam::NAntennas: cfg.n_antennas = as_count("n_antennas"); break;
      case SweepParam::NDevices: cfg.n_devices = as_count("n_devices"); break;
      case SweepParam::PowerDbm: cfg.pilot_power_dbm = v; break;
      case SweepParam::ActivityProb: cfg.activity = ActivityProbability{v}; break;
      case SweepParam::RankOverride: rank = as_count("rank_override"); break;
    }
    cfg.validate();
    return {cfg, rank};
  }
};

inline const char* kCsvHeader =
    "experiment,sweep_param,sweep_value,trial,seed,algo,N,M,L,K_true,eps,p_dbm,rank_true,rank_est,aer,missed,"
    "false_alarms,nmse_db,f_final,grad_norm,outer_iters,runtime_ms,status";

struct ResultRow {
  std::string experiment;
  SweepParam sweep_param = SweepParam::PilotLen;
  double sweep_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  Algorithm algo = Algorithm::DrJadce;
  Index n = 0, m = 0, l = 0, k_true = 0;
  double eps = std::numeric_limits<double>::quiet_NaN();  // NaN in fixed-K mode
  double p_dbm = 0.0;
  Index rank_true = 0;
  Index rank_est = 0;  // 0 when the algorithm does not estimate a rank
  double aer = std::numeric_limits<double>::quiet_NaN();
  Index missed = 0, false_alarms = 0;
  double nmse_db = std::numeric_limits<double>::quiet_NaN();
  double f_final = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  int outer_iters = 0;
  double runtime_ms = 0.0;
  std::string status = "ok";
};

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline std::string to_csv(const ResultRow& r) {
  std::string s;
  s.reserve(200);
  auto put = [&s](const std::string& f) {
    if (!s.empty()) s += ',';
    s += f;
  };
  put(r.experiment);
  put(to_string(r.sweep_param));
  put(format_number(r.sweep_value));
  put(std::to_string(r.trial));
  put(std::to_string(r.seed));
  put(to_string(r.algo));
  put(std::to_string(r.n));
  put(std::to_string(r.m));
  put(std::to_string(r.l));
  put(std::to_string(r.k_true));
  put(format_number(r.eps));
  put(format_number(r.p_dbm));
  put(std::to_string(r.rank_true));
  put(std::to_string(r.rank_est));
  put(format_number(r.aer));
  put(std::to_string(r.missed));
  put(std::to_string(r.false_alarms));
  put(format_number(r.nmse_db));
  put(format_number(r.f_final));
  put(format_number(r.grad_norm));
  put(std::to_string(r.outer_iters));
  put(format_number(r.runtime_ms));
  put(r.status);
  return s;
}

/// Status token for a failed trial: the exception kind, never free text.
inline std::string failure_status(const std::exception& e) {
  if (dynamic_cast<const retraction_error*>(&e)) return "retraction_error";
  if (dynamic_cast<const rank_deficiency_error*>(&e)) return "rank_deficient";
  if (dynamic_cast<const numerical_error*>(&e)) return "numerical_error";
  if (dynamic_cast<const contract_error*>(&e)) return "contract_error";
  return "error";
}

inline std::uint64_t algorithm_id(Algorithm a) { return static_cast<std::uint64_t>(a) + 1; }

/// Seed of the instance shared by every algorithm of a (sweep value, trial) cell.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t sweep_idx, int trial) {
  return derive_seed(seed, {sweep_idx, static_cast<std::uint64_t>(trial)});
}

inline std::uint64_t algorithm_seed(std::uint64_t seed, std::size_t sweep_idx, int trial, Algorithm a) {
  return derive_seed(seed, {sweep_idx, static_cast<std::uint64_t>(trial), algorithm_id(a)});
}

inline void fill_detection(ResultRow& row, const Instance& inst, const CMatrix& x_hat, double v1 = 0.1) {
  const std::vector<Index> det = detect_activity(x_hat, v1);
  const AerResult aer = compute_aer(det, inst.activity.active_set, inst.n());
  row.aer = aer.aer;
  row.missed = aer.missed;
  row.false_alarms = aer.false_alarms;
  if (!inst.activity.active_set.empty()) row.nmse_db = compute_nmse(x_hat, inst.x, inst.activity.active_set);
}

/// Runs one algorithm on one instance; failures become a status, never an exception.
inline ResultRow run_algorithm(Algorithm algo, const Instance& inst, std::optional<Index> rank_override,
                               std::uint64_t algo_seed, ResultRow row) {
  row.algo = algo;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const double scale = normalization_scale(inst);
    switch (algo) {
      case Algorithm::DrJadce: {
        DrJadceOptions opt;
        opt.rank = rank_override;
        opt.init_seed = algo_seed;
        const DetectionResult res = run_dr_jadce(inst, opt);
        row.rank_est = res.r_hat;
        row.aer = res.aer;
        row.missed = res.missed;
        row.false_alarms = res.false_alarms;
        row.nmse_db = res.nmse_db;
        row.f_final = res.f_final;
        row.grad_norm = res.grad_norm;
        row.outer_iters = res.outer_iters;
        if (!res.converged) row.status = "not_converged";
        break;
      }
      case Algorithm::L21: {
        // Same noise-unit normalization as DR-JADCE so zeta means the same thing.
        const CMatrix y = scale > 0.0 ? CMatrix(inst.y / scale) : inst.y;
        const L21Result res = l21_solve(inst.a, y);
        fill_detection(row, inst, scale > 0.0 ? CMatrix(scale * res.x) : res.x);
        row.f_final = res.objective;
        row.grad_norm = res.prox_residual;
        row.outer_iters = res.iters;
        if (!res.converged) row.status = "not_converged";
        break;
      }
      case Algorithm::Somp: {
        const Index k = std::min(inst.activity.count(), inst.l());
        fill_detection(row, inst, somp(inst.a, inst.y, k).x);
        break;
      }
      case Algorithm::OracleMmse: {
        const double gamma = inst.config.energy() * inst.config.pathloss();
        fill_detection(row, inst, oracle_mmse(inst.a, inst.y, inst.activity.active_set, inst.noise_var, gamma));
        break;
      }
      case Algorithm::RankOnly: {
        const CMatrix y = scale > 0.0 ? CMatrix(inst.y / scale) : inst.y;
        row.rank_est = estimate_rank_for_reduction(y).r_hat;
        break;
      }
    }
  } catch (const std::exception& e) {
    row.status = failure_status(e);
  }
  row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

inline std::string experiment_name(const std::string& out_path) {
  const std::size_t slash = out_path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? out_path : out_path.substr(slash + 1);
  const std::size_t dot = base.rfind('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  for (char& c : base) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = '_';
  }
  return base.empty() ? "experiment" : base;
}

/// Every row of one (sweep value, trial) cell, in algorithm order.
inline std::vector<ResultRow> run_cell(const ExperimentSpec& spec, std::size_t sweep_idx, int trial,
                                       const std::string& name) {
  const double value = spec.sweep_values[sweep_idx];
  auto [cfg, rank] = spec.apply_sweep_value(value);
  cfg.seed = trial_seed(spec.seed, sweep_idx, trial);
  ResultRow proto;
  proto.experiment = name;
  proto.sweep_param = spec.sweep_param;
  proto.sweep_value = value;
  proto.trial = trial;
  proto.seed = cfg.seed;
  proto.n = cfg.n_devices;
  proto.m = cfg.n_antennas;
  proto.l = cfg.pilot_len;
  if (const auto* e = std::get_if<ActivityProbability>(&cfg.activity)) proto.eps = e->eps;
  proto.p_dbm = cfg.pilot_power_dbm;

  std::vector<ResultRow> rows;
  std::optional<Instance> inst;
  try {
    inst = generate_instance(cfg);
  } catch (const std::exception& e) {
    for (Algorithm a : spec.algorithms) {
      ResultRow r = proto;
      r.algo = a;
      r.status = failure_status(e);
      rows.push_back(r);
    }
    return rows;
  }
  proto.k_true = inst->activity.count();
  proto.rank_true = std::min(proto.k_true, proto.m);
  for (Algorithm a : spec.algorithms) {
    rows.push_back(run_algorithm(a, *inst, rank, algorithm_seed(spec.seed, sweep_idx, trial, a), proto));
  }
  return rows;
}

struct RunOptions {
  unsigned jobs = 0;          // 0 = hardware concurrency
  bool record_timing = true;  // false writes runtime_ms = 0 for byte-identical reruns
  std::string name;           // experiment column; defaults to the out_path stem
};

/**
 * Runs the sweep and streams rows to `os` in (sweep value, trial, algorithm)
 * order as they become available. Returns the number of data rows.
 */
inline std::size_t run_experiment(const ExperimentSpec& spec, std::ostream& os, const RunOptions& ro = {}) {
  spec.validate();
  const std::string name = ro.name.empty() ? experiment_name(spec.out_path) : ro.name;
  const std::size_t cells = spec.sweep_values.size() * static_cast<std::size_t>(spec.trials);
  unsigned jobs = ro.jobs ? ro.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, cells));

  std::vector<std::optional<std::vector<ResultRow>>> done(cells);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= cells) return;
      const std::size_t sweep_idx = c / static_cast<std::size_t>(spec.trials);
      const int trial = static_cast<int>(c % static_cast<std::size_t>(spec.trials));
      std::vector<ResultRow> rows = run_cell(spec, sweep_idx, trial, name);
      if (!ro.record_timing) {
        for (auto& r : rows) r.runtime_ms = 0.0;
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        done[c] = std::move(rows);
      }
      cv.notify_one();
    }
  };

  os << kCsvHeader << '\n';
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  std::size_t written = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<ResultRow> rows;
    {
      std::unique_lock<std::mutex> lock(mu);
      cv.wait(lock, [&] { return done[c].has_value(); });
      rows = std::move(*done[c]);
      done[c].reset();
    }
    for (const auto& r : rows) os << to_csv(r) << '\n';
    os.flush();
    written += rows.size();
  }
  for (auto& t : pool) t.join();
  os << "# complete rows=" << written << '\n';
  os.flush();
  return written;
}

}  // namespace drjadce
