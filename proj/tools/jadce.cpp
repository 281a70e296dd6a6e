// jadce: instance generation, single runs, Monte-Carlo sweeps and the
// invariant self-test.
//
// Exit codes: 0 ok, 1 invariant failure, 2 usage error, 3 I/O error.

#include "drjadce/drjadce.hpp"
#include "drjadce/io.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace drjadce;

constexpr int kExitInvariant = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct ConfigFlags {
  std::optional<Index> n, m, l, k;
  std::optional<double> eps, p, noise_var;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("-N,--devices", n, "potential devices");
    app->add_option("-M,--antennas", m, "BS antennas");
    app->add_option("-L,--pilot-len", l, "pilot length");
    auto* ke = app->add_option("-K,--active", k, "exactly K active devices");
    app->add_option("--eps", eps, "activity probability")->excludes(ke);
    app->add_option("-p,--power", p, "pilot power in dBm");
    app->add_option("--noise-var", noise_var, "noise variance override in W (0 = noiseless)");
    app->add_option("--seed", seed, "seed (falls back to $JADCE_SEED)");
  }

  void apply(SystemConfig& c) const {
    if (n) c.n_devices = *n;
    if (m) c.n_antennas = *m;
    if (l) c.pilot_len = *l;
    if (k) c.activity = FixedActiveCount{*k};
    if (eps) c.activity = ActivityProbability{*eps};
    if (p) c.pilot_power_dbm = *p;
    if (noise_var) c.noise_var_override = *noise_var;
  }
};

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("JADCE_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != std::string(s).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw contract_error(std::string("JADCE_SEED is not an unsigned integer: '") + s + "'");
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (auto e = env_seed()) return *e;
  return fallback;
}

/// Opens `path` for writing, or returns stdout for "-".
std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path == "-") return std::cout;
  file.open(path, std::ios::out | std::ios::trunc);
  if (!file) throw io_error("cannot open '" + path + "' for writing");
  return file;
}

int cmd_gen(const ConfigFlags& flags, const std::string& out) {
  SystemConfig cfg;
  flags.apply(cfg);
  cfg.seed = resolve_seed(flags.seed, cfg.seed);
  cfg.validate();
  const Instance inst = generate_instance(cfg);
  std::ofstream file;
  std::ostream& os = open_out(out, file);
  write_instance(os, inst);
  if (!os) throw io_error("write failed for '" + out + "'");
  return 0;
}

int cmd_run(const ConfigFlags& flags, const std::string& instance_path, const std::vector<std::string>& algos,
            std::optional<Index> rank, const std::string& trace_path, const std::string& out, bool no_timing) {
  Instance inst;
  if (!instance_path.empty()) {
    std::ifstream in(instance_path);
    if (!in) throw io_error("cannot open instance '" + instance_path + "'");
    inst = read_instance(in);
  } else {
    SystemConfig cfg;
    flags.apply(cfg);
    cfg.seed = resolve_seed(flags.seed, cfg.seed);
    cfg.validate();
    inst = generate_instance(cfg);
  }
  ResultRow proto;
  proto.experiment = "run";
  proto.sweep_param = SweepParam::RankOverride;
  proto.sweep_value = rank ? static_cast<double>(*rank) : std::numeric_limits<double>::quiet_NaN();
  proto.seed = inst.config.seed;
  proto.n = inst.n();
  proto.m = inst.m();
  proto.l = inst.l();
  proto.k_true = inst.activity.count();
  if (const auto* e = std::get_if<ActivityProbability>(&inst.config.activity)) proto.eps = e->eps;
  proto.p_dbm = inst.config.pilot_power_dbm;
  proto.rank_true = std::min(proto.k_true, proto.m);

  std::ofstream file;
  std::ostream& os = open_out(out, file);
  os << kCsvHeader << '\n';
  for (const std::string& name : algos) {
    const Algorithm a = parse_algorithm(name);
    ResultRow row = run_algorithm(a, inst, rank, derive_seed(inst.config.seed, {algorithm_id(a)}), proto);
    if (no_timing) row.runtime_ms = 0.0;
    os << to_csv(row) << '\n';
  }
  if (!trace_path.empty()) {
    DrJadceOptions opt;
    opt.rank = rank;
    const DetectionResult res = run_dr_jadce(inst, opt);
    std::ofstream tf(trace_path);
    if (!tf) throw io_error("cannot open '" + trace_path + "' for writing");
    res.trace.write_csv(tf);
  }
  if (!os) throw io_error("write failed for '" + out + "'");
  return 0;
}

struct SweepFlags {
  std::string spec_path, preset_name, out;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::vector<double> values;
  std::vector<std::string> algos;
  std::string sweep_param;
  unsigned jobs = 0;
  bool no_timing = false;
};

int cmd_sweep(const SweepFlags& sf, const ConfigFlags& base_flags) {
  ExperimentSpec spec;
  std::string name;
  if (!sf.spec_path.empty()) {
    spec = load_spec(sf.spec_path);
  } else if (!sf.preset_name.empty()) {
    spec = preset(sf.preset_name);
    name = sf.preset_name;
  } else {
    throw contract_error("sweep needs --spec FILE or --preset NAME");
  }
  base_flags.apply(spec.base);
  if (!sf.sweep_param.empty()) spec.sweep_param = parse_sweep_param(sf.sweep_param);
  if (!sf.values.empty()) spec.sweep_values = sf.values;
  if (!sf.algos.empty()) {
    spec.algorithms.clear();
    for (const auto& a : sf.algos) spec.algorithms.push_back(parse_algorithm(a));
  }
  if (sf.trials) spec.trials = *sf.trials;
  spec.seed = resolve_seed(sf.seed, spec.seed);
  if (!sf.out.empty()) {
    spec.out_path = sf.out;
    name.clear();
  }
  spec.validate();

  RunOptions ro;
  ro.jobs = sf.jobs;
  ro.record_timing = !sf.no_timing;
  ro.name = name;
  std::ofstream file;
  std::ostream& os = open_out(spec.out_path, file);
  const std::size_t rows = run_experiment(spec, os, ro);
  if (!os) throw io_error("write failed for '" + spec.out_path + "'");
  if (spec.out_path != "-") std::cerr << "wrote " << rows << " rows to " << spec.out_path << '\n';
  return 0;
}

int cmd_selftest() {
  const std::vector<SelftestCheck> checks = run_selftest();
  print_selftest(std::cout, checks);
  return all_passed(checks) ? 0 : kExitInvariant;
}

int cmd_presets_list() {
  for (const Preset& p : presets()) std::cout << p.name << "  " << p.description << '\n';
  return 0;
}

int cmd_presets_show(const std::string& name) {
  std::cout << spec_to_json(preset(name)).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DR-JADCE activity detection and channel estimation"};
  app.require_subcommand(1);

  ConfigFlags gen_cfg;
  std::string gen_out = "-";
  auto* gen = app.add_subcommand("gen", "generate one instance and dump it");
  gen_cfg.attach(gen);
  gen->add_option("-o,--out", gen_out, "output path ('-' = stdout)");

  ConfigFlags run_cfg;
  std::string run_instance, run_trace, run_out = "-";
  std::vector<std::string> run_algos{"dr_jadce"};
  std::optional<Index> run_rank;
  bool run_no_timing = false;
  auto* run = app.add_subcommand("run", "run algorithms on a single instance");
  run_cfg.attach(run);
  run->add_option("-i,--instance", run_instance, "instance dump to load instead of generating");
  run->add_option("-a,--algo", run_algos, "dr_jadce, l21, somp, oracle_mmse, rank_only")->delimiter(',');
  run->add_option("-r,--rank", run_rank, "rank override for dr_jadce");
  run->add_option("--trace", run_trace, "write the solver trace CSV here");
  run->add_option("-o,--out", run_out, "output CSV ('-' = stdout)");
  run->add_flag("--no-timing", run_no_timing, "write runtime_ms = 0");

  ConfigFlags sweep_cfg;
  SweepFlags sf;
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep from a JSON spec or a preset");
  sweep_cfg.attach(sweep);
  auto* spec_opt = sweep->add_option("-s,--spec", sf.spec_path, "ExperimentSpec JSON file");
  sweep->add_option("--preset", sf.preset_name, "named preset")->excludes(spec_opt);
  sweep->add_option("-o,--out", sf.out, "output CSV ('-' = stdout)");
  sweep->add_option("-t,--trials", sf.trials, "trials per sweep value")->check(CLI::PositiveNumber);
  sweep->add_option("--param", sf.sweep_param, "sweep parameter");
  sweep->add_option("--values", sf.values, "sweep values")->delimiter(',');
  sweep->add_option("-a,--algo", sf.algos, "algorithms")->delimiter(',');
  sweep->add_option("-j,--jobs", sf.jobs, "worker threads (default: all cores)");
  sweep->add_flag("--no-timing", sf.no_timing, "write runtime_ms = 0 for byte-identical reruns");

  auto* selftest = app.add_subcommand("selftest", "run the invariant suite");

  auto* pre = app.add_subcommand("presets", "named experiment presets");
  pre->require_subcommand(1);
  auto* pre_list = pre->add_subcommand("list", "list presets");
  std::string show_name;
  auto* pre_show = pre->add_subcommand("show", "print a preset as JSON");
  pre_show->add_option("name", show_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(gen_cfg, gen_out);
    if (*run) return cmd_run(run_cfg, run_instance, run_algos, run_rank, run_trace, run_out, run_no_timing);
    if (*sweep) {
      // Trial seeds derive from the experiment seed, so --seed sets that.
      sf.seed = sweep_cfg.seed;
      return cmd_sweep(sf, sweep_cfg);
    }
    if (*selftest) return cmd_selftest();
    if (*pre_list) return cmd_presets_list();
    if (*pre_show) return cmd_presets_show(show_name);
  } catch (const io_error& e) {
    std::cerr << "jadce: " << e.what() << '\n';
    return kExitIo;
  } catch (const contract_error& e) {
    std::cerr << "jadce: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "jadce: " << e.what() << '\n';
    return kExitInvariant;
  }
  return kExitUsage;
}
