// Command-line driver: runs one experiment or a seed sweep and writes the
// per-run exports.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "icroute/icroute.hpp"

namespace {

struct Flags {
  std::string config;
  std::string shape = "square";
  std::uint32_t nodes = 50;
  std::uint32_t t = 50;
  std::string strategy = "rics";
  std::uint32_t rounds = 2;
  std::uint64_t seed = 7;
  std::string out;
  double slot_ms = 1.0;
  bool trace = false;
  std::uint32_t repeat = 1;
  bool sync_bench = false;
  std::size_t trials = 10000;
  bool topology_only = false;
  std::uint64_t max_slots = 0;
  std::uint32_t th = 1;
  std::uint32_t q_max = 16;
  std::uint64_t delta = 0;
  std::uint32_t n_maxhop = 0;
  std::string wait_mode = "rounds";
  std::uint32_t micro_slots = 16;
  std::uint32_t otps_trigger = 0;
};

int run_sync_bench(const Flags& f, bool t_given) {
  std::vector<std::uint32_t> ts = t_given ? std::vector<std::uint32_t>{f.t} : std::vector<std::uint32_t>{5, 120, 500};
  std::vector<icroute::SyncSample> samples;
  for (std::uint32_t t : ts) {
    const auto row = icroute::sync_bench(t, f.trials, f.seed, f.out.empty() ? nullptr : &samples);
    std::cout << "t=" << t << " trials=" << f.trials << " scan_mean=" << row.scan_mean
              << " scan_var=" << row.scan_variance << " analytic=" << row.analytic_mean
              << " geometric_p=" << row.geometric_p << " geometric_mean=" << row.geometric_mean
              << " geometric_var=" << row.geometric_variance << " scan_mean_s=" << row.scan_mean * f.slot_ms / 1000.0
              << "\n";
  }
  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    icroute::write_atomic(std::filesystem::path(f.out) / "sync.csv", icroute::sync_csv(samples));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slot-level simulator for routing among intermittently powered sensor nodes"};
  Flags f;
  app.add_option("--config", f.config, "JSON config file; explicit flags override its keys")->check(CLI::ExistingFile);
  app.add_option("--shape", f.shape, "square or rectangle")->check(CLI::IsMember({"square", "rectangle"}));
  app.add_option("--nodes", f.nodes, "number of IC nodes (the sink is extra)")->check(CLI::PositiveNumber);
  app.add_option("--t", f.t, "charging time in slots")->check(CLI::PositiveNumber);
  app.add_option("--strategy", f.strategy, "rics, fxcs, rncs or otps")
      ->check(CLI::IsMember({"rics", "fxcs", "rncs", "otps"}));
  app.add_option("--rounds", f.rounds, "messages per node");
  app.add_option("--seed", f.seed, "base seed");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--slot-ms", f.slot_ms, "milliseconds per slot, reporting only")->check(CLI::PositiveNumber);
  app.add_flag("--trace", f.trace, "write trace.jsonl");
  app.add_option("--repeat", f.repeat, "runs with seeds seed..seed+repeat-1")->check(CLI::PositiveNumber);
  app.add_flag("--sync-bench", f.sync_bench, "compare the scan with the geometric baseline and exit");
  app.add_option("--trials", f.trials, "offset pairs per t for --sync-bench")->check(CLI::PositiveNumber);
  app.add_flag("--topology-only", f.topology_only, "stop after topology construction");
  app.add_option("--max-slots", f.max_slots, "simulation horizon in slots (0 = automatic)");
  app.add_option("--th", f.th, "queue threshold for the sender role")->check(CLI::PositiveNumber);
  app.add_option("--q-max", f.q_max, "queue capacity")->check(CLI::PositiveNumber);
  app.add_option("--delta", f.delta, "tolerance wait in slots (default t+1)");
  app.add_option("--n-maxhop", f.n_maxhop, "hop bound for the listen fallback (0 = node count)");
  app.add_option("--wait-mode", f.wait_mode, "rounds or literal")->check(CLI::IsMember({"rounds", "literal"}));
  app.add_option("--micro-slots", f.micro_slots, "jitter resolution M")->check(CLI::Range(2u, 1u << 20));

  app.add_option("--otps-trigger", f.otps_trigger, "failed sends before OTPS probes (0 = t+1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  icroute::ExperimentConfig cfg;
  try {
    if (!f.config.empty()) {
      std::ifstream in(f.config);
      const auto j = nlohmann::json::parse(in);
      icroute::apply_config_json(cfg, j);
      if (j.contains("out") && f.out.empty()) f.out = j["out"].get<std::string>();
      if (j.contains("repeat") && app.count("--repeat") == 0) f.repeat = j["repeat"].get<std::uint32_t>();
      if (j.contains("topology_only") && !f.topology_only) f.topology_only = j["topology_only"].get<bool>();
    }
    auto given = [&](const char* name) { return f.config.empty() || app.count(name) > 0; };
    if (given("--shape")) cfg.shape = icroute::parse_shape(f.shape);
    if (given("--nodes")) cfg.n_nodes = f.nodes;
    if (given("--t")) cfg.t = f.t;
    if (given("--strategy")) cfg.strategy = icroute::parse_strategy(f.strategy);
    if (given("--rounds")) cfg.rounds = f.rounds;
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--slot-ms")) cfg.slot_ms = f.slot_ms;
    if (given("--trace")) cfg.trace = cfg.trace || f.trace;
    if (given("--max-slots")) cfg.max_slots = f.max_slots;
    if (given("--th")) cfg.params.th = f.th;
    if (given("--q-max")) cfg.params.q_max = f.q_max;
    if (app.count("--delta") > 0) cfg.params.delta = f.delta;
    if (given("--n-maxhop")) cfg.n_maxhop = f.n_maxhop;
    if (given("--wait-mode")) cfg.wait_mode = icroute::parse_wait_mode(f.wait_mode);
    if (given("--micro-slots")) cfg.radio.micro_slots = f.micro_slots;
    if (given("--otps-trigger")) cfg.otps_trigger = f.otps_trigger;
    if (f.topology_only) cfg.rounds = 0;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  if (f.sync_bench) {
    f.seed = cfg.seed;
    f.t = cfg.t;
    f.slot_ms = cfg.slot_ms;
    return run_sync_bench(f, app.count("--t") > 0);
  }

  int status = 0;
  for (std::uint32_t k = 0; k < f.repeat; ++k) {
    icroute::ExperimentConfig c = cfg;
    c.seed = cfg.seed + k;
    try {
      const icroute::ExperimentResult r = icroute::run_experiment(c);
      if (!f.out.empty()) {
        std::filesystem::path dir(f.out);
        if (f.repeat > 1) dir /= "seed-" + std::to_string(c.seed);
        icroute::export_run(r, dir);
      }
      std::cout << icroute::summary_line(r) << "\n";
      if (r.run.status != icroute::RunStatus::Ok) {
        std::cerr << "error: seed " << c.seed << ": topology construction did not converge\n";
        status = 3;
      }
    } catch (const std::exception& e) {
      std::cerr << "error: seed " << c.seed << ": " << e.what() << "\n";
      return 1;
    }
  }
  return status;
}
