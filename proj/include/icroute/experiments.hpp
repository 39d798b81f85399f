#pragma once

// Scenario generation, workload runs, delivery-time statistics and export.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "icroute/baselines.hpp"
#include "icroute/engine.hpp"
#include "icroute/scenario.hpp"
#include "icroute/sync.hpp"

namespace icroute {

struct ExperimentConfig {
  AreaShape shape = AreaShape::Square;
  /// 0 means the default for the shape (45 x 45 or 40 x 80).
  double width = 0.0;
  double height = 0.0;
  std::uint32_t n_nodes = 50;
  std::uint32_t t = 50;
  StrategyTag strategy = StrategyTag::RICS;
  std::uint32_t rounds = 2;
  std::uint64_t seed = 7;
  double slot_ms = 1.0;
  double range_m = 10.0;
  ForwardingParams params;
  RadioConfig radio;
  /// 0 means one per node.
  std::uint32_t n_maxhop = 0;
  WaitMode wait_mode = WaitMode::Rounds;
  Slot max_slots = 0;
  bool trace = false;
  std::uint32_t otps_trigger = 0;

  std::pair<double, double> dims() const {
    double w = width;
    double h = height;
    if (w <= 0.0 || h <= 0.0) {
      switch (shape) {
        case AreaShape::Square:
          w = 45.0;
          h = 45.0;
          break;
        case AreaShape::Rectangle:
          w = 40.0;
          h = 80.0;
          break;
        case AreaShape::Custom:
          throw std::invalid_argument("custom area needs width and height");
      }
    }
    return {w, h};
  }

  void validate() const {
    if (n_nodes < 1) throw std::invalid_argument("nodes must be >= 1");
    if (t < 1) throw std::invalid_argument("t must be >= 1");
    if (slot_ms <= 0.0) throw std::invalid_argument("slot_ms must be positive");
    if (range_m <= 0.0) throw std::invalid_argument("range must be positive");
    params.validate();
    radio.validate();
    (void)dims();
  }

  RunConfig run_config() const {
    RunConfig rc;
    rc.strategy = strategy;
    rc.rounds = rounds;
    rc.max_slots = max_slots;
    rc.trace = trace;
    rc.seed = seed;
    rc.topo = TopoParams{n_maxhop, wait_mode};
    rc.fwd = params;
    rc.radio = radio;
    rc.otps_trigger = otps_trigger;
    return rc;
  }
};

inline AreaShape parse_shape(const std::string& s) {
  if (s == "square") return AreaShape::Square;
  if (s == "rectangle") return AreaShape::Rectangle;
  throw std::invalid_argument("unknown shape '" + s + "' (expected square or rectangle)");
}

inline WaitMode parse_wait_mode(const std::string& s) {
  if (s == "rounds") return WaitMode::Rounds;
  if (s == "literal") return WaitMode::LiteralSlots;
  throw std::invalid_argument("unknown wait mode '" + s + "' (expected rounds or literal)");
}

inline const char* to_string(WaitMode m) { return m == WaitMode::Rounds ? "rounds" : "literal"; }

class AreaTooSparse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratedScenario {
  Scenario scenario;
  std::size_t attempts = 0;
};

/// Sink on the middle of the bottom edge. For the 40 x 80 rectangle that is
/// a short edge.
inline Position sink_position(double width, double /*height*/) { return Position{width / 2.0, 0.0}; }

inline GeneratedScenario generate_scenario(const ExperimentConfig& cfg, std::size_t max_attempts = 1000) {
  cfg.validate();
  const auto [w, h] = cfg.dims();
  const ChargingSpec spec(cfg.t);
  RngStream pos = derive_rng_stream(cfg.seed, 0, "scenario-positions");
  RngStream off = derive_rng_stream(cfg.seed, 0, "scenario-offsets");
  double reach_sum = 0.0;
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    Scenario sc;
    sc.spec = spec;
    sc.range_m = cfg.range_m;
    sc.seed = cfg.seed;
    sc.area = Area{w, h, cfg.shape};
    sc.nodes.push_back(NodeSpec{kSinkId, sink_position(w, h), WorkOffset{0}});
    for (NodeId i = 1; i <= cfg.n_nodes; ++i) {
      const double x = pos.uniform01() * w;
      const double y = pos.uniform01() * h;
      const auto o = static_cast<std::uint32_t>(off.uniform(spec.cycle_len()));
      sc.nodes.push_back(NodeSpec{i, Position{x, y}, WorkOffset{o}});
    }
    const auto dist = bfs_distances(build_adjacency(sc), kSinkId);
    const auto reached = std::count_if(dist.begin(), dist.end(), [](HopCount d) { return d != kInfiniteHop; });
    if (static_cast<std::size_t>(reached) == sc.size()) {
      return GeneratedScenario{std::move(sc), attempt};
    }
    reach_sum += static_cast<double>(reached - 1) / cfg.n_nodes;
  }
  const double density = cfg.n_nodes / (w * h);
  const double degree = density * M_PI * cfg.range_m * cfg.range_m;
  std::ostringstream msg;
  msg << "area too sparse: " << max_attempts << " layouts of " << cfg.n_nodes << " nodes in " << w << "x" << h
      << " m never connected to the sink (density " << density << " nodes/m^2, expected degree " << degree
      << ", mean fraction reaching sink " << reach_sum / static_cast<double>(max_attempts) << ")";
  throw AreaTooSparse(msg.str());
}

// ---------------------------------------------------------------------------
// Statistics

struct CdfPoint {
  Slot latency = 0;
  double fraction = 0.0;
};

struct Cdf {
  std::vector<CdfPoint> points;
  std::size_t created = 0;
  std::size_t delivered = 0;

  bool zero_delivered() const { return delivered == 0; }
  double plateau() const { return created == 0 ? 0.0 : static_cast<double>(delivered) / created; }
};

/// Empirical CDF over `created` messages; undelivered ones never enter, so
/// the curve ends at delivered / created. `created` defaults to the number of
/// delivery times.
inline Cdf compute_cdf(std::vector<Slot> times, std::optional<std::size_t> created = std::nullopt) {
  Cdf c;
  c.delivered = times.size();
  c.created = created.value_or(times.size());
  if (c.created < c.delivered) {
    throw std::invalid_argument("more deliveries than created messages");
  }
  if (times.empty()) {
    return c;
  }
  std::sort(times.begin(), times.end());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i + 1 < times.size() && times[i + 1] == times[i]) {
      continue;
    }
    c.points.push_back(CdfPoint{times[i], static_cast<double>(i + 1) / c.created});
  }
  return c;
}

/// Smallest latency whose cumulative fraction reaches q; nullopt when the
/// plateau stays below q.
inline std::optional<Slot> censored_quantile(const Cdf& c, double q) {
  for (const auto& p : c.points) {
    if (p.fraction + 1e-12 >= q) {
      return p.latency;
    }
  }
  return std::nullopt;
}

struct Quantiles {
  std::optional<Slot> p10, p50, p90, p99;
};

inline Quantiles delivery_quantiles(const Cdf& c) {
  return Quantiles{censored_quantile(c, 0.10), censored_quantile(c, 0.50), censored_quantile(c, 0.90),
                   censored_quantile(c, 0.99)};
}

// ---------------------------------------------------------------------------
// Running

struct ExperimentResult {
  ExperimentConfig config;
  Scenario scenario;
  std::size_t scenario_attempts = 0;
  RunResult run;
  Cdf cdf;
  Quantiles quantiles;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  GeneratedScenario g = generate_scenario(cfg);
  ExperimentResult r;
  r.config = cfg;
  r.scenario_attempts = g.attempts;
  r.run = run(g.scenario, cfg.run_config());
  r.scenario = std::move(g.scenario);
  r.cdf = compute_cdf(r.run.metrics.delivery_times(), r.run.metrics.created());
  r.quantiles = delivery_quantiles(r.cdf);
  return r;
}

// ---------------------------------------------------------------------------
// Export

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename into " + path.string());
  }
}

inline std::string messages_csv(const RunMetrics& m) {
  std::string out = "msg_id,src,created_slot,delivered_slot,hops\n";
  for (const auto& r : m.messages) {
    out += std::to_string(r.id) + ',' + std::to_string(r.origin) + ',' + std::to_string(r.created_at) + ',';
    if (r.delivered_at) {
      out += std::to_string(*r.delivered_at) + ',' + std::to_string(r.hops());
    } else {
      out += ',';
    }
    out += '\n';
  }
  return out;
}

inline std::string deliveries_csv(const RunMetrics& m) {
  std::string out = "msg_id,src_node,created_slot,delivered_slot,hop_count,path\n";
  for (const auto& r : m.messages) {
    if (!r.delivered_at) {
      continue;
    }
    std::string path;
    for (NodeId n : r.path) {
      path += std::to_string(n) + '-';
    }
    path += std::to_string(kSinkId);
    out += std::to_string(r.id) + ',' + std::to_string(r.origin) + ',' + std::to_string(r.created_at) + ',' +
           std::to_string(*r.delivered_at) + ',' + std::to_string(r.hops()) + ',' + path + '\n';
  }
  return out;
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  const auto [w, h] = c.dims();
  nlohmann::json j = {{"shape", to_string(c.shape)},
                      {"width", w},
                      {"height", h},
                      {"nodes", c.n_nodes},
                      {"t", c.t},
                      {"strategy", to_string(c.strategy)},
                      {"rounds", c.rounds},
                      {"seed", c.seed},
                      {"slot_ms", c.slot_ms},
                      {"range", c.range_m},
                      {"th", c.params.th},
                      {"q_max", c.params.q_max},
                      {"micro_slots", c.radio.micro_slots},
                      {"n_maxhop", c.n_maxhop},
                      {"wait_mode", to_string(c.wait_mode)},
                      {"max_slots", c.max_slots},
                      {"trace", c.trace},
                      {"otps_trigger", c.otps_trigger}};
  j["delta"] = c.params.delta ? nlohmann::json(*c.params.delta) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json slots_and_seconds(std::optional<Slot> v, double slot_ms) {
  if (!v) {
    return {{"slots", nullptr}, {"seconds", nullptr}};
  }
  return {{"slots", *v}, {"seconds", static_cast<double>(*v) * slot_ms / 1000.0}};
}

inline nlohmann::json summary_json(const ExperimentResult& r) {
  const RunMetrics& m = r.run.metrics;
  const double ms = r.config.slot_ms;
  nlohmann::json q = {{"p10", slots_and_seconds(r.quantiles.p10, ms)},
                      {"p50", slots_and_seconds(r.quantiles.p50, ms)},
                      {"p90", slots_and_seconds(r.quantiles.p90, ms)},
                      {"p99", slots_and_seconds(r.quantiles.p99, ms)}};
  return {{"config", config_json(r.config)},
          {"status", to_string(r.run.status)},
          {"scenario_attempts", r.scenario_attempts},
          {"topo_time_slots", m.topo_time_slots},
          {"topo_time_seconds", static_cast<double>(m.topo_time_slots) * ms / 1000.0},
          {"topo_done_slots", m.topo_done_slots},
          {"forwarding_start_slot", m.forwarding_start},
          {"end_slot", m.end_slot},
          {"created", m.created()},
          {"delivered", m.delivered()},
          {"undelivered", m.undelivered()},
          {"delivery_time", q},
          {"mean_sync_latency_slots", m.mean_sync_latency()},
          {"mean_sync_latency_seconds", m.mean_sync_latency() * ms / 1000.0},
          {"scan_attempts", m.scan_attempts},
          {"resync_attempts", m.resync_attempts},
          {"lost_matches", m.lost_matches},
          {"collisions", m.collisions},
          {"ack_collisions", m.ack_collisions},
          {"drops_queue_full", m.drops_queue_full},
          {"duplicates_at_sink", m.duplicates_at_sink},
          {"stale_unlocks", m.stale_unlocks},
          {"protocol_errors", m.protocol_errors},
          {"unreachable", m.unreachable}};
}

inline nlohmann::json topology_json(const TopologyResult& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (NodeId i = 0; i < t.hop.size(); ++i) {
    arr.push_back({{"node_id", i},
                   {"hop", t.hop[i] == kInfiniteHop ? nlohmann::json(nullptr) : nlohmann::json(t.hop[i])},
                   {"next_hop", t.next_hop[i] ? nlohmann::json(*t.next_hop[i]) : nlohmann::json(nullptr)},
                   {"converged_at_slot", t.converged_at[i]}});
  }
  return arr;
}

/// Writes messages.csv, deliveries.csv, summary.json, topology.json and, when
/// tracing, trace.jsonl into `dir`.
inline void export_run(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
  write_atomic(dir / "messages.csv", messages_csv(r.run.metrics));
  write_atomic(dir / "deliveries.csv", deliveries_csv(r.run.metrics));
  write_atomic(dir / "summary.json", summary_json(r).dump(2) + "\n");
  write_atomic(dir / "topology.json", topology_json(r.run.topology).dump(2) + "\n");
  if (r.run.trace.enabled()) {
    write_atomic(dir / "trace.jsonl", r.run.trace.to_jsonl());
  }
}

inline std::string summary_line(const ExperimentResult& r) {
  const RunMetrics& m = r.run.metrics;
  auto fmt = [](std::optional<Slot> v) { return v ? std::to_string(*v) : std::string("n/a"); };
  std::ostringstream s;
  s << "seed=" << r.config.seed << " shape=" << to_string(r.config.shape) << " nodes=" << r.config.n_nodes
    << " t=" << r.config.t << " strategy=" << to_string(r.config.strategy) << " rounds=" << r.config.rounds
    << " status=" << to_string(r.run.status) << " topo_time=" << m.topo_time_slots << " delivered=" << m.delivered()
    << "/" << m.created() << " p50=" << fmt(r.quantiles.p50) << " p90=" << fmt(r.quantiles.p90)
    << " collisions=" << m.collisions;
  return s.str();
}

// ---------------------------------------------------------------------------
// Config files

/// Applies the keys present in `j` on top of `cfg`. Keys match the CLI flags.
inline void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "shape") cfg.shape = parse_shape(v.get<std::string>());
    else if (key == "width") cfg.width = v.get<double>();
    else if (key == "height") cfg.height = v.get<double>();
    else if (key == "nodes") cfg.n_nodes = v.get<std::uint32_t>();
    else if (key == "t") cfg.t = v.get<std::uint32_t>();
    else if (key == "strategy") cfg.strategy = parse_strategy(v.get<std::string>());
    else if (key == "rounds") cfg.rounds = v.get<std::uint32_t>();
    else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
    else if (key == "slot_ms" || key == "slot-ms") cfg.slot_ms = v.get<double>();
    else if (key == "range") cfg.range_m = v.get<double>();
    else if (key == "th") cfg.params.th = v.get<std::uint32_t>();
    else if (key == "q_max") cfg.params.q_max = v.get<std::uint32_t>();
    else if (key == "delta") cfg.params.delta = v.is_null() ? std::nullopt : std::optional<Slot>(v.get<Slot>());
    else if (key == "micro_slots") cfg.radio.micro_slots = v.get<std::uint32_t>();
    else if (key == "n_maxhop") cfg.n_maxhop = v.get<std::uint32_t>();
    else if (key == "wait_mode") cfg.wait_mode = parse_wait_mode(v.get<std::string>());
    else if (key == "max_slots") cfg.max_slots = v.get<Slot>();
    else if (key == "trace") cfg.trace = v.get<bool>();
    else if (key == "otps_trigger") cfg.otps_trigger = v.get<std::uint32_t>();
    else if (key == "out" || key == "repeat" || key == "sync_bench" || key == "topology_only") continue;
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

// ---------------------------------------------------------------------------
// Sync comparison

struct SyncBenchRow {
  std::uint32_t t = 0;
  double scan_mean = 0.0;
  double scan_variance = 0.0;
  double analytic_mean = 0.0;
  double geometric_p = 0.0;
  double geometric_mean = 0.0;
  double geometric_variance = 0.0;
  std::size_t geometric_censored = 0;
};

/// Deterministic scan against the geometric baseline over the same offset
/// pairs. Samples are appended to `samples` when given.
inline SyncBenchRow sync_bench(std::uint32_t t, std::size_t trials, std::uint64_t seed,
                               std::vector<SyncSample>* samples = nullptr) {
  const ChargingSpec spec(t);
  SyncBenchRow row;
  row.t = t;
  row.analytic_mean = analytic_mean_latency(spec);
  RngStream offsets = derive_rng_stream(seed, 0, "sync-offsets");
  const auto scan = scan_latency_samples(spec, trials, offsets);
  const LatencyStats s = summarize(scan);
  row.scan_mean = s.mean;
  row.scan_variance = s.variance;
  const GeometricChoice g = best_geometric_p(spec, trials, seed);
  row.geometric_p = g.p;
  row.geometric_mean = g.stats.mean;
  row.geometric_variance = g.stats.variance;
  row.geometric_censored = g.stats.censored;
  if (samples != nullptr) {
    for (std::size_t i = 0; i < scan.size(); ++i) {
      samples->push_back(SyncSample{t, "scan", i, static_cast<Slot>(scan[i])});
    }
    RngStream off2 = derive_rng_stream(seed, 0, "sync-offsets");
    RngStream coin = derive_rng_stream(seed, static_cast<NodeId>(std::lround(g.p * 10)), "sync-geometric");
    const auto geo = geometric_latency_samples(spec, g.p, trials, off2, coin, nullptr);
    for (std::size_t i = 0; i < geo.size(); ++i) {
      samples->push_back(SyncSample{t, "geometric", i, static_cast<Slot>(geo[i])});
    }
  }
  return row;
}

inline std::string sync_csv(const std::vector<SyncSample>& samples) {
  std::string out = "t,mechanism,trial,latency_slots\n";
  for (const auto& s : samples) {
    out += std::to_string(s.t) + ',' + s.mechanism + ',' + std::to_string(s.trial) + ',' +
           std::to_string(s.latency_slots) + '\n';
  }
  return out;
}

}  // namespace icroute
