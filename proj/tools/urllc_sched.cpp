// urllc_sched: topology generation, dataset capture, DQN training, scheduler
// evaluation and method comparison for the multi-cell link-scheduling
// simulator. All tabular output is CSV; structured artifacts are JSON, each
// with a sibling manifest recording inputs, seed and timings.

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "urllc/csv.hpp"
#include "urllc/harness.hpp"
#include "urllc/metrics.hpp"
#include "urllc/net_model.hpp"
#include "urllc/scheduler.hpp"
#include "urllc/serialize.hpp"

namespace {

using namespace urllc;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::vector<std::string> collect_argv(int argc, char** argv) {
  return {argv, argv + argc};
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct TopologyFlags {
  int links = 20;
  int nodes = 0;
  double region = 120.0;
  double region_h = 0.0;  // 0: square region
  int cells = 3;
  int channels = 7;
  double rb_capacity = 1.0;
  double alpha = 3.0;
  double power = 1.0;
  double bandwidth = 2.0e7;
  double sinr_threshold = 15.0;
  double margin = 10.0;
  double max_link_dist = 0.0;
  int demand_min = 1;
  int demand_max = 4;
  std::vector<int> periods;
  std::uint64_t seed = 1;

  NetworkConfig to_config() const {
    NetworkConfig c;
    c.n_links = links;
    c.n_nodes = nodes;
    c.region_w = region;
    c.region_h = region_h > 0.0 ? region_h : region;
    c.cell_grid = {cells, cells};
    c.n_channels = channels;
    c.rb_capacity = rb_capacity;
    c.path_loss_exp = alpha;
    c.tx_power_w = power;
    c.bandwidth_hz = bandwidth;
    c.sinr_threshold_db = sinr_threshold;
    c.interference_margin_db = margin;
    c.max_link_distance = max_link_dist;
    c.rng_seed = seed;
    c.traffic.demand_min = demand_min;
    c.traffic.demand_max = demand_max;
    if (!periods.empty()) c.traffic.period_choices = periods;
    return c;
  }
};

void add_topology_flags(CLI::App* cmd, TopologyFlags& f) {
  cmd->add_option("--links", f.links, "Number of links")->check(CLI::Range(1, 100000));
  cmd->add_option("--nodes", f.nodes, "Node count (default: 1.1 * links)");
  cmd->add_option("--region", f.region, "Region width in meters (square by default)");
  cmd->add_option("--region-height", f.region_h, "Region height in meters");
  cmd->add_option("--cells", f.cells, "Cell grid dimension (NxN)")->check(CLI::Range(1, 64));
  cmd->add_option("--channels", f.channels, "Resource blocks per slot")
      ->check(CLI::Range(1, 1024));
  cmd->add_option("--rb-capacity", f.rb_capacity, "Demand-units one RB carries per slot");
  cmd->add_option("--alpha", f.alpha, "Path loss exponent");
  cmd->add_option("--power", f.power, "Transmit power in watts");
  cmd->add_option("--bandwidth", f.bandwidth, "System bandwidth in hertz");
  cmd->add_option("--sinr-threshold", f.sinr_threshold, "Reliability threshold in dB");
  cmd->add_option("--margin", f.margin, "Conflict-edge margin over noise in dB");
  cmd->add_option("--max-link-dist", f.max_link_dist,
                  "Maximum tx-rx distance (default: one cell diagonal)");
  cmd->add_option("--demand-min", f.demand_min, "Minimum job demand");
  cmd->add_option("--demand-max", f.demand_max, "Maximum job demand");
  cmd->add_option("--periods", f.periods, "Allowed traffic periods in slots");
  cmd->add_option("--seed", f.seed, "Topology RNG seed");
}

void append_csv(const std::string& path, const std::string& header,
                const std::vector<std::string>& rows) {
  bool need_header = true;
  {
    std::ifstream probe(path);
    need_header = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  if (need_header) out << header << '\n';
  for (const auto& row : rows) out << row << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos < list.size()) {
    std::size_t comma = list.find(',', pos);
    if (comma == std::string::npos) comma = list.size();
    const std::string token = list.substr(pos, comma - pos);
    const std::size_t colon = token.find(':');
    if (colon == std::string::npos) {
      seeds.push_back(std::stoull(token));
    } else {
      const std::uint64_t lo = std::stoull(token.substr(0, colon));
      const std::uint64_t hi = std::stoull(token.substr(colon + 1));
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    pos = comma + 1;
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

int cmd_gen_topology(const TopologyFlags& flags, const std::string& out,
                     const std::vector<std::string>& argv) {
  Stopwatch watch;
  const Topology topo = make_topology(flags.to_config(), flags.seed);
  save_topology(topo, out);

  RunManifest manifest;
  manifest.subcommand = "gen-topology";
  manifest.argv = argv;
  manifest.seed = flags.seed;
  manifest.outputs = {out};
  manifest.duration_s = watch.seconds();
  save_manifest(manifest, out);

  std::printf("wrote %s: %d links, %d channels, %ld conflict edges\n", out.c_str(),
              static_cast<int>(topo.links.size()), topo.config.n_channels,
              topo.graph.n_edges());
  return kExitOk;
}

int cmd_gen_dataset(const std::string& topology_path, int snapshots, std::uint64_t seed,
                    const std::string& out, const std::vector<std::string>& argv) {
  Stopwatch watch;
  const Topology topo = load_topology(topology_path);
  const auto records = generate_dataset(topo, snapshots, seed);
  save_dataset(records, topology_path, seed, static_cast<int>(topo.links.size()),
               topo.config.n_channels, out);

  RunManifest manifest;
  manifest.subcommand = "gen-dataset";
  manifest.argv = argv;
  manifest.seed = seed;
  manifest.inputs = {{topology_path, file_hash(topology_path)}};
  manifest.outputs = {out};
  manifest.duration_s = watch.seconds();
  save_manifest(manifest, out);

  std::printf("wrote %s: %zu snapshots of %zu links\n", out.c_str(), records.size(),
              topo.links.size());
  return kExitOk;
}

struct TrainFlags {
  std::string topology;
  int episodes = 200;
  int slot_cap = 64;
  std::uint64_t seed = 0;
  std::string out;
  std::string log;
  double lr = 0.001;
  double gamma = 0.99;
  int batch = 32;
  std::size_t buffer = 10000;
  double eps_start = 1.0;
  double eps_floor = 0.05;
  double eps_decay = 0.995;
  int sync_interval = 100;
  int hidden = 128;
};

int cmd_train(const TrainFlags& f, const std::vector<std::string>& argv) {
  Stopwatch watch;
  const Topology topo = load_topology(f.topology);

  AgentConfig agent;
  agent.gamma = f.gamma;
  agent.batch = f.batch;
  agent.buffer_capacity = f.buffer;
  agent.eps_start = f.eps_start;
  agent.eps_floor = f.eps_floor;
  agent.eps_decay = f.eps_decay;
  agent.sync_interval = f.sync_interval;
  agent.hidden = f.hidden;
  agent.adam.lr = f.lr;

  TrainConfig train;
  train.episodes = f.episodes;
  train.slot_cap = f.slot_cap;
  train.seed = f.seed;

  const TrainResult result = run_training(topo, agent, train);
  save_checkpoint(result.params, f.seed, result.train_steps, f.out);

  RunManifest manifest;
  manifest.subcommand = "train";
  manifest.argv = argv;
  manifest.seed = f.seed;
  manifest.inputs = {{f.topology, file_hash(f.topology)}};
  manifest.outputs = {f.out};

  if (!f.log.empty()) {
    std::string text = "step,epsilon,loss,mean_q,episodes,deadline_misses\n";
    for (const auto& row : result.log) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%ld,%.6f,%.8g,%.8g,%d,%ld\n", row.step, row.epsilon,
                    row.loss, row.mean_q, row.episode, row.deadline_misses);
      text += buf;
    }
    write_text_file(f.log, text);
    manifest.outputs.push_back(f.log);
  }
  manifest.duration_s = watch.seconds();
  save_manifest(manifest, f.out);

  std::printf("trained %d episodes (%ld steps): final epsilon %.4f, loss %.6g, misses %ld\n",
              f.episodes, result.train_steps, result.final_epsilon, result.final_loss,
              result.total_misses);
  std::printf("wrote %s\n", f.out.c_str());
  return kExitOk;
}

struct EvalFlags {
  std::string topology;
  std::string method = "baseline";
  std::string checkpoint;
  std::string seeds;  // optional sweep over regenerated topologies
  int slots = 200;
  std::string out;
  std::string trace;
  bool linear_mean = false;
  bool mean_summary = false;
};

int cmd_eval(const EvalFlags& f, const std::vector<std::string>& argv) {
  Stopwatch watch;
  const Method method = parse_method(f.method);
  if (method == Method::kDqn && f.checkpoint.empty()) {
    throw std::invalid_argument("--method dqn requires --checkpoint");
  }
  if (method != Method::kDqn && !f.checkpoint.empty()) {
    throw std::invalid_argument("--checkpoint only applies to --method dqn");
  }
  const Topology topo = load_topology(f.topology);

  GcnParams params;
  const GcnParams* params_ptr = nullptr;
  if (method == Method::kDqn) {
    const Checkpoint ckpt = load_checkpoint(f.checkpoint);
    const int expected_in = 7 + topo.config.n_channels;
    if (ckpt.params.dims.in != expected_in) {
      throw std::runtime_error("checkpoint input width " + std::to_string(ckpt.params.dims.in) +
                               " does not match topology feature width " +
                               std::to_string(expected_in));
    }
    params = ckpt.params;
    params_ptr = &params;
  }

  EvalOptions options;
  options.slots = f.slots;
  options.summary = f.mean_summary ? SinrSummary::kMeanAcrossRbs : SinrSummary::kMinAcrossRbs;
  options.keep_assignments = !f.trace.empty();

  std::vector<MetricsReport> reports;
  if (f.seeds.empty()) {
    const EvalResult result =
        run_evaluation(topo, method, params_ptr, options, topo.config.rng_seed);
    reports.push_back(result.report);
    if (!f.trace.empty()) {
      std::string text;
      for (std::size_t slot = 0; slot < result.assignments.size(); ++slot) {
        text += trace_line(static_cast<int>(slot), result.assignments[slot].rb_links) + "\n";
      }
      write_text_file(f.trace, text);
    }
  } else {
    if (!f.trace.empty()) {
      throw std::invalid_argument("--trace is only supported for single-topology runs");
    }
    reports = run_sweep(topo.config, method, params_ptr, parse_seed_list(f.seeds), options);
  }

  std::vector<std::string> rows;
  for (const auto& r : reports) {
    rows.push_back(metrics_csv_row(r));
    std::printf("%s  n=%d c=%d seed=%llu  sinr %s dB  sched %.3f rel %.3f cap %.2f miss %ld  "
                "%.4g s/slot\n",
                r.method.c_str(), r.n_links, r.channels,
                static_cast<unsigned long long>(r.seed),
                format_mean_range(r.mean_sinr_db, r.p25_db, r.p75_db).c_str(), r.sched_ratio,
                r.reliability, r.capacity, r.miss_count, r.infer_time_s);
    if (f.linear_mean) {
      std::printf("  linear-domain mean: %.2f dB\n", r.mean_sinr_linear_db);
    }
  }
  if (!f.out.empty()) {
    append_csv(f.out, kMetricsCsvHeader, rows);
    RunManifest manifest;
    manifest.subcommand = "eval";
    manifest.argv = argv;
    manifest.seed = topo.config.rng_seed;
    manifest.inputs = {{f.topology, file_hash(f.topology)}};
    if (!f.checkpoint.empty()) {
      manifest.inputs.push_back({f.checkpoint, file_hash(f.checkpoint)});
    }
    manifest.outputs = {f.out};
    manifest.duration_s = watch.seconds();
    save_manifest(manifest, f.out);
  }
  return kExitOk;
}

struct CompareFlags {
  std::vector<std::string> inputs;
  std::string baseline_method = "edf-surrogate";
  std::string out;
};

int cmd_compare(const CompareFlags& f, const std::vector<std::string>& argv) {
  Stopwatch watch;
  std::vector<MetricsRow> rows;
  for (const auto& path : f.inputs) {
    const auto parsed = parse_metrics_csv(read_text_file(path));
    rows.insert(rows.end(), parsed.begin(), parsed.end());
  }
  const auto comparison = compare_metrics(rows, f.baseline_method);

  std::printf("%-16s %8s %8s %8s %12s %12s %9s %9s\n", "method", "links", "chans", "seed",
              "mean dB", "base dB", "gain dB", "improv %");
  std::vector<std::string> csv_rows;
  for (const auto& c : comparison) {
    std::printf("%-16s %8d %8d %8llu %12.2f %12.2f %+9.2f %+9.1f\n", c.method.c_str(),
                c.n_links, c.channels, static_cast<unsigned long long>(c.seed), c.mean_sinr_db,
                c.baseline_mean_db, c.gain_db, c.improvement_pct);
    csv_rows.push_back(compare_csv_row(c));
  }
  if (!f.out.empty()) {
    std::string text = std::string(kCompareCsvHeader) + "\n";
    for (const auto& row : csv_rows) text += row + "\n";
    write_text_file(f.out, text);

    RunManifest manifest;
    manifest.subcommand = "compare";
    manifest.argv = argv;
    for (const auto& path : f.inputs) manifest.inputs.push_back({path, file_hash(path)});
    manifest.outputs = {f.out};
    manifest.duration_s = watch.seconds();
    save_manifest(manifest, f.out);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell link scheduling simulator: GCN-DQN scheduler, EDF-surrogate "
               "baseline, SINR/schedulability metrics"};
  app.require_subcommand(1);
  const auto raw_argv = collect_argv(argc, argv);

  TopologyFlags topo_flags;
  std::string topo_out;
  auto* gen_topology = app.add_subcommand("gen-topology", "Generate a topology JSON file");
  add_topology_flags(gen_topology, topo_flags);
  gen_topology->add_option("--out", topo_out, "Output path")->required();

  std::string ds_topology, ds_out;
  int ds_snapshots = 1000;
  std::uint64_t ds_seed = 0;
  auto* gen_dataset = app.add_subcommand("gen-dataset", "Record traffic snapshots (JSON lines)");
  gen_dataset->add_option("--topology", ds_topology, "Topology file")->required();
  gen_dataset->add_option("--snapshots", ds_snapshots, "Snapshot count")
      ->check(CLI::Range(1, 10000000));
  gen_dataset->add_option("--seed", ds_seed, "Dataset seed");
  gen_dataset->add_option("--out", ds_out, "Output path")->required();

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Train the GCN-DQN scheduler");
  train->add_option("--topology", train_flags.topology, "Topology file")->required();
  train->add_option("--episodes", train_flags.episodes, "Training episodes")
      ->check(CLI::Range(0, 1000000));
  train->add_option("--slot-cap", train_flags.slot_cap, "Episode length cap in slots")
      ->check(CLI::Range(1, 1000000));
  train->add_option("--seed", train_flags.seed, "Training seed");
  train->add_option("--out", train_flags.out, "Checkpoint output path")->required();
  train->add_option("--log", train_flags.log, "Training log CSV path");
  train->add_option("--lr", train_flags.lr, "Adam learning rate");
  train->add_option("--gamma", train_flags.gamma, "Discount factor");
  train->add_option("--batch", train_flags.batch, "Mini-batch size");
  train->add_option("--buffer", train_flags.buffer, "Replay memory capacity");
  train->add_option("--eps-start", train_flags.eps_start, "Initial exploration rate");
  train->add_option("--eps-floor", train_flags.eps_floor, "Exploration floor");
  train->add_option("--eps-decay", train_flags.eps_decay, "Per-episode epsilon decay");
  train->add_option("--sync-interval", train_flags.sync_interval,
                    "Target network sync interval in steps");
  train->add_option("--hidden", train_flags.hidden, "GCN hidden width");

  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Evaluate a scheduling method");
  eval->add_option("--topology", eval_flags.topology, "Topology file")->required();
  eval->add_option("--method", eval_flags.method, "dqn | baseline | greedy");
  eval->add_option("--checkpoint", eval_flags.checkpoint, "Checkpoint (dqn method)");
  eval->add_option("--seeds", eval_flags.seeds,
                   "Sweep: regenerate topologies for these seeds (e.g. 0:4 or 1,2,5)");
  eval->add_option("--slots", eval_flags.slots, "Evaluation horizon in slots")
      ->check(CLI::Range(1, 10000000));
  eval->add_option("--out", eval_flags.out, "Metrics CSV to append to");
  eval->add_option("--trace", eval_flags.trace,
                   "Write the per-slot assignment trace (JSON lines)");
  eval->add_flag("--linear-mean", eval_flags.linear_mean,
                 "Also print the linear-domain mean SINR");
  eval->add_flag("--mean-summary", eval_flags.mean_summary,
                 "Summarize multi-RB links by mean instead of min");

  CompareFlags cmp_flags;
  auto* compare = app.add_subcommand("compare", "Join metrics CSVs against the baseline");
  compare->add_option("--inputs", cmp_flags.inputs, "Metrics CSV files")
      ->required()
      ->expected(1, 64);
  compare->add_option("--baseline-method", cmp_flags.baseline_method,
                      "Method name treated as baseline");
  compare->add_option("--out", cmp_flags.out, "Comparison CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen_topology->parsed()) return cmd_gen_topology(topo_flags, topo_out, raw_argv);
    if (gen_dataset->parsed()) {
      return cmd_gen_dataset(ds_topology, ds_snapshots, ds_seed, ds_out, raw_argv);
    }
    if (train->parsed()) return cmd_train(train_flags, raw_argv);
    if (eval->parsed()) return cmd_eval(eval_flags, raw_argv);
    if (compare->parsed()) return cmd_compare(cmp_flags, raw_argv);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
