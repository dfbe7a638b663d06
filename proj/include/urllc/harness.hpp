#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "urllc/csv.hpp"
#include "urllc/metrics.hpp"
#include "urllc/scheduler.hpp"
#include "urllc/sinr.hpp"

namespace urllc {

enum class Method { kDqn, kBaseline, kGreedy };

// Output labels. The static-priority baseline is an EDF-style surrogate and
// is labeled as such, never as a reimplementation of any published scheduler.
inline std::string method_label(Method m) {
  switch (m) {
    case Method::kDqn: return "gcn-dqn";
    case Method::kBaseline: return "edf-surrogate";
    case Method::kGreedy: return "greedy";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "dqn" || s == "gcn-dqn") return Method::kDqn;
  if (s == "baseline" || s == "edf-surrogate") return Method::kBaseline;
  if (s == "greedy") return Method::kGreedy;
  throw std::invalid_argument("unknown method: " + s);
}

struct EvalOptions {
  int slots = 200;
  SinrSummary summary = SinrSummary::kMinAcrossRbs;
  bool keep_assignments = false;  // retain per-slot assignments for trace output
};

struct EvalResult {
  MetricsReport report;
  std::vector<double> sinr_samples_db;  // one per (link, slot) with service
  std::vector<double> slot_times_s;     // per-slot decision latency
  std::vector<SlotAssignment> assignments;  // only when keep_assignments is set
};

// Runs one method over a fixed horizon and aggregates the evaluation metrics.
// Per-slot inference time covers feature construction, the forward pass (for
// the learned method) and RB allocation, not the metric bookkeeping.
inline EvalResult run_evaluation(const Topology& topo, Method method, const GcnParams* params,
                                 const EvalOptions& options, std::uint64_t seed) {
  const auto& links = topo.links;
  const auto& config = topo.config;
  const int n = static_cast<int>(links.size());
  if (method == Method::kDqn && params == nullptr) {
    throw std::invalid_argument("run_evaluation: dqn method requires checkpoint params");
  }

  const NormalizedAdjacency adj = normalize_adjacency(topo.graph);
  PhyConstants consts;
  consts.bandwidth_hz = config.bandwidth_hz;
  const std::vector<double> snr_db = baseline_snr_db(links, config);
  std::vector<double> snr_linear(n);
  for (int i = 0; i < n; ++i) snr_linear[i] = from_db(snr_db[i]);

  TrafficState state(links);
  Rng rng(derive_seed(seed, 0xe7a1));

  EvalResult result;
  std::vector<double> demands(n, 0.0);

  for (int slot = 0; slot < options.slots; ++slot) {
    const auto t0 = std::chrono::steady_clock::now();

    for (int i = 0; i < n; ++i) {
      demands[i] = state.job(i).active ? state.job(i).remaining_demand : 0.0;
    }

    SlotAssignment asg;
    std::vector<double> served;
    if (method == Method::kDqn) {
      const Matd features = build_features(state, links, config, topo.channel_gain, snr_db);
      auto res = schedule_slot_dqn(features, adj, *params, state, topo.graph, links,
                                   config.n_channels, config.rb_capacity, 0.0, rng,
                                   ScheduleMode::kEval);
      asg = std::move(res.assignment);
      served = std::move(res.served);
    } else if (method == Method::kBaseline) {
      asg = baseline_static_priority(state, topo.graph, links, config.n_channels,
                                     config.rb_capacity);
      served = served_units(asg, demands, config.rb_capacity);
    } else {
      std::vector<double> weights(n, 0.0);
      for (int i = 0; i < n; ++i) {
        weights[i] = mwis_weight(demands[i], state.job(i).remaining_deadline, snr_linear[i]);
      }
      asg = greedy_rb_allocation(weights, demands, topo.graph, config.n_channels,
                                 config.rb_capacity);
      served = served_units(asg, demands, config.rb_capacity);
    }

    const auto t1 = std::chrono::steady_clock::now();
    result.slot_times_s.push_back(std::chrono::duration<double>(t1 - t0).count());

    const SinrReport report = sinr_report(asg, topo.graph, links, config.path_loss_exp,
                                          config.tx_power_w, consts, options.summary);
    for (const auto& entry : report.entries) result.sinr_samples_db.push_back(entry.db);

    if (options.keep_assignments) result.assignments.push_back(asg);
    state.advance(links, served);
  }

  if (result.sinr_samples_db.empty()) {
    throw std::runtime_error("run_evaluation: no link was ever scheduled");
  }

  // Realized per-slot capacity: served demand per slot with an active job.
  // A link that never progressed keeps a tiny floor so the schedulability
  // test can fail it rather than divide by zero.
  std::vector<double> demand_v(n), capacity_v(n), deadline_v(n);
  for (int i = 0; i < n; ++i) {
    demand_v[i] = static_cast<double>(links[i].demand);
    const long active = std::max(1L, state.active_slots()[i]);
    capacity_v[i] = std::max(state.served_total()[i] / static_cast<double>(active), 1e-12);
    deadline_v[i] = static_cast<double>(links[i].deadline);
  }

  const SinrStats stats = sinr_stats(result.sinr_samples_db);
  MetricsReport& m = result.report;
  m.method = method_label(method);
  m.n_links = n;
  m.channels = config.n_channels;
  m.seed = seed;
  m.mean_sinr_db = stats.mean_db;
  m.p25_db = stats.p25_db;
  m.p75_db = stats.p75_db;
  m.mean_sinr_linear_db = mean_sinr_linear_domain_db(result.sinr_samples_db);
  m.sched_ratio = schedulable_ratio(demand_v, capacity_v, deadline_v);
  m.reliability = reliability(result.sinr_samples_db, config.sinr_threshold_db);
  m.capacity = network_capacity(n, m.sched_ratio, m.reliability);
  m.miss_count = state.total_misses();

  std::vector<double> times = result.slot_times_s;
  std::sort(times.begin(), times.end());
  m.infer_time_s = times[times.size() / 2];
  return result;
}

inline constexpr const char* kMetricsCsvHeader =
    "method,n_links,channels,seed,mean_sinr_db,p25,p75,sched_ratio,reliability,capacity,"
    "miss_count,infer_time_s";

inline std::string metrics_csv_row(const MetricsReport& m) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%s,%d,%d,%llu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%ld,%.6g",
                csv_escape(m.method).c_str(), m.n_links, m.channels,
                static_cast<unsigned long long>(m.seed), m.mean_sinr_db, m.p25_db, m.p75_db,
                m.sched_ratio, m.reliability, m.capacity, m.miss_count, m.infer_time_s);
  return buf;
}

// Worker-pool width: URLLC_SCHED_THREADS caps it, hardware parallelism is the
// default, and it never exceeds the job count.
inline int sweep_threads(std::size_t jobs) {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (const char* env = std::getenv("URLLC_SCHED_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) threads = std::min(threads, cap);
  }
  return std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1));
}

// Evaluates one method across topology seeds; each worker owns its topology
// and simulation end to end, results come back in seed order.
inline std::vector<MetricsReport> run_sweep(const NetworkConfig& base_config, Method method,
                                            const GcnParams* params,
                                            const std::vector<std::uint64_t>& seeds,
                                            const EvalOptions& options) {
  std::vector<MetricsReport> reports(seeds.size());
  std::vector<std::string> errors(seeds.size());
  std::atomic<std::size_t> next{0};

  const int n_threads = sweep_threads(seeds.size());
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t k = next.fetch_add(1);
        if (k >= seeds.size()) return;
        try {
          const Topology topo = make_topology(base_config, seeds[k]);
          reports[k] = run_evaluation(topo, method, params, options, seeds[k]).report;
        } catch (const std::exception& e) {
          errors[k] = e.what();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (!errors[k].empty()) {
      throw std::runtime_error("sweep seed " + std::to_string(seeds[k]) + ": " + errors[k]);
    }
  }
  return reports;
}

// ---- Method comparison (the Table-II-style arithmetic) ----

struct ComparisonRow {
  std::string method;
  int n_links = 0;
  int channels = 0;
  std::uint64_t seed = 0;
  double mean_sinr_db = 0.0;
  double baseline_mean_db = 0.0;
  double gain_db = 0.0;          // mean - baseline mean
  double improvement_pct = 0.0;  // gain / baseline * 100
};

struct MetricsRow {
  std::string method;
  int n_links = 0;
  int channels = 0;
  std::uint64_t seed = 0;
  double mean_sinr_db = 0.0;
};

inline std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  std::vector<MetricsRow> out;
  for (const auto& row : rows) {
    if (row.empty() || row[0] == "method") continue;  // header
    if (row.size() < 5) throw std::runtime_error("metrics csv: short row");
    MetricsRow r;
    r.method = row[0];
    r.n_links = std::stoi(row[1]);
    r.channels = std::stoi(row[2]);
    r.seed = std::stoull(row[3]);
    r.mean_sinr_db = std::stod(row[4]);
    out.push_back(std::move(r));
  }
  return out;
}

// Joins candidate rows with baseline rows sharing (n_links, channels, seed).
// Unmatched keys are an error, reported all at once.
inline std::vector<ComparisonRow> compare_metrics(const std::vector<MetricsRow>& rows,
                                                  const std::string& baseline_method) {
  using Key = std::tuple<int, int, std::uint64_t>;
  std::map<Key, double> baseline;
  for (const auto& r : rows) {
    if (r.method == baseline_method) {
      baseline[{r.n_links, r.channels, r.seed}] = r.mean_sinr_db;
    }
  }
  if (baseline.empty()) {
    throw std::runtime_error("compare: no rows for baseline method '" + baseline_method + "'");
  }
  std::vector<ComparisonRow> out;
  std::string unmatched;
  for (const auto& r : rows) {
    if (r.method == baseline_method) continue;
    const auto it = baseline.find({r.n_links, r.channels, r.seed});
    if (it == baseline.end()) {
      unmatched += " (" + r.method + "," + std::to_string(r.n_links) + "," +
                   std::to_string(r.channels) + "," + std::to_string(r.seed) + ")";
      continue;
    }
    ComparisonRow c;
    c.method = r.method;
    c.n_links = r.n_links;
    c.channels = r.channels;
    c.seed = r.seed;
    c.mean_sinr_db = r.mean_sinr_db;
    c.baseline_mean_db = it->second;
    c.gain_db = r.mean_sinr_db - it->second;
    c.improvement_pct = c.gain_db / it->second * 100.0;
    out.push_back(std::move(c));
  }
  if (!unmatched.empty()) {
    throw std::runtime_error("compare: no matching baseline row for:" + unmatched);
  }
  if (out.empty()) {
    throw std::runtime_error("compare: inputs contain no candidate rows to compare against '" +
                             baseline_method + "'");
  }
  return out;
}

inline constexpr const char* kCompareCsvHeader =
    "method,n_links,channels,seed,mean_sinr_db,baseline_mean_db,gain_db,improvement_pct";

inline std::string compare_csv_row(const ComparisonRow& c) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%d,%d,%llu,%.6f,%.6f,%.6f,%.6f",
                csv_escape(c.method).c_str(), c.n_links, c.channels,
                static_cast<unsigned long long>(c.seed), c.mean_sinr_db, c.baseline_mean_db,
                c.gain_db, c.improvement_pct);
  return buf;
}

}  // namespace urllc
