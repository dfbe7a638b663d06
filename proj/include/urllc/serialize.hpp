#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "urllc/csv.hpp"
#include "urllc/gcn.hpp"
#include "urllc/net_model.hpp"
#include "urllc/traffic.hpp"

namespace urllc {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kFormatVersion = "v1";

using json = nlohmann::json;

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string file_hash(const std::string& path) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(read_text_file(path))));
  return buf;
}

// ---- NetworkConfig <-> JSON ----

inline json config_to_json(const NetworkConfig& c) {
  return json{{"region_w", c.region_w},
              {"region_h", c.region_h},
              {"n_nodes", c.n_nodes},
              {"n_links", c.n_links},
              {"cell_grid", {c.cell_grid.rows, c.cell_grid.cols}},
              {"n_channels", c.n_channels},
              {"rb_capacity", c.rb_capacity},
              {"path_loss_exp", c.path_loss_exp},
              {"tx_power_w", c.tx_power_w},
              {"bandwidth_hz", c.bandwidth_hz},
              {"sinr_threshold_db", c.sinr_threshold_db},
              {"interference_margin_db", c.interference_margin_db},
              {"max_link_distance", c.max_link_distance},
              {"min_separation", c.min_separation},
              {"rng_seed", c.rng_seed},
              {"traffic",
               {{"demand_min", c.traffic.demand_min},
                {"demand_max", c.traffic.demand_max},
                {"period_choices", c.traffic.period_choices}}}};
}

inline NetworkConfig config_from_json(const json& j) {
  NetworkConfig c;
  c.region_w = j.at("region_w").get<double>();
  c.region_h = j.at("region_h").get<double>();
  c.n_nodes = j.at("n_nodes").get<int>();
  c.n_links = j.at("n_links").get<int>();
  c.cell_grid.rows = j.at("cell_grid").at(0).get<int>();
  c.cell_grid.cols = j.at("cell_grid").at(1).get<int>();
  c.n_channels = j.at("n_channels").get<int>();
  c.rb_capacity = j.at("rb_capacity").get<double>();
  c.path_loss_exp = j.at("path_loss_exp").get<double>();
  c.tx_power_w = j.at("tx_power_w").get<double>();
  c.bandwidth_hz = j.at("bandwidth_hz").get<double>();
  c.sinr_threshold_db = j.at("sinr_threshold_db").get<double>();
  c.interference_margin_db = j.at("interference_margin_db").get<double>();
  c.max_link_distance = j.at("max_link_distance").get<double>();
  c.min_separation = j.at("min_separation").get<double>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  const auto& t = j.at("traffic");
  c.traffic.demand_min = t.at("demand_min").get<int>();
  c.traffic.demand_max = t.at("demand_max").get<int>();
  c.traffic.period_choices = t.at("period_choices").get<std::vector<int>>();
  return c;
}

// ---- Topology file (v1) ----

inline json topology_to_json(const Topology& t) {
  json links = json::array();
  for (const auto& l : t.links) {
    links.push_back(json{{"id", l.id},
                         {"tx", {l.tx.x, l.tx.y}},
                         {"rx", {l.rx.x, l.rx.y}},
                         {"demand", l.demand},
                         {"period", l.period},
                         {"deadline", l.deadline},
                         {"arrival", l.arrival}});
  }
  json adjacency = json::array();
  for (std::uint8_t v : t.graph.adjacency()) adjacency.push_back(static_cast<int>(v));
  return json{{"version", kFormatVersion},
              {"config", config_to_json(t.config)},
              {"links", links},
              {"adjacency", adjacency}};
}

inline Topology topology_from_json(const json& j) {
  if (j.at("version").get<std::string>() != kFormatVersion) {
    throw std::runtime_error("topology: unsupported format version");
  }
  Topology t;
  t.config = config_from_json(j.at("config"));
  for (const auto& lj : j.at("links")) {
    LinkSpec l;
    l.id = lj.at("id").get<int>();
    l.tx = {lj.at("tx").at(0).get<double>(), lj.at("tx").at(1).get<double>()};
    l.rx = {lj.at("rx").at(0).get<double>(), lj.at("rx").at(1).get<double>()};
    l.demand = lj.at("demand").get<int>();
    l.period = lj.at("period").get<int>();
    l.deadline = lj.at("deadline").get<int>();
    l.arrival = lj.at("arrival").get<int>();
    t.links.push_back(l);
  }
  const int n = static_cast<int>(t.links.size());
  const auto& adj = j.at("adjacency");
  if (static_cast<int>(adj.size()) != n * n) {
    throw std::runtime_error("topology: adjacency size mismatch");
  }
  t.graph = ConflictGraph(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (adj.at(static_cast<std::size_t>(i) * n + k).get<int>() != 0) t.graph.add_edge(i, k);
    }
  }
  t.channel_gain = channel_qualities(t.config, t.config.rng_seed, n);
  return t;
}

inline void save_topology(const Topology& t, const std::string& path) {
  write_text_file(path, topology_to_json(t).dump(2) + "\n");
}

inline Topology load_topology(const std::string& path) {
  try {
    return topology_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw std::runtime_error("topology file " + path + ": " + e.what());
  }
}

// ---- Parameter checkpoint (v1) ----
// JSON round-trips IEEE doubles exactly (shortest-representation printing),
// so load-after-save is bit-exact.

inline json checkpoint_to_json(const GcnParams& p, std::uint64_t rng_seed, long step) {
  return json{{"version", kFormatVersion},
              {"dims", {{"in", p.dims.in}, {"hidden", p.dims.hidden}, {"out", p.dims.out}}},
              {"w1", p.w1.data()},
              {"w2", p.w2.data()},
              {"w_out", p.w_out.data()},
              {"b_out", p.b_out},
              {"rng_seed", rng_seed},
              {"step", step}};
}

struct Checkpoint {
  GcnParams params;
  std::uint64_t rng_seed = 0;
  long step = 0;
};

inline Checkpoint checkpoint_from_json(const json& j) {
  if (j.at("version").get<std::string>() != kFormatVersion) {
    throw std::runtime_error("checkpoint: unsupported format version");
  }
  Checkpoint c;
  GcnDims dims;
  dims.in = j.at("dims").at("in").get<int>();
  dims.hidden = j.at("dims").at("hidden").get<int>();
  dims.out = j.at("dims").at("out").get<int>();
  c.params = GcnParams::zeros(dims);
  const auto w1 = j.at("w1").get<std::vector<double>>();
  const auto w2 = j.at("w2").get<std::vector<double>>();
  const auto w_out = j.at("w_out").get<std::vector<double>>();
  const auto b_out = j.at("b_out").get<std::vector<double>>();
  if (w1.size() != c.params.w1.size() || w2.size() != c.params.w2.size() ||
      w_out.size() != c.params.w_out.size() || b_out.size() != c.params.b_out.size()) {
    throw std::runtime_error("checkpoint: tensor size mismatch");
  }
  c.params.w1.data() = w1;
  c.params.w2.data() = w2;
  c.params.w_out.data() = w_out;
  c.params.b_out = b_out;
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  c.step = j.at("step").get<long>();
  return c;
}

inline void save_checkpoint(const GcnParams& p, std::uint64_t rng_seed, long step,
                            const std::string& path) {
  write_text_file(path, checkpoint_to_json(p, rng_seed, step).dump() + "\n");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  try {
    return checkpoint_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint file " + path + ": " + e.what());
  }
}

// ---- Dataset (JSON lines) ----
// First line is a header referencing the topology by path and content hash;
// each following line is one snapshot.

inline std::string dataset_header(const std::string& topology_path, int n_links, int n_channels,
                                  int n_snapshots, std::uint64_t seed) {
  return json{{"version", kFormatVersion},
              {"topology", topology_path},
              {"topology_hash", file_hash(topology_path)},
              {"n_links", n_links},
              {"n_channels", n_channels},
              {"snapshots", n_snapshots},
              {"seed", seed}}
      .dump();
}

inline std::string snapshot_line(const SnapshotRecord& rec) {
  json features = json::array();
  for (int i = 0; i < rec.features.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < rec.features.cols(); ++k) row.push_back(rec.features(i, k));
    features.push_back(std::move(row));
  }
  json flags = json::array();
  for (std::uint8_t f : rec.miss_flags) flags.push_back(f != 0);
  return json{{"slot", rec.slot}, {"features", features}, {"miss_flags", flags}}.dump();
}

inline void save_dataset(const std::vector<SnapshotRecord>& records,
                         const std::string& topology_path, std::uint64_t seed, int n_links,
                         int n_channels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << dataset_header(topology_path, n_links, n_channels,
                        static_cast<int>(records.size()), seed)
      << '\n';
  for (const auto& rec : records) out << snapshot_line(rec) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---- Assignment trace (JSON lines, optional debugging output) ----

inline std::string trace_line(int slot, const std::vector<std::vector<int>>& rb_links) {
  json rbs = json::array();
  for (const auto& links : rb_links) rbs.push_back(links);
  return json{{"slot", slot}, {"rb", rbs}}.dump();
}

// ---- Run manifest ----
// Every output file gets a sibling manifest recording exactly how it was made.

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, content hash
  std::vector<std::string> outputs;
  double duration_s = 0.0;
};

inline json manifest_to_json(const RunManifest& m) {
  json inputs = json::array();
  for (const auto& [path, hash] : m.inputs) {
    inputs.push_back(json{{"path", path}, {"hash", hash}});
  }
  return json{{"version", kFormatVersion}, {"code_version", kVersion},
              {"subcommand", m.subcommand}, {"argv", m.argv},
              {"seed", m.seed},             {"inputs", inputs},
              {"outputs", m.outputs},       {"duration_s", m.duration_s}};
}

inline void save_manifest(const RunManifest& m, const std::string& out_path) {
  write_text_file(out_path + ".manifest.json", manifest_to_json(m).dump(2) + "\n");
}

}  // namespace urllc
