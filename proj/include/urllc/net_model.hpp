#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "urllc/matrix.hpp"
#include "urllc/phy.hpp"
#include "urllc/rng.hpp"

namespace urllc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct CellGrid {
  int rows = 3;
  int cols = 3;
};

// Ranges for the periodic traffic attached to generated links. Deadlines are
// drawn uniformly in [max(2, period/2), period]; first arrivals in [0, period).
struct TrafficGenConfig {
  int demand_min = 1;
  int demand_max = 4;
  std::vector<int> period_choices = {5, 10, 20};
};

struct NetworkConfig {
  double region_w = 120.0;
  double region_h = 120.0;
  int n_nodes = 0;  // 0: derived as round(1.1 * n_links)
  int n_links = 20;
  CellGrid cell_grid;
  int n_channels = 7;               // C, resource blocks per slot
  double rb_capacity = 1.0;         // B_c, demand-units one RB carries per slot
  double path_loss_exp = 3.0;       // alpha
  double tx_power_w = 1.0;
  double bandwidth_hz = 2.0e7;
  double sinr_threshold_db = 15.0;  // gamma_th
  double interference_margin_db = 10.0;  // conflict edge: interference >= noise + margin
  double max_link_distance = 0.0;        // 0: one cell diagonal
  double min_separation = 0.5;           // meters between any two nodes
  std::uint64_t rng_seed = 1;
  TrafficGenConfig traffic;

  int resolved_nodes() const {
    if (n_nodes > 0) return n_nodes;
    return std::max(2, static_cast<int>(std::lround(1.1 * n_links)));
  }

  double cell_diagonal() const {
    const double cw = region_w / cell_grid.cols;
    const double ch = region_h / cell_grid.rows;
    return std::hypot(cw, ch);
  }

  double resolved_max_link_distance() const {
    return max_link_distance > 0.0 ? max_link_distance : cell_diagonal();
  }

  void validate() const {
    if (region_w <= 0.0 || region_h <= 0.0) {
      throw std::invalid_argument("config: region dimensions must be positive");
    }
    if (n_links < 1) throw std::invalid_argument("config: n_links must be >= 1");
    if (n_channels < 1) throw std::invalid_argument("config: n_channels must be >= 1");
    if (path_loss_exp < 2.0) throw std::invalid_argument("config: path_loss_exp must be >= 2");
    if (tx_power_w <= 0.0) throw std::invalid_argument("config: tx_power must be positive");
    if (bandwidth_hz <= 0.0) throw std::invalid_argument("config: bandwidth must be positive");
    if (rb_capacity <= 0.0) throw std::invalid_argument("config: rb_capacity must be positive");
    if (min_separation <= 0.0) throw std::invalid_argument("config: min_separation must be positive");
    if (cell_grid.rows < 1 || cell_grid.cols < 1) {
      throw std::invalid_argument("config: cell grid must be at least 1x1");
    }
    if (traffic.demand_min < 0 || traffic.demand_max < traffic.demand_min) {
      throw std::invalid_argument("config: bad demand range");
    }
    if (traffic.period_choices.empty()) {
      throw std::invalid_argument("config: period_choices must not be empty");
    }
    for (int t : traffic.period_choices) {
      if (t < 1) throw std::invalid_argument("config: periods must be >= 1 slot");
    }
    // Coarse feasibility check before placement even starts; the rejection
    // sampler below gives the precise verdict.
    const double area_needed = resolved_nodes() * min_separation * min_separation;
    if (region_w * region_h < area_needed) {
      throw std::invalid_argument("config: region too small for node count at min separation");
    }
  }
};

// One transmitter-receiver pair with its periodic traffic contract.
struct LinkSpec {
  int id = 0;
  Vec2 tx;
  Vec2 rx;
  int demand = 1;    // X_i, demand-units per job
  int period = 10;   // T_i, slots between releases
  int deadline = 10; // D_i, slots, 0 < D_i <= T_i
  int arrival = 0;   // A_i1, slot of the first release

  double length() const { return distance(tx, rx); }
  Vec2 midpoint() const { return {(tx.x + rx.x) / 2.0, (tx.y + rx.y) / 2.0}; }
};

// Symmetric binary interference relation over links, zero diagonal.
class ConflictGraph {
 public:
  ConflictGraph() = default;
  explicit ConflictGraph(int n) : n_(n), adj_(static_cast<std::size_t>(n) * n, 0) {}

  int size() const { return n_; }

  bool edge(int i, int j) const { return adj_[static_cast<std::size_t>(i) * n_ + j] != 0; }

  void add_edge(int i, int j) {
    if (i == j) return;
    adj_[static_cast<std::size_t>(i) * n_ + j] = 1;
    adj_[static_cast<std::size_t>(j) * n_ + i] = 1;
  }

  int degree(int i) const {
    int d = 0;
    const std::uint8_t* row = &adj_[static_cast<std::size_t>(i) * n_];
    for (int j = 0; j < n_; ++j) d += row[j];
    return d;
  }

  long n_edges() const {
    long total = 0;
    for (std::uint8_t v : adj_) total += v;
    return total / 2;
  }

  const std::uint8_t* row(int i) const { return &adj_[static_cast<std::size_t>(i) * n_]; }
  const std::vector<std::uint8_t>& adjacency() const { return adj_; }

 private:
  int n_ = 0;
  std::vector<std::uint8_t> adj_;
};

inline int cell_index(const Vec2& p, const NetworkConfig& cfg) {
  const double cw = cfg.region_w / cfg.cell_grid.cols;
  const double ch = cfg.region_h / cfg.cell_grid.rows;
  int cx = std::min(cfg.cell_grid.cols - 1, static_cast<int>(p.x / cw));
  int cy = std::min(cfg.cell_grid.rows - 1, static_cast<int>(p.y / ch));
  return cy * cfg.cell_grid.cols + cx;
}

namespace detail {

inline bool respects_separation(const Vec2& p, const std::vector<Vec2>& nodes, double min_sep) {
  for (const Vec2& q : nodes) {
    if (distance(p, q) < min_sep) return false;
  }
  return true;
}

inline std::vector<Vec2> place_nodes(const NetworkConfig& cfg, int count, Rng& rng) {
  std::vector<Vec2> nodes;
  nodes.reserve(count);
  const int max_attempts = 4000 * count + 4000;
  int attempts = 0;
  while (static_cast<int>(nodes.size()) < count) {
    if (++attempts > max_attempts) {
      throw std::invalid_argument("generate_topology: region too small to place " +
                                  std::to_string(count) + " nodes at min separation");
    }
    Vec2 p{rng.uniform(0.0, cfg.region_w), rng.uniform(0.0, cfg.region_h)};
    if (respects_separation(p, nodes, cfg.min_separation)) nodes.push_back(p);
  }
  return nodes;
}

// Fresh receiver position inside the ring [min_sep, max_dist] around tx,
// clipped to the region and respecting separation from existing nodes.
inline Vec2 sample_partner(const NetworkConfig& cfg, const Vec2& tx,
                           const std::vector<Vec2>& nodes, double max_dist, Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double radius = rng.uniform(cfg.min_separation, max_dist);
    Vec2 p{tx.x + radius * std::cos(angle), tx.y + radius * std::sin(angle)};
    if (p.x < 0.0 || p.x > cfg.region_w || p.y < 0.0 || p.y > cfg.region_h) continue;
    if (!respects_separation(p, nodes, cfg.min_separation)) continue;
    return p;
  }
  throw std::runtime_error("generate_topology: could not place a receiver node");
}

}  // namespace detail

// Drops nodes uniformly in the region and pairs each link's transmitter with
// the nearest node in the same cell (falling back to the nearest node overall,
// then to a freshly placed partner) so that every link span stays within the
// configured maximum. Nodes keep a single role: a transmitter is never some
// other link's receiver, which rules out zero-distance interference pairs.
// Pure function of (config, seed).
inline std::vector<LinkSpec> generate_topology(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, 0x70b0));

  std::vector<Vec2> nodes = detail::place_nodes(config, config.resolved_nodes(), rng);
  const double max_dist = config.resolved_max_link_distance();

  std::vector<int> order(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) order[i] = static_cast<int>(i);
  rng.shuffle(order);

  enum class Role : std::uint8_t { kFree, kTx, kRx };
  std::vector<Role> role(nodes.size(), Role::kFree);

  std::vector<LinkSpec> links;
  links.reserve(config.n_links);
  std::size_t cursor = 0;
  for (int li = 0; li < config.n_links; ++li) {
    // Round-robin over the shuffled nodes, skipping ones already receiving.
    // A previous transmitter always remains eligible, so this terminates.
    int tx_node = order[cursor % order.size()];
    for (std::size_t tries = 0; role[tx_node] == Role::kRx && tries < order.size(); ++tries) {
      ++cursor;
      tx_node = order[cursor % order.size()];
    }
    ++cursor;
    role[tx_node] = Role::kTx;
    const Vec2 tx = nodes[tx_node];
    const int tx_cell = cell_index(tx, config);

    int best = -1;
    double best_d = std::numeric_limits<double>::max();
    bool best_in_cell = false;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (static_cast<int>(j) == tx_node || role[j] == Role::kTx) continue;
      const double d = distance(tx, nodes[j]);
      if (d < config.min_separation || d > max_dist) continue;
      const bool in_cell = cell_index(nodes[j], config) == tx_cell;
      // Same-cell candidates beat cross-cell ones; distance breaks ties.
      if ((in_cell && !best_in_cell) || (in_cell == best_in_cell && d < best_d)) {
        best = static_cast<int>(j);
        best_d = d;
        best_in_cell = in_cell;
      }
    }

    Vec2 rx;
    if (best >= 0) {
      rx = nodes[best];
      role[best] = Role::kRx;
    } else {
      rx = detail::sample_partner(config, tx, nodes, max_dist, rng);
      nodes.push_back(rx);
      role.push_back(Role::kRx);
    }

    LinkSpec link;
    link.id = li;
    link.tx = tx;
    link.rx = rx;
    link.demand = rng.uniform_int(config.traffic.demand_min, config.traffic.demand_max);
    const auto& periods = config.traffic.period_choices;
    link.period = periods[rng.index(periods.size())];
    link.deadline = rng.uniform_int(std::max(2, link.period / 2), link.period);
    link.deadline = std::min(link.deadline, link.period);
    link.arrival = rng.uniform_int(0, link.period - 1);
    links.push_back(link);
  }
  return links;
}

// Per-(link, channel) quality gains in [0.5, 1.0], drawn once per topology.
// Feature inputs only; the path-loss physics does not consume them.
inline Matd channel_qualities(const NetworkConfig& config, std::uint64_t seed, int n_links) {
  Rng rng(derive_seed(seed, 0xc4a7));
  Matd gain(n_links, config.n_channels);
  for (int i = 0; i < n_links; ++i) {
    for (int c = 0; c < config.n_channels; ++c) gain(i, c) = rng.uniform(0.5, 1.0);
  }
  return gain;
}

// Edge (i, j) iff the interference one link's transmitter would inject at the
// other's receiver clears the thermal noise floor by the configured margin,
// in either direction. Same path-loss law as the SINR model.
inline ConflictGraph build_conflict_graph(const std::vector<LinkSpec>& links,
                                          const NetworkConfig& config) {
  if (links.empty()) {
    throw std::invalid_argument("build_conflict_graph: need at least one link");
  }
  PhyConstants consts;
  consts.bandwidth_hz = config.bandwidth_hz;
  const double threshold = noise_power(consts) * from_db(config.interference_margin_db);

  const int n = static_cast<int>(links.size());
  ConflictGraph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d_ji = distance(links[j].tx, links[i].rx);
      const double d_ij = distance(links[i].tx, links[j].rx);
      const double p_ji = received_power(d_ji, config.path_loss_exp, config.tx_power_w);
      const double p_ij = received_power(d_ij, config.path_loss_exp, config.tx_power_w);
      if (p_ji >= threshold || p_ij >= threshold) g.add_edge(i, j);
    }
  }
  return g;
}

// Everything downstream needs: geometry, conflict structure, channel gains.
struct Topology {
  NetworkConfig config;
  std::vector<LinkSpec> links;
  ConflictGraph graph;
  Matd channel_gain;
};

inline Topology make_topology(NetworkConfig config, std::uint64_t seed) {
  config.rng_seed = seed;
  Topology t;
  t.config = config;
  t.links = generate_topology(config, seed);
  t.graph = build_conflict_graph(t.links, config);
  t.channel_gain = channel_qualities(config, seed, static_cast<int>(t.links.size()));
  return t;
}

inline Topology make_topology(const NetworkConfig& config) {
  return make_topology(config, config.rng_seed);
}

}  // namespace urllc
