#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "urllc/assignment.hpp"
#include "urllc/dqn.hpp"
#include "urllc/gcn.hpp"
#include "urllc/net_model.hpp"
#include "urllc/sinr.hpp"
#include "urllc/traffic.hpp"

namespace urllc {

struct RewardConfig {
  double signal_penalty = -1.0;  // ACTIVE transmission below the SINR threshold
  double miss_penalty = -5.0;    // per missed deadline, split across the link's decisions
};

struct SlotDecision {
  int link = 0;
  int rb = 0;
  Action chosen = Action::kInactive;
  bool admitted = false;  // ACTIVE choices lose to the conflict gate when they collide
};

enum class ScheduleMode { kTrain, kEval };

// Priority score per link from a forward pass; every link reads the same
// shared vector.
inline std::vector<double> compute_priorities(const Matd& features, const NormalizedAdjacency& adj,
                                              const GcnParams& params) {
  return priorities_from_q(forward(features, adj, params).q);
}

// Descending order, ties by index.
inline std::vector<int> order_by_score_desc(const std::vector<double>& score) {
  std::vector<int> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] > score[b]; });
  return order;
}

struct DqnSlotResult {
  SlotAssignment assignment;
  std::vector<double> served;       // demand-units per link this slot
  std::vector<double> priorities;
  Matd q;                           // n x 2 action values
  std::vector<SlotDecision> decisions;  // train mode only
};

// One pass of the per-RB DQN scheduling step. For each RB, links are visited
// in descending priority; an ACTIVE choice is admitted only if no conflicting
// link already holds that RB, which keeps every assignment feasible no matter
// what the agent chooses. Each admitted (link, RB) pair serves up to B_c
// demand-units, capped by the link's remaining demand.
inline DqnSlotResult schedule_slot_dqn(const Matd& features, const NormalizedAdjacency& adj,
                                       const GcnParams& params, const TrafficState& state,
                                       const ConflictGraph& graph,
                                       const std::vector<LinkSpec>& links, int n_rbs,
                                       double rb_capacity, double eps, Rng& rng,
                                       ScheduleMode mode) {
  const int n = static_cast<int>(links.size());
  DqnSlotResult res;
  auto fwd = forward(features, adj, params);
  res.q = std::move(fwd.q);
  res.priorities = priorities_from_q(res.q);
  res.assignment = SlotAssignment(n, n_rbs);
  res.served.assign(n, 0.0);

  std::vector<double> pending(n, 0.0);
  for (int i = 0; i < n; ++i) {
    pending[i] = state.job(i).active ? state.job(i).remaining_demand : 0.0;
  }
  const std::vector<int> order = order_by_score_desc(res.priorities);

  for (int rb = 0; rb < n_rbs; ++rb) {
    const auto& occupants = res.assignment.rb_links[rb];
    for (int link : order) {
      if (pending[link] <= 0.0) continue;
      const Action a = select_action(res.q(link, 0), res.q(link, 1), eps, rng);
      bool admitted = false;
      if (a == Action::kActive) {
        admitted = true;
        for (int other : occupants) {
          if (graph.edge(link, other)) {
            admitted = false;
            break;
          }
        }
        if (admitted) {
          res.assignment.assign(link, rb);
          const double units = std::min(rb_capacity, pending[link]);
          pending[link] -= units;
          res.served[link] += units;
        }
      }
      if (mode == ScheduleMode::kTrain) {
        res.decisions.push_back({link, rb, a, admitted});
      }
    }
  }
  return res;
}

namespace detail {

// Shared first-fit allocation: walk links in the given order, give each one
// the lowest-indexed RBs that have no conflicting occupant and enough spare
// capacity, until its demand for the slot is covered or RBs run out.
inline SlotAssignment first_fit_allocate(const std::vector<int>& order,
                                         const std::vector<double>& demands,
                                         const ConflictGraph& graph, int n_rbs,
                                         double rb_capacity) {
  const int n = graph.size();
  SlotAssignment asg(n, n_rbs);
  std::vector<double> capacity_left(n_rbs, rb_capacity);
  for (int link : order) {
    double remaining = demands[link];
    for (int rb = 0; rb < n_rbs && remaining > 0.0; ++rb) {
      const double share = std::min(remaining, rb_capacity);
      if (capacity_left[rb] < share) continue;
      bool conflict = false;
      for (int other : asg.rb_links[rb]) {
        if (graph.edge(link, other)) {
          conflict = true;
          break;
        }
      }
      if (conflict) continue;
      asg.assign(link, rb);
      capacity_left[rb] -= share;
      remaining -= share;
    }
  }
  return asg;
}

}  // namespace detail

// Greedy Q-ranked allocator: highest predicted value first, first-fit RBs.
inline SlotAssignment greedy_rb_allocation(const std::vector<double>& q,
                                           const std::vector<double>& demands,
                                           const ConflictGraph& graph, int n_rbs,
                                           double rb_capacity) {
  return detail::first_fit_allocate(order_by_score_desc(q), demands, graph, n_rbs, rb_capacity);
}

// EDF-surrogate static-priority baseline: earliest remaining deadline first,
// larger remaining demand breaking ties, then link index. Shares the
// first-fit conflict-respecting allocation with the greedy path.
inline SlotAssignment baseline_static_priority(const TrafficState& state,
                                               const ConflictGraph& graph,
                                               const std::vector<LinkSpec>& links, int n_rbs,
                                               double rb_capacity) {
  const int n = static_cast<int>(links.size());
  std::vector<int> order;
  order.reserve(n);
  std::vector<double> demands(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (state.job(i).active && state.job(i).remaining_demand > 0.0) {
      order.push_back(i);
      demands[i] = state.job(i).remaining_demand;
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ja = state.job(a);
    const auto& jb = state.job(b);
    if (ja.remaining_deadline != jb.remaining_deadline) {
      return ja.remaining_deadline < jb.remaining_deadline;
    }
    return ja.remaining_demand > jb.remaining_demand;
  });
  return detail::first_fit_allocate(order, demands, graph, n_rbs, rb_capacity);
}

// Demand actually served by an allocation: one RB carries up to B_c units.
inline std::vector<double> served_units(const SlotAssignment& asg,
                                        const std::vector<double>& demands, double rb_capacity) {
  std::vector<double> served(asg.n_links, 0.0);
  for (int i = 0; i < asg.n_links; ++i) {
    served[i] = std::min(demands[i], rb_capacity * asg.rbs_assigned(i));
  }
  return served;
}

// Reward per decision. Admitted ACTIVE transmissions earn log2(1 + SINR) when
// they clear the threshold and the signal penalty when they do not; everything
// else starts at zero. A deadline miss spreads the miss penalty across the
// link's decisions this slot.
inline std::vector<double> compute_reward(const std::vector<SlotDecision>& decisions,
                                          const SlotAssignment& assignment,
                                          const ConflictGraph& graph,
                                          const std::vector<LinkSpec>& links, double alpha,
                                          double p_tx_w, const PhyConstants& consts,
                                          const std::vector<std::uint8_t>& miss_flags,
                                          double threshold_db, const RewardConfig& cfg = {}) {
  std::vector<double> rewards(decisions.size(), 0.0);
  std::vector<int> decisions_per_link(links.size(), 0);
  for (const auto& d : decisions) ++decisions_per_link[d.link];

  for (std::size_t k = 0; k < decisions.size(); ++k) {
    const auto& d = decisions[k];
    if (d.chosen == Action::kActive && d.admitted) {
      const SinrSample s = sinr(d.link, d.rb, assignment, graph, links, alpha, p_tx_w, consts);
      rewards[k] = s.db >= threshold_db ? std::log2(1.0 + s.linear) : cfg.signal_penalty;
    }
    if (miss_flags[d.link]) {
      rewards[k] += cfg.miss_penalty / static_cast<double>(decisions_per_link[d.link]);
    }
  }
  return rewards;
}

// MWIS node weight: reward-consistent urgency, log2(1 + SINR) * X / d''.
inline double mwis_weight(double remaining_demand, int remaining_deadline,
                          double sinr_est_linear) {
  if (remaining_deadline <= 0) return 0.0;
  return std::log2(1.0 + sinr_est_linear) * remaining_demand /
         static_cast<double>(remaining_deadline);
}

struct TrainConfig {
  int episodes = 200;
  int slot_cap = 64;  // episode length is min(hyperperiod, slot_cap)
  std::uint64_t seed = 0;
};

struct TrainLogRow {
  long step = 0;
  double epsilon = 0.0;
  double loss = 0.0;
  double mean_q = 0.0;
  int episode = 0;
  long deadline_misses = 0;
};

struct TrainResult {
  GcnParams params;
  std::vector<TrainLogRow> log;
  double final_epsilon = 0.0;
  double final_loss = 0.0;
  long train_steps = 0;
  long total_misses = 0;
  std::vector<double> episode_reward;
};

// Interference-free SNR per link in dB; feature input and greedy weight.
inline std::vector<double> baseline_snr_db(const std::vector<LinkSpec>& links,
                                           const NetworkConfig& config) {
  PhyConstants consts;
  consts.bandwidth_hz = config.bandwidth_hz;
  const double noise = noise_power(consts);
  std::vector<double> snr(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    snr[i] = to_db(received_power(links[i].length(), config.path_loss_exp, config.tx_power_w) /
                   noise);
  }
  return snr;
}

// The full training loop: features -> priorities -> per-RB DQN decisions ->
// environment update -> replay push -> one mini-batch update -> target sync.
// Everything stochastic flows from the single seeded RNG, so a fixed seed
// reproduces the trajectory bit for bit.
inline TrainResult run_training(const Topology& topo, const AgentConfig& agent,
                                const TrainConfig& train) {
  agent.validate();
  const auto& links = topo.links;
  const auto& config = topo.config;
  const int n = static_cast<int>(links.size());

  Rng rng(derive_seed(train.seed, 0x7a11));
  const NormalizedAdjacency adj = normalize_adjacency(topo.graph);
  const GcnDims dims{7 + config.n_channels, agent.hidden, 2};
  GcnParams params = GcnParams::init(dims, rng);
  GcnParams target = params;
  AdamState adam = AdamState::init(params, agent.adam);
  ReplayBuffer buffer(agent.buffer_capacity);
  TargetQCache cache;

  PhyConstants consts;
  consts.bandwidth_hz = config.bandwidth_hz;
  const std::vector<double> snr_db = baseline_snr_db(links, config);

  TrainResult result;
  result.params = params;
  double eps = agent.eps_start;
  long steps = 0;
  double last_loss = 0.0;
  long total_misses = 0;

  const int episode_len = std::min(hyperperiod(links, train.slot_cap), train.slot_cap);

  for (int episode = 0; episode < train.episodes; ++episode) {
    TrafficState state(links);
    double episode_reward = 0.0;
    auto features = std::make_shared<const Matd>(
        build_features(state, links, config, topo.channel_gain, snr_db));

    for (int slot = 0; slot < episode_len; ++slot) {
      auto slot_res = schedule_slot_dqn(*features, adj, params, state, topo.graph, links,
                                        config.n_channels, config.rb_capacity, eps, rng,
                                        ScheduleMode::kTrain);
      const AdvanceResult advanced = state.advance(links, slot_res.served);
      const std::vector<double> rewards = compute_reward(
          slot_res.decisions, slot_res.assignment, topo.graph, links, config.path_loss_exp,
          config.tx_power_w, consts, advanced.miss_flags, config.sinr_threshold_db);
      for (std::size_t i = 0; i < advanced.miss_flags.size(); ++i) {
        total_misses += advanced.miss_flags[i] ? 1 : 0;
      }

      const bool last_slot = slot + 1 == episode_len;
      auto next_features = std::make_shared<const Matd>(
          build_features(state, links, config, topo.channel_gain, snr_db));
      for (std::size_t k = 0; k < slot_res.decisions.size(); ++k) {
        const auto& d = slot_res.decisions[k];
        Experience exp;
        exp.state = features;
        exp.link = d.link;
        exp.rb = d.rb;
        exp.priority = slot_res.priorities[d.link];
        exp.action = d.chosen;
        exp.reward = rewards[k];
        exp.next_state = next_features;
        exp.next_link = d.link;
        exp.next_rb = d.rb;
        exp.terminal = last_slot;
        buffer.push(std::move(exp));
        episode_reward += rewards[k];
      }

      const auto loss = train_step(buffer, params, target, adam, adj, agent, rng, &cache);
      if (loss.has_value()) {
        ++steps;
        last_loss = *loss;
        sync_target(params, target, steps, agent.sync_interval, &cache);
      }

      double q_sum = 0.0;
      for (int i = 0; i < n; ++i) q_sum += std::max(slot_res.q(i, 0), slot_res.q(i, 1));
      result.log.push_back({steps, eps, last_loss, q_sum / n, episode, total_misses});
      features = std::move(next_features);
    }

    result.episode_reward.push_back(episode_reward);
    eps = std::max(agent.eps_floor, eps * agent.eps_decay);
  }

  result.params = std::move(params);
  result.final_epsilon = eps;
  result.final_loss = last_loss;
  result.train_steps = steps;
  result.total_misses = total_misses;
  return result;
}

// Simulates traffic under the baseline scheduler, recording features and miss
// flags each slot.
inline std::vector<SnapshotRecord> generate_dataset(const Topology& topo, int n_snapshots,
                                                    std::uint64_t /*seed*/) {
  if (n_snapshots < 1) throw std::invalid_argument("generate_dataset: need >= 1 snapshot");
  const auto& links = topo.links;
  const auto& config = topo.config;
  const std::vector<double> snr_db = baseline_snr_db(links, config);

  std::vector<SnapshotRecord> records;
  records.reserve(n_snapshots);
  TrafficState state(links);
  for (int slot = 0; slot < n_snapshots; ++slot) {
    SnapshotRecord rec;
    rec.slot = slot;
    rec.features = build_features(state, links, config, topo.channel_gain, snr_db);

    SlotAssignment asg =
        baseline_static_priority(state, topo.graph, links, config.n_channels, config.rb_capacity);
    std::vector<double> demands(links.size(), 0.0);
    for (std::size_t i = 0; i < links.size(); ++i) {
      demands[i] = state.job(i).active ? state.job(i).remaining_demand : 0.0;
    }
    const auto served = served_units(asg, demands, config.rb_capacity);
    rec.miss_flags = state.advance(links, served).miss_flags;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace urllc
