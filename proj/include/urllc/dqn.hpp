#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "urllc/gcn.hpp"
#include "urllc/matrix.hpp"
#include "urllc/rng.hpp"

namespace urllc {

enum class Action : int {
  kActive = 0,
  kInactive = 1,
};

// One (link, RB) scheduling decision. Snapshots are shared between the many
// decisions taken in the same slot.
struct Experience {
  std::shared_ptr<const Matd> state;
  int link = 0;
  int rb = 0;
  double priority = 0.0;
  Action action = Action::kInactive;
  double reward = 0.0;
  std::shared_ptr<const Matd> next_state;
  int next_link = 0;
  int next_rb = 0;
  bool terminal = false;
};

// Cyclic FIFO storage.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool ready(std::size_t batch) const { return items_.size() >= batch; }

  void push(Experience exp) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(exp));
    } else {
      items_[head_] = std::move(exp);
      head_ = (head_ + 1) % capacity_;
    }
  }

  // Uniform without replacement within one batch.
  std::vector<const Experience*> sample(std::size_t batch, Rng& rng) const {
    if (!ready(batch)) {
      throw std::runtime_error("ReplayBuffer: not ready, size below batch");
    }
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<const Experience*> out;
    out.reserve(batch);
    for (std::size_t k = 0; k < batch; ++k) {
      const std::size_t pick = k + rng.index(idx.size() - k);
      std::swap(idx[k], idx[pick]);
      out.push_back(&items_[idx[k]]);
    }
    return out;
  }

  const Experience& at(std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next eviction slot once full
  std::vector<Experience> items_;
};

struct AgentConfig {
  double gamma = 0.99;
  int batch = 32;
  double eps_start = 1.0;
  double eps_floor = 0.05;
  double eps_decay = 0.995;  // multiplicative, per episode
  int sync_interval = 100;   // hard target copy every K train steps
  std::size_t buffer_capacity = 10000;
  int hidden = 128;
  AdamConfig adam;

  void validate() const {
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("agent: gamma must be in [0,1)");
    if (batch < 1) throw std::invalid_argument("agent: batch must be >= 1");
    if (eps_start < 0.0 || eps_start > 1.0 || eps_floor < 0.0 || eps_floor > 1.0) {
      throw std::invalid_argument("agent: epsilon must be in [0,1]");
    }
    if (sync_interval < 1) throw std::invalid_argument("agent: sync_interval must be >= 1");
  }
};

// Epsilon-greedy over the two heads; ties break toward ACTIVE.
inline Action select_action(double q_active, double q_inactive, double eps, Rng& rng) {
  if (eps > 0.0 && rng.uniform() < eps) {
    return rng.bernoulli(0.5) ? Action::kActive : Action::kInactive;
  }
  return q_active >= q_inactive ? Action::kActive : Action::kInactive;
}

// Memoizes target-network outputs per snapshot. Entries hold the snapshot
// alive so a recycled allocation can never alias a stale key; the cache is
// cleared whenever the target network changes.
class TargetQCache {
 public:
  const Matd& q_for(const std::shared_ptr<const Matd>& state, const NormalizedAdjacency& adj,
                    const GcnParams& target) {
    auto it = map_.find(state.get());
    if (it != map_.end()) return it->second.q;
    auto fwd = forward(*state, adj, target);
    auto [pos, inserted] = map_.emplace(state.get(), Entry{state, std::move(fwd.q)});
    return pos->second.q;
  }

  void invalidate() { map_.clear(); }
  std::size_t size() const { return map_.size(); }

 private:
  struct Entry {
    std::shared_ptr<const Matd> keepalive;
    Matd q;
  };
  std::unordered_map<const Matd*, Entry> map_;
};

// y = r for terminal transitions, else r + gamma * max_a' Q_target(s', a').
inline double bellman_target(const Experience& exp, const NormalizedAdjacency& adj,
                             const GcnParams& target, double gamma,
                             TargetQCache* cache = nullptr) {
  if (exp.terminal) return exp.reward;
  const Matd* q = nullptr;
  Matd local;
  if (cache != nullptr) {
    q = &cache->q_for(exp.next_state, adj, target);
  } else {
    local = forward(*exp.next_state, adj, target).q;
    q = &local;
  }
  double best = (*q)(exp.next_link, 0);
  for (int k = 1; k < q->cols(); ++k) best = std::max(best, (*q)(exp.next_link, k));
  return exp.reward + gamma * best;
}

// One mini-batch update: MSE between Q(s,a) and the Bellman target, a single
// Adam step on the online net. Returns the pre-update loss, or nothing if the
// buffer cannot fill a batch yet. Target params are read-only here.
inline std::optional<double> train_step(const ReplayBuffer& buffer, GcnParams& params,
                                        const GcnParams& target, AdamState& adam,
                                        const NormalizedAdjacency& adj, const AgentConfig& cfg,
                                        Rng& rng, TargetQCache* cache = nullptr) {
  if (!buffer.ready(static_cast<std::size_t>(cfg.batch))) return std::nullopt;

  const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch), rng);

  // Group experiences sharing a snapshot so each distinct state is forwarded
  // (and backpropagated) once. First-appearance order keeps the accumulation
  // deterministic.
  std::vector<std::pair<const Matd*, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Matd* key = batch[i]->state.get();
    auto it = std::find_if(groups.begin(), groups.end(),
                           [key](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {i}});
    } else {
      it->second.push_back(i);
    }
  }

  std::vector<double> targets(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    targets[i] = bellman_target(*batch[i], adj, target, cfg.gamma, cache);
  }

  GcnGradsT<double> total;
  total.w1 = Matd(params.w1.rows(), params.w1.cols());
  total.w2 = Matd(params.w2.rows(), params.w2.cols());
  total.w_out = Matd(params.w_out.rows(), params.w_out.cols());
  total.b_out.assign(params.b_out.size(), 0.0);

  double loss = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (const auto& [state, indices] : groups) {
    auto fwd = forward(*state, adj, params);
    Matd grad_q(fwd.q.rows(), fwd.q.cols());
    for (std::size_t i : indices) {
      const Experience& exp = *batch[i];
      const int a = static_cast<int>(exp.action);
      const double pred = fwd.q(exp.link, a);
      const double err = pred - targets[i];
      loss += err * err * inv_batch;
      grad_q(exp.link, a) += 2.0 * err * inv_batch;
    }
    auto grads = backward(fwd.cache, adj, params, grad_q);
    for (std::size_t i = 0; i < total.w1.size(); ++i) total.w1.data()[i] += grads.w1.data()[i];
    for (std::size_t i = 0; i < total.w2.size(); ++i) total.w2.data()[i] += grads.w2.data()[i];
    for (std::size_t i = 0; i < total.w_out.size(); ++i) {
      total.w_out.data()[i] += grads.w_out.data()[i];
    }
    for (std::size_t i = 0; i < total.b_out.size(); ++i) total.b_out[i] += grads.b_out[i];
  }

  adam_step(params, total, adam);
  return loss;
}

// Hard copy every K steps; otherwise leaves the target untouched.
inline void sync_target(const GcnParams& params, GcnParams& target, long step, int interval,
                        TargetQCache* cache = nullptr) {
  if (interval < 1 || step % interval != 0) return;
  target = params;
  if (cache != nullptr) cache->invalidate();
}

}  // namespace urllc
