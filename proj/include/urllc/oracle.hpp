#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "urllc/assignment.hpp"
#include "urllc/net_model.hpp"
#include "urllc/phy.hpp"

namespace urllc {

// Brute-force references for test and acceptance use only. Everything here is
// deliberately independent of the scheduler/GCN implementation paths.

struct MwisResult {
  std::vector<int> best_set;
  double best_value = 0.0;
  long enumerated = 0;
};

// Exhaustive maximum weighted independent set; ties resolve to the
// lexicographically smallest vertex set.
inline MwisResult brute_force_mwis(const ConflictGraph& graph,
                                   const std::vector<double>& weights) {
  const int n = graph.size();
  if (n > 24) throw std::invalid_argument("brute_force_mwis: n > 24");
  if (static_cast<int>(weights.size()) != n) {
    throw std::invalid_argument("brute_force_mwis: weight size mismatch");
  }

  std::vector<std::uint32_t> neighbor_mask(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (graph.edge(i, j)) neighbor_mask[i] |= 1u << j;
    }
  }

  MwisResult result;
  std::vector<int> best_set;
  double best_value = 0.0;  // empty set is feasible with value 0
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    ++result.enumerated;
    bool independent = true;
    double value = 0.0;
    for (std::uint32_t bits = mask; bits != 0;) {
      const int i = std::countr_zero(bits);
      bits &= bits - 1;
      if (neighbor_mask[i] & mask) {
        independent = false;
        break;
      }
      value += weights[i];
    }
    if (!independent) continue;
    std::vector<int> set;
    if (value > best_value) {
      for (int i = 0; i < n; ++i) {
        if (mask & (1u << i)) set.push_back(i);
      }
      best_value = value;
      best_set = std::move(set);
    } else if (value == best_value) {
      for (int i = 0; i < n; ++i) {
        if (mask & (1u << i)) set.push_back(i);
      }
      if (std::lexicographical_compare(set.begin(), set.end(), best_set.begin(),
                                       best_set.end())) {
        best_set = std::move(set);
      }
    }
  }
  result.best_set = std::move(best_set);
  result.best_value = best_value;
  return result;
}

struct BestSlotResult {
  SlotAssignment assignment;
  double value = 0.0;
  long enumerated = 0;
};

namespace detail {

// Ground-truth slot objective. Unlike the conflict-graph-filtered model, the
// oracle charges interference from every co-channel transmitter, and an RB
// beyond what the link's demand can use contributes nothing.
inline double slot_objective(const SlotAssignment& asg, const std::vector<LinkSpec>& links,
                             const std::vector<double>& demands, double rb_capacity,
                             double alpha, double p_tx_w, double noise_w) {
  double total = 0.0;
  for (int i = 0; i < asg.n_links; ++i) {
    const auto& rbs = asg.link_rbs[i];
    if (rbs.empty()) continue;
    std::vector<double> terms;
    terms.reserve(rbs.size());
    for (int rb : rbs) {
      double interference = 0.0;
      for (int j : asg.rb_links[rb]) {
        if (j == i) continue;
        interference += received_power(distance(links[j].tx, links[i].rx), alpha, p_tx_w);
      }
      const double signal = received_power(links[i].length(), alpha, p_tx_w);
      terms.push_back(std::log2(1.0 + signal / (interference + noise_w)));
    }
    std::sort(terms.begin(), terms.end(), std::greater<>());
    const int useful = std::min<int>(
        static_cast<int>(terms.size()),
        static_cast<int>(std::ceil(demands[i] / rb_capacity - 1e-12)));
    for (int k = 0; k < useful; ++k) total += terms[k];
  }
  return total;
}

inline void enumerate_independent_sets(const ConflictGraph& graph,
                                       std::vector<std::uint32_t>& sets) {
  const int n = graph.size();
  std::vector<std::uint32_t> neighbor_mask(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (graph.edge(i, j)) neighbor_mask[i] |= 1u << j;
    }
  }
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    bool independent = true;
    for (std::uint32_t bits = mask; bits != 0;) {
      const int i = std::countr_zero(bits);
      bits &= bits - 1;
      if (neighbor_mask[i] & mask) {
        independent = false;
        break;
      }
    }
    if (independent) sets.push_back(mask);
  }
}

}  // namespace detail

// Global optimum of the slot objective over all feasible assignments, by
// plain enumeration of one independent set per RB.
inline BestSlotResult exhaustive_best_slot(const std::vector<LinkSpec>& links,
                                           const ConflictGraph& graph, int n_rbs,
                                           const std::vector<double>& demands,
                                           double rb_capacity, double alpha, double p_tx_w,
                                           const PhyConstants& consts) {
  const int n = static_cast<int>(links.size());
  if (n > 10 || n_rbs > 3) {
    throw std::invalid_argument("exhaustive_best_slot: instance too large");
  }
  std::vector<std::uint32_t> sets;
  detail::enumerate_independent_sets(graph, sets);
  double space = 1.0;
  for (int rb = 0; rb < n_rbs; ++rb) space *= static_cast<double>(sets.size());
  if (space > 1e7) throw std::invalid_argument("exhaustive_best_slot: search space too large");

  const double noise_w = noise_power(consts);
  BestSlotResult best;
  best.assignment = SlotAssignment(n, n_rbs);
  best.value = detail::slot_objective(best.assignment, links, demands, rb_capacity, alpha,
                                      p_tx_w, noise_w);

  std::vector<std::size_t> pick(n_rbs, 0);
  while (true) {
    ++best.enumerated;
    SlotAssignment asg(n, n_rbs);
    for (int rb = 0; rb < n_rbs; ++rb) {
      for (std::uint32_t bits = sets[pick[rb]]; bits != 0;) {
        const int i = std::countr_zero(bits);
        bits &= bits - 1;
        asg.assign(i, rb);
      }
    }
    const double value = detail::slot_objective(asg, links, demands, rb_capacity, alpha,
                                                p_tx_w, noise_w);
    if (value > best.value) {
      best.value = value;
      best.assignment = std::move(asg);
    }
    // odometer over RB digits
    int digit = 0;
    while (digit < n_rbs) {
      if (++pick[digit] < sets.size()) break;
      pick[digit] = 0;
      ++digit;
    }
    if (digit == n_rbs) break;
  }
  return best;
}

// Central finite differences, one scalar parameter at a time.
inline std::vector<double> finite_difference_grad(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> at,
    double h = 1e-5) {
  if (h <= 0.0) throw std::invalid_argument("finite_difference_grad: h must be positive");
  std::vector<double> grad(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double saved = at[i];
    at[i] = saved + h;
    const double up = f(at);
    at[i] = saved - h;
    const double down = f(at);
    at[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace urllc
