#pragma once

#include <cstdint>
#include <vector>

#include "urllc/net_model.hpp"

namespace urllc {

// Per-slot mapping link -> set of resource blocks. Feasible assignments keep
// every RB's active links pairwise non-adjacent in the conflict graph.
struct SlotAssignment {
  int n_links = 0;
  int n_rbs = 0;
  std::vector<std::vector<int>> rb_links;   // per RB, links in admission order
  std::vector<std::vector<int>> link_rbs;   // per link, ascending RB indices
  std::vector<std::uint8_t> active_;        // n_links x n_rbs membership flags

  SlotAssignment() = default;
  SlotAssignment(int links, int rbs)
      : n_links(links),
        n_rbs(rbs),
        rb_links(rbs),
        link_rbs(links),
        active_(static_cast<std::size_t>(links) * rbs, 0) {}

  bool is_active(int link, int rb) const {
    return active_[static_cast<std::size_t>(link) * n_rbs + rb] != 0;
  }

  void assign(int link, int rb) {
    auto& flag = active_[static_cast<std::size_t>(link) * n_rbs + rb];
    if (flag) return;
    flag = 1;
    rb_links[rb].push_back(link);
    link_rbs[link].push_back(rb);
  }

  int rbs_assigned(int link) const { return static_cast<int>(link_rbs[link].size()); }

  bool empty() const {
    for (const auto& rbs : link_rbs) {
      if (!rbs.empty()) return false;
    }
    return true;
  }
};

// True iff every RB's active set is an independent set.
inline bool independent_per_rb(const SlotAssignment& asg, const ConflictGraph& graph) {
  for (const auto& active : asg.rb_links) {
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        if (graph.edge(active[a], active[b])) return false;
      }
    }
  }
  return true;
}

}  // namespace urllc
