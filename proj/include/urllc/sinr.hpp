#pragma once

#include <cassert>
#include <cmath>
#include <vector>

#include "urllc/assignment.hpp"
#include "urllc/net_model.hpp"
#include "urllc/phy.hpp"

namespace urllc {

struct SinrSample {
  int link = -1;
  int rb = -1;
  double linear = 0.0;
  double db = 0.0;
  double signal_w = 0.0;
  double interference_w = 0.0;
  double noise_w = 0.0;
};

// Co-channel interference at the victim's receiver. Only links adjacent to the
// victim in the conflict graph count; sub-threshold interferers are treated as
// negligible by the model.
inline double interference_power(int victim, int rb, const SlotAssignment& assignment,
                                 const ConflictGraph& graph, const std::vector<LinkSpec>& links,
                                 double alpha, double p_tx_w) {
  assert(assignment.is_active(victim, rb));
  double total = 0.0;
  const std::uint8_t* adj = graph.row(victim);
  for (int j = 0; j < graph.size(); ++j) {
    if (j == victim || !adj[j] || !assignment.is_active(j, rb)) continue;
    const double d = distance(links[j].tx, links[victim].rx);
    total += received_power(d, alpha, p_tx_w);
  }
  return total;
}

inline SinrSample sinr(int victim, int rb, const SlotAssignment& assignment,
                       const ConflictGraph& graph, const std::vector<LinkSpec>& links,
                       double alpha, double p_tx_w, const PhyConstants& consts) {
  SinrSample s;
  s.link = victim;
  s.rb = rb;
  s.signal_w = received_power(links[victim].length(), alpha, p_tx_w);
  s.interference_w = interference_power(victim, rb, assignment, graph, links, alpha, p_tx_w);
  s.noise_w = noise_power(consts);
  s.linear = s.signal_w / (s.interference_w + s.noise_w);
  s.db = to_db(s.linear);
  return s;
}

// Per-link summary when a link holds several RBs.
enum class SinrSummary {
  kMinAcrossRbs,   // conservative, the default
  kMeanAcrossRbs,  // mean taken in the dB domain
};

struct SinrReport {
  struct Entry {
    int link = -1;
    double linear = 0.0;
    double db = 0.0;
    double signal_w = 0.0;
    double interference_w = 0.0;
    double noise_w = 0.0;
    std::vector<SinrSample> per_rb;
  };
  std::vector<Entry> entries;  // one per link with at least one RB

  const Entry* find(int link) const {
    for (const auto& e : entries) {
      if (e.link == link) return &e;
    }
    return nullptr;
  }
};

inline SinrReport sinr_report(const SlotAssignment& assignment, const ConflictGraph& graph,
                              const std::vector<LinkSpec>& links, double alpha, double p_tx_w,
                              const PhyConstants& consts,
                              SinrSummary summary = SinrSummary::kMinAcrossRbs) {
  SinrReport report;
  for (int i = 0; i < assignment.n_links; ++i) {
    if (assignment.link_rbs[i].empty()) continue;
    SinrReport::Entry entry;
    entry.link = i;
    for (int rb : assignment.link_rbs[i]) {
      entry.per_rb.push_back(sinr(i, rb, assignment, graph, links, alpha, p_tx_w, consts));
    }
    if (summary == SinrSummary::kMinAcrossRbs) {
      const SinrSample* worst = &entry.per_rb.front();
      for (const auto& s : entry.per_rb) {
        if (s.linear < worst->linear) worst = &s;
      }
      entry.linear = worst->linear;
      entry.db = worst->db;
      entry.signal_w = worst->signal_w;
      entry.interference_w = worst->interference_w;
      entry.noise_w = worst->noise_w;
    } else {
      double db_sum = 0.0;
      for (const auto& s : entry.per_rb) db_sum += s.db;
      entry.db = db_sum / static_cast<double>(entry.per_rb.size());
      entry.linear = from_db(entry.db);
      entry.signal_w = entry.per_rb.front().signal_w;
      entry.noise_w = entry.per_rb.front().noise_w;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace urllc
