#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "urllc/matrix.hpp"
#include "urllc/net_model.hpp"

namespace urllc {

struct JobState {
  double remaining_demand = 0.0;  // X_{i,t}
  int remaining_deadline = 0;     // d''_{i,t}
  bool active = false;
};

struct AdvanceResult {
  std::vector<std::uint8_t> miss_flags;  // deadline expired this slot with demand left
  int releases = 0;
};

// Per-link periodic job bookkeeping. Jobs release at arrival + k*period with
// demand X_i and deadline D_i; a job ends by completing or by missing its
// deadline (the leftover demand is dropped).
class TrafficState {
 public:
  TrafficState() = default;
  explicit TrafficState(const std::vector<LinkSpec>& links) { reset(links); }

  void reset(const std::vector<LinkSpec>& links) {
    const std::size_t n = links.size();
    slot_ = 0;
    jobs_.assign(n, JobState{});
    miss_count_.assign(n, 0);
    served_total_.assign(n, 0.0);
    released_total_.assign(n, 0.0);
    active_slots_.assign(n, 0);
    release_due(links, 0);
  }

  int slot() const { return slot_; }
  int n_links() const { return static_cast<int>(jobs_.size()); }
  const JobState& job(int i) const { return jobs_[i]; }

  long total_misses() const {
    return std::accumulate(miss_count_.begin(), miss_count_.end(), 0L);
  }
  const std::vector<long>& miss_count() const { return miss_count_; }
  const std::vector<double>& served_total() const { return served_total_; }
  const std::vector<double>& released_total() const { return released_total_; }
  const std::vector<long>& active_slots() const { return active_slots_; }

  // Applies one slot's service, expires deadlines, then releases jobs due at
  // the next slot.
  AdvanceResult advance(const std::vector<LinkSpec>& links, const std::vector<double>& served) {
    if (served.size() != jobs_.size()) {
      throw std::invalid_argument("advance: served vector size mismatch");
    }
    AdvanceResult result;
    result.miss_flags.assign(jobs_.size(), 0);

    for (std::size_t i = 0; i < jobs_.size(); ++i) {
      JobState& job = jobs_[i];
      if (served[i] > 0.0) {
        if (!job.active) {
          throw std::invalid_argument("advance: served a link with no active job");
        }
        if (served[i] > job.remaining_demand + 1e-9) {
          throw std::invalid_argument("advance: served more than remaining demand");
        }
      }
      if (job.active) ++active_slots_[i];
      if (!job.active) continue;

      job.remaining_demand -= served[i];
      served_total_[i] += served[i];
      if (job.remaining_demand <= 1e-9) {
        job.remaining_demand = 0.0;
        job.active = false;
        job.remaining_deadline = 0;
        continue;
      }
      job.remaining_deadline -= 1;
      if (job.remaining_deadline <= 0) {
        result.miss_flags[i] = 1;
        ++miss_count_[i];
        job.active = false;
        job.remaining_demand = 0.0;
        job.remaining_deadline = 0;
      }
    }

    ++slot_;
    result.releases = release_due(links, slot_);
    return result;
  }

 private:
  int release_due(const std::vector<LinkSpec>& links, int t) {
    int count = 0;
    for (std::size_t i = 0; i < links.size(); ++i) {
      const LinkSpec& link = links[i];
      if (t < link.arrival) continue;
      if ((t - link.arrival) % link.period != 0) continue;
      jobs_[i].remaining_demand = static_cast<double>(link.demand);
      jobs_[i].remaining_deadline = link.deadline;
      jobs_[i].active = link.demand > 0;
      released_total_[i] += static_cast<double>(link.demand);
      ++count;
    }
    return count;
  }

  int slot_ = 0;
  std::vector<JobState> jobs_;
  std::vector<long> miss_count_;
  std::vector<double> served_total_;
  std::vector<double> released_total_;
  std::vector<long> active_slots_;
};

// lcm of all link periods, capped to keep episodes bounded.
inline int hyperperiod(const std::vector<LinkSpec>& links, int cap) {
  long h = 1;
  for (const auto& link : links) {
    h = std::lcm(h, static_cast<long>(link.period));
    if (h >= cap) return cap;
  }
  return static_cast<int>(h);
}

namespace detail {

inline void minmax_normalize_column(Matd& m, int col) {
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (int r = 0; r < m.rows(); ++r) {
    lo = std::min(lo, m(r, col));
    hi = std::max(hi, m(r, col));
  }
  const double span = hi - lo;
  for (int r = 0; r < m.rows(); ++r) {
    m(r, col) = span > 0.0 ? (m(r, col) - lo) / span : 0.0;
  }
}

}  // namespace detail

// Feature row per link: [work_density, snr_db, demand, deadline, period, x, y,
// q_1..q_C], min-max normalized per column over the snapshot. Work density is
// remaining demand per remaining slot; an expired deadline clamps to the
// largest finite value in the column.
inline Matd build_features(const TrafficState& state, const std::vector<LinkSpec>& links,
                           const NetworkConfig& config, const Matd& channel_gain,
                           const std::vector<double>& snr_db) {
  const int n = static_cast<int>(links.size());
  const int c = config.n_channels;
  const int width = 7 + c;
  Matd feats(n, width);

  double max_finite_density = 0.0;
  std::vector<int> unbounded;
  for (int i = 0; i < n; ++i) {
    const JobState& job = state.job(i);
    double density = 0.0;
    if (job.remaining_demand > 0.0) {
      if (job.remaining_deadline > 0) {
        density = job.remaining_demand / job.remaining_deadline;
        max_finite_density = std::max(max_finite_density, density);
      } else {
        unbounded.push_back(i);
      }
    }
    const Vec2 mid = links[i].midpoint();
    feats(i, 0) = density;
    feats(i, 1) = snr_db[i];
    feats(i, 2) = job.remaining_demand;
    feats(i, 3) = static_cast<double>(job.remaining_deadline);
    feats(i, 4) = static_cast<double>(links[i].period);
    feats(i, 5) = mid.x;
    feats(i, 6) = mid.y;
    for (int ch = 0; ch < c; ++ch) feats(i, 7 + ch) = channel_gain(i, ch);
  }
  for (int i : unbounded) feats(i, 0) = max_finite_density;

  for (int col = 0; col < width; ++col) detail::minmax_normalize_column(feats, col);
  return feats;
}

struct SnapshotRecord {
  int slot = 0;
  Matd features;
  std::vector<std::uint8_t> miss_flags;
};

}  // namespace urllc
