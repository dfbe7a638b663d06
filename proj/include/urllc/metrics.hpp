#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "urllc/phy.hpp"

namespace urllc {

// Fraction of links whose demand fits within capacity before the deadline:
// X_i / C_i <= D_i.
inline double schedulable_ratio(const std::vector<double>& demand,
                                const std::vector<double>& capacity,
                                const std::vector<double>& deadline) {
  if (demand.size() != capacity.size() || demand.size() != deadline.size()) {
    throw std::invalid_argument("schedulable_ratio: size mismatch");
  }
  if (demand.empty()) throw std::invalid_argument("schedulable_ratio: empty input");
  int ok = 0;
  for (std::size_t i = 0; i < demand.size(); ++i) {
    if (capacity[i] <= 0.0) throw std::invalid_argument("schedulable_ratio: zero capacity");
    if (demand[i] / capacity[i] <= deadline[i]) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(demand.size());
}

// Fraction of links at or above the SINR threshold; comparison in dB,
// inclusive.
inline double reliability(const std::vector<double>& sinr_db, double threshold_db) {
  if (sinr_db.empty()) throw std::invalid_argument("reliability: empty input");
  int ok = 0;
  for (double v : sinr_db) {
    if (v >= threshold_db) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(sinr_db.size());
}

// Effective number of links capable of successful transmission.
inline double network_capacity(int n_links, double sched_ratio, double rel) {
  if (sched_ratio < 0.0 || sched_ratio > 1.0 || rel < 0.0 || rel > 1.0) {
    throw std::invalid_argument("network_capacity: ratios must be in [0,1]");
  }
  return static_cast<double>(n_links) * sched_ratio * rel;
}

// Percentile by linear interpolation over the sorted sample:
// rank = p/100 * (n-1), value interpolated between the bracketing entries.
inline double percentile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile: empty input");
  if (sorted.size() == 1) return sorted.front();
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct SinrStats {
  double mean_db = 0.0;
  double p25_db = 0.0;
  double p75_db = 0.0;
};

// Mean and quartiles of the dB values. Averaging happens in the dB domain;
// the linear-domain alternative is a separate helper.
inline SinrStats sinr_stats(std::vector<double> sinr_db) {
  if (sinr_db.empty()) throw std::invalid_argument("sinr_stats: empty input");
  SinrStats s;
  double sum = 0.0;
  for (double v : sinr_db) sum += v;
  s.mean_db = sum / static_cast<double>(sinr_db.size());
  std::sort(sinr_db.begin(), sinr_db.end());
  s.p25_db = percentile_sorted(sinr_db, 25.0);
  s.p75_db = percentile_sorted(sinr_db, 75.0);
  return s;
}

// Mean taken over linear ratios, reported back in dB.
inline double mean_sinr_linear_domain_db(const std::vector<double>& sinr_db) {
  if (sinr_db.empty()) throw std::invalid_argument("mean_sinr: empty input");
  double sum = 0.0;
  for (double v : sinr_db) sum += from_db(v);
  return to_db(sum / static_cast<double>(sinr_db.size()));
}

// "15.09 [14.13, 15.95]" comparison-table cell.
inline std::string format_mean_range(double mean, double lo, double hi) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.2f [%.2f, %.2f]", mean, lo, hi);
  return buf;
}

struct MetricsReport {
  std::string method;
  int n_links = 0;
  int channels = 0;
  std::uint64_t seed = 0;
  double mean_sinr_db = 0.0;
  double p25_db = 0.0;
  double p75_db = 0.0;
  double mean_sinr_linear_db = 0.0;  // sensitivity view, not a CSV column
  double sched_ratio = 0.0;
  double reliability = 0.0;
  double capacity = 0.0;
  long miss_count = 0;
  double infer_time_s = 0.0;
};

}  // namespace urllc
