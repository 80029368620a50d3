#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtail/fading.hpp"
#include "qtail/policy.hpp"

namespace qtail {

struct SimConfig {
  std::int64_t slots = 1'000'000;  ///< per replication, warmup included
  std::int64_t warmup = 10'000;
  int buffer_cap = 50;
  LinkParams link;
  std::uint64_t seed = 1;
  int replications = 10;
  /// Worker threads; 0 picks min(hardware threads, replications).
  int threads = 0;

  void validate() const;
};

struct SimReport {
  /// ε(q_th) = fraction of measured slots with q > q_th, q_th = 0..K-1:
  /// mean over replications and its standard error.
  std::vector<double> eps;
  std::vector<double> eps_stderr;
  double p_avg = 0.0;
  double p_avg_stderr = 0.0;
  /// Mean power in slots that start in state q (⌊q⌋ for real queues),
  /// pooled over replications; NaN for unvisited states.
  std::vector<double> c_q;
  /// Standard error of c_q from the pooled within-state sample variance.
  std::vector<double> c_q_stderr;
  std::vector<std::int64_t> visits;  ///< pooled visit counts, q = 0..K
  std::vector<double> occupancy;     ///< visits / measured slots
  std::int64_t measured_slots = 0;   ///< pooled over replications
  std::int64_t drops = 0;            ///< arrivals lost at the buffer cap
  std::int64_t infeasible = 0;       ///< transmissions demanded at zero gain
  std::vector<std::uint64_t> seeds;  ///< one per replication
};

/// Slot-level simulation of q ← min(max(q + A - s, 0), K) under `policy`.
/// Replications run on independent streams derive_seed(seed, r) and are
/// merged in index order, so the report depends only on (inputs, seed).
/// Infeasible slots (s > 0 at zero gain) are counted and treated as idle.
SimReport run(const ChannelModel& channel, const Policy& policy, const SimConfig& config);

struct SweepCell {
  std::string channel;
  std::string policy;
  std::optional<SimReport> report;
  std::string error;  ///< set when the cell failed
};

/// run() over every (channel, policy) pair, channel-major. Cells share the
/// base seed (common random numbers); a failing cell records its error and
/// the sweep continues.
std::vector<SweepCell> sweep(const std::vector<ChannelModel>& channels, const std::vector<PolicySpec>& policies,
                             const SimConfig& config);

}  // namespace qtail
