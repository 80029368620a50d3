#pragma once

#include <string>
#include <variant>
#include <vector>

#include "qtail/fading.hpp"
#include "qtail/pk_sequence.hpp"

namespace qtail {

/// Link normalization: arrivals per slot (nats), bandwidth-slot product T0·B
/// and noise power σ².
struct LinkParams {
  double arrival = 1.0;
  double t0b = 1.0;
  double noise = 1.0;

  friend bool operator==(const LinkParams&, const LinkParams&) = default;
};

struct Action {
  double served = 0.0;  ///< nats transmitted this slot
  double power = 0.0;   ///< instantaneous transmit power
  /// s > 0 was demanded on a zero-gain channel; power is +inf.
  bool infeasible = false;
};

/// Power needed to send `served` nats over gain `gain`: σ²/h·(e^{s/T0B} - 1).
double transmit_power(double served, double gain, const LinkParams& link);

/// Buffer-aware threshold rule: at queue length k idle below h_th^k,
/// otherwise send 1 unit from an empty queue and 2 units from a backlogged
/// one. Thresholds solve cdf(h_th^k) = p_k and are precomputed up to
/// `cache_cap`; beyond it they are evaluated on demand.
class ThresholdPolicy {
 public:
  ThresholdPolicy(PkSequence pk, ChannelModel channel, LinkParams link = {}, int cache_cap = 50);

  Action action(double q, double gain) const;

  double threshold(int k) const;
  /// ln h_th^k; -inf for p_k = 0, +inf for p_k = 1 (never transmit).
  double log_threshold(int k) const;
  /// Units sent when transmitting at queue length k.
  static int units(int k) noexcept { return k == 0 ? 1 : 2; }

  const PkSequence& pk() const noexcept { return pk_; }
  const ChannelModel& channel() const noexcept { return channel_; }
  const LinkParams& link() const noexcept { return link_; }

 private:
  double compute_log_threshold(int k) const;

  PkSequence pk_;
  ChannelModel channel_;
  LinkParams link_;
  std::vector<double> log_thresholds_;
  std::vector<double> thresholds_;
};

/// Constant transmit power; the rate follows Shannon's formula.
class FixedPowerPolicy {
 public:
  explicit FixedPowerPolicy(double power, LinkParams link = {});

  Action action(double q, double gain) const;

  double power() const noexcept { return power_; }
  const LinkParams& link() const noexcept { return link_; }

 private:
  double power_;
  LinkParams link_;
};

/// Channel inversion: empty the buffer every slot.
class TransmitAllPolicy {
 public:
  explicit TransmitAllPolicy(LinkParams link = {});

  Action action(double q, double gain) const;

  const LinkParams& link() const noexcept { return link_; }

 private:
  LinkParams link_;
};

using Policy = std::variant<ThresholdPolicy, FixedPowerPolicy, TransmitAllPolicy>;

Action act(const Policy& policy, double q, double gain);
const LinkParams& link_of(const Policy& policy);
/// ln of the gains at which s(q, ·) changes, in increasing order. Kept in
/// log form because deep thresholds underflow.
std::vector<double> log_breakpoints(const Policy& policy, double q);
/// True when the queue stays on the integer lattice (threshold, transmit-all
/// with integer arrivals).
bool integer_state(const Policy& policy);
std::string describe(const Policy& policy);

/// Channel-independent description of a policy, bound to a channel by
/// make_policy (thresholds depend on the gain distribution).
struct ThresholdSpec {
  PkSequence pk;
};
struct FixedPowerSpec {
  double power = 1.0;
};
struct TransmitAllSpec {};
using PolicySpec = std::variant<ThresholdSpec, FixedPowerSpec, TransmitAllSpec>;

Policy make_policy(const PolicySpec& spec, const ChannelModel& channel, const LinkParams& link = {},
                   int cache_cap = 50);
std::string describe(const PolicySpec& spec);

}  // namespace qtail
