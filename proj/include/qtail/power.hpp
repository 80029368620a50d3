#pragma once

#include <string>
#include <vector>

#include "qtail/chain.hpp"
#include "qtail/fading.hpp"
#include "qtail/pk_sequence.hpp"
#include "qtail/policy.hpp"

namespace qtail {

/// ln C_k: mean power spent in state k by the threshold rule,
/// a_k·∫_{h_th^k}^∞ g(x)/x dx with a_k = σ²(e^{s_k/T0B} - 1).
/// Rayleigh uses E1, Nakagami Γ(m-1, ·) (m = 1 routed to E1); an atom at
/// zero below the threshold mass gives +inf. Static gains are rejected.
double log_per_state_power(const ChannelModel& channel, double log_p_k, int k, const LinkParams& link = {});
double per_state_power(const ChannelModel& channel, double log_p_k, int k, const LinkParams& link = {});

/// As above, reading p_k from the sequence. Handles ln p_k = -inf (p_k too
/// small for its own logarithm) through ln(-ln p_k).
double log_per_state_power(const ChannelModel& channel, const PkSequence& pk, int k,
                           const LinkParams& link = {});

struct PowerReport {
  std::vector<double> per_state;  ///< C_k, k = 0..K (may overflow to inf)
  std::vector<double> log_per_state;
  double p_avg = 0.0;  ///< Σ_{k≤K} π_k C_k
  double log_p_avg = 0.0;
  bool divergent = false;
  /// Bound on Σ_{k>K} π_k C_k from the E1 majorant (exact C_k for
  /// non-Rayleigh channels) and a geometric remainder.
  double truncation_residual = 0.0;
  bool residual_bounded = true;
  StationaryDistribution dist;
};

PowerReport threshold_policy_avg_power(const ChannelModel& channel, const PkSequence& pk, int K,
                                       const LinkParams& link = {});

struct TransmitAllReport {
  double value = 0.0;  ///< +inf when divergent
  bool divergent = false;
  std::string reason;
  /// (cutoff, ∫_cutoff^∞ g(x)/x dx·(e^{A/T0B}-1)σ²) pairs showing growth.
  std::vector<std::pair<double, double>> cutoff_probes;
};

/// Channel inversion power (e^{A/T0B} - 1)σ²·E{1/|h|²}. Divergence is
/// decided from the small-x exponent (β ≤ 0) or an atom at zero and
/// illustrated with cutoff quadratures.
TransmitAllReport transmit_all_power(const ChannelModel& channel, const LinkParams& link = {});

struct GenericPowerReport {
  double value = 0.0;
  bool divergent = false;
  /// E{P | q = k}; NaN for states with π_k = 0 (not evaluated).
  std::vector<double> per_state;
};

/// Σ_q π_q·E{P(s(q, h), h)} by adaptive quadrature split at the policy's
/// gain breakpoints. Integer-state policies only. Throws NumericError
/// naming the state when a quadrature misses its tolerance.
GenericPowerReport generic_avg_power(const ChannelModel& channel, const Policy& policy,
                                     const StationaryDistribution& dist);

}  // namespace qtail
