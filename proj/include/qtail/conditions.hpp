#pragma once

#include <string>
#include <vector>

#include "qtail/fading.hpp"
#include "qtail/pk_sequence.hpp"

namespace qtail {

enum class Scenario {
  ZeroViolation,   ///< S1: ε = 0 reachable with finite power
  LinearDecay,     ///< S2: only a linear-exponent tail with finite power
  ArbitraryDecay,  ///< S3: any decay class with finite power
  Unclassified,
};

std::string to_string(Scenario s);
/// "S1", "S2", "S3" or "unclassified".
std::string short_name(Scenario s);

struct Evidence {
  std::string name;
  bool holds = false;
  double value = 0.0;  ///< supporting number, NaN when none
  std::string detail;
};

struct ScenarioVerdict {
  Scenario scenario = Scenario::Unclassified;
  std::vector<Evidence> evidence;
  std::vector<std::string> notes;

  const Evidence* find(const std::string& name) const;
};

/// g(0+) = 0 and g'(0+) finite, read off the small-x exponent β of the
/// continuous part: true iff β ≥ 1 and no atom.
Evidence smooth_origin_check(const ChannelModel& channel);

/// True iff the gain has an atom at zero.
Evidence zero_atom_check(const ChannelModel& channel);

enum class RatioOutcome { Pass, Fail, Unclassified };

struct RatioTestResult {
  RatioOutcome outcome = RatioOutcome::Unclassified;
  double limit_estimate = 0.0;
  std::vector<double> log_ratios;  ///< ln r_k, k = 0..horizon-1
};

/// Sufficient condition for finite power under the threshold policy:
/// r_k = p_k·ln(1 + 1/p_{k+1}) / (μ_k·ln(1 + 1/p_k)) stays below 1 with a
/// nonincreasing trailing trend. Evaluated in log domain with
/// ln(1 + 1/p) → -ln p once ln p < -30. horizon ≥ 10; the trend is read
/// over the last `window` ratios.
RatioTestResult ratio_test(const PkSequence& pk, int horizon = 40, int window = 10);

/// Nakagami-m scenario label: m ≥ 2 → S1, 1 ≤ m < 2 → S3, 0.5 ≤ m < 1 → S2.
/// Evidence includes the smooth-origin and zero-atom checks and the transmit-all integral; for
/// 1 < m < 2 the finite integral is flagged as stronger than the label.
ScenarioVerdict classify_nakagami(double m);

/// Verdict for an arbitrary channel, with ratio tests for the supplied
/// sequences added as evidence.
ScenarioVerdict classify(const ChannelModel& channel, const std::vector<PkSequence>& sequences = {});

}  // namespace qtail
