#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qtail/pk_sequence.hpp"

namespace qtail {

/// Stationary law of the birth-death queue driven by the threshold policy,
/// truncated at `truncation` and held in log domain.
struct StationaryDistribution {
  std::vector<double> log_pi;  ///< ln π_k, k = 0..K, normalized over 0..K
  int truncation = 0;
  /// Upper bound on the probability mass beyond K (geometric majorant);
  /// +inf when the majorant ratio is ≥ 1.
  double tail_mass_bound = 0.0;
  bool tail_bounded = true;
  double tail_ratio = 0.0;

  /// Point mass at state q over 0..K (e.g. transmit-all from an empty queue).
  static StationaryDistribution degenerate_at(int q, int K);

  double pi(int k) const;
  double log_pi_at(int k) const { return log_pi.at(static_cast<std::size_t>(k)); }
};

/// ln Σ e^{x_i}; -inf for an empty range or all -inf terms.
double log_sum_exp(std::span<const double> xs);
/// ln Σ e^{x_i} with a caller-chosen shift. Two ranges summed with the same
/// shift preserve termwise ordering after rounding.
double log_sum_exp_shifted(std::span<const double> xs, double shift);

/// Solve the truncated chain. Requires K ≥ 1 and p_k < 1 for k ≤ K.
StationaryDistribution stationary(const PkSequence& pk, int K);

struct ViolationEstimate {
  double value = 0.0;  ///< midpoint of [lower, upper] (lower when unbounded)
  double lower = 0.0;  ///< Σ_{k=q+1}^{K} π_k
  double upper = 0.0;  ///< lower + tail mass bound
  double log_lower = 0.0;
};

/// ε(q_th) = P(q > q_th), 0 ≤ q_th < K.
ViolationEstimate violation_probability(const StationaryDistribution& dist, int q_th);

struct SandwichBounds {
  double lower = 0.0;
  double upper = 0.0;
  double log_lower = 0.0;
  double log_upper = 0.0;
};

/// Product bounds on ε(q_th): π_0·Σ_k ∏_{m<k} p_m below and
/// (K - q_th)·∏_{m≤q_th} p_m/μ_{m+1} above. The lower bound is assembled
/// with the same shift and order as ε so that lower ≤ ε survives rounding.
SandwichBounds sandwich_bounds(const PkSequence& pk, const StationaryDistribution& dist, int q_th);

struct DecayFit {
  /// 0: ln ε ~ -V·q, 1: ~ -V·e^q, 2: ~ -V·e^{e^q}; -1 when ε ≡ 0.
  int decay_class = -1;
  double rate = 0.0;
  double r_squared[3] = {0.0, 0.0, 0.0};
  bool rejected[3] = {false, false, false};
};

/// Decay class of an ε curve: the lowest c_m whose local slope
/// d ln ε / d c_m stops growing over the tail half of the points. When every
/// class keeps growing the highest one is returned. R² of each linear fit is
/// reported alongside. Needs ≥ 4 points with ε > 0 unless every ε is zero.
DecayFit fit_decay_class(std::span<const std::pair<int, double>> eps_curve);
/// Same, from (q, ln ε) pairs.
DecayFit fit_decay_class_log(std::span<const std::pair<int, double>> log_eps_curve);

}  // namespace qtail
