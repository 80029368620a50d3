#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>

#include "qtail/random.hpp"

namespace qtail {

enum class ChannelKind {
  Rayleigh,        ///< exponential power gain with mean Ω
  Nakagami,        ///< gamma power gain, shape m, mean Ω
  ImpulseMixture,  ///< atom of mass p_outage at gain 0 plus a base model
  Static,          ///< deterministic gain (point mass); used for on-off links
};

std::string to_string(ChannelKind kind);

/// Leading-order behaviour of the gain density near zero: g(x) ~ c·x^beta.
struct SmallXExponent {
  double beta = 0.0;
  bool has_atom = false;
};

class GainSampler;

/// Distribution of the channel power gain |h|². Immutable value type.
class ChannelModel {
 public:
  static ChannelModel rayleigh(double omega = 1.0);
  static ChannelModel nakagami(double m, double omega = 1.0);
  static ChannelModel static_gain(double gain);
  /// `base` must not itself be a mixture.
  static ChannelModel impulse_mixture(double p_outage, const ChannelModel& base);

  ChannelKind kind() const noexcept { return kind_; }
  /// Nakagami shape; 1 for Rayleigh.
  double m() const noexcept { return m_; }
  /// Mean of the continuous (or static) part.
  double omega() const noexcept { return omega_; }
  double gain() const noexcept { return gain_; }
  double p_outage() const noexcept { return p_outage_; }
  bool has_atom() const noexcept { return p_outage_ > 0.0; }
  /// Continuous/static component; *this for non-mixtures.
  const ChannelModel& base() const noexcept { return base_ ? *base_ : *this; }
  /// True when the non-atomic part has a density (Rayleigh or Nakagami).
  bool has_density() const noexcept;

  /// Density of the continuous part at x > 0 (the atom is excluded).
  double pdf(double x) const;
  /// P(|h|² ≤ x), atom included.
  double cdf(double x) const;
  /// ln cdf(e^{log_x}); accurate when the cdf underflows.
  double log_cdf(double log_x) const;
  /// Smallest x with cdf(x) ≥ p, p ∈ [0, 1).
  double quantile(double p) const;
  /// ln quantile(e^{log_p}); the threshold path for p that underflow.
  double log_quantile(double log_p) const;

  double mean() const noexcept;
  SmallXExponent small_x_exponent() const noexcept;

  GainSampler sampler() const;

  /// E{f(|h|²)} over the full distribution (atom, point mass or density).
  /// Throws NumericError if the quadrature misses its tolerance.
  double expectation(const std::function<double(double)>& f) const;

  std::string describe() const;

  friend bool operator==(const ChannelModel& a, const ChannelModel& b);

 private:
  ChannelModel() = default;

  ChannelKind kind_ = ChannelKind::Rayleigh;
  double m_ = 1.0;
  double omega_ = 1.0;
  double gain_ = 0.0;
  double p_outage_ = 0.0;
  std::shared_ptr<const ChannelModel> base_;
};

/// Per-worker sampling state for one channel model. Not thread-safe; give
/// every worker its own sampler and generator.
class GainSampler {
 public:
  double operator()(SplitMix64& rng);

 private:
  friend class ChannelModel;
  explicit GainSampler(const ChannelModel& model);

  ChannelKind kind_;
  double omega_;
  double gain_;
  double p_outage_;
  std::gamma_distribution<double> gamma_;
};

}  // namespace qtail
