#pragma once

#include <string>
#include <vector>

namespace qtail {

enum class PkFamily {
  SingleExp,   ///< p_k = exp(-α(k+1))
  DoubleExp,   ///< p_k = exp(-α·e^{k+1})
  TripleExp,   ///< p_k = exp(-α·e^{e^{k+1}})
  Polynomial,  ///< p_k = exp(-α(k+1)^d)
  Constant,    ///< p_k = p
  Explicit,    ///< p_k = values[min(k, n-1)]
};

std::string to_string(PkFamily family);

/// Idle probabilities p_k of the threshold policy, exact in log domain.
///
/// The families decay fast enough that p_k underflows long before the
/// buffer cap (TripleExp by k = 2), so every consumer works with ln p_k and
/// ln(-ln p_k). ln p_k may be -inf where even the logarithm overflows; such
/// states transmit whenever the channel is non-zero.
class PkSequence {
 public:
  static PkSequence single_exp(double alpha);
  static PkSequence double_exp(double alpha);
  static PkSequence triple_exp(double alpha);
  static PkSequence polynomial(double alpha, double degree);
  static PkSequence constant(double p);
  static PkSequence explicit_values(std::vector<double> values);

  PkFamily family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  double degree() const noexcept { return degree_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// ln p_k ≤ 0.
  double log_p(int k) const;
  /// ln μ_k = ln(1 - p_k).
  double log_mu(int k) const;
  /// ln(-ln p_k); finite even where ln p_k is not (TripleExp).
  double log_neg_log_p(int k) const;
  /// p_k, 0 when it underflows.
  double p(int k) const;

  std::string describe() const;

  friend bool operator==(const PkSequence&, const PkSequence&) = default;

 private:
  PkSequence() = default;

  PkFamily family_ = PkFamily::Constant;
  double alpha_ = 0.0;
  double degree_ = 1.0;
  std::vector<double> values_;
};

}  // namespace qtail
