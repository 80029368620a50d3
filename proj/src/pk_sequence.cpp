#include "qtail/pk_sequence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qtail/detail/format.hpp"
#include "qtail/error.hpp"
#include "qtail/specfun.hpp"

namespace qtail {
namespace {

void check_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0) throw DomainError("pk sequence: alpha must be positive");
}

void check_probability(double p, const char* who) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError(std::string(who) + ": p_k must lie in (0, 1]");
}

void check_index(int k) {
  if (k < 0) throw DomainError("pk sequence: index must be >= 0");
}

}  // namespace

std::string to_string(PkFamily family) {
  switch (family) {
    case PkFamily::SingleExp: return "single_exp";
    case PkFamily::DoubleExp: return "double_exp";
    case PkFamily::TripleExp: return "triple_exp";
    case PkFamily::Polynomial: return "polynomial";
    case PkFamily::Constant: return "constant";
    case PkFamily::Explicit: return "explicit";
  }
  return "unknown";
}

PkSequence PkSequence::single_exp(double alpha) {
  check_alpha(alpha);
  PkSequence s;
  s.family_ = PkFamily::SingleExp;
  s.alpha_ = alpha;
  return s;
}

PkSequence PkSequence::double_exp(double alpha) {
  check_alpha(alpha);
  PkSequence s;
  s.family_ = PkFamily::DoubleExp;
  s.alpha_ = alpha;
  return s;
}

PkSequence PkSequence::triple_exp(double alpha) {
  check_alpha(alpha);
  PkSequence s;
  s.family_ = PkFamily::TripleExp;
  s.alpha_ = alpha;
  return s;
}

PkSequence PkSequence::polynomial(double alpha, double degree) {
  check_alpha(alpha);
  if (!std::isfinite(degree) || degree <= 0.0) throw DomainError("polynomial: degree must be positive");
  PkSequence s;
  s.family_ = PkFamily::Polynomial;
  s.alpha_ = alpha;
  s.degree_ = degree;
  return s;
}

PkSequence PkSequence::constant(double p) {
  check_probability(p, "constant");
  PkSequence s;
  s.family_ = PkFamily::Constant;
  s.values_ = {p};
  return s;
}

PkSequence PkSequence::explicit_values(std::vector<double> values) {
  if (values.empty()) throw DomainError("explicit: at least one value required");
  for (double p : values) check_probability(p, "explicit");
  PkSequence s;
  s.family_ = PkFamily::Explicit;
  s.values_ = std::move(values);
  return s;
}

double PkSequence::log_p(int k) const {
  check_index(k);
  const double n = k + 1.0;
  switch (family_) {
    case PkFamily::SingleExp: return -alpha_ * n;
    case PkFamily::DoubleExp: return -std::exp(std::log(alpha_) + n);
    case PkFamily::TripleExp: return -std::exp(std::log(alpha_) + std::exp(n));
    case PkFamily::Polynomial: return -alpha_ * std::pow(n, degree_);
    case PkFamily::Constant:
    case PkFamily::Explicit: {
      const auto idx = std::min<std::size_t>(static_cast<std::size_t>(k), values_.size() - 1);
      return std::log(values_[idx]);
    }
  }
  return 0.0;
}

double PkSequence::log_neg_log_p(int k) const {
  check_index(k);
  const double n = k + 1.0;
  switch (family_) {
    case PkFamily::SingleExp: return std::log(alpha_) + std::log(n);
    case PkFamily::DoubleExp: return std::log(alpha_) + n;
    case PkFamily::TripleExp: return std::log(alpha_) + std::exp(n);
    case PkFamily::Polynomial: return std::log(alpha_) + degree_ * std::log(n);
    case PkFamily::Constant:
    case PkFamily::Explicit: return std::log(-log_p(k));
  }
  return 0.0;
}

double PkSequence::log_mu(int k) const {
  const double lp = log_p(k);
  // 1 - p_k rounds to 1 long before ln p_k reaches -700.
  if (lp < -700.0) return 0.0;
  return specfun::log1mexp(lp);
}

double PkSequence::p(int k) const { return std::exp(log_p(k)); }

std::string PkSequence::describe() const {
  using detail::format_double;
  switch (family_) {
    case PkFamily::SingleExp:
    case PkFamily::DoubleExp:
    case PkFamily::TripleExp:
      return to_string(family_) + "(alpha=" + format_double(alpha_) + ")";
    case PkFamily::Polynomial:
      return "polynomial(alpha=" + format_double(alpha_) + ",degree=" + format_double(degree_) + ")";
    case PkFamily::Constant:
      return "constant(p=" + format_double(values_.front()) + ")";
    case PkFamily::Explicit:
      return "explicit(n=" + std::to_string(values_.size()) + ")";
  }
  return "unknown";
}

}  // namespace qtail
