#include "qtail/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "qtail/error.hpp"

namespace qtail::specfun {
namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

// Σ_{n≥1} (-1)^{n+1} x^n / (n·n!), so that E1(x) = -γ - ln x + series.
double e1_series_tail(double x) {
  double term = 1.0;
  double sum = 0.0;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= -x / n;
    const double contrib = -term / n;
    sum += contrib;
    if (std::fabs(contrib) <= kEps * std::fabs(sum)) break;
  }
  return sum;
}

// Continued fraction h with E1(x) = h·e^{-x}, x ≥ 1.
double e1_continued_fraction(double x) {
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) return h;
  }
  throw NumericError("exp_integral_e1: continued fraction did not converge");
}

// Continued fraction h with Γ(a, x) = e^{-x} x^a h. Valid for any real a
// and x > 0; converges quickly once x ≥ a + 1.
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) return h;
  }
  throw NumericError("upper_incomplete_gamma: continued fraction did not converge");
}

// Σ_{n≥0} x^n / ((a+1)···(a+n)), the lower-gamma series factor.
double lower_gamma_series(double a, double x) {
  double ap = a;
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (term <= kEps * sum) return sum;
  }
  throw NumericError("regularized_lower_gamma: series did not converge");
}

// S = Σ_{n≥1} (-x)^n / (n!·(a+n)).
double alternating_gamma_series(double a, double x) {
  double power = 1.0;
  double sum = 0.0;
  for (int n = 1; n < kMaxIter; ++n) {
    power *= -x / n;
    const double contrib = power / (a + n);
    sum += contrib;
    if (std::fabs(contrib) <= kEps * std::fabs(sum)) break;
  }
  return sum;
}

void check_gamma_args(double a, const char* who) {
  if (!std::isfinite(a) || a <= -1.0 || a == 0.0) {
    throw DomainError(std::string(who) + ": a must lie in (-1, inf) \\ {0}");
  }
}

}  // namespace

double log1mexp(double x) {
  if (x > 0.0 || std::isnan(x)) throw DomainError("log1mexp: x must be <= 0");
  return x > -std::numbers::ln2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

double exp_integral_e1(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("exp_integral_e1: x must be positive and finite");
  }
  if (x < 1.0) return -std::numbers::egamma - std::log(x) + e1_series_tail(x);
  return e1_continued_fraction(x) * std::exp(-x);
}

double log_exp_integral_e1(double log_x) {
  if (!std::isfinite(log_x)) throw DomainError("log_exp_integral_e1: log_x must be finite");
  const double x = std::exp(log_x);
  if (x < 1.0) {
    return std::log(-std::numbers::egamma - log_x + e1_series_tail(x));
  }
  return std::log(e1_continued_fraction(x)) - x;
}

double upper_incomplete_gamma(double a, double x) {
  check_gamma_args(a, "upper_incomplete_gamma");
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("upper_incomplete_gamma: x must be positive and finite");
  }
  return std::exp(log_upper_incomplete_gamma(a, std::log(x)));
}

double log_upper_incomplete_gamma(double a, double log_x) {
  check_gamma_args(a, "log_upper_incomplete_gamma");
  if (std::isnan(log_x) || log_x == std::numeric_limits<double>::infinity()) {
    throw DomainError("log_upper_incomplete_gamma: log_x must be finite or -inf");
  }
  const double x = std::exp(log_x);

  if (x >= 1.0 && x >= a + 1.0) {
    return -x + a * log_x + std::log(gamma_continued_fraction(a, x));
  }
  if (x >= 1.0) {
    // 1 ≤ x < a + 1, so a > 0 and Q(a, x) is not small.
    const double p = std::exp(a * log_x - x - std::lgamma(a + 1.0)) * lower_gamma_series(a, x);
    return std::lgamma(a) + std::log1p(-p);
  }

  // x < 1: Γ(a, x) = Γ(a) - x^a (1/a + S). The first two pieces are combined
  // as (Γ(1+a) - 1 - (x^a - 1))/a so that a → 0 stays well conditioned.
  const double s = alternating_gamma_series(a, x);
  const double a_log_x = a * log_x;
  if (a < 0.0 && a_log_x > 600.0) {
    // x^a dominates; Γ(a)·x^{-a} is a vanishing correction.
    const double gamma_a = boost::math::tgamma(a);
    return a_log_x + std::log(-1.0 / a - s + gamma_a * std::exp(-a_log_x));
  }
  const double head = (boost::math::tgamma1pm1(a) - std::expm1(a_log_x)) / a;
  return std::log(head - std::exp(a_log_x) * s);
}

double regularized_lower_gamma(double a, double x) {
  if (!std::isfinite(x) || x < 0.0) {
    throw DomainError("regularized_lower_gamma: x must be >= 0 and finite");
  }
  if (x == 0.0) return 0.0;
  return std::exp(log_regularized_lower_gamma(a, std::log(x)));
}

double log_regularized_lower_gamma(double a, double log_x) {
  if (!std::isfinite(a) || a <= 0.0) {
    throw DomainError("log_regularized_lower_gamma: a must be positive");
  }
  if (std::isnan(log_x)) throw DomainError("log_regularized_lower_gamma: log_x is NaN");
  if (log_x == -std::numeric_limits<double>::infinity()) return log_x;
  if (log_x == std::numeric_limits<double>::infinity()) return 0.0;

  const double x = std::exp(log_x);
  if (x < a + 1.0) {
    return a * log_x - x - std::lgamma(a + 1.0) + std::log(lower_gamma_series(a, x));
  }
  const double q = std::exp(-x + a * log_x - std::lgamma(a)) * gamma_continued_fraction(a, x);
  return std::log1p(-q);
}

}  // namespace qtail::specfun
