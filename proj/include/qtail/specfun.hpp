#pragma once

// Exponential integral and incomplete gamma functions used by the per-state
// power expressions. All entry points are pure and thread-safe.

namespace qtail::specfun {

/// E1(x) = ∫_x^∞ e^{-t}/t dt for x > 0.
///
/// Series below x = 1, modified Lentz continued fraction above. Absolute
/// error ≤ 1e-12 on [1e-300, 700]; returns 0 once e^{-x} underflows.
/// Throws DomainError for x ≤ 0 or non-finite x.
double exp_integral_e1(double x);

/// ln E1(e^{log_x}). Finite for every finite log_x: tiny arguments use the
/// small-x expansion E1(x) = -γ - ln x + x - ..., large ones the continued
/// fraction without forming e^{-x}.
double log_exp_integral_e1(double log_x);

/// Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt for a ∈ (-1, ∞) \ {0}, x > 0.
/// Relative error ≤ 1e-10. a = 0 is rejected: use exp_integral_e1.
double upper_incomplete_gamma(double a, double x);

/// ln Γ(a, e^{log_x}); stays finite where Γ(a, x) itself would overflow
/// (a < 0, x → 0+) or underflow (x large).
double log_upper_incomplete_gamma(double a, double log_x);

/// Regularized lower incomplete gamma P(a, x) = γ(a, x)/Γ(a), a > 0, x ≥ 0.
double regularized_lower_gamma(double a, double x);

/// ln P(a, e^{log_x}), accurate when P underflows (x → 0+).
double log_regularized_lower_gamma(double a, double log_x);

/// ln(1 - e^{x}) for x ≤ 0, without cancellation at either end.
double log1mexp(double x);

}  // namespace qtail::specfun
