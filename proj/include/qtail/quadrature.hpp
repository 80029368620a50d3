#pragma once

#include <functional>
#include <limits>

namespace qtail::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  double l1 = 0.0;     // ∫|f|, used to judge the error estimate
  bool converged = false;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on [a, b]; either end may be infinite.
Result integrate(const Integrand& f, double a, double b);

/// ∫_lo^hi f(x) dx evaluated in u = ln x, which resolves integrands that are
/// flat over many decades near 0 (e^{-x}/x with a tiny lower limit, x^{m-2}).
/// lo ≥ 0, hi may be +inf.
Result integrate_log_scale(const Integrand& f, double lo,
                           double hi = std::numeric_limits<double>::infinity());

/// Same substitution with the limits given as ln x, so that ranges reaching
/// below the smallest double are representable. Points whose x underflows or
/// overflows contribute 0.
Result integrate_log_range(const Integrand& f, double log_lo, double log_hi);

}  // namespace qtail::quad
