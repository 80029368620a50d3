#include "qtail/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qtail/error.hpp"

namespace qtail::quad {
namespace {

constexpr unsigned kMaxDepth = 20;
constexpr double kTolerance = 1e-13;
constexpr double kAcceptRelative = 1e-9;

}  // namespace

Result integrate(const Integrand& f, double a, double b) {
  if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate: NaN bound");
  Result r;
  if (a == b) {
    r.converged = true;
    return r;
  }
  r.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, kMaxDepth, kTolerance, &r.error, &r.l1);
  r.converged = std::isfinite(r.value) && r.error <= kAcceptRelative * r.l1 + 1e-300;
  return r;
}

Result integrate_log_scale(const Integrand& f, double lo, double hi) {
  if (!(lo >= 0.0) || !(hi >= lo)) throw DomainError("integrate_log_scale: need 0 <= lo <= hi");
  const double ulo = lo == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(lo);
  const double uhi = std::isinf(hi) ? std::numeric_limits<double>::infinity() : std::log(hi);
  return integrate_log_range(f, ulo, uhi);
}

Result integrate_log_range(const Integrand& f, double ulo, double uhi) {
  if (std::isnan(ulo) || std::isnan(uhi) || uhi < ulo) throw DomainError("integrate_log_range: need log_lo <= log_hi");
  auto g = [&f](double u) {
    const double x = std::exp(u);
    if (x == 0.0 || std::isinf(x)) return 0.0;
    return f(x) * x;
  };

  // Split at u = 0 so each piece has at most one infinite end.
  Result total;
  total.converged = true;
  auto accumulate = [&total](const Result& piece) {
    total.value += piece.value;
    total.error += piece.error;
    total.l1 += piece.l1;
    total.converged = total.converged && piece.converged;
  };
  if (ulo < 0.0 && uhi > 0.0) {
    accumulate(integrate(g, ulo, 0.0));
    accumulate(integrate(g, 0.0, uhi));
  } else {
    accumulate(integrate(g, ulo, uhi));
  }
  total.converged = total.converged && total.error <= kAcceptRelative * total.l1 + 1e-300;
  return total;
}

}  // namespace qtail::quad
