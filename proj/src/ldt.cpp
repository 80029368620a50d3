#include "qtail/ldt.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qtail/detail/format.hpp"

namespace qtail {
namespace {

constexpr double kThetaLow = 1e-8;
constexpr double kThetaCap = 1e4;

void check_power(double power) {
  if (!std::isfinite(power) || power <= 0.0) throw DomainError("ldt: power must be positive");
}

}  // namespace

double fixed_power_rate(double gain, double power, const LinkParams& link) {
  return link.t0b * std::log1p(gain * power / link.noise);
}

double mean_service_rate(const ChannelModel& channel, double power, const LinkParams& link) {
  check_power(power);
  return channel.expectation([&](double h) { return fixed_power_rate(h, power, link); });
}

double effective_capacity(const ChannelModel& channel, double power, const LinkParams& link, double theta) {
  check_power(power);
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("effective_capacity: theta must be positive");
  // ln E{e^{-θS}} = log1p(E{expm1(-θS)}) keeps precision as θ → 0.
  const double m = channel.expectation([&](double h) { return std::expm1(-theta * fixed_power_rate(h, power, link)); });
  return -std::log1p(m) / theta;
}

LdtSolution solve_decay_exponent(const ChannelModel& channel, double power, const LinkParams& link) {
  check_power(power);
  const double arrival = link.arrival;
  LdtSolution sol;
  sol.mean_service = mean_service_rate(channel, power, link);
  if (!(arrival < sol.mean_service)) {
    throw StabilityError("ldt: arrival " + detail::format_double(arrival) + " >= mean service rate " +
                             detail::format_double(sol.mean_service) + "; queue is unstable",
                         sol.mean_service);
  }
  auto excess = [&](double theta) { return effective_capacity(channel, power, link, theta) - arrival; };

  double lo = kThetaLow;
  if (!(excess(lo) > 0.0)) {
    throw StabilityError("ldt: effective capacity at theta=1e-8 does not exceed the arrival rate",
                         sol.mean_service);
  }
  double hi = 1.0;
  while (excess(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kThetaCap) {
      throw NumericError("ldt: effective capacity stays above the arrival rate up to theta=1e4; "
                         "the minimum service rate may exceed the arrival rate");
    }
  }
  sol.bracket_low = lo;
  sol.bracket_high = hi;

  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (excess(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r_lo = excess(lo), r_hi = excess(hi);
  sol.theta = std::fabs(r_lo) <= std::fabs(r_hi) ? lo : hi;
  sol.residual = std::fabs(r_lo) <= std::fabs(r_hi) ? r_lo : r_hi;
  return sol;
}

double tail_slope_estimate(std::span<const std::pair<double, double>> eps_curve) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [q, e] : eps_curve) {
    if (e > 0.0) pts.emplace_back(q, std::log(e));
  }
  if (pts.size() < 5) throw DomainError("tail_slope_estimate: need at least 5 points with eps > 0");
  std::sort(pts.begin(), pts.end());
  const auto [lo_it, hi_it] =
      std::minmax_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  if (hi_it->second - lo_it->second < std::log(10.0)) {
    throw DomainError("tail_slope_estimate: eps spans less than one decade");
  }

  const std::size_t start = pts.size() / 2;
  const double n = static_cast<double>(pts.size() - start);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = start; i < pts.size(); ++i) {
    mx += pts[i].first;
    my += pts[i].second;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = start; i < pts.size(); ++i) {
    sxx += (pts[i].first - mx) * (pts[i].first - mx);
    sxy += (pts[i].first - mx) * (pts[i].second - my);
  }
  if (sxx == 0.0) throw DomainError("tail_slope_estimate: degenerate q grid");
  return -sxy / sxx;
}

}  // namespace qtail
