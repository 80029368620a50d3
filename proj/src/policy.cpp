#include "qtail/policy.hpp"

#include <cmath>
#include <limits>

#include "qtail/detail/format.hpp"
#include "qtail/error.hpp"

namespace qtail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_link(const LinkParams& link) {
  if (!std::isfinite(link.arrival) || link.arrival <= 0.0) throw DomainError("link: arrival must be positive");
  if (!std::isfinite(link.t0b) || link.t0b <= 0.0) throw DomainError("link: t0b must be positive");
  if (!std::isfinite(link.noise) || link.noise <= 0.0) throw DomainError("link: noise must be positive");
}

void check_state(double q, double gain) {
  if (!(q >= 0.0) || !(gain >= 0.0)) throw DomainError("action: q and gain must be >= 0");
}

}  // namespace

double transmit_power(double served, double gain, const LinkParams& link) {
  if (served <= 0.0) return 0.0;
  if (gain <= 0.0) return kInf;
  return link.noise / gain * std::expm1(served / link.t0b);
}

ThresholdPolicy::ThresholdPolicy(PkSequence pk, ChannelModel channel, LinkParams link, int cache_cap)
    : pk_(std::move(pk)), channel_(std::move(channel)), link_(link) {
  check_link(link_);
  if (link_.arrival != 1.0) {
    throw DomainError("threshold policy: the integer-state rule needs unit arrivals (A = 1)");
  }
  if (cache_cap < 0) throw DomainError("threshold policy: cache_cap must be >= 0");
  log_thresholds_.reserve(static_cast<std::size_t>(cache_cap) + 1);
  thresholds_.reserve(static_cast<std::size_t>(cache_cap) + 1);
  for (int k = 0; k <= cache_cap; ++k) {
    log_thresholds_.push_back(compute_log_threshold(k));
    thresholds_.push_back(std::exp(log_thresholds_.back()));
  }
}

double ThresholdPolicy::compute_log_threshold(int k) const {
  const double lp = pk_.log_p(k);
  if (lp == 0.0) return kInf;
  return channel_.log_quantile(lp);
}

double ThresholdPolicy::log_threshold(int k) const {
  if (k < 0) throw DomainError("threshold: k must be >= 0");
  if (static_cast<std::size_t>(k) < log_thresholds_.size()) return log_thresholds_[k];
  return compute_log_threshold(k);
}

double ThresholdPolicy::threshold(int k) const {
  if (k >= 0 && static_cast<std::size_t>(k) < thresholds_.size()) return thresholds_[k];
  return std::exp(log_threshold(k));
}

Action ThresholdPolicy::action(double q, double gain) const {
  check_state(q, gain);
  const int k = static_cast<int>(q);
  if (gain < threshold(k)) return {};
  const double s = units(k);
  if (gain == 0.0) return {s, kInf, true};
  return {s, transmit_power(s, gain, link_), false};
}

FixedPowerPolicy::FixedPowerPolicy(double power, LinkParams link) : power_(power), link_(link) {
  check_link(link_);
  if (!std::isfinite(power) || power <= 0.0) throw DomainError("fixed power: power must be positive");
}

Action FixedPowerPolicy::action(double q, double gain) const {
  check_state(q, gain);
  const double rate = link_.t0b * std::log1p(gain * power_ / link_.noise);
  return {std::min(rate, q + link_.arrival), power_, false};
}

TransmitAllPolicy::TransmitAllPolicy(LinkParams link) : link_(link) { check_link(link_); }

Action TransmitAllPolicy::action(double q, double gain) const {
  check_state(q, gain);
  const double s = q + link_.arrival;
  return {s, transmit_power(s, gain, link_), gain == 0.0};
}

Action act(const Policy& policy, double q, double gain) {
  return std::visit([&](const auto& p) { return p.action(q, gain); }, policy);
}

const LinkParams& link_of(const Policy& policy) {
  return std::visit([](const auto& p) -> const LinkParams& { return p.link(); }, policy);
}

std::vector<double> log_breakpoints(const Policy& policy, double q) {
  if (const auto* tp = std::get_if<ThresholdPolicy>(&policy)) {
    const double log_h = tp->log_threshold(static_cast<int>(q));
    if (std::isfinite(log_h)) return {log_h};
  }
  return {};
}

bool integer_state(const Policy& policy) { return !std::holds_alternative<FixedPowerPolicy>(policy); }

std::string describe(const Policy& policy) {
  if (const auto* tp = std::get_if<ThresholdPolicy>(&policy)) return "threshold(" + tp->pk().describe() + ")";
  if (const auto* fp = std::get_if<FixedPowerPolicy>(&policy)) {
    return "fixed_power(P=" + detail::format_double(fp->power()) + ")";
  }
  return "transmit_all";
}

Policy make_policy(const PolicySpec& spec, const ChannelModel& channel, const LinkParams& link, int cache_cap) {
  if (const auto* t = std::get_if<ThresholdSpec>(&spec)) return ThresholdPolicy(t->pk, channel, link, cache_cap);
  if (const auto* f = std::get_if<FixedPowerSpec>(&spec)) return FixedPowerPolicy(f->power, link);
  return TransmitAllPolicy(link);
}

std::string describe(const PolicySpec& spec) {
  if (const auto* t = std::get_if<ThresholdSpec>(&spec)) return "threshold(" + t->pk.describe() + ")";
  if (const auto* f = std::get_if<FixedPowerSpec>(&spec)) {
    return "fixed_power(P=" + detail::format_double(f->power) + ")";
  }
  return "transmit_all";
}

}  // namespace qtail
