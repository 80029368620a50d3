#include "qtail/power.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "qtail/detail/format.hpp"
#include "qtail/error.hpp"
#include "qtail/quadrature.hpp"
#include "qtail/specfun.hpp"

namespace qtail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kResidualTerms = 200;

bool exponential_gain(const ChannelModel& base) {
  return base.kind() == ChannelKind::Rayleigh || (base.kind() == ChannelKind::Nakagami && base.m() == 1.0);
}

double log_service_factor(int k, const LinkParams& link) {
  return std::log(link.noise) + std::log(std::expm1(ThresholdPolicy::units(k) / link.t0b));
}

const ChannelModel& density_base(const ChannelModel& channel) {
  const ChannelModel& base = channel.base();
  if (!base.has_density()) throw DomainError("per-state power needs a channel with a density: " + channel.describe());
  return base;
}

// ln ∫_h^∞ g(x)/x dx for a Rayleigh or Nakagami density, h = e^{log_h}.
double log_inverse_moment_above(const ChannelModel& base, double log_h) {
  if (log_h == kInf) return -kInf;
  const double log_omega = std::log(base.omega());
  if (exponential_gain(base)) {
    if (log_h == -kInf) return kInf;
    return specfun::log_exp_integral_e1(log_h - log_omega) - log_omega;
  }
  const double m = base.m();
  const double log_rate = std::log(m) - log_omega;
  return log_rate - std::lgamma(m) + specfun::log_upper_incomplete_gamma(m - 1.0, log_h + log_rate);
}

// ln of the E1 majorant e^{-y}·ln(1 + 1/y) at y = -ln(1 - p_k), Ω = 1 scale.
double log_e1_majorant(const PkSequence& pk, int k) {
  const double lp = pk.log_p(k);
  const double log_mu = pk.log_mu(k);
  if (lp == -kInf) return log_mu + pk.log_neg_log_p(k);
  const double log_y = lp < -30.0 ? lp : std::log(-specfun::log1mexp(lp));
  const double log_inv = -log_y;
  const double log_log1p = log_inv > 700.0 ? std::log(log_inv) : std::log(std::log1p(std::exp(log_inv)));
  return log_mu + log_log1p;
}

}  // namespace

double log_per_state_power(const ChannelModel& channel, double log_p_k, int k, const LinkParams& link) {
  if (k < 0) throw DomainError("per_state_power: k must be >= 0");
  if (std::isnan(log_p_k) || log_p_k > 0.0) throw DomainError("per_state_power: need ln p_k <= 0");
  const ChannelModel& base = density_base(channel);
  if (log_p_k == 0.0) return -kInf;
  const double log_h = channel.log_quantile(log_p_k);
  if (log_h == -kInf && channel.has_atom()) return kInf;
  const double log_weight = channel.has_atom() ? std::log1p(-channel.p_outage()) : 0.0;
  return log_service_factor(k, link) + log_weight + log_inverse_moment_above(base, log_h);
}

double per_state_power(const ChannelModel& channel, double log_p_k, int k, const LinkParams& link) {
  return std::exp(log_per_state_power(channel, log_p_k, k, link));
}

double log_per_state_power(const ChannelModel& channel, const PkSequence& pk, int k, const LinkParams& link) {
  const double lp = pk.log_p(k);
  if (lp > -kInf) return log_per_state_power(channel, lp, k, link);
  const ChannelModel& base = density_base(channel);
  if (channel.has_atom()) return kInf;
  if (!exponential_gain(base)) return log_per_state_power(channel, lp, k, link);
  // h/Ω ≈ p_k, so E1 = -ln p_k - γ + O(p_k).
  const double log_neg_lp = pk.log_neg_log_p(k);
  const double log_omega = std::log(base.omega());
  return log_service_factor(k, link) + log_neg_lp + std::log1p(-std::numbers::egamma * std::exp(-log_neg_lp)) -
         log_omega;
}

PowerReport threshold_policy_avg_power(const ChannelModel& channel, const PkSequence& pk, int K,
                                       const LinkParams& link) {
  if (link.arrival != 1.0) throw DomainError("threshold policy power: arrival must be 1");
  PowerReport rep;
  rep.dist = stationary(pk, K);

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) {
    const double lc = log_per_state_power(channel, pk, k, link);
    rep.log_per_state.push_back(lc);
    rep.per_state.push_back(std::exp(lc));
    const double lpi = rep.dist.log_pi[k];
    terms.push_back(lpi == -kInf ? -kInf : lpi + lc);
  }
  rep.log_p_avg = log_sum_exp(terms);
  rep.p_avg = std::exp(rep.log_p_avg);
  rep.divergent = !rep.dist.tail_bounded || !std::isfinite(rep.p_avg);

  if (!rep.dist.tail_bounded) {
    rep.truncation_residual = kInf;
    rep.residual_bounded = false;
    return rep;
  }

  // Continue the chain past K: π_{k} = π_{k-1}·p_{k-1}/μ_k, with each C_k
  // replaced by its E1 majorant on exponential channels.
  const ChannelModel& base = density_base(channel);
  const bool use_majorant = exponential_gain(base) && !channel.has_atom();
  std::vector<double> tail_terms;
  double log_pi = rep.dist.log_pi[K];
  double prev = -kInf, last = -kInf;
  for (int k = K + 1; k <= K + kResidualTerms; ++k) {
    log_pi += pk.log_p(k - 1) - pk.log_mu(k);
    if (log_pi == -kInf) break;
    const double lc = use_majorant
                          ? log_service_factor(k, link) + log_e1_majorant(pk, k) - std::log(base.omega())
                          : log_per_state_power(channel, pk, k, link);
    prev = last;
    last = log_pi + lc;
    tail_terms.push_back(last);
  }
  double log_residual = log_sum_exp(tail_terms);
  if (last > -kInf && static_cast<int>(tail_terms.size()) == kResidualTerms) {
    const double log_r = last - prev;
    if (!(log_r < 0.0)) {
      rep.residual_bounded = false;
      rep.truncation_residual = kInf;
      rep.divergent = true;
      return rep;
    }
    const double log_rest = last + log_r - specfun::log1mexp(log_r);
    log_residual = log_sum_exp(std::vector<double>{log_residual, log_rest});
  }
  rep.truncation_residual = std::exp(log_residual);
  return rep;
}

TransmitAllReport transmit_all_power(const ChannelModel& channel, const LinkParams& link) {
  TransmitAllReport rep;
  const double scale = link.noise * std::expm1(link.arrival / link.t0b);
  if (channel.has_atom()) {
    rep.divergent = true;
    rep.value = kInf;
    rep.reason = "atom at zero gain";
    return rep;
  }
  const ChannelModel& base = channel.base();
  if (base.kind() == ChannelKind::Static) {
    rep.value = scale / base.gain();
    return rep;
  }

  for (double cutoff : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const auto r = quad::integrate_log_scale([&](double x) { return channel.pdf(x) / x; }, cutoff);
    rep.cutoff_probes.emplace_back(cutoff, scale * r.value);
  }
  const double beta = channel.small_x_exponent().beta;
  if (beta <= 0.0) {
    rep.divergent = true;
    rep.value = kInf;
    char buf[96];
    std::snprintf(buf, sizeof buf, "density ~ x^%g near zero; E{1/|h|^2} diverges", beta);
    rep.reason = buf;
    return rep;
  }
  const double m = base.m();
  rep.value = scale * m / (base.omega() * (m - 1.0));
  return rep;
}

GenericPowerReport generic_avg_power(const ChannelModel& channel, const Policy& policy,
                                     const StationaryDistribution& dist) {
  if (!integer_state(policy)) throw DomainError("generic_avg_power: policy must keep an integer queue");
  const ChannelModel& base = channel.base();
  const double beta = channel.small_x_exponent().beta;
  const double log_min_gain = std::log(std::numeric_limits<double>::min());

  GenericPowerReport rep;
  rep.per_state.assign(dist.log_pi.size(), std::numeric_limits<double>::quiet_NaN());
  for (int q = 0; q <= dist.truncation; ++q) {
    const double pi = std::exp(dist.log_pi[q]);
    if (pi == 0.0) continue;
    const double qd = q;
    double mean_power = 0.0;

    if (channel.has_atom() && act(policy, qd, 0.0).served > 0.0) mean_power = kInf;

    if (mean_power < kInf && base.kind() == ChannelKind::Static) {
      mean_power += (1.0 - channel.p_outage()) * act(policy, qd, base.gain()).power;
    } else if (mean_power < kInf) {
      std::vector<double> edges{-kInf};
      for (double b : log_breakpoints(policy, qd)) edges.push_back(b);
      edges.push_back(kInf);
      if (edges[1] < log_min_gain) {
        throw NumericError("generic_avg_power: gain breakpoint of state q=" + std::to_string(q) +
                           " lies below the double range");
      }
      if (act(policy, qd, std::numeric_limits<double>::min()).served > 0.0 && beta <= 0.0) {
        mean_power = kInf;
      } else {
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
          const auto r = quad::integrate_log_range(
              [&](double x) {
                const double p = act(policy, qd, x).power;
                return p == 0.0 ? 0.0 : p * channel.pdf(x);
              },
              edges[i], edges[i + 1]);
          if (!r.converged) {
            throw NumericError("generic_avg_power: quadrature did not converge in state q=" + std::to_string(q) +
                               " (error " + detail::format_double(r.error) + ")");
          }
          mean_power += r.value;
        }
      }
    }
    rep.per_state[q] = mean_power;
    if (mean_power == kInf) rep.divergent = true;
    rep.value += pi * mean_power;
  }
  return rep;
}

}  // namespace qtail
