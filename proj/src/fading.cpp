#include "qtail/fading.hpp"

#include <cmath>
#include <limits>

#include "qtail/detail/format.hpp"
#include "qtail/error.hpp"
#include "qtail/quadrature.hpp"
#include "qtail/specfun.hpp"

namespace qtail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

void require_positive(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Rayleigh: return "rayleigh";
    case ChannelKind::Nakagami: return "nakagami";
    case ChannelKind::ImpulseMixture: return "impulse_mixture";
    case ChannelKind::Static: return "static";
  }
  return "unknown";
}

ChannelModel ChannelModel::rayleigh(double omega) {
  require_positive(omega, "rayleigh: omega");
  ChannelModel c;
  c.kind_ = ChannelKind::Rayleigh;
  c.omega_ = omega;
  return c;
}

ChannelModel ChannelModel::nakagami(double m, double omega) {
  if (!std::isfinite(m) || m < 0.5) throw DomainError("nakagami: m must be >= 0.5");
  require_positive(omega, "nakagami: omega");
  ChannelModel c;
  c.kind_ = ChannelKind::Nakagami;
  c.m_ = m;
  c.omega_ = omega;
  return c;
}

ChannelModel ChannelModel::static_gain(double gain) {
  require_positive(gain, "static: gain");
  ChannelModel c;
  c.kind_ = ChannelKind::Static;
  c.gain_ = gain;
  c.omega_ = gain;
  return c;
}

ChannelModel ChannelModel::impulse_mixture(double p_outage, const ChannelModel& base) {
  if (!(p_outage >= 0.0 && p_outage < 1.0)) {
    throw DomainError("impulse_mixture: p_outage must lie in [0, 1)");
  }
  if (base.kind_ == ChannelKind::ImpulseMixture) {
    throw DomainError("impulse_mixture: base must be a continuous or static model");
  }
  ChannelModel c;
  c.kind_ = ChannelKind::ImpulseMixture;
  c.p_outage_ = p_outage;
  c.m_ = base.m_;
  c.omega_ = base.omega_;
  c.gain_ = base.gain_;
  c.base_ = std::make_shared<const ChannelModel>(base);
  return c;
}

bool ChannelModel::has_density() const noexcept {
  const ChannelKind k = base().kind_;
  return k == ChannelKind::Rayleigh || k == ChannelKind::Nakagami;
}

double ChannelModel::pdf(double x) const {
  if (!(x > 0.0)) throw DomainError("pdf: x must be positive");
  switch (kind_) {
    case ChannelKind::Rayleigh:
      return std::exp(-x / omega_) / omega_;
    case ChannelKind::Nakagami: {
      const double rate = m_ / omega_;
      return std::exp(m_ * std::log(rate) + (m_ - 1.0) * std::log(x) - rate * x - std::lgamma(m_));
    }
    case ChannelKind::ImpulseMixture:
      return (1.0 - p_outage_) * base_->pdf(x);
    case ChannelKind::Static:
      break;
  }
  throw DomainError("pdf: static gain has no density");
}

double ChannelModel::cdf(double x) const {
  if (std::isnan(x)) throw DomainError("cdf: x is NaN");
  if (x < 0.0) return 0.0;
  switch (kind_) {
    case ChannelKind::Rayleigh:
      return -std::expm1(-x / omega_);
    case ChannelKind::Nakagami:
      return specfun::regularized_lower_gamma(m_, m_ * x / omega_);
    case ChannelKind::ImpulseMixture:
      return p_outage_ + (1.0 - p_outage_) * base_->cdf(x);
    case ChannelKind::Static:
      return x >= gain_ ? 1.0 : 0.0;
  }
  return 0.0;
}

double ChannelModel::log_cdf(double log_x) const {
  if (std::isnan(log_x)) throw DomainError("log_cdf: NaN argument");
  switch (kind_) {
    case ChannelKind::Rayleigh: {
      if (log_x == -kInf) return -kInf;
      const double log_z = log_x - std::log(omega_);
      if (log_z < -700.0) return log_z;
      return specfun::log1mexp(-std::exp(log_z));
    }
    case ChannelKind::Nakagami:
      return specfun::log_regularized_lower_gamma(m_, log_x + std::log(m_ / omega_));
    case ChannelKind::ImpulseMixture: {
      const double cont = std::log1p(-p_outage_) + base_->log_cdf(log_x);
      return p_outage_ > 0.0 ? log_add_exp(std::log(p_outage_), cont) : cont;
    }
    case ChannelKind::Static:
      return log_x >= std::log(gain_) ? 0.0 : -kInf;
  }
  return -kInf;
}

double ChannelModel::quantile(double p) const {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in [0, 1)");
  if (p == 0.0) return 0.0;
  return std::exp(log_quantile(std::log(p)));
}

double ChannelModel::log_quantile(double log_p) const {
  if (std::isnan(log_p) || log_p >= 0.0) throw DomainError("log_quantile: need log_p < 0");
  if (log_p == -kInf) return -kInf;

  switch (kind_) {
    case ChannelKind::Static:
      return std::log(gain_);
    case ChannelKind::ImpulseMixture: {
      if (p_outage_ == 0.0) return base_->log_quantile(log_p);
      const double p = std::exp(log_p);
      if (p <= p_outage_) return -kInf;
      return base_->log_quantile(std::log((p - p_outage_) / (1.0 - p_outage_)));
    }
    case ChannelKind::Rayleigh:
      break;
    case ChannelKind::Nakagami:
      if (m_ != 1.0) {
        // Bisection on u = ln x; log_cdf is increasing in u.
        const double log_rate = std::log(m_ / omega_);
        const double guess = (log_p + std::lgamma(m_ + 1.0)) / m_ - log_rate;
        double lo = std::min(guess, 0.0) - 1.0;
        double hi = std::max(guess, 0.0) + 1.0;
        for (double step = 1.0; log_cdf(lo) >= log_p; step *= 2.0) lo -= step;
        for (double step = 1.0; log_cdf(hi) < log_p; step *= 2.0) {
          hi += step;
          if (hi > 700.0) throw NumericError("log_quantile: failed to bracket");
        }
        for (int i = 0; i < 400; ++i) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          if (log_cdf(mid) < log_p) {
            lo = mid;
          } else {
            hi = mid;
          }
          if (hi - lo <= 1e-16 * std::max(1.0, std::fabs(hi))) break;
        }
        return 0.5 * (lo + hi);
      }
      break;
  }
  // Exponential gain (Rayleigh, or Nakagami with m = 1): x = -Ω ln(1 - p).
  if (log_p < -700.0) return log_p + std::log(omega_);
  return std::log(omega_) + std::log(-std::log1p(-std::exp(log_p)));
}

double ChannelModel::mean() const noexcept {
  switch (kind_) {
    case ChannelKind::ImpulseMixture: return (1.0 - p_outage_) * base_->mean();
    case ChannelKind::Static: return gain_;
    default: return omega_;
  }
}

SmallXExponent ChannelModel::small_x_exponent() const noexcept {
  switch (kind_) {
    case ChannelKind::Rayleigh: return {0.0, false};
    case ChannelKind::Nakagami: return {m_ - 1.0, false};
    case ChannelKind::Static: return {kInf, false};
    case ChannelKind::ImpulseMixture: return {base_->small_x_exponent().beta, p_outage_ > 0.0};
  }
  return {};
}

GainSampler ChannelModel::sampler() const { return GainSampler(*this); }

double ChannelModel::expectation(const std::function<double(double)>& f) const {
  switch (kind_) {
    case ChannelKind::Static:
      return f(gain_);
    case ChannelKind::ImpulseMixture: {
      const double cont = (1.0 - p_outage_) * base_->expectation(f);
      return p_outage_ > 0.0 ? p_outage_ * f(0.0) + cont : cont;
    }
    default: {
      const auto r = quad::integrate_log_scale([&](double x) { return f(x) * pdf(x); }, 0.0);
      if (!r.converged) {
        throw NumericError("expectation over " + describe() + ": quadrature did not converge (error " +
                           detail::format_double(r.error) + ")");
      }
      return r.value;
    }
  }
}

std::string ChannelModel::describe() const {
  using detail::format_double;
  switch (kind_) {
    case ChannelKind::Rayleigh:
      return "rayleigh(omega=" + format_double(omega_) + ")";
    case ChannelKind::Nakagami:
      return "nakagami(m=" + format_double(m_) + ",omega=" + format_double(omega_) + ")";
    case ChannelKind::Static:
      return "static(gain=" + format_double(gain_) + ")";
    case ChannelKind::ImpulseMixture:
      return "impulse_mixture(p_outage=" + format_double(p_outage_) + ",base=" + base_->describe() + ")";
  }
  return "unknown";
}

bool operator==(const ChannelModel& a, const ChannelModel& b) {
  if (a.kind_ != b.kind_ || a.m_ != b.m_ || a.omega_ != b.omega_ || a.gain_ != b.gain_ ||
      a.p_outage_ != b.p_outage_) {
    return false;
  }
  if (a.base_ && b.base_) return *a.base_ == *b.base_;
  return !a.base_ && !b.base_;
}

GainSampler::GainSampler(const ChannelModel& model)
    : kind_(model.base().kind()),
      omega_(model.base().omega()),
      gain_(model.base().gain()),
      p_outage_(model.p_outage()),
      gamma_(model.base().m(), model.base().omega() / model.base().m()) {}

double GainSampler::operator()(SplitMix64& rng) {
  if (p_outage_ > 0.0 && rng.uniform_open0() <= p_outage_) return 0.0;
  switch (kind_) {
    case ChannelKind::Rayleigh:
      return -omega_ * std::log(rng.uniform_open0());
    case ChannelKind::Nakagami:
      return gamma_(rng);
    case ChannelKind::Static:
      return gain_;
    case ChannelKind::ImpulseMixture:
      break;
  }
  return 0.0;
}

}  // namespace qtail
