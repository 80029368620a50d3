#pragma once

#include <span>
#include <utility>

#include "qtail/error.hpp"
#include "qtail/fading.hpp"
#include "qtail/policy.hpp"

namespace qtail {

/// The queue is not stable: mean service ≤ arrival rate, so no positive
/// decay exponent exists.
class StabilityError : public DomainError {
 public:
  StabilityError(const std::string& message, double mean_service)
      : DomainError(message), mean_service_(mean_service) {}
  double mean_service() const noexcept { return mean_service_; }

 private:
  double mean_service_;
};

/// Nats served per slot at fixed power: T0B·ln(1 + h·P/σ²).
double fixed_power_rate(double gain, double power, const LinkParams& link);

/// E{T0B·ln(1 + h·P/σ²)}.
double mean_service_rate(const ChannelModel& channel, double power, const LinkParams& link = {});

/// Effective capacity of i.i.d. block fading at exponent θ:
/// -(1/θ)·ln E{e^{-θ·T0B·ln(1 + h·P/σ²)}}. Decreasing in θ.
double effective_capacity(const ChannelModel& channel, double power, const LinkParams& link, double theta);

struct LdtSolution {
  double theta = 0.0;
  double residual = 0.0;  ///< effective_capacity(theta) - arrival
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  double mean_service = 0.0;
};

/// θ > 0 with effective_capacity(θ) = A. The bracket starts at [1e-8, 1]
/// and doubles its upper end up to 1e4; then bisection to full precision.
/// Throws StabilityError when A ≥ E{service}, NumericError when the
/// bracket cap is hit.
LdtSolution solve_decay_exponent(const ChannelModel& channel, double power, const LinkParams& link = {});

/// θ̂ = -(slope of ln ε against q) over the upper half of the points in q.
/// Needs ≥ 5 points with ε > 0 spanning at least a factor 10.
double tail_slope_estimate(std::span<const std::pair<double, double>> eps_curve);

}  // namespace qtail
