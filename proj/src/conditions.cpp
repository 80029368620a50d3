#include "qtail/conditions.hpp"

#include <cmath>

#include "qtail/detail/format.hpp"
#include "qtail/error.hpp"
#include "qtail/power.hpp"

namespace qtail {
namespace {

// ln ln(1 + 1/p_k).
double log_log_inverse(const PkSequence& pk, int k) {
  const double lp = pk.log_p(k);
  if (lp < -30.0) return pk.log_neg_log_p(k);
  return std::log(std::log1p(std::exp(-lp)));
}

// The two limits behind smooth_origin_check, recorded separately.
void add_smooth_origin_parts(const ChannelModel& channel, std::vector<Evidence>& out) {
  const SmallXExponent sx = channel.small_x_exponent();
  out.push_back({"origin_density_limit", !sx.has_atom && sx.beta > 0.0, sx.beta, "g(x) ~ x^beta as x -> 0+"});
  out.push_back({"origin_derivative_limit", !sx.has_atom && (sx.beta >= 1.0), sx.beta - 1.0,
                 "g'(x) ~ x^(beta-1) as x -> 0+"});
}

Evidence direct_inversion(const ChannelModel& channel) {
  const TransmitAllReport ta = transmit_all_power(channel);
  Evidence e{"direct_inversion_integral", !ta.divergent, ta.value, ta.divergent ? ta.reason : "finite"};
  return e;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::ZeroViolation: return "S1_zero_violation";
    case Scenario::LinearDecay: return "S2_linear_decay";
    case Scenario::ArbitraryDecay: return "S3_arbitrary_decay";
    case Scenario::Unclassified: return "unclassified";
  }
  return "unclassified";
}

std::string short_name(Scenario s) {
  switch (s) {
    case Scenario::ZeroViolation: return "S1";
    case Scenario::LinearDecay: return "S2";
    case Scenario::ArbitraryDecay: return "S3";
    case Scenario::Unclassified: return "unclassified";
  }
  return "unclassified";
}

const Evidence* ScenarioVerdict::find(const std::string& name) const {
  for (const auto& e : evidence) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

Evidence smooth_origin_check(const ChannelModel& channel) {
  const SmallXExponent sx = channel.small_x_exponent();
  Evidence e{"smooth_origin", false, sx.beta, ""};
  if (sx.has_atom) {
    e.detail = "atom at zero";
  } else if (sx.beta >= 1.0) {
    e.holds = true;
    e.detail = "g(0+) = 0, g'(0+) finite";
  } else if (sx.beta > 0.0) {
    e.detail = "g(0+) = 0 but g'(x) ~ x^(beta-1) diverges";
  } else {
    e.detail = "g(0+) > 0";
  }
  return e;
}

Evidence zero_atom_check(const ChannelModel& channel) {
  return {"zero_atom", channel.has_atom(), channel.p_outage(),
          channel.has_atom() ? "point mass at zero gain" : "no point mass at zero"};
}

RatioTestResult ratio_test(const PkSequence& pk, int horizon, int window) {
  if (horizon < 10) throw DomainError("ratio_test: horizon must be >= 10");
  if (window < 2 || window > horizon) throw DomainError("ratio_test: window must lie in [2, horizon]");

  RatioTestResult res;
  res.log_ratios.reserve(static_cast<std::size_t>(horizon));
  double l_here = log_log_inverse(pk, 0);
  for (int k = 0; k < horizon; ++k) {
    const double l_next = log_log_inverse(pk, k + 1);
    res.log_ratios.push_back(pk.log_p(k) - pk.log_mu(k) + l_next - l_here);
    l_here = l_next;
  }

  const auto first = res.log_ratios.end() - window;
  bool below_one = true, nonincreasing = true, nondecreasing = true;
  for (auto it = first; it != res.log_ratios.end(); ++it) {
    below_one = below_one && *it < 0.0;
    if (it != first) {
      nonincreasing = nonincreasing && *it <= *(it - 1);
      nondecreasing = nondecreasing && *it >= *(it - 1);
    }
  }
  const double last = res.log_ratios.back();
  res.limit_estimate = std::exp(last);
  if (below_one && nonincreasing) {
    res.outcome = RatioOutcome::Pass;
  } else if (last >= 0.0 && nondecreasing) {
    res.outcome = RatioOutcome::Fail;
  }
  return res;
}

ScenarioVerdict classify_nakagami(double m) {
  if (!(m >= 0.5)) throw DomainError("classify_nakagami: m must be >= 0.5");
  const ChannelModel channel = ChannelModel::nakagami(m);

  ScenarioVerdict v;
  v.evidence.push_back(smooth_origin_check(channel));
  add_smooth_origin_parts(channel, v.evidence);
  v.evidence.push_back(zero_atom_check(channel));
  Evidence inversion = direct_inversion(channel);

  if (m >= 2.0) {
    v.scenario = Scenario::ZeroViolation;
  } else if (m >= 1.0) {
    v.scenario = Scenario::ArbitraryDecay;
    if (inversion.holds) {
      inversion.detail = "stronger-than-labeled";
      v.notes.push_back("transmit-all power is finite (" + detail::format_double(inversion.value) +
                        "), which already meets the S1 definition; the S3 label is kept");
    }
  } else {
    v.scenario = Scenario::LinearDecay;
  }
  v.evidence.push_back(std::move(inversion));
  return v;
}

ScenarioVerdict classify(const ChannelModel& channel, const std::vector<PkSequence>& sequences) {
  ScenarioVerdict v;
  const ChannelModel& base = channel.base();
  if (channel.has_atom()) {
    v.scenario = Scenario::LinearDecay;
    v.evidence.push_back(smooth_origin_check(channel));
    add_smooth_origin_parts(channel, v.evidence);
    v.evidence.push_back(zero_atom_check(channel));
    v.evidence.push_back(direct_inversion(channel));
    v.notes.push_back("S3 membership undetermined for channels with an atom at zero");
  } else if (base.kind() == ChannelKind::Static) {
    v.scenario = Scenario::ZeroViolation;
    v.evidence.push_back(zero_atom_check(channel));
    v.evidence.push_back(direct_inversion(channel));
    v.notes.push_back("deterministic gain: channel inversion has finite power");
  } else {
    v = classify_nakagami(base.m());
    if (base.omega() != 1.0) v.notes.push_back("label depends on m only; omega scales power");
  }

  for (const auto& pk : sequences) {
    const RatioTestResult r = ratio_test(pk);
    std::string outcome = r.outcome == RatioOutcome::Pass   ? "pass"
                          : r.outcome == RatioOutcome::Fail ? "fail"
                                                            : "unclassified";
    v.evidence.push_back(Evidence{"ratio_test:" + pk.describe(), r.outcome == RatioOutcome::Pass,
                                  r.limit_estimate, outcome});
  }
  return v;
}

}  // namespace qtail
