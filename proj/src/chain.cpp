#include "qtail/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qtail/error.hpp"
#include "qtail/specfun.hpp"

namespace qtail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_q_th(const StationaryDistribution& dist, int q_th) {
  if (q_th < 0 || q_th >= dist.truncation) {
    throw DomainError("q_th=" + std::to_string(q_th) + " must lie in [0, K) with K=" +
                      std::to_string(dist.truncation));
  }
}

// ln(p_k / μ_{k+1}), the birth-death step ratio.
double log_step(const PkSequence& pk, int k) { return pk.log_p(k) - pk.log_mu(k + 1); }

double decay_coordinate(int decay_class, int q) {
  switch (decay_class) {
    case 0: return -static_cast<double>(q);
    case 1: return -std::exp(static_cast<double>(q));
    default: return -std::exp(std::exp(static_cast<double>(q)));
  }
}

struct LineFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

LineFit least_squares(const std::vector<double>& xs_in, const std::vector<double>& ys_in) {
  // Rescale to unit magnitude; the doubly exponential coordinate reaches
  // 1e175 and its squares would overflow.
  double sx = 0.0, sy = 0.0;
  for (double x : xs_in) sx = std::max(sx, std::fabs(x));
  for (double y : ys_in) sy = std::max(sy, std::fabs(y));
  if (sx == 0.0) sx = 1.0;
  if (sy == 0.0) sy = 1.0;
  const double n = static_cast<double>(xs_in.size());
  std::vector<double> xs, ys;
  for (double x : xs_in) xs.push_back(x / sx);
  for (double y : ys_in) ys.push_back(y / sy);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx * (sy / sx) : 0.0;
  fit.r_squared = (sxx > 0.0 && syy > 0.0) ? sxy * sxy / (sxx * syy) : (syy == 0.0 ? 1.0 : 0.0);
  return fit;
}

// Local slopes dy/dx over the upper half of the points keep growing: the
// coordinate decays too slowly to linearize the tail.
bool slopes_diverge(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t start = xs.size() / 2;
  if (xs.size() - start < 3) return false;
  std::vector<double> slopes;
  for (std::size_t i = start; i + 1 < xs.size(); ++i) {
    const double dx = xs[i + 1] - xs[i];
    if (dx != 0.0) slopes.push_back((ys[i + 1] - ys[i]) / dx);
  }
  if (slopes.size() < 2 || !(slopes.front() > 0.0)) return false;
  return slopes.back() > 1.5 * slopes.front();
}

}  // namespace

StationaryDistribution StationaryDistribution::degenerate_at(int q, int K) {
  if (K < 1 || q < 0 || q > K) throw DomainError("degenerate_at: need 0 <= q <= K, K >= 1");
  StationaryDistribution dist;
  dist.truncation = K;
  dist.log_pi.assign(static_cast<std::size_t>(K) + 1, -kInf);
  dist.log_pi[q] = 0.0;
  return dist;
}

double StationaryDistribution::pi(int k) const { return std::exp(log_pi_at(k)); }

double log_sum_exp_shifted(std::span<const double> xs, double shift) {
  if (shift == -kInf) return -kInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - shift);
  return shift + std::log(s);
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -kInf;
  return log_sum_exp_shifted(xs, *std::max_element(xs.begin(), xs.end()));
}

StationaryDistribution stationary(const PkSequence& pk, int K) {
  if (K < 1) throw DomainError("stationary: truncation K must be >= 1");
  for (int k = 0; k <= K; ++k) {
    const double lp = pk.log_p(k);
    if (std::isnan(lp) || lp >= 0.0) {
      throw DomainError("stationary: p_" + std::to_string(k) + " = 1 makes the chain degenerate");
    }
  }

  std::vector<double> raw(static_cast<std::size_t>(K) + 1, 0.0);
  for (int k = 1; k <= K; ++k) raw[k] = raw[k - 1] + log_step(pk, k - 1);
  const double log_z = log_sum_exp(raw);

  StationaryDistribution dist;
  dist.truncation = K;
  dist.log_pi.reserve(raw.size());
  for (double r : raw) dist.log_pi.push_back(r - log_z);

  // Beyond the explicit list the sequence is constant, so the worst step
  // ratio is attained within it or at its last value.
  double log_ratio = log_step(pk, K);
  if (pk.family() == PkFamily::Explicit || pk.family() == PkFamily::Constant) {
    const int last = std::max(K, static_cast<int>(pk.values().size()));
    for (int k = K + 1; k <= last; ++k) log_ratio = std::max(log_ratio, log_step(pk, k));
  }
  dist.tail_ratio = std::exp(log_ratio);
  if (log_ratio < 0.0) {
    dist.tail_mass_bound =
        log_ratio == -kInf ? 0.0 : std::exp(dist.log_pi[K] + log_ratio - specfun::log1mexp(log_ratio));
  } else {
    dist.tail_bounded = false;
    dist.tail_mass_bound = kInf;
  }
  return dist;
}

ViolationEstimate violation_probability(const StationaryDistribution& dist, int q_th) {
  check_q_th(dist, q_th);
  const std::span<const double> tail(dist.log_pi.data() + q_th + 1, dist.log_pi.size() - q_th - 1);
  ViolationEstimate est;
  est.log_lower = log_sum_exp(tail);
  est.lower = std::exp(est.log_lower);
  est.upper = est.lower + dist.tail_mass_bound;
  est.value = dist.tail_bounded ? est.lower + 0.5 * dist.tail_mass_bound : est.lower;
  return est;
}

SandwichBounds sandwich_bounds(const PkSequence& pk, const StationaryDistribution& dist, int q_th) {
  check_q_th(dist, q_th);
  const int K = dist.truncation;

  // π_k·∏_{m=1}^{k} μ_m = π_0·∏_{m<k} p_m, built termwise below ln π_k.
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(K - q_th));
  double log_mu_prefix = 0.0;
  for (int k = 1; k <= K; ++k) {
    log_mu_prefix += pk.log_mu(k);
    if (k > q_th) terms.push_back(dist.log_pi[k] + log_mu_prefix);
  }
  const std::span<const double> tail(dist.log_pi.data() + q_th + 1, dist.log_pi.size() - q_th - 1);
  const double shift = *std::max_element(tail.begin(), tail.end());

  double log_ratio_prefix = 0.0;
  for (int m = 0; m <= q_th; ++m) log_ratio_prefix += log_step(pk, m);

  SandwichBounds b;
  b.log_lower = log_sum_exp_shifted(terms, shift);
  b.log_upper = std::log(static_cast<double>(K - q_th)) + log_ratio_prefix;
  b.lower = std::exp(b.log_lower);
  b.upper = std::exp(b.log_upper);
  return b;
}

DecayFit fit_decay_class_log(std::span<const std::pair<int, double>> log_eps_curve) {
  std::vector<std::pair<int, double>> pts;
  for (const auto& [q, le] : log_eps_curve) {
    if (std::isnan(le) || le > 0.0) throw DomainError("fit_decay_class: ln eps must be <= 0");
    if (le > -kInf) pts.emplace_back(q, le);
  }
  DecayFit out;
  if (pts.empty()) {
    if (log_eps_curve.empty()) throw DomainError("fit_decay_class: empty curve");
    return out;
  }
  if (pts.size() < 4) throw DomainError("fit_decay_class: need at least 4 points with eps > 0");
  std::sort(pts.begin(), pts.end());

  std::vector<LineFit> fits(3);
  for (int c = 0; c < 3; ++c) {
    std::vector<double> xs, ys;
    for (const auto& [q, le] : pts) {
      const double x = decay_coordinate(c, q);
      if (!std::isfinite(x)) continue;
      xs.push_back(x);
      ys.push_back(le);
    }
    if (xs.size() < 4) {
      out.rejected[c] = true;
      out.r_squared[c] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    fits[c] = least_squares(xs, ys);
    out.r_squared[c] = fits[c].r_squared;
    out.rejected[c] = slopes_diverge(xs, ys);
  }

  // The slowest coordinate whose tail slope settles is the decay class;
  // faster ones flatten the tail towards slope 0.
  int best = -1;
  for (int c = 0; c < 3 && best < 0; ++c) {
    if (!out.rejected[c]) best = c;
  }
  if (best < 0) {
    best = 2;
    while (best > 0 && std::isnan(out.r_squared[best])) --best;
  }
  out.decay_class = best;
  out.rate = fits[best].slope;
  return out;
}

DecayFit fit_decay_class(std::span<const std::pair<int, double>> eps_curve) {
  std::vector<std::pair<int, double>> logs;
  logs.reserve(eps_curve.size());
  for (const auto& [q, e] : eps_curve) {
    if (!(e >= 0.0 && e <= 1.0)) throw DomainError("fit_decay_class: eps must lie in [0, 1]");
    logs.emplace_back(q, e > 0.0 ? std::log(e) : -kInf);
  }
  return fit_decay_class_log(logs);
}

}  // namespace qtail
