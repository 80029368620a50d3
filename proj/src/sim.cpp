#include "qtail/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "qtail/error.hpp"
#include "qtail/random.hpp"

namespace qtail {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RepStats {
  std::vector<std::int64_t> by_ceil;   // slots with ⌈q⌉ = n, n = 0..K
  std::vector<std::int64_t> by_floor;  // slots with ⌊q⌋ = n
  std::vector<double> power_by_floor;
  std::vector<double> power_sq_by_floor;
  double power = 0.0;
  std::int64_t drops = 0;
  std::int64_t infeasible = 0;
};

template <class P>
RepStats simulate(const ChannelModel& channel, const P& policy, const SimConfig& cfg, std::uint64_t seed) {
  const int K = cfg.buffer_cap;
  const double cap = K;
  const double arrival = cfg.link.arrival;
  RepStats st;
  st.by_ceil.assign(static_cast<std::size_t>(K) + 1, 0);
  st.by_floor.assign(static_cast<std::size_t>(K) + 1, 0);
  st.power_by_floor.assign(static_cast<std::size_t>(K) + 1, 0.0);
  st.power_sq_by_floor.assign(static_cast<std::size_t>(K) + 1, 0.0);

  SplitMix64 rng(seed);
  GainSampler sample = channel.sampler();
  double q = 0.0;
  for (std::int64_t n = 0; n < cfg.slots; ++n) {
    const double h = sample(rng);
    Action a = policy.action(q, h);
    if (a.infeasible) {
      a = Action{};
      if (n >= cfg.warmup) ++st.infeasible;
    }
    if (n >= cfg.warmup) {
      const auto lo = static_cast<std::size_t>(std::floor(q));
      const auto hi = static_cast<std::size_t>(std::ceil(q));
      ++st.by_ceil[hi];
      ++st.by_floor[lo];
      st.power_by_floor[lo] += a.power;
      st.power_sq_by_floor[lo] += a.power * a.power;
      st.power += a.power;
    }
    double next = std::max(q + arrival - a.served, 0.0);
    if (next > cap) {
      if (n >= cfg.warmup) ++st.drops;
      next = cap;
    }
    q = next;
  }
  return st;
}

RepStats simulate_any(const ChannelModel& channel, const Policy& policy, const SimConfig& cfg, std::uint64_t seed) {
  return std::visit([&](const auto& p) { return simulate(channel, p, cfg, seed); }, policy);
}

struct MeanSe {
  double mean = 0.0;
  double se = kNaN;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) {
    r.mean = kNaN;
    return r;
  }
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return r;
}

}  // namespace

void SimConfig::validate() const {
  if (slots <= 0) throw DomainError("sim: slots must be positive");
  if (warmup < 0 || warmup >= slots) throw DomainError("sim: need 0 <= warmup < slots");
  if (buffer_cap < 1) throw DomainError("sim: buffer_cap must be >= 1");
  if (replications < 1) throw DomainError("sim: replications must be >= 1");
  if (threads < 0) throw DomainError("sim: threads must be >= 0");
  if (!(link.arrival > 0.0) || !(link.t0b > 0.0) || !(link.noise > 0.0)) {
    throw DomainError("sim: arrival, t0b and noise must be positive");
  }
}

SimReport run(const ChannelModel& channel, const Policy& policy, const SimConfig& cfg) {
  cfg.validate();
  if (!(link_of(policy) == cfg.link)) throw DomainError("sim: policy link parameters differ from the config");
  const int R = cfg.replications;
  const int K = cfg.buffer_cap;

  std::vector<RepStats> reps(static_cast<std::size_t>(R));
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r) seeds[r] = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));

  int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, R);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int r = next++; r < R; r = next++) {
      try {
        reps[r] = simulate_any(channel, policy, cfg, seeds[r]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const double measured = static_cast<double>(cfg.slots - cfg.warmup);
  SimReport rep;
  rep.seeds = seeds;
  rep.measured_slots = (cfg.slots - cfg.warmup) * R;
  rep.visits.assign(static_cast<std::size_t>(K) + 1, 0);

  std::vector<double> pavg_r;
  std::vector<std::vector<double>> eps_r(static_cast<std::size_t>(K));
  std::vector<double> power_pooled(static_cast<std::size_t>(K) + 1, 0.0);
  std::vector<double> power_sq_pooled(static_cast<std::size_t>(K) + 1, 0.0);
  for (const RepStats& st : reps) {
    pavg_r.push_back(st.power / measured);
    std::int64_t above = 0;
    for (int q_th = K - 1; q_th >= 0; --q_th) {
      above += st.by_ceil[q_th + 1];
      eps_r[q_th].push_back(static_cast<double>(above) / measured);
    }
    for (int k = 0; k <= K; ++k) {
      rep.visits[k] += st.by_floor[k];
      power_pooled[k] += st.power_by_floor[k];
      power_sq_pooled[k] += st.power_sq_by_floor[k];
    }
    rep.drops += st.drops;
    rep.infeasible += st.infeasible;
  }

  const MeanSe pa = mean_se(pavg_r);
  rep.p_avg = pa.mean;
  rep.p_avg_stderr = pa.se;
  for (int q_th = 0; q_th < K; ++q_th) {
    const MeanSe e = mean_se(eps_r[q_th]);
    rep.eps.push_back(e.mean);
    rep.eps_stderr.push_back(e.se);
  }
  // The gain is drawn independently of the queue, so the powers spent in a
  // given state are i.i.d. and their sample variance gives the error.
  for (int k = 0; k <= K; ++k) {
    const double n = static_cast<double>(rep.visits[k]);
    const double mean = n > 0 ? power_pooled[k] / n : kNaN;
    rep.c_q.push_back(mean);
    double se = kNaN;
    if (n >= 2) se = std::sqrt(std::max(power_sq_pooled[k] / n - mean * mean, 0.0) * n / (n - 1.0) / n);
    rep.c_q_stderr.push_back(se);
    rep.occupancy.push_back(static_cast<double>(rep.visits[k]) / static_cast<double>(rep.measured_slots));
  }
  return rep;
}

std::vector<SweepCell> sweep(const std::vector<ChannelModel>& channels, const std::vector<PolicySpec>& policies,
                             const SimConfig& config) {
  std::vector<SweepCell> cells;
  for (const auto& channel : channels) {
    for (const auto& spec : policies) {
      SweepCell cell{channel.describe(), describe(spec), std::nullopt, ""};
      try {
        const Policy policy = make_policy(spec, channel, config.link, config.buffer_cap);
        cell.report = run(channel, policy, config);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace qtail
