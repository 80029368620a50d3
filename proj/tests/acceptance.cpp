// Acceptance checks: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion passes, or when the only failure is
// AC8 failing in its documented way (the analytic C_q ordering across m is
// reversed at small q; see ac8() below). Any other failure, or AC8
// failing differently, exits 1.

#include <boost/math/quadrature/exp_sinh.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qtail/chain.hpp"
#include "qtail/conditions.hpp"
#include "qtail/experiment.hpp"
#include "qtail/ldt.hpp"
#include "qtail/power.hpp"
#include "qtail/sim.hpp"
#include "qtail/specfun.hpp"

using namespace qtail;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  bool known_deviation = false;  // AC8 only

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimConfig reference_sim() {
  SimConfig c;  // 10 replications × 10^6 slots, K = 50, A = T0B = σ² = 1
  c.seed = 1;
  return c;
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ChannelModel r = ChannelModel::rayleigh();
  const double single = threshold_policy_avg_power(r, PkSequence::single_exp(0.1), 50).p_avg;
  const double poly = threshold_policy_avg_power(r, PkSequence::polynomial(0.1, 2.0), 50).p_avg;
  const double dbl = threshold_policy_avg_power(r, PkSequence::double_exp(0.1), 50).p_avg;
  const double t = seconds_since(t0);
  const double g1 = std::fabs(single - 2.5874) / 2.5874;
  const double g3 = std::fabs(dbl - 4.4964) / 4.4964;
  o.require(g1 <= 0.02, "single_exp gap " + fmt("%.3g", g1));
  o.require(g3 <= 0.02, "double_exp gap " + fmt("%.3g", g3));
  o.require(t < 10.0, "runtime " + fmt("%.2fs", t));
  o.note("single_exp " + fmt("%.6f", single) + " vs 2.5874, polynomial(d=2) " + fmt("%.6f", poly) +
         " vs 3.4255, double_exp " + fmt("%.6f", dbl) + " vs 4.4964, " + fmt("%.3fs", t));
  return o;
}

Outcome ac2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ChannelModel ch = ChannelModel::rayleigh();
  const PkSequence pk = PkSequence::single_exp(0.1);
  const PowerReport an = threshold_policy_avg_power(ch, pk, 50);
  const SimReport sim = run(ch, ThresholdPolicy(pk, ch), reference_sim());

  const double zp = (sim.p_avg - an.p_avg) / sim.p_avg_stderr;
  o.require(std::fabs(zp) <= 3.0, "P_avg z " + fmt("%.2f", zp));
  double worst = 0.0;
  int checked = 0;
  for (int q = 0; q < 50; ++q) {
    const double e = violation_probability(an.dist, q).value;
    if (e <= 1e-5) continue;
    const double z = (sim.eps[q] - e) / sim.eps_stderr[q];
    worst = std::max(worst, std::fabs(z));
    ++checked;
    if (std::fabs(z) > 3.0) o.require(false, "eps(" + std::to_string(q) + ") z " + fmt("%.2f", z));
  }
  double tv = 0.0;
  for (int k = 0; k <= 50; ++k) tv += std::fabs(sim.occupancy[k] - an.dist.pi(k));
  tv *= 0.5;
  o.require(tv < 0.005, "TV " + fmt("%.4g", tv));
  const double t = seconds_since(t0);
  o.require(t < 120.0, "runtime " + fmt("%.1fs", t));
  o.note("P_avg sim " + fmt("%.5f", sim.p_avg) + " +/- " + fmt("%.5f", sim.p_avg_stderr) + " vs " +
         fmt("%.5f", an.p_avg) + " (z " + fmt("%.2f", zp) + "), " + std::to_string(checked) +
         " eps points max |z| " + fmt("%.2f", worst) + ", TV " + fmt("%.2g", tv) + ", " + fmt("%.1fs", t));
  return o;
}

Outcome ac3() {
  Outcome o;
  int checked = 0;
  for (const PkSequence& pk : {PkSequence::single_exp(0.1), PkSequence::polynomial(0.1, 2.0),
                               PkSequence::double_exp(0.1), PkSequence::triple_exp(0.1), PkSequence::constant(0.2)}) {
    const StationaryDistribution d = stationary(pk, 50);
    for (int q = 0; q <= 49; ++q) {
      const SandwichBounds b = sandwich_bounds(pk, d, q);
      const ViolationEstimate e = violation_probability(d, q);
      const bool ok = b.log_lower <= e.log_lower && e.log_lower <= b.log_upper && b.lower <= e.lower &&
                      e.lower <= b.upper;
      if (!ok) o.require(false, pk.describe() + " q=" + std::to_string(q));
      ++checked;
    }
  }
  o.note(std::to_string(checked) + " (family, q_th) pairs");
  return o;
}

Outcome ac4() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  // Independent route: double-exponential quadrature of e^{-t}/t on [1, ∞).
  boost::math::quadrature::exp_sinh<double> integrator;
  const double quad = integrator.integrate([](double t) { return std::exp(-(t + 1.0)) / (t + 1.0); });
  const double e1 = specfun::exp_integral_e1(1.0);
  o.require(std::fabs(e1 - 0.21938393439552) <= 1e-10, "E1(1) " + fmt("%.15g", e1));
  o.require(std::fabs(e1 - quad) <= 1e-10, "quadrature " + fmt("%.15g", quad));
  o.require(std::fabs(e1 - oracle::kE1At1) <= 1e-10, "frozen oracle");
  int violations = 0;
  for (int i = 0; i < 50; ++i) {
    const double x = std::pow(10.0, -6.0 + 7.0 * i / 49.0);
    if (!(specfun::exp_integral_e1(x) < std::exp(-x) * std::log1p(1.0 / x))) ++violations;
  }
  o.require(violations == 0, std::to_string(violations) + " grid points violate the bound");
  const double t = seconds_since(t0);
  o.require(t < 1.0, "runtime " + fmt("%.3fs", t));
  o.note("E1(1) " + fmt("%.14f", e1) + ", |E1 - quad| " + fmt("%.1e", std::fabs(e1 - quad)) +
         ", bound strict on 50 points, " + fmt("%.4fs", t));
  return o;
}

Outcome ac5() {
  Outcome o;
  const double e = std::numbers::e;
  const TransmitAllReport m2 = transmit_all_power(ChannelModel::nakagami(2.0));
  const TransmitAllReport m15 = transmit_all_power(ChannelModel::nakagami(1.5));
  const TransmitAllReport r = transmit_all_power(ChannelModel::rayleigh());
  o.require(!m2.divergent && std::fabs(m2.value - 2.0 * (e - 1.0)) <= 1e-6, "m=2 " + fmt("%.9f", m2.value));
  o.require(!m15.divergent && std::fabs(m15.value - 3.0 * (e - 1.0)) <= 1e-6, "m=1.5 " + fmt("%.9f", m15.value));
  o.require(r.divergent, "Rayleigh not flagged divergent");
  o.note("m=2 " + fmt("%.9f", m2.value) + ", m=1.5 " + fmt("%.9f", m15.value) + ", Rayleigh divergent (" + r.reason +
         ")");
  return o;
}

Outcome ac6() {
  Outcome o;
  const double grid[] = {0.5, 0.7, 0.99, 1.0, 1.5, 1.99, 2.0, 3.0};
  const char* want[] = {"S2", "S2", "S2", "S3", "S3", "S3", "S1", "S1"};
  std::string got;
  for (int i = 0; i < 8; ++i) {
    const ScenarioVerdict v = classify(ChannelModel::nakagami(grid[i]));
    const std::string s = short_name(v.scenario);
    got += (i ? "," : "") + s;
    o.require(s == want[i], "m=" + fmt("%g", grid[i]) + " -> " + s);
    const Evidence* inv = v.find("direct_inversion_integral");
    const bool annotated = inv && inv->detail == "stronger-than-labeled";
    const bool expect_annotation = grid[i] == 1.5 || grid[i] == 1.99;
    if (expect_annotation) o.require(annotated, "m=" + fmt("%g", grid[i]) + " missing finite-inversion annotation");
  }
  o.note("labels " + got + ", annotation on m=1.5 and m=1.99");
  return o;
}

Outcome ac7() {
  Outcome o;
  for (const PkSequence& pk : {PkSequence::single_exp(0.1), PkSequence::double_exp(0.1), PkSequence::triple_exp(0.1)}) {
    const RatioTestResult r = ratio_test(pk);
    o.require(r.outcome == RatioOutcome::Pass, pk.describe() + " did not pass");
  }
  const RatioTestResult c = ratio_test(PkSequence::constant(0.5));
  o.require(c.outcome == RatioOutcome::Fail, "constant(0.5) did not fail");
  o.require(std::fabs(c.limit_estimate - 1.0) <= 1e-9, "constant limit " + fmt("%.12g", c.limit_estimate));
  o.note("single/double/triple pass, constant(0.5) fails with limit " + fmt("%.12g", c.limit_estimate));
  return o;
}

// AC8 documented deviation: with the Nakagami density normalized to unit mean
// power, C_q(m) is not monotone in m at small q for p_k = e^{-0.1(k+1)};
// the ordering only sets in from q ≈ 6. The deviation is accepted as
// "known" when all of the following hold:
//   * the violating q form a prefix {0, ..., q*} with q* ≤ 7,
//   * the ordering holds for every q in (q*, 50],
//   * the frozen mpmath values confirm the reversal at q = 0 and the
//     ordering at q = 8 independently of the C++ code,
//   * the P_avg ordering holds,
//   * simulated C_q agree with the analytic ones within 3 standard errors.
Outcome ac8() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const PkSequence pk = PkSequence::single_exp(0.1);
  const double ms[] = {1.0, 1.2, 1.5};
  std::vector<PowerReport> an;
  for (double m : ms) an.push_back(threshold_policy_avg_power(ChannelModel::nakagami(m), pk, 50));

  std::vector<int> bad;
  for (int q = 0; q <= 50; ++q) {
    if (!(an[2].per_state[q] < an[1].per_state[q] && an[1].per_state[q] < an[0].per_state[q])) bad.push_back(q);
  }
  const bool pavg_ordered = an[2].p_avg < an[1].p_avg && an[1].p_avg < an[0].p_avg;

  double worst_z = 0.0;
  int checked = 0;
  for (int i = 0; i < 3; ++i) {
    const ChannelModel ch = ChannelModel::nakagami(ms[i]);
    const SimReport sim = run(ch, ThresholdPolicy(pk, ch), reference_sim());
    for (int q = 0; q <= 50; ++q) {
      if (sim.visits[q] < 1000) continue;
      worst_z = std::max(worst_z, std::fabs(sim.c_q[q] - an[i].per_state[q]) / sim.c_q_stderr[q]);
      ++checked;
    }
  }
  const bool sim_ok = worst_z <= 3.0;
  const double t = seconds_since(t0);

  std::string list;
  for (int q : bad) list += (list.empty() ? "" : ",") + std::to_string(q);
  o.require(bad.empty(), "C_q(1.5) < C_q(1.2) < C_q(1) violated at q = {" + list + "}");
  o.require(sim_ok, "sim C_q max |z| " + fmt("%.2f", worst_z));
  o.require(t < 180.0, "runtime " + fmt("%.1fs", t));
  o.note("C_0 = " + fmt("%.6f", an[0].per_state[0]) + " / " + fmt("%.6f", an[1].per_state[0]) + " / " +
         fmt("%.6f", an[2].per_state[0]) + " for m = 1/1.2/1.5");
  o.note("P_avg = " + fmt("%.5f", an[0].p_avg) + " > " + fmt("%.5f", an[1].p_avg) + " > " + fmt("%.5f", an[2].p_avg) +
         (pavg_ordered ? " holds" : " VIOLATED"));
  o.note(std::to_string(checked) + " simulated states, max |z| " + fmt("%.2f", worst_z) + ", " + fmt("%.1fs", t));

  if (!o.pass) {
    int prefix_end = -1;
    bool is_prefix = true;
    for (std::size_t i = 0; i < bad.size(); ++i) is_prefix = is_prefix && bad[i] == static_cast<int>(i);
    if (!bad.empty()) prefix_end = bad.back();
    const bool oracle_confirms = oracle::kCqNakagami1p5Single_0 > oracle::kCqNakagami1Single_0 &&
                                 oracle::kCqNakagami1p5Single_8 < oracle::kCqNakagami1p2Single_8 &&
                                 oracle::kCqNakagami1p2Single_8 < oracle::kCqNakagami1Single_8;
    const bool matches_oracle = std::fabs(an[2].per_state[0] / oracle::kCqNakagami1p5Single_0 - 1.0) < 1e-9 &&
                                std::fabs(an[0].per_state[0] / oracle::kCqNakagami1Single_0 - 1.0) < 1e-9;
    o.known_deviation = is_prefix && prefix_end >= 0 && prefix_end <= 7 && oracle_confirms && matches_oracle &&
                        pavg_ordered && sim_ok && t < 180.0;
    o.note(o.known_deviation ? "known deviation: small-q reversal confirmed by the mpmath oracle"
                             : "NOT the documented deviation");
  }
  return o;
}

Outcome ac9() {
  Outcome o;
  const ChannelModel on_off = ChannelModel::impulse_mixture(0.5, ChannelModel::static_gain(std::expm1(3.0)));
  const double closed = -std::log((std::sqrt(5.0) - 1.0) / 2.0);
  const LdtSolution s = solve_decay_exponent(on_off, 1.0);
  o.require(std::fabs(s.theta - closed) <= 1e-6, "theta " + fmt("%.9f", s.theta));

  SimConfig cfg = reference_sim();  // 10 × 10^6 = 10^7 slots
  const SimReport sim = run(on_off, FixedPowerPolicy(1.0), cfg);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t q = 0; q < sim.eps.size(); ++q) {
    if (sim.eps[q] * static_cast<double>(sim.measured_slots) >= 1000.0) pts.emplace_back(double(q), sim.eps[q]);
  }
  const double slope = tail_slope_estimate(pts);
  const double gap = std::fabs(slope - s.theta) / s.theta;
  o.require(gap <= 0.10, "slope gap " + fmt("%.3f", gap));

  double worst = 0.0;
  for (double c : {0.01, 100.0}) {
    const double tc = solve_decay_exponent(on_off, c, LinkParams{1.0, 1.0, c}).theta;
    worst = std::max(worst, std::fabs(tc - s.theta));
    const ChannelModel r = ChannelModel::rayleigh();
    const double base = solve_decay_exponent(r, 5.0).theta;
    worst = std::max(worst, std::fabs(solve_decay_exponent(r, 5.0 * c, LinkParams{1.0, 1.0, c}).theta - base));
  }
  o.require(worst <= 1e-10, "scaling drift " + fmt("%.2e", worst));
  o.note("theta " + fmt("%.9f", s.theta) + " (closed form " + fmt("%.9f", closed) + "), simulated slope " +
         fmt("%.4f", slope) + " over " + std::to_string(pts.size()) + " points, gap " + fmt("%.3f", gap) +
         ", scaling drift " + fmt("%.1e", worst));
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome ac10() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "qtail_acceptance_determinism";
  fs::remove_all(root);
  int compared = 0;
  for (Experiment e : {Experiment::Fig1Tail, Experiment::Fig2Cq, Experiment::Classify, Experiment::Ldt,
                       Experiment::Custom}) {
    ExperimentConfig c = preset(e);
    c.sim.slots = 200'000;
    c.output = (root / "run").string();
    const std::vector<std::string> first = write_outputs(run_experiment(c), c);
    std::vector<std::string> first_bodies;
    for (const auto& p : first) first_bodies.push_back(slurp(p));
    const std::vector<std::string> second = write_outputs(run_experiment(c), c);
    for (std::size_t i = 0; i < second.size(); ++i) {
      if (slurp(second[i]) != first_bodies[i]) o.require(false, second[i] + " differs between runs");
      ++compared;
    }
    // The worker count is recorded in the JSON config but must not move any
    // number: the CSV (hash excludes threads) has to match byte for byte.
    c.sim.threads = 1;
    const std::vector<std::string> serial = write_outputs(run_experiment(c), c);
    for (std::size_t i = 0; i < serial.size(); ++i) {
      if (serial[i].ends_with(".csv") && slurp(serial[i]) != first_bodies[i]) {
        o.require(false, serial[i] + " depends on the thread count");
      }
    }
  }
  fs::remove_all(root);
  o.note(std::to_string(compared) + " CSV/JSON files bit-identical across reruns, CSV unchanged with one worker thread");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> fn;
  };
  const Criterion all[] = {
      {"AC1", "analytic P_avg vs reference values", ac1},
      {"AC2", "analytic vs simulated tail and power", ac2},
      {"AC3", "sandwich bounds", ac3},
      {"AC4", "E1 value and upper bound", ac4},
      {"AC5", "transmit-all closed forms", ac5},
      {"AC6", "Nakagami scenario classifier", ac6},
      {"AC7", "ratio test", ac7},
      {"AC8", "C_q ordering across m", ac8},
      {"AC9", "LDT exponent", ac9},
      {"AC10", "determinism", ac10},
  };
  int unexpected = 0;
  for (const auto& c : all) {
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s  %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && !o.known_deviation) ++unexpected;
  }
  std::printf("%s\n", unexpected == 0 ? "acceptance: no unexpected failures" : "acceptance: UNEXPECTED FAILURES");
  return unexpected == 0 ? 0 : 1;
}
