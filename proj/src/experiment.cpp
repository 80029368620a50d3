#include "qtail/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "qtail/conditions.hpp"
#include "qtail/detail/format.hpp"
#include "qtail/error.hpp"
#include "qtail/ldt.hpp"
#include "qtail/power.hpp"
#include "qtail/random.hpp"

namespace qtail {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kReferencePavg[] = {2.5874, 3.4255, 4.4964};

// ---- parsing helpers -------------------------------------------------------

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError(path.empty() ? item.key() : path + "." + item.key(), "unknown field");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const json& j, const std::string& key, const std::string& path, std::optional<double> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(join(path, key), "required");
  }
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key), "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(join(path, key), "must be finite");
  return d;
}

std::int64_t integer(const json& j, const std::string& key, const std::string& path, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "must be an integer");
  return v.get<std::int64_t>();
}

std::string text(const json& j, const std::string& key, const std::string& path, std::optional<std::string> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(join(path, key), "required");
  }
  if (!j.at(key).is_string()) throw ConfigError(join(path, key), "must be a string");
  return j.at(key).get<std::string>();
}

template <class F>
auto wrap_domain(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

ChannelModel parse_channel(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string kind = text(j, "kind", path, std::nullopt);
  if (kind == "rayleigh") {
    reject_unknown(j, path, {"kind", "omega"});
    const double omega = number(j, "omega", path, 1.0);
    return wrap_domain(path, [&] { return ChannelModel::rayleigh(omega); });
  }
  if (kind == "nakagami") {
    reject_unknown(j, path, {"kind", "m", "omega"});
    const double m = number(j, "m", path, std::nullopt);
    const double omega = number(j, "omega", path, 1.0);
    return wrap_domain(join(path, "m"), [&] { return ChannelModel::nakagami(m, omega); });
  }
  if (kind == "static") {
    reject_unknown(j, path, {"kind", "gain"});
    const double gain = number(j, "gain", path, std::nullopt);
    return wrap_domain(join(path, "gain"), [&] { return ChannelModel::static_gain(gain); });
  }
  if (kind == "impulse_mixture") {
    reject_unknown(j, path, {"kind", "p_outage", "base"});
    const double p = number(j, "p_outage", path, std::nullopt);
    if (!j.contains("base")) throw ConfigError(join(path, "base"), "required (the continuous part is not defaulted)");
    const ChannelModel base = parse_channel(j.at("base"), join(path, "base"));
    return wrap_domain(path, [&] { return ChannelModel::impulse_mixture(p, base); });
  }
  throw ConfigError(join(path, "kind"), "unknown channel kind '" + kind + "'");
}

PkSequence parse_family(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string family = text(j, "family", path, std::nullopt);
  if (family == "single_exp" || family == "double_exp" || family == "triple_exp") {
    reject_unknown(j, path, {"family", "alpha"});
    const double alpha = number(j, "alpha", path, std::nullopt);
    return wrap_domain(join(path, "alpha"), [&] {
      if (family == "single_exp") return PkSequence::single_exp(alpha);
      if (family == "double_exp") return PkSequence::double_exp(alpha);
      return PkSequence::triple_exp(alpha);
    });
  }
  if (family == "polynomial") {
    reject_unknown(j, path, {"family", "alpha", "degree"});
    const double alpha = number(j, "alpha", path, std::nullopt);
    const double degree = number(j, "degree", path, std::nullopt);
    return wrap_domain(path, [&] { return PkSequence::polynomial(alpha, degree); });
  }
  if (family == "constant") {
    reject_unknown(j, path, {"family", "p"});
    const double p = number(j, "p", path, std::nullopt);
    return wrap_domain(join(path, "p"), [&] { return PkSequence::constant(p); });
  }
  if (family == "explicit") {
    reject_unknown(j, path, {"family", "values"});
    if (!j.contains("values") || !j.at("values").is_array()) {
      throw ConfigError(join(path, "values"), "must be an array of probabilities");
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < j.at("values").size(); ++i) {
      const json& v = j.at("values")[i];
      if (!v.is_number()) throw ConfigError(join(path, "values") + "[" + std::to_string(i) + "]", "must be a number");
      values.push_back(v.get<double>());
    }
    return wrap_domain(join(path, "values"), [&] { return PkSequence::explicit_values(values); });
  }
  throw ConfigError(join(path, "family"), "unknown family '" + family + "'");
}

PolicyBlock parse_policy(const json& j, const std::string& path, PolicyBlock p) {
  require_object(j, path);
  reject_unknown(j, path, {"kind", "families", "power"});
  const char* current = p.kind == PolicyKind::Threshold    ? "threshold"
                        : p.kind == PolicyKind::FixedPower ? "fixed_power"
                                                           : "transmit_all";
  const std::string kind = text(j, "kind", path, current);
  if (kind == "threshold") {
    p.kind = PolicyKind::Threshold;
  } else if (kind == "fixed_power") {
    p.kind = PolicyKind::FixedPower;
  } else if (kind == "transmit_all") {
    p.kind = PolicyKind::TransmitAll;
  } else {
    throw ConfigError(join(path, "kind"), "unknown policy kind '" + kind + "'");
  }
  if (j.contains("families")) {
    const json& fams = j.at("families");
    if (!fams.is_array()) throw ConfigError(join(path, "families"), "must be an array");
    p.families.clear();
    for (std::size_t i = 0; i < fams.size(); ++i) {
      p.families.push_back(parse_family(fams[i], join(path, "families") + "[" + std::to_string(i) + "]"));
    }
  }
  p.power = number(j, "power", path, p.power);
  if (p.kind == PolicyKind::FixedPower && !(p.power > 0.0)) throw ConfigError(join(path, "power"), "must be positive");
  return p;
}

void parse_sim(const json& j, const std::string& path, ExperimentConfig& cfg) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"slots", "warmup", "buffer_cap", "arrival", "t0b", "noise", "seed", "replications", "threads",
                  "enabled"});
  SimConfig& s = cfg.sim;
  s.slots = integer(j, "slots", path, s.slots);
  s.warmup = integer(j, "warmup", path, s.warmup);
  const std::int64_t cap = integer(j, "buffer_cap", path, s.buffer_cap);
  if (cap < 1 || cap > 100000) throw ConfigError(join(path, "buffer_cap"), "must lie in [1, 100000]");
  s.buffer_cap = static_cast<int>(cap);
  s.link.arrival = number(j, "arrival", path, s.link.arrival);
  s.link.t0b = number(j, "t0b", path, s.link.t0b);
  s.link.noise = number(j, "noise", path, s.link.noise);
  if (j.contains("seed")) {
    const json& v = j.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(join(path, "seed"), "must be a non-negative integer");
    }
    s.seed = v.get<std::uint64_t>();
  }
  const std::int64_t reps = integer(j, "replications", path, s.replications);
  if (reps < 1 || reps > 100000) throw ConfigError(join(path, "replications"), "must lie in [1, 100000]");
  s.replications = static_cast<int>(reps);
  const std::int64_t threads = integer(j, "threads", path, s.threads);
  if (threads < 0 || threads > 1024) throw ConfigError(join(path, "threads"), "must lie in [0, 1024]");
  s.threads = static_cast<int>(threads);
  if (j.contains("enabled")) {
    if (!j.at("enabled").is_boolean()) throw ConfigError(join(path, "enabled"), "must be a boolean");
    cfg.simulate = j.at("enabled").get<bool>();
  }
}

void validate_for_experiment(const ExperimentConfig& c) {
  try {
    c.sim.validate();
  } catch (const DomainError& e) {
    std::string msg = e.what();
    if (msg.rfind("sim: ", 0) == 0) msg.erase(0, 5);
    throw ConfigError("sim", msg);
  }
  if (c.channels.empty()) throw ConfigError("channels", "at least one channel required");
  const bool threshold = c.policy.kind == PolicyKind::Threshold;
  if (threshold && c.sim.link.arrival != 1.0) {
    throw ConfigError("sim.arrival", "the threshold policy sends 1 or 2 units and needs arrival = 1");
  }

  switch (c.experiment) {
    case Experiment::Fig1Tail:
      if (c.channels.size() != 1 || c.channels[0].kind() != ChannelKind::Rayleigh) {
        throw ConfigError("channels", "fig1 uses exactly one rayleigh channel");
      }
      if (!threshold) throw ConfigError("policy.kind", "fig1 needs the threshold policy");
      if (c.policy.families.empty()) throw ConfigError("policy.families", "at least one family required");
      break;
    case Experiment::Fig2Cq:
      for (std::size_t i = 0; i < c.channels.size(); ++i) {
        const ChannelModel& ch = c.channels[i];
        const bool gamma_like = ch.kind() == ChannelKind::Rayleigh || ch.kind() == ChannelKind::Nakagami;
        if (!gamma_like || ch.m() < 1.0 || ch.m() >= 2.0) {
          throw ConfigError("channels[" + std::to_string(i) + "].m",
                            "fig2 compares Nakagami m in [1, 2); use the custom experiment for other channels");
        }
      }
      if (!threshold) throw ConfigError("policy.kind", "fig2 needs the threshold policy");
      if (c.policy.families.size() != 1 || c.policy.families[0].family() != PkFamily::SingleExp) {
        throw ConfigError("policy.families", "fig2 uses exactly one single_exp family");
      }
      break;
    case Experiment::Classify:
      break;
    case Experiment::Ldt:
      if (c.channels.size() != 1) throw ConfigError("channels", "ldt uses exactly one channel");
      if (c.policy.kind != PolicyKind::FixedPower) throw ConfigError("policy.kind", "ldt needs the fixed_power policy");
      break;
    case Experiment::Custom:
      if (threshold && c.policy.families.empty()) throw ConfigError("policy.families", "at least one family required");
      break;
  }
}

// ---- serialization ----------------------------------------------------------

json policy_to_json(const PolicyBlock& p) {
  json j;
  j["kind"] = p.kind == PolicyKind::Threshold ? "threshold" : p.kind == PolicyKind::FixedPower ? "fixed_power"
                                                                                                : "transmit_all";
  j["families"] = json::array();
  for (const auto& f : p.families) j["families"].push_back(to_json(f));
  j["power"] = p.power;
  return j;
}

// ---- result helpers ---------------------------------------------------------

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json log_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number_or_null(x));
  return a;
}

std::string label(double m) { return detail::format_double(m); }

struct Context {
  const ExperimentConfig& cfg;
  ExperimentResult& out;
  std::string exp_name;

  void row(const std::string& who, double q, double value, double se, const char* kind) {
    out.rows.push_back(CsvRow{exp_name, who, q, value, se, kind});
  }
  void flag(const std::string& what) {
    out.divergence = true;
    out.summary["divergence_flags"].push_back(what);
  }
};

void emit_tail_rows(Context& ctx, const std::string& who, const PkSequence& pk, const PowerReport& rep, json& js) {
  const int K = rep.dist.truncation;
  std::vector<double> ln_eps, ln_lower, ln_upper;
  std::vector<std::pair<int, double>> curve;
  for (int q = 0; q < K; ++q) {
    const ViolationEstimate e = violation_probability(rep.dist, q);
    const SandwichBounds b = sandwich_bounds(pk, rep.dist, q);
    ctx.row(who, q, e.value, kNaN, "eps_analytic");
    ctx.row(who, q, b.lower, kNaN, "eps_lower");
    ctx.row(who, q, b.upper, kNaN, "eps_upper");
    ln_eps.push_back(e.log_lower);
    ln_lower.push_back(b.log_lower);
    ln_upper.push_back(b.log_upper);
    curve.emplace_back(q, e.log_lower);
  }
  js["ln_eps_analytic"] = log_array(ln_eps);
  js["ln_eps_lower"] = log_array(ln_lower);
  js["ln_eps_upper"] = log_array(ln_upper);
  js["tail_mass_bound"] = number_or_null(rep.dist.tail_mass_bound);
  try {
    const DecayFit fit = fit_decay_class_log(curve);
    js["decay_class"] = {{"class", fit.decay_class},
                         {"rate", number_or_null(fit.rate)},
                         {"r_squared", log_array({fit.r_squared[0], fit.r_squared[1], fit.r_squared[2]})},
                         {"rejected", {fit.rejected[0], fit.rejected[1], fit.rejected[2]}}};
  } catch (const DomainError& e) {
    js["decay_class"] = {{"error", e.what()}};
  }
}

json sim_block(const SimReport& r) {
  return {{"p_avg", number_or_null(r.p_avg)},
          {"p_avg_stderr", number_or_null(r.p_avg_stderr)},
          {"measured_slots", r.measured_slots},
          {"drops", r.drops},
          {"infeasible", r.infeasible},
          {"occupancy", log_array(r.occupancy)}};
}

void emit_sim_rows(Context& ctx, const std::string& who, const SimReport& r, bool eps, bool cq) {
  if (eps) {
    for (std::size_t q = 0; q < r.eps.size(); ++q) ctx.row(who, double(q), r.eps[q], r.eps_stderr[q], "eps_sim");
  }
  if (cq) {
    for (std::size_t q = 0; q < r.c_q.size(); ++q) {
      if (r.visits[q] > 0) ctx.row(who, double(q), r.c_q[q], r.c_q_stderr[q], "cq_sim");
    }
  }
}

void set_seeds(Context& ctx) {
  json seeds = json::array();
  for (int r = 0; r < ctx.cfg.sim.replications; ++r) {
    seeds.push_back(derive_seed(ctx.cfg.sim.seed, static_cast<std::uint64_t>(r)));
  }
  ctx.out.summary["seed"] = ctx.cfg.sim.seed;
  ctx.out.summary["seeds"] = ctx.cfg.simulate ? seeds : json::array();
}

// ---- experiments -----------------------------------------------------------

void run_fig1(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const ChannelModel& channel = cfg.channels[0];
  const int K = cfg.sim.buffer_cap;
  json families = json::array();
  json table = json::array();
  for (const PkSequence& pk : cfg.policy.families) {
    const std::string who = pk.describe();
    json js;
    js["family"] = who;
    const PowerReport rep = threshold_policy_avg_power(channel, pk, K, cfg.sim.link);
    emit_tail_rows(ctx, who, pk, rep, js);
    js["p_avg_analytic"] = number_or_null(rep.p_avg);
    js["truncation_residual"] = number_or_null(rep.truncation_residual);
    ctx.out.summary["truncation_residuals"][who] = number_or_null(rep.truncation_residual);
    if (rep.divergent) ctx.flag(who + ": average power divergent or tail unbounded");

    const RatioTestResult rt = ratio_test(pk);
    js["ratio_test"] = {{"outcome", rt.outcome == RatioOutcome::Pass   ? "pass"
                                    : rt.outcome == RatioOutcome::Fail ? "fail"
                                                                       : "unclassified"},
                        {"limit_estimate", number_or_null(rt.limit_estimate)}};

    json entry{{"family", who}, {"p_avg_analytic", number_or_null(rep.p_avg)}};
    double best_gap = std::numeric_limits<double>::infinity();
    for (double ref : kReferencePavg) {
      const double gap = std::fabs(rep.p_avg - ref) / ref;
      if (gap < best_gap) {
        best_gap = gap;
        entry["nearest_reference"] = ref;
        entry["relative_gap"] = number_or_null(gap);
      }
    }
    if (cfg.simulate) {
      const SimReport sr = run(channel, ThresholdPolicy(pk, channel, cfg.sim.link, K), cfg.sim);
      emit_sim_rows(ctx, who, sr, true, false);
      js["sim"] = sim_block(sr);
      entry["p_avg_sim"] = number_or_null(sr.p_avg);
      entry["p_avg_sim_stderr"] = number_or_null(sr.p_avg_stderr);
    }
    families.push_back(std::move(js));
    table.push_back(std::move(entry));
  }
  ctx.out.summary["families"] = std::move(families);
  ctx.out.summary["p_avg_table"] = std::move(table);
  ctx.out.summary["reference_p_avg"] = kReferencePavg;
}

void run_fig2(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const int K = cfg.sim.buffer_cap;
  const PkSequence& pk = cfg.policy.families[0];

  std::vector<ChannelModel> channels = cfg.channels;
  std::stable_sort(channels.begin(), channels.end(), [](const auto& a, const auto& b) { return a.m() < b.m(); });

  std::vector<PowerReport> reports;
  json curves = json::array();
  for (const ChannelModel& ch : channels) {
    const std::string who = label(ch.m());
    PowerReport rep = threshold_policy_avg_power(ch, pk, K, cfg.sim.link);
    for (int k = 0; k <= K; ++k) ctx.row(who, k, rep.per_state[k], kNaN, "cq_analytic");
    ctx.out.summary["truncation_residuals"][who] = number_or_null(rep.truncation_residual);
    if (rep.divergent) ctx.flag("m=" + who + ": average power divergent");

    json js{{"m", ch.m()},
            {"channel", ch.describe()},
            {"p_avg_analytic", number_or_null(rep.p_avg)},
            {"cq_analytic", log_array(rep.per_state)}};
    if (cfg.simulate) {
      const SimReport sr = run(ch, ThresholdPolicy(pk, ch, cfg.sim.link, K), cfg.sim);
      emit_sim_rows(ctx, who, sr, false, true);
      js["sim"] = sim_block(sr);
      js["cq_sim"] = log_array(sr.c_q);
      js["cq_sim_stderr"] = log_array(sr.c_q_stderr);
      double max_z = 0.0;
      int checked = 0;
      for (int k = 0; k <= K; ++k) {
        if (sr.visits[k] < 1000 || !(sr.c_q_stderr[k] > 0.0)) continue;
        max_z = std::max(max_z, std::fabs(sr.c_q[k] - rep.per_state[k]) / sr.c_q_stderr[k]);
        ++checked;
      }
      js["sim_states_checked"] = checked;
      js["sim_max_abs_z"] = max_z;
      js["sim_consistent_3se"] = max_z <= 3.0;
    }
    curves.push_back(std::move(js));
    reports.push_back(std::move(rep));
  }

  // Higher m should give lower C_q at every q.
  json violations = json::array();
  int holds_from = 0;
  for (int k = 0; k <= K; ++k) {
    bool ok = true;
    for (std::size_t i = 1; i < reports.size(); ++i) ok = ok && reports[i].per_state[k] < reports[i - 1].per_state[k];
    if (!ok) {
      violations.push_back(k);
      holds_from = k + 1;
    }
  }
  bool pavg_ok = true;
  for (std::size_t i = 1; i < reports.size(); ++i) pavg_ok = pavg_ok && reports[i].p_avg < reports[i - 1].p_avg;
  ctx.out.summary["curves"] = std::move(curves);
  ctx.out.summary["ordering"] = {{"cq_holds_all_q", violations.empty()},
                                 {"cq_violations", violations},
                                 {"cq_holds_from_q", holds_from},
                                 {"p_avg_holds", pavg_ok}};
}

void run_classify(Context& ctx) {
  json verdicts = json::array();
  for (const ChannelModel& ch : ctx.cfg.channels) {
    const ScenarioVerdict v = classify(ch, ctx.cfg.policy.families);
    json ev = json::array();
    for (const Evidence& e : v.evidence) {
      ev.push_back({{"name", e.name}, {"holds", e.holds}, {"value", number_or_null(e.value)}, {"detail", e.detail}});
    }
    const TransmitAllReport ta = transmit_all_power(ch, ctx.cfg.sim.link);
    json probes = json::array();
    for (const auto& [cut, val] : ta.cutoff_probes) probes.push_back({cut, number_or_null(val)});
    verdicts.push_back({{"channel", ch.describe()},
                        {"scenario", short_name(v.scenario)},
                        {"scenario_name", to_string(v.scenario)},
                        {"evidence", ev},
                        {"notes", v.notes},
                        {"transmit_all",
                         {{"value", number_or_null(ta.value)},
                          {"divergent", ta.divergent},
                          {"reason", ta.reason},
                          {"cutoff_probes", probes}}}});
  }
  ctx.out.summary["verdicts"] = std::move(verdicts);
}

void run_ldt(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const ChannelModel& channel = cfg.channels[0];
  const double power = cfg.policy.power;
  const std::string who = channel.describe();
  json js{{"channel", who}, {"power", power}};
  std::optional<LdtSolution> sol;
  try {
    sol = solve_decay_exponent(channel, power, cfg.sim.link);
    js["theta"] = sol->theta;
    js["residual"] = sol->residual;
    js["bracket"] = {sol->bracket_low, sol->bracket_high};
    js["mean_service"] = sol->mean_service;
  } catch (const StabilityError& e) {
    js["stability_error"] = e.what();
    js["mean_service"] = e.mean_service();
    ctx.flag("unstable queue: arrival >= mean service rate " + detail::format_double(e.mean_service()));
  }

  if (sol && cfg.simulate) {
    const SimReport sr = run(channel, FixedPowerPolicy(power, cfg.sim.link), cfg.sim);
    emit_sim_rows(ctx, who, sr, true, false);
    js["sim"] = sim_block(sr);
    // Points with at least 1000 expected exceedances.
    std::vector<std::pair<double, double>> pts;
    const double floor = 1000.0 / static_cast<double>(sr.measured_slots);
    for (std::size_t q = 0; q < sr.eps.size(); ++q) {
      if (sr.eps[q] >= floor) pts.emplace_back(double(q), sr.eps[q]);
    }
    js["slope_points"] = pts.size();
    try {
      const double theta_hat = tail_slope_estimate(pts);
      js["theta_sim"] = theta_hat;
      js["relative_gap"] = std::fabs(theta_hat - sol->theta) / sol->theta;
    } catch (const DomainError& e) {
      js["slope_error"] = e.what();
    }
  }
  ctx.out.summary["ldt"] = std::move(js);
}

void run_custom(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const int K = cfg.sim.buffer_cap;
  std::vector<PolicySpec> specs;
  switch (cfg.policy.kind) {
    case PolicyKind::Threshold:
      for (const auto& pk : cfg.policy.families) specs.push_back(ThresholdSpec{pk});
      break;
    case PolicyKind::FixedPower: specs.push_back(FixedPowerSpec{cfg.policy.power}); break;
    case PolicyKind::TransmitAll: specs.push_back(TransmitAllSpec{}); break;
  }

  json cells = json::array();
  for (const ChannelModel& ch : cfg.channels) {
    for (const PolicySpec& spec : specs) {
      const std::string who = ch.describe() + "/" + describe(spec);
      json js{{"channel", ch.describe()}, {"policy", describe(spec)}};
      try {
        if (const auto* t = std::get_if<ThresholdSpec>(&spec)) {
          const PowerReport rep = threshold_policy_avg_power(ch, t->pk, K, cfg.sim.link);
          emit_tail_rows(ctx, who, t->pk, rep, js);
          for (int k = 0; k <= K; ++k) ctx.row(who, k, rep.per_state[k], kNaN, "cq_analytic");
          js["p_avg_analytic"] = number_or_null(rep.p_avg);
          js["truncation_residual"] = number_or_null(rep.truncation_residual);
          ctx.out.summary["truncation_residuals"][who] = number_or_null(rep.truncation_residual);
          if (rep.divergent) ctx.flag(who + ": average power divergent or tail unbounded");
        } else if (std::holds_alternative<TransmitAllSpec>(spec)) {
          const TransmitAllReport ta = transmit_all_power(ch, cfg.sim.link);
          js["p_avg_analytic"] = number_or_null(ta.value);
          if (ta.divergent) ctx.flag(who + ": " + ta.reason);
        } else {
          const LdtSolution sol = solve_decay_exponent(ch, cfg.policy.power, cfg.sim.link);
          js["theta"] = sol.theta;
        }
      } catch (const StabilityError& e) {
        js["analytic_error"] = e.what();
        ctx.flag(who + ": unstable queue");
      } catch (const std::exception& e) {
        js["analytic_error"] = e.what();
      }
      cells.push_back(std::move(js));
    }
  }

  if (cfg.simulate) {
    const std::vector<SweepCell> sw = sweep(cfg.channels, specs, cfg.sim);
    for (std::size_t i = 0; i < sw.size(); ++i) {
      const std::string who = sw[i].channel + "/" + sw[i].policy;
      if (sw[i].report) {
        emit_sim_rows(ctx, who, *sw[i].report, true, true);
        cells[i]["sim"] = sim_block(*sw[i].report);
      } else {
        cells[i]["sim_error"] = sw[i].error;
      }
    }
  }
  ctx.out.summary["cells"] = std::move(cells);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) { return std::isnan(v) ? "" : detail::format_double(v); }

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Fig1Tail: return "fig1_tail";
    case Experiment::Fig2Cq: return "fig2_cq";
    case Experiment::Classify: return "classify";
    case Experiment::Ldt: return "ldt";
    case Experiment::Custom: return "custom";
  }
  return "custom";
}

Experiment parse_experiment(const std::string& name) {
  if (name == "fig1_tail" || name == "fig1") return Experiment::Fig1Tail;
  if (name == "fig2_cq" || name == "fig2") return Experiment::Fig2Cq;
  if (name == "classify") return Experiment::Classify;
  if (name == "ldt") return Experiment::Ldt;
  if (name == "custom") return Experiment::Custom;
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

json to_json(const ChannelModel& ch) {
  switch (ch.kind()) {
    case ChannelKind::Rayleigh: return {{"kind", "rayleigh"}, {"omega", ch.omega()}};
    case ChannelKind::Nakagami: return {{"kind", "nakagami"}, {"m", ch.m()}, {"omega", ch.omega()}};
    case ChannelKind::Static: return {{"kind", "static"}, {"gain", ch.gain()}};
    case ChannelKind::ImpulseMixture:
      return {{"kind", "impulse_mixture"}, {"p_outage", ch.p_outage()}, {"base", to_json(ch.base())}};
  }
  return {};
}

json to_json(const PkSequence& pk) {
  switch (pk.family()) {
    case PkFamily::SingleExp:
    case PkFamily::DoubleExp:
    case PkFamily::TripleExp: return {{"family", to_string(pk.family())}, {"alpha", pk.alpha()}};
    case PkFamily::Polynomial: return {{"family", "polynomial"}, {"alpha", pk.alpha()}, {"degree", pk.degree()}};
    case PkFamily::Constant: return {{"family", "constant"}, {"p", pk.values().front()}};
    case PkFamily::Explicit: return {{"family", "explicit"}, {"values", pk.values()}};
  }
  return {};
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["channels"] = json::array();
  for (const auto& ch : c.channels) j["channels"].push_back(to_json(ch));
  j["policy"] = policy_to_json(c.policy);
  j["sim"] = {{"slots", c.sim.slots},
              {"warmup", c.sim.warmup},
              {"buffer_cap", c.sim.buffer_cap},
              {"arrival", c.sim.link.arrival},
              {"t0b", c.sim.link.t0b},
              {"noise", c.sim.link.noise},
              {"seed", c.sim.seed},
              {"replications", c.sim.replications},
              {"threads", c.sim.threads},
              {"enabled", c.simulate}};
  j["output"] = c.output;
  j["formats"] = json::array();
  if (c.write_csv) j["formats"].push_back("csv");
  if (c.write_json) j["formats"].push_back("json");
  return j;
}

ExperimentConfig parse_config(const json& j) {
  require_object(j, "");
  reject_unknown(j, "", {"experiment", "channel", "channels", "policy", "sim", "output", "formats"});
  // Fields left out take the experiment's preset values.
  ExperimentConfig c = preset(parse_experiment(text(j, "experiment", "", std::nullopt)));

  if (j.contains("channel") && j.contains("channels")) {
    throw ConfigError("channel", "give either 'channel' or 'channels', not both");
  }
  if (j.contains("channel")) {
    c.channels.clear();
    c.channels.push_back(parse_channel(j.at("channel"), "channel"));
  } else if (j.contains("channels")) {
    const json& chs = j.at("channels");
    if (!chs.is_array()) throw ConfigError("channels", "must be an array");
    c.channels.clear();
    for (std::size_t i = 0; i < chs.size(); ++i) {
      c.channels.push_back(parse_channel(chs[i], "channels[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("policy")) c.policy = parse_policy(j.at("policy"), "policy", c.policy);
  if (j.contains("sim")) parse_sim(j.at("sim"), "sim", c);
  c.output = text(j, "output", "", c.output);
  if (j.contains("formats")) {
    const json& f = j.at("formats");
    if (!f.is_array() || f.empty()) throw ConfigError("formats", "must be a non-empty array of 'csv'/'json'");
    c.write_csv = c.write_json = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::string path = "formats[" + std::to_string(i) + "]";
      if (!f[i].is_string()) throw ConfigError(path, "must be a string");
      const std::string v = f[i].get<std::string>();
      if (v == "csv") {
        c.write_csv = true;
      } else if (v == "json") {
        c.write_json = true;
      } else {
        throw ConfigError(path, "unknown format '" + v + "'");
      }
    }
  }
  validate_for_experiment(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig preset(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  c.output = "out/" + to_string(e);
  switch (e) {
    case Experiment::Fig1Tail:
      c.channels = {ChannelModel::rayleigh()};
      c.policy.families = {PkSequence::single_exp(0.1), PkSequence::polynomial(0.1, 2.0),
                           PkSequence::double_exp(0.1)};
      break;
    case Experiment::Fig2Cq:
      c.channels = {ChannelModel::nakagami(1.0), ChannelModel::nakagami(1.2), ChannelModel::nakagami(1.5)};
      c.policy.families = {PkSequence::single_exp(0.1)};
      break;
    case Experiment::Classify:
      for (double m : {0.5, 0.7, 0.99, 1.0, 1.5, 1.99, 2.0, 3.0}) c.channels.push_back(ChannelModel::nakagami(m));
      c.channels.push_back(ChannelModel::impulse_mixture(0.1, ChannelModel::rayleigh()));
      c.policy.families = {PkSequence::single_exp(0.1), PkSequence::double_exp(0.1), PkSequence::triple_exp(0.1),
                           PkSequence::constant(0.5)};
      c.simulate = false;
      break;
    case Experiment::Ldt:
      // On-off service: rate 0 or 3 nats with equal probability.
      c.channels = {ChannelModel::impulse_mixture(0.5, ChannelModel::static_gain(std::expm1(3.0)))};
      c.policy.kind = PolicyKind::FixedPower;
      c.policy.power = 1.0;
      break;
    case Experiment::Custom:
      c.channels = {ChannelModel::rayleigh()};
      c.policy.families = {PkSequence::single_exp(0.1)};
      c.sim.slots = 200'000;
      c.sim.replications = 4;
      break;
  }
  return c;
}

std::string config_hash(const ExperimentConfig& config) {
  // Only fields that change the numbers take part.
  json j = to_json(config);
  j.erase("output");
  j.erase("formats");
  j["sim"].erase("threads");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult out;
  out.summary["experiment"] = to_string(config.experiment);
  out.summary["version"] = QTAIL_VERSION;
  out.summary["config_hash"] = config_hash(config);
  out.summary["config"] = to_json(config);
  out.summary["divergence_flags"] = json::array();
  out.summary["truncation_residuals"] = json::object();
  Context ctx{config, out, to_string(config.experiment)};
  set_seeds(ctx);
  switch (config.experiment) {
    case Experiment::Fig1Tail: run_fig1(ctx); break;
    case Experiment::Fig2Cq: run_fig2(ctx); break;
    case Experiment::Classify: run_classify(ctx); break;
    case Experiment::Ldt: run_ldt(ctx); break;
    case Experiment::Custom: run_custom(ctx); break;
  }
  return out;
}

std::string render_csv(const ExperimentResult& result) {
  const json& s = result.summary;
  std::ostringstream os;
  os << "# qtail " << s.at("version").get<std::string>() << "\n";
  os << "# experiment=" << s.at("experiment").get<std::string>() << "\n";
  os << "# config_hash=" << s.at("config_hash").get<std::string>() << "\n";
  os << "# seed=" << s.at("seed").get<std::uint64_t>() << " seeds=";
  bool first = true;
  for (const auto& seed : s.at("seeds")) {
    os << (first ? "" : ";") << seed.get<std::uint64_t>();
    first = false;
  }
  os << "\n# truncation_residuals=";
  first = true;
  for (const auto& [k, v] : s.at("truncation_residuals").items()) {
    os << (first ? "" : ";") << k << ":" << (v.is_null() ? "inf" : detail::format_double(v.get<double>()));
    first = false;
  }
  os << "\nexperiment,family_or_m,q,value,stderr,kind\n";
  for (const CsvRow& r : result.rows) {
    os << csv_field(r.experiment) << ',' << csv_field(r.family_or_m) << ',' << detail::format_double(r.q) << ','
       << csv_number(r.value) << ',' << csv_number(r.stderr_) << ',' << r.kind << '\n';
  }
  return os.str();
}

std::string render_json(const ExperimentResult& result) { return result.summary.dump(2) + "\n"; }

std::vector<std::string> write_outputs(const ExperimentResult& result, const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output);
  std::vector<std::string> written;
  const std::string stem = (fs::path(config.output) / to_string(config.experiment)).string();
  auto write = [&](const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << body;
    written.push_back(path);
  };
  if (config.write_csv) write(stem + ".csv", render_csv(result));
  if (config.write_json) write(stem + ".json", render_json(result));
  return written;
}

}  // namespace qtail
