#include "qtail/cli.hpp"

#include <CLI11.hpp>

#include <optional>
#include <ostream>
#include <string>

#include "qtail/detail/format.hpp"
#include "qtail/error.hpp"
#include "qtail/experiment.hpp"

namespace qtail::cli {
namespace {

using nlohmann::json;

std::string num(const json& v) { return v.is_number() ? detail::format_double(v.get<double>()) : "n/a"; }

void print_summary(const json& s, std::ostream& out) {
  const std::string e = s.at("experiment");
  if (e == "fig1_tail") {
    for (const auto& row : s.at("p_avg_table")) {
      out << "  " << row.at("family").get<std::string>() << ": P_avg analytic " << num(row.at("p_avg_analytic"));
      if (row.contains("p_avg_sim")) {
        out << ", sim " << num(row.at("p_avg_sim")) << " +/- " << num(row.at("p_avg_sim_stderr"));
      }
      out << "\n";
    }
  } else if (e == "fig2_cq") {
    const json& o = s.at("ordering");
    out << "  C_q ordering holds for all q: " << (o.at("cq_holds_all_q").get<bool>() ? "yes" : "no")
        << " (holds from q=" << o.at("cq_holds_from_q").get<int>() << ")\n"
        << "  P_avg ordering holds: " << (o.at("p_avg_holds").get<bool>() ? "yes" : "no") << "\n";
  } else if (e == "classify") {
    for (const auto& v : s.at("verdicts")) {
      out << "  " << v.at("channel").get<std::string>() << ": " << v.at("scenario").get<std::string>() << "\n";
    }
  } else if (e == "ldt") {
    const json& l = s.at("ldt");
    if (l.contains("theta")) {
      out << "  theta " << num(l.at("theta"));
      if (l.contains("theta_sim")) out << ", simulated slope " << num(l.at("theta_sim"));
      out << "\n";
    }
  }
  for (const auto& f : s.at("divergence_flags")) out << "  divergence: " << f.get<std::string>() << "\n";
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delay-violation tails and average power of threshold transmission policies"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", QTAIL_VERSION);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> slots;
  std::optional<std::string> out_dir;
  bool print_config = false;
  bool no_sim = false;

  const char* verbs[][2] = {{"fig1", "Tail of the violation probability for several idle-probability families"},
                            {"fig2", "Per-state power C_q across Nakagami-m channels"},
                            {"classify", "Scenario classification of fading channels"},
                            {"ldt", "Large-deviation decay exponent of a fixed-power link"},
                            {"custom", "Analytic and simulated sweep over channels and policies"}};
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration (built-in preset when omitted)");
    sub->add_option("--seed", seed, "Base seed of the simulation");
    sub->add_option("--slots", slots, "Slots per replication, warmup included");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_flag("--print-config", print_config, "Print the effective configuration and exit");
    sub->add_flag("--no-sim", no_sim, "Skip the simulation");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    const Experiment wanted = parse_experiment(verb);
    ExperimentConfig cfg = config_path.empty() ? preset(wanted) : load_config(config_path);
    if (cfg.experiment != wanted) {
      throw ConfigError("experiment", "configuration is for '" + to_string(cfg.experiment) + "' but the command is '" +
                                          verb + "'");
    }
    // Overrides go through the parser so they are validated like file input.
    json j = to_json(cfg);
    if (seed) j["sim"]["seed"] = *seed;
    if (slots) j["sim"]["slots"] = *slots;
    if (out_dir) j["output"] = *out_dir;
    if (no_sim) j["sim"]["enabled"] = false;
    cfg = parse_config(j);

    if (print_config) {
      out << to_json(cfg).dump(2) << "\n";
      return kOk;
    }

    const ExperimentResult result = run_experiment(cfg);
    for (const std::string& path : write_outputs(result, cfg)) out << "wrote " << path << "\n";
    print_summary(result.summary, out);
    return result.divergence ? kDivergence : kOk;
  } catch (const ConfigError& e) {
    err << "qtail: invalid configuration: " << e.what() << "\n";
    return kInvalid;
  } catch (const DomainError& e) {
    err << "qtail: invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    err << "qtail: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace qtail::cli
