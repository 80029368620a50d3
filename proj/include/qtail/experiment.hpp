#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtail/fading.hpp"
#include "qtail/pk_sequence.hpp"
#include "qtail/sim.hpp"

namespace qtail {

enum class Experiment { Fig1Tail, Fig2Cq, Classify, Ldt, Custom };

std::string to_string(Experiment e);
/// Accepts the config names (fig1_tail, ...) and the CLI verbs (fig1, ...).
Experiment parse_experiment(const std::string& name);

enum class PolicyKind { Threshold, FixedPower, TransmitAll };

struct PolicyBlock {
  PolicyKind kind = PolicyKind::Threshold;
  std::vector<PkSequence> families;  ///< threshold sequences (also ratio tests in classify)
  double power = 1.0;                ///< fixed_power only
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Custom;
  std::vector<ChannelModel> channels;
  PolicyBlock policy;
  SimConfig sim;
  bool simulate = true;
  std::string output = "out";
  bool write_csv = true;
  bool write_json = true;
};

/// Parse and validate; omitted fields keep the experiment's preset values.
/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
/// Canonical form; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const ChannelModel& channel);
nlohmann::json to_json(const PkSequence& pk);

/// Built-in configuration for each experiment.
ExperimentConfig preset(Experiment e);

/// FNV-1a 64 of the canonical JSON without output, formats and thread
/// count, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct CsvRow {
  std::string experiment;
  std::string family_or_m;
  double q = 0.0;
  double value = 0.0;
  double stderr_ = 0.0;  ///< NaN when not applicable
  std::string kind;      ///< eps_analytic, eps_sim, eps_lower, eps_upper, cq_analytic, cq_sim
};

struct ExperimentResult {
  std::vector<CsvRow> rows;
  nlohmann::json summary;
  /// Divergent power, unbounded tails or unstable queues were found.
  bool divergence = false;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

std::string render_csv(const ExperimentResult& result);
std::string render_json(const ExperimentResult& result);
/// Write <output>/<experiment>.csv and/or .json; returns the paths written.
std::vector<std::string> write_outputs(const ExperimentResult& result, const ExperimentConfig& config);

}  // namespace qtail
