#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qtail/chain.hpp"
#include "qtail/conditions.hpp"
#include "qtail/error.hpp"
#include "qtail/experiment.hpp"
#include "qtail/fading.hpp"
#include "qtail/ldt.hpp"
#include "qtail/pk_sequence.hpp"
#include "qtail/power.hpp"
#include "qtail/specfun.hpp"

namespace py = pybind11;
using namespace qtail;

namespace {

py::dict evidence_dict(const Evidence& e) {
  py::dict d;
  d["name"] = e.name;
  d["holds"] = e.holds;
  d["value"] = e.value;
  d["detail"] = e.detail;
  return d;
}

py::dict verdict_dict(const ScenarioVerdict& v) {
  py::dict d;
  d["scenario"] = short_name(v.scenario);
  d["description"] = to_string(v.scenario);
  py::list evidence;
  for (const auto& e : v.evidence) evidence.append(evidence_dict(e));
  d["evidence"] = evidence;
  d["notes"] = v.notes;
  return d;
}

struct RunOutput {
  std::string csv;
  std::string json;
  bool divergence = false;
};

RunOutput run_json(const std::string& config_text) {
  const ExperimentConfig config = parse_config(nlohmann::json::parse(config_text));
  ExperimentResult result;
  {
    py::gil_scoped_release release;
    result = run_experiment(config);
  }
  return {render_csv(result), render_json(result), result.divergence};
}

}  // namespace

PYBIND11_MODULE(_qtail, m) {
  m.doc() = "Queue-tail analysis for buffer-aware power control over fading links";
  m.attr("__version__") = QTAIL_VERSION;

  auto domain_error = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<StabilityError>(m, "StabilityError", domain_error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  m.def("exp_integral_e1", &specfun::exp_integral_e1, py::arg("x"));
  m.def("log_exp_integral_e1", &specfun::log_exp_integral_e1, py::arg("log_x"));
  m.def("upper_incomplete_gamma", &specfun::upper_incomplete_gamma, py::arg("a"), py::arg("x"));

  py::class_<LinkParams>(m, "LinkParams")
      .def(py::init([](double arrival, double t0b, double noise) { return LinkParams{arrival, t0b, noise}; }),
           py::arg("arrival") = 1.0, py::arg("t0b") = 1.0, py::arg("noise") = 1.0)
      .def_readwrite("arrival", &LinkParams::arrival)
      .def_readwrite("t0b", &LinkParams::t0b)
      .def_readwrite("noise", &LinkParams::noise);

  py::class_<ChannelModel>(m, "ChannelModel")
      .def_static("rayleigh", &ChannelModel::rayleigh, py::arg("omega") = 1.0)
      .def_static("nakagami", &ChannelModel::nakagami, py::arg("m"), py::arg("omega") = 1.0)
      .def_static("static_gain", &ChannelModel::static_gain, py::arg("gain"))
      .def_static("impulse_mixture", &ChannelModel::impulse_mixture, py::arg("p_outage"), py::arg("base"))
      .def_property_readonly("m", &ChannelModel::m)
      .def_property_readonly("omega", &ChannelModel::omega)
      .def_property_readonly("p_outage", &ChannelModel::p_outage)
      .def("pdf", &ChannelModel::pdf, py::arg("x"))
      .def("cdf", &ChannelModel::cdf, py::arg("x"))
      .def("quantile", &ChannelModel::quantile, py::arg("p"))
      .def("mean", &ChannelModel::mean)
      .def("__repr__", &ChannelModel::describe);

  py::class_<PkSequence>(m, "PkSequence")
      .def_static("single_exp", &PkSequence::single_exp, py::arg("alpha"))
      .def_static("double_exp", &PkSequence::double_exp, py::arg("alpha"))
      .def_static("triple_exp", &PkSequence::triple_exp, py::arg("alpha"))
      .def_static("polynomial", &PkSequence::polynomial, py::arg("alpha"), py::arg("degree"))
      .def_static("constant", &PkSequence::constant, py::arg("p"))
      .def_static("explicit_values", &PkSequence::explicit_values, py::arg("values"))
      .def("log_p", &PkSequence::log_p, py::arg("k"))
      .def("p", &PkSequence::p, py::arg("k"))
      .def("__repr__", &PkSequence::describe);

  py::class_<StationaryDistribution>(m, "StationaryDistribution")
      .def_readonly("log_pi", &StationaryDistribution::log_pi)
      .def_readonly("truncation", &StationaryDistribution::truncation)
      .def_readonly("tail_mass_bound", &StationaryDistribution::tail_mass_bound)
      .def_readonly("tail_bounded", &StationaryDistribution::tail_bounded)
      .def("pi", &StationaryDistribution::pi, py::arg("k"));

  m.def("stationary", &stationary, py::arg("pk"), py::arg("truncation"));
  m.def(
      "violation_probability",
      [](const StationaryDistribution& dist, int q) {
        const auto v = violation_probability(dist, q);
        py::dict d;
        d["value"] = v.value;
        d["lower"] = v.lower;
        d["upper"] = v.upper;
        d["log_lower"] = v.log_lower;
        return d;
      },
      py::arg("dist"), py::arg("q"));

  m.def("per_state_power",
        py::overload_cast<const ChannelModel&, double, int, const LinkParams&>(&per_state_power),
        py::arg("channel"), py::arg("log_p_k"), py::arg("k"), py::arg("link") = LinkParams{});

  m.def(
      "threshold_policy_avg_power",
      [](const ChannelModel& channel, const PkSequence& pk, int truncation, const LinkParams& link) {
        const auto r = threshold_policy_avg_power(channel, pk, truncation, link);
        py::dict d;
        d["p_avg"] = r.p_avg;
        d["log_p_avg"] = r.log_p_avg;
        d["per_state"] = r.per_state;
        d["divergent"] = r.divergent;
        d["truncation_residual"] = r.truncation_residual;
        d["residual_bounded"] = r.residual_bounded;
        return d;
      },
      py::arg("channel"), py::arg("pk"), py::arg("truncation") = 50, py::arg("link") = LinkParams{});

  m.def(
      "transmit_all_power",
      [](const ChannelModel& channel, const LinkParams& link) {
        const auto r = transmit_all_power(channel, link);
        py::dict d;
        d["value"] = r.value;
        d["divergent"] = r.divergent;
        d["reason"] = r.reason;
        d["cutoff_probes"] = r.cutoff_probes;
        return d;
      },
      py::arg("channel"), py::arg("link") = LinkParams{});

  m.def(
      "classify",
      [](const ChannelModel& channel, const std::vector<PkSequence>& sequences) {
        return verdict_dict(classify(channel, sequences));
      },
      py::arg("channel"), py::arg("sequences") = std::vector<PkSequence>{});
  m.def(
      "classify_nakagami", [](double shape) { return verdict_dict(classify_nakagami(shape)); }, py::arg("m"));

  m.def(
      "solve_decay_exponent",
      [](const ChannelModel& channel, double power, const LinkParams& link) {
        const auto s = solve_decay_exponent(channel, power, link);
        py::dict d;
        d["theta"] = s.theta;
        d["residual"] = s.residual;
        d["mean_service"] = s.mean_service;
        return d;
      },
      py::arg("channel"), py::arg("power"), py::arg("link") = LinkParams{});
  m.def("effective_capacity", &effective_capacity, py::arg("channel"), py::arg("power"), py::arg("link"),
        py::arg("theta"));

  m.def(
      "preset_json", [](const std::string& name) { return to_json(preset(parse_experiment(name))).dump(); },
      py::arg("experiment"));
  m.def(
      "config_hash_json",
      [](const std::string& text) { return config_hash(parse_config(nlohmann::json::parse(text))); },
      py::arg("config_json"));
  m.def(
      "run_experiment_json",
      [](const std::string& text) {
        const auto r = run_json(text);
        return py::make_tuple(r.csv, r.json, r.divergence);
      },
      py::arg("config_json"),
      "Run a configuration given as JSON text; returns (csv, summary_json, divergence).");
}
