#include <sstream>
#include <stdexcept>
#include <vector>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wsp/evaluation.hpp"
#include "wsp/mle.hpp"
#include "wsp/run_config.hpp"
#include "wsp/simulation.hpp"
#include "wsp/survival_models.hpp"
#include "wsp/table_io.hpp"
#include "wsp/wsp_tests.hpp"

namespace py = pybind11;
using namespace wsp;

namespace {

SurvivalSample make_sample(const std::vector<double>& times, const std::vector<int>& status, double window_end) {
  if (times.size() != status.size()) {
    throw std::invalid_argument("times and status must have the same length");
  }
  std::vector<Observation> obs;
  obs.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (status[i] != 0 && status[i] != 1) {
      throw std::invalid_argument("status values must be 0 or 1");
    }
    obs.push_back({times[i], status[i] == 1 ? EventStatus::event : EventStatus::censored});
  }
  return SurvivalSample(std::move(obs), window_end);
}

py::tuple sample_arrays(const SurvivalSample& s) {
  std::vector<double> times;
  std::vector<int> status;
  for (const auto& o : s.observations()) {
    times.push_back(o.time);
    status.push_back(o.status == EventStatus::event ? 1 : 0);
  }
  return py::make_tuple(times, status);
}

}  // namespace

PYBIND11_MODULE(pywsp, m) {
  m.doc() = "Weibull shape-parameter tests for adverse drug reaction signals";

  py::register_exception<std::domain_error>(m, "DomainError", PyExc_ValueError);

  py::enum_<Combination>(m, "Combination")
      .value("WSP", Combination::WSP)
      .value("cWSP", Combination::cWSP)
      .value("pWSP", Combination::pWSP)
      .value("dWSP", Combination::dWSP)
      .value("WSP_pWSP", Combination::WSP_pWSP)
      .value("dWSP_pWSP", Combination::dWSP_pWSP);
  py::enum_<Component>(m, "Component")
      .value("wsp", Component::wsp)
      .value("cwsp", Component::cwsp)
      .value("pwsp", Component::pwsp);
  py::enum_<FitStatus>(m, "FitStatus")
      .value("converged", FitStatus::converged)
      .value("not_estimable", FitStatus::not_estimable);
  py::enum_<Model>(m, "Model").value("weibull", Model::weibull).value("pgw", Model::pgw);
  py::enum_<Stratify>(m, "Stratify")
      .value("background_rate", Stratify::background_rate)
      .value("n_obs", Stratify::n_obs)
      .value("adr_sd_days", Stratify::adr_sd_days)
      .value("none", Stratify::none);
  py::enum_<RankMetric>(m, "RankMetric").value("auc", RankMetric::auc).value("accuracy", RankMetric::accuracy);

  m.def("parse_combination", &parse_combination, py::arg("name"));
  m.def("combination_name", [](Combination c) { return std::string(to_string(c)); });

  py::class_<WeibullParams>(m, "WeibullParams")
      .def(py::init<double, double>(), py::arg("shape"), py::arg("rate"))
      .def_readwrite("shape", &WeibullParams::shape)
      .def_readwrite("rate", &WeibullParams::rate);
  py::class_<PgwParams>(m, "PgwParams")
      .def(py::init<double, double, double>(), py::arg("nu"), py::arg("gamma"), py::arg("scale"))
      .def_readwrite("nu", &PgwParams::nu)
      .def_readwrite("gamma", &PgwParams::gamma)
      .def_readwrite("scale", &PgwParams::scale);

  m.def("weibull_hazard", &weibull_hazard, py::arg("params"), py::arg("t"));
  m.def("weibull_cumulative_hazard", &weibull_cumulative_hazard, py::arg("params"), py::arg("t"));
  m.def("weibull_survival", &weibull_survival, py::arg("params"), py::arg("t"));
  m.def("pgw_hazard", &pgw_hazard, py::arg("params"), py::arg("t"));
  m.def("pgw_cumulative_hazard", &pgw_cumulative_hazard, py::arg("params"), py::arg("t"));
  m.def("pgw_survival", &pgw_survival, py::arg("params"), py::arg("t"));

  m.def(
      "loglik_weibull",
      [](const WeibullParams& p, const std::vector<double>& times, const std::vector<int>& status,
         double window_end) { return censored_loglik_weibull(p, make_sample(times, status, window_end)); },
      py::arg("params"), py::arg("times"), py::arg("status"), py::arg("window_end") = 365.0);
  m.def(
      "loglik_pgw",
      [](const PgwParams& p, const std::vector<double>& times, const std::vector<int>& status, double window_end) {
        return censored_loglik_pgw(p, make_sample(times, status, window_end));
      },
      py::arg("params"), py::arg("times"), py::arg("status"), py::arg("window_end") = 365.0);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("model", &FitResult::model)
      .def_readonly("status", &FitResult::status)
      .def_readonly("estimates", &FitResult::estimates)
      .def_readonly("log_se", &FitResult::log_se)
      .def_readonly("loglik", &FitResult::loglik)
      .def_readonly("iterations", &FitResult::iterations)
      .def_property_readonly("converged", &FitResult::converged);

  m.def(
      "fit_weibull",
      [](const std::vector<double>& times, const std::vector<int>& status, double window_end) {
        return fit_weibull(make_sample(times, status, window_end));
      },
      py::arg("times"), py::arg("status"), py::arg("window_end") = 365.0);
  m.def(
      "fit_pgw",
      [](const std::vector<double>& times, const std::vector<int>& status, double window_end) {
        return fit_pgw(make_sample(times, status, window_end));
      },
      py::arg("times"), py::arg("status"), py::arg("window_end") = 365.0);
  m.def(
      "wald_interval",
      [](const FitResult& f, std::size_t index, double level) {
        const auto ci = wald_interval(f, index, level);
        return py::make_tuple(ci.point, ci.lower, ci.upper);
      },
      py::arg("fit"), py::arg("index"), py::arg("level"));
  m.def("shape_pvalue", &shape_pvalue, py::arg("fit"), py::arg("index"));

  py::class_<TestSpec>(m, "TestSpec")
      .def(py::init<Combination, double>(), py::arg("combination"), py::arg("significance"))
      .def_readwrite("combination", &TestSpec::combination)
      .def_readwrite("significance", &TestSpec::significance);
  py::class_<ComponentResult>(m, "ComponentResult")
      .def_readonly("component", &ComponentResult::component)
      .def_readonly("status", &ComponentResult::status)
      .def_readonly("p_values", &ComponentResult::p_values)
      .def_readonly("fit", &ComponentResult::fit);
  py::class_<TestOutcome>(m, "TestOutcome")
      .def_readonly("signal", &TestOutcome::signal)
      .def_readonly("components", &TestOutcome::components);

  m.def(
      "run_test",
      [](const std::vector<double>& times, const std::vector<int>& status, const std::string& combination,
         double significance, double window_end) {
        return run_combination(make_sample(times, status, window_end),
                               {parse_combination(combination), significance});
      },
      py::arg("times"), py::arg("status"), py::arg("combination") = "dWSP-pWSP", py::arg("significance") = 0.01,
      py::arg("window_end") = 365.0);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("n_obs", &Scenario::n_obs)
      .def_readwrite("background_rate", &Scenario::background_rate)
      .def_readwrite("adr_rate_rel", &Scenario::adr_rate_rel)
      .def_readwrite("adr_sd_rel", &Scenario::adr_sd_rel)
      .def_readwrite("window_end", &Scenario::window_end)
      .def_readwrite("replications", &Scenario::replications)
      .def_readwrite("master_seed", &Scenario::master_seed)
      .def_readwrite("day_offset", &Scenario::day_offset)
      .def_property_readonly("adr_sd_days", &Scenario::adr_sd_days);

  m.def("make_grid", &make_grid, py::arg("n_obs"), py::arg("background_rates"), py::arg("adr_rates_rel"),
        py::arg("adr_sd_days"), py::arg("window_end") = 365.0, py::arg("replications") = 1000,
        py::arg("master_seed") = 20240101, py::arg("day_offset") = 0.5);

  m.def(
      "generate_cohort",
      [](const Scenario& sc, int rep) {
        const auto c = generate_cohort(sc, rep);
        py::dict truth;
        truth["has_adr_component"] = c.truth.has_adr_component;
        truth["adr_mean_day"] = c.truth.adr_mean_day;
        truth["n_background_events"] = c.truth.n_background_events;
        truth["n_adr_events"] = c.truth.n_adr_events;
        const auto arrays = sample_arrays(c.sample);
        return py::make_tuple(arrays[0], arrays[1], truth);
      },
      py::arg("scenario"), py::arg("rep"));

  py::class_<OutcomeRow>(m, "OutcomeRow")
      .def_readonly("scenario_id", &OutcomeRow::scenario_id)
      .def_readonly("rep", &OutcomeRow::rep)
      .def_readonly("spec", &OutcomeRow::spec)
      .def_readonly("signal", &OutcomeRow::signal)
      .def_readonly("p_alpha1", &OutcomeRow::p_alpha1)
      .def_readonly("p_alpha05", &OutcomeRow::p_alpha05)
      .def_readonly("p_nu", &OutcomeRow::p_nu)
      .def_readonly("p_gamma", &OutcomeRow::p_gamma)
      .def_readonly("n_events", &OutcomeRow::n_events);

  m.def(
      "run_grid",
      [](const std::vector<Scenario>& grid, const std::vector<TestSpec>& specs, unsigned threads) {
        py::gil_scoped_release release;
        return run_grid(grid, specs, {threads});
      },
      py::arg("grid"), py::arg("specs"), py::arg("threads") = 0);

  m.def(
      "outcome_csv",
      [](const std::vector<Scenario>& grid, const std::vector<OutcomeRow>& rows) {
        std::ostringstream out;
        write_outcome_header(out);
        for (const auto& r : rows) {
          write_outcome_row(out, grid.at(r.scenario_id), r);
        }
        return out.str();
      },
      py::arg("grid"), py::arg("rows"));

  py::class_<EvaluationSummary>(m, "EvaluationSummary")
      .def_readonly("combination", &EvaluationSummary::combination)
      .def_readonly("significance", &EvaluationSummary::significance)
      .def_readonly("stratum", &EvaluationSummary::stratum)
      .def_readonly("fp_count", &EvaluationSummary::fp_count)
      .def_readonly("negatives", &EvaluationSummary::negatives)
      .def_readonly("tp_count", &EvaluationSummary::tp_count)
      .def_readonly("positives", &EvaluationSummary::positives)
      .def_readonly("fp", &EvaluationSummary::fp)
      .def_readonly("tp", &EvaluationSummary::tp)
      .def_readonly("accuracy", &EvaluationSummary::accuracy)
      .def_readonly("auc", &EvaluationSummary::auc);

  m.def(
      "evaluate",
      [](const std::vector<OutcomeRow>& rows, const std::vector<Scenario>& grid, Stratify by) {
        return summarize(to_records(rows, grid, by));
      },
      py::arg("rows"), py::arg("grid"), py::arg("stratify") = Stratify::background_rate);
  m.def("rank", &rank, py::arg("summaries"), py::arg("metric") = RankMetric::auc);

  py::class_<PowerEstimate>(m, "PowerEstimate")
      .def_readonly("background_rate", &PowerEstimate::background_rate)
      .def_readonly("adr_rate_rel", &PowerEstimate::adr_rate_rel)
      .def_readonly("n_obs", &PowerEstimate::n_obs)
      .def_readonly("power", &PowerEstimate::power)
      .def_readonly("mc_se", &PowerEstimate::mc_se)
      .def_readonly("n_events_mean", &PowerEstimate::n_events_mean)
      .def_readonly("replicates", &PowerEstimate::replicates);

  m.def(
      "estimate_power",
      [](const std::vector<OutcomeRow>& rows, const std::vector<Scenario>& grid, double bg, double adr, int n,
         const TestSpec& spec) { return estimate_power(rows, grid, bg, adr, n, spec); },
      py::arg("rows"), py::arg("grid"), py::arg("background_rate"), py::arg("adr_rate_rel"), py::arg("n_obs"),
      py::arg("spec"));
  m.def(
      "simulated_power",
      [](const std::vector<Scenario>& templates, const TestSpec& spec, int n, unsigned threads) {
        py::gil_scoped_release release;
        return simulated_power(templates, spec, {threads})(n);
      },
      py::arg("templates"), py::arg("spec"), py::arg("n_obs"), py::arg("threads") = 0);

  py::class_<SampleSizeResult>(m, "SampleSizeResult")
      .def_readonly("target_power", &SampleSizeResult::target_power)
      .def_readonly("n_required", &SampleSizeResult::n_required)
      .def_readonly("at_required", &SampleSizeResult::at_required)
      .def_readonly("evaluated", &SampleSizeResult::evaluated)
      .def_readonly("monotone", &SampleSizeResult::monotone)
      .def_property_readonly("exceeds_grid", &SampleSizeResult::exceeds_grid);

  m.def(
      "sample_size_search",
      [](double target, const std::vector<int>& n_grid, int granularity, const std::vector<Scenario>& templates,
         const TestSpec& spec, unsigned threads) {
        py::gil_scoped_release release;
        return sample_size_search(target, n_grid, granularity, simulated_power(templates, spec, {threads}));
      },
      py::arg("target_power"), py::arg("n_grid"), py::arg("granularity"), py::arg("templates"), py::arg("spec"),
      py::arg("threads") = 0);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("n_obs", &RunConfig::n_obs)
      .def_readwrite("background_rates", &RunConfig::background_rates)
      .def_readwrite("adr_rates_rel", &RunConfig::adr_rates_rel)
      .def_readwrite("adr_sd_days", &RunConfig::adr_sd_days)
      .def_readwrite("replications", &RunConfig::replications)
      .def_readwrite("master_seed", &RunConfig::master_seed)
      .def_readwrite("significance", &RunConfig::significance)
      .def_readwrite("threads", &RunConfig::threads)
      .def("scenarios", &RunConfig::scenarios)
      .def("specs", &RunConfig::specs)
      .def("to_text", [](const RunConfig& c) { return to_config_text(c); });
  m.def(
      "parse_config",
      [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
      },
      py::arg("text"));
}
