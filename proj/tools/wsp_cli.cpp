// wsp: shape tests on datasets, simulation grids, rankings and sample sizes.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "wsp/evaluation.hpp"
#include "wsp/mle.hpp"
#include "wsp/run_config.hpp"
#include "wsp/simulation.hpp"
#include "wsp/table_io.hpp"
#include "wsp/wsp_tests.hpp"

using namespace wsp;

namespace {

// Writes to a file, or to standard output when the path is empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) {
        throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
      }
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error(fmt::format("cannot open '{}'", path));
  }
  return in;
}

const char* param_name(Component k, std::size_t i) {
  if (k == Component::pwsp) {
    return i == 0 ? "nu" : "gamma";
  }
  return "alpha";
}

std::size_t param_index(Component k, std::size_t i) {
  if (k == Component::pwsp) {
    return i == 0 ? kPgwNu : kPgwGamma;
  }
  return kWeibullShape;
}

nlohmann::json to_json(const TestOutcome& out, const TestSpec& spec, const SurvivalSample& s) {
  nlohmann::json j;
  j["combination"] = std::string(to_string(spec.combination));
  j["significance"] = spec.significance;
  j["n"] = s.size();
  j["events"] = s.event_count();
  j["window_end"] = s.window_end();
  j["signal"] = out.signal;
  j["components"] = nlohmann::json::array();
  for (const auto& c : out.components) {
    nlohmann::json jc;
    jc["component"] = std::string(to_string(c.component));
    jc["status"] = std::string(to_string(c.status));
    jc["signal"] = component_signal(c, spec.significance);
    if (c.fit && c.fit->converged()) {
      jc["loglik"] = c.fit->loglik;
      jc["iterations"] = c.fit->iterations;
      jc["estimates"] = c.fit->estimates;
      jc["log_se"] = c.fit->log_se;
      for (std::size_t i = 0; i < c.p_values.size(); ++i) {
        const auto ci = wald_interval(*c.fit, param_index(c.component, i), spec.significance);
        jc["shapes"].push_back({{"name", param_name(c.component, i)},
                                {"estimate", ci.point},
                                {"ci_lower", ci.lower},
                                {"ci_upper", ci.upper},
                                {"p_value", c.p_values[i]}});
      }
    }
    j["components"].push_back(jc);
  }
  return j;
}

void print_text(std::ostream& os, const TestOutcome& out, const TestSpec& spec, const SurvivalSample& s) {
  fmt::print(os, "{} at level {}: n={} events={} window_end={}\n", to_string(spec.combination),
             format_number(spec.significance), s.size(), s.event_count(), format_number(s.window_end()));
  const double confidence = 100.0 * (1.0 - spec.significance);
  for (const auto& c : out.components) {
    fmt::print(os, "  {:<5} {}", to_string(c.component), to_string(c.status));
    if (!(c.fit && c.fit->converged())) {
      fmt::print(os, "{}\n", c.fit ? "" : " (no events in the test window)");
      continue;
    }
    fmt::print(os, "  loglik={}\n", format_number(c.fit->loglik));
    for (std::size_t i = 0; i < c.p_values.size(); ++i) {
      const auto ci = wald_interval(*c.fit, param_index(c.component, i), spec.significance);
      fmt::print(os, "        {:<6} {:>10}  {}% CI [{}, {}]  p={}\n", param_name(c.component, i),
                 format_number(ci.point), format_number(confidence), format_number(ci.lower),
                 format_number(ci.upper), format_number(c.p_values[i]));
    }
  }
  fmt::print(os, "decision: {}\n", out.signal ? "signal" : "no signal");
}

int cmd_test(const std::string& path, double window_end, const std::string& combination, double significance,
             bool json) {
  auto in = open_input(path);
  const auto sample = read_dataset_csv(in, window_end);
  if (sample.event_count() == 0) {
    throw std::invalid_argument("dataset has no events");
  }
  const TestSpec spec{parse_combination(combination), significance};
  const auto out = run_combination(sample, spec);
  if (json) {
    std::cout << to_json(out, spec, sample).dump(2) << '\n';
  } else {
    print_text(std::cout, out, spec, sample);
  }
  return 0;
}

int cmd_simulate(RunConfig cfg) {
  Output out(cfg.output);
  write_outcome_header(out.stream());
  run_grid(cfg.scenarios(), cfg.specs(), {cfg.threads},
           [&](const Scenario& sc, const OutcomeRow& row) { write_outcome_row(out.stream(), sc, row); });
  out.stream().flush();
  return 0;
}

int cmd_evaluate(const std::string& path, double window_end, const std::string& stratify, std::size_t top_k,
                 const std::string& output, const std::string& report) {
  auto in = open_input(path);
  const auto table = read_outcome_csv(in, window_end);
  const Stratify by = parse_stratify(stratify);
  const auto summaries = summarize(to_records(table.rows, table.scenarios, by));

  std::map<double, std::vector<EvaluationSummary>> strata;
  for (const auto& s : summaries) {
    strata[s.stratum].push_back(s);
  }
  {
    Output csv(output);
    write_ranking_header(csv.stream());
    for (auto metric : {RankMetric::auc, RankMetric::accuracy}) {
      for (const auto& [stratum, group] : strata) {
        write_ranking_rows(csv.stream(), by, stratum, metric, rank(group, metric), top_k);
      }
    }
  }
  if (report == "-" || (report.empty() && !output.empty())) {
    write_ranking_report(std::cout, by, summaries, top_k);
  } else if (!report.empty()) {
    Output text(report);
    write_ranking_report(text.stream(), by, summaries, top_k);
  }
  return 0;
}

int cmd_power(const RunConfig& cfg) {
  Output out(cfg.output);
  write_power_header(out.stream());
  for (double bg : cfg.background_rates) {
    for (double adr : cfg.adr_rates_rel) {
      if (!(adr > 0.0)) {
        continue;
      }
      std::vector<Scenario> templates;
      for (double sd : cfg.adr_sd_days) {
        Scenario sc;
        sc.background_rate = bg;
        sc.adr_rate_rel = adr;
        sc.adr_sd_rel = sd / cfg.window_end;
        sc.window_end = cfg.window_end;
        sc.replications = cfg.replications;
        sc.master_seed = cfg.master_seed;
        sc.day_offset = cfg.day_offset;
        templates.push_back(sc);
      }
      // Sizes already simulated for a lower target are reused.
      auto simulate = simulated_power(templates, cfg.power_spec, {cfg.threads});
      std::map<int, PowerEstimate> cache;
      PowerFunction power = [&](int n) {
        auto it = cache.find(n);
        if (it == cache.end()) {
          it = cache.emplace(n, simulate(n)).first;
        }
        return it->second;
      };
      for (double target : cfg.targets) {
        const auto r = sample_size_search(target, cfg.n_grid, cfg.granularity, power);
        if (!r.monotone) {
          fmt::print(std::cerr, "warning: power not monotone in n for bg {} adr {}; consider more replications\n",
                     format_number(bg), format_number(adr));
        }
        write_power_row(out.stream(), bg, adr, cfg.power_spec, r);
        out.stream().flush();
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weibull shape-parameter tests for adverse drug reaction signals"};
  app.require_subcommand(1);

  auto* test = app.add_subcommand("test", "Run a test combination on a time-to-event dataset");
  std::string dataset;
  double window_end = 365.0;
  std::string combination = "dWSP-pWSP";
  double significance = 0.01;
  bool json = false;
  test->add_option("dataset", dataset, "CSV with header id,time,status")->required();
  test->add_option("--window-end", window_end, "Observation window end")->capture_default_str();
  test->add_option("-c,--combination", combination, "WSP, cWSP, pWSP, dWSP, WSP-pWSP or dWSP-pWSP")
      ->capture_default_str();
  test->add_option("-s,--significance", significance, "Level for every member test")->capture_default_str();
  test->add_flag("--json", json, "Print JSON instead of text");

  std::string config_path;
  std::string output;
  unsigned threads = 0;
  bool threads_set = false;
  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "key = value configuration file")->required();
    cmd->add_option("-o,--output", output, "Output CSV (overrides the config; default stdout)");
    cmd->add_option_function<unsigned>(
        "-j,--threads",
        [&](unsigned t) {
          threads = t;
          threads_set = true;
        },
        "Worker threads (overrides the config; 0 = all)");
  };
  auto* simulate = app.add_subcommand("simulate", "Run a simulation grid and write the outcome CSV");
  add_run_options(simulate);
  auto* power = app.add_subcommand("power", "Search sample sizes reaching the target powers");
  add_run_options(power);

  auto* evaluate = app.add_subcommand("evaluate", "Rank combinations from an outcome CSV");
  std::string outcome_path;
  std::string stratify = "background_rate";
  std::size_t top_k = 10;
  std::string report;
  double eval_window = 365.0;
  evaluate->add_option("outcomes", outcome_path, "Outcome CSV written by simulate")->required();
  evaluate->add_option("--stratify", stratify, "background_rate, n_obs, adr_sd_days or none")->capture_default_str();
  evaluate->add_option("-k,--top-k", top_k, "Rows per ranking block")->capture_default_str();
  evaluate->add_option("-o,--output", output, "Ranking CSV (default stdout)");
  evaluate->add_option("--report", report, "Text report path, '-' for stdout (default stdout with --output)");
  evaluate->add_option("--window-end", eval_window, "Window end used by the simulation")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (test->parsed()) {
      return cmd_test(dataset, window_end, combination, significance, json);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(outcome_path, eval_window, stratify, top_k, output, report);
    }
    auto cfg = load_config(config_path);
    if (!output.empty()) cfg.output = output;
    if (threads_set) cfg.threads = threads;
    return simulate->parsed() ? cmd_simulate(cfg) : cmd_power(cfg);
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 1;
  }
}
