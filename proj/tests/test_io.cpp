#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "wsp/run_config.hpp"
#include "wsp/table_io.hpp"

using namespace wsp;

namespace {

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

SurvivalSample dataset(const std::string& text, double window = 365.0) {
  std::istringstream in(text);
  return read_dataset_csv(in, window);
}

}  // namespace

TEST_CASE("config defaults") {
  const auto cfg = parse("");
  CHECK(cfg.n_obs == std::vector<int>{5000, 10000, 20000, 50000});
  CHECK(cfg.background_rates.size() == 3);
  CHECK(cfg.adr_rates_rel.size() == 5);
  CHECK(cfg.adr_sd_days.size() == 2);
  CHECK(cfg.significance.size() == 10);
  CHECK(cfg.significance.front() == 0.01);
  CHECK(cfg.significance.back() == 0.1);
  CHECK(cfg.combinations.size() == 6);
  CHECK(cfg.scenarios().size() == 120);
  CHECK(cfg.specs().size() == 60);
  CHECK(cfg.power_spec.combination == Combination::dWSP_pWSP);
}

TEST_CASE("config parses values and comments") {
  const auto cfg = parse(
      "# small run\n"
      "n_obs = 1000, 2000\n"
      "background_rate = 0.05   # one rate\n"
      "adr_rate_rel = 0, 1\n"
      "adr_sd_days = 3.7\n"
      "replications = 3\n"
      "combinations = WSP, dWSP_pWSP\n"
      "significance = 0.01, 0.05\n"
      "threads = 2\n"
      "output = out.csv\n");
  CHECK(cfg.n_obs == std::vector<int>{1000, 2000});
  CHECK(cfg.replications == 3);
  CHECK(cfg.combinations == std::vector<Combination>{Combination::WSP, Combination::dWSP_pWSP});
  CHECK(cfg.threads == 2);
  CHECK(cfg.output == "out.csv");
  CHECK(cfg.scenarios().size() == 4);
  CHECK(cfg.specs().size() == 4);
}

TEST_CASE("config text round-trips") {
  RunConfig cfg;
  cfg.n_obs = {300, 400};
  cfg.background_rates = {0.05};
  cfg.adr_rates_rel = {0.0, 0.5};
  cfg.day_offset = 0.0;
  cfg.master_seed = 99;
  cfg.combinations = {Combination::cWSP};
  cfg.significance = {0.03};
  cfg.granularity = 25;
  cfg.output = "x.csv";
  const auto back = parse(to_config_text(cfg));
  CHECK(to_config_text(back) == to_config_text(cfg));
  CHECK(back.day_offset == 0.0);
  CHECK(back.granularity == 25);
  CHECK(back.master_seed == 99);
}

TEST_CASE("config errors name the key and line") {
  CHECK(error_of([] { parse("replications = -1\n"); }).find("replications") != std::string::npos);
  CHECK(error_of([] { parse("\nbogus = 1\n"); }).find("line 2: bogus") != std::string::npos);
  CHECK(error_of([] { parse("n_obs = 10\nn_obs = 20\n"); }).find("duplicate") != std::string::npos);
  CHECK(error_of([] { parse("n_obs = ten\n"); }).find("n_obs") != std::string::npos);
  CHECK(error_of([] { parse("background_rate = 0.6\n"); }).find("adr_rate_rel") != std::string::npos);
  CHECK(error_of([] { parse("combinations = zWSP\n"); }).find("line 1") != std::string::npos);
  CHECK(error_of([] { parse("n_grid = 200, 100\n"); }).find("n_grid") != std::string::npos);
  CHECK(error_of([] { parse("just words\n"); }).find("key = value") != std::string::npos);
}

TEST_CASE("dataset CSV") {
  const auto s = dataset("id,time,status\n1,10.5,1\n2,365,0\r\n\n3,200,1\n");
  CHECK(s.size() == 3);
  CHECK(s.event_count() == 2);
  CHECK(s.observations()[0].time == 10.5);
  CHECK(s.observations()[1].status == EventStatus::censored);
}

TEST_CASE("dataset errors name the line") {
  CHECK(error_of([] { dataset("id,time,status\n1,10,1\n2,-3,1\n"); }).find("line 3") != std::string::npos);
  CHECK(error_of([] { dataset("id,time,status\n1,0,1\n"); }).find("positive") != std::string::npos);
  CHECK(error_of([] { dataset("id,time,status\n1,400,1\n"); }).find("window") != std::string::npos);
  CHECK(error_of([] { dataset("id,time,status\n1,4,2\n"); }).find("status") != std::string::npos);
  CHECK(error_of([] { dataset("id,time,status\n1,abc,1\n"); }).find("line 2") != std::string::npos);
  CHECK(error_of([] { dataset("id,t,status\n"); }).find("header") != std::string::npos);
  CHECK(error_of([] { dataset(""); }).find("empty") != std::string::npos);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.05) == "0.05");
  CHECK(format_number(10000) == "10000");
  CHECK(format_number(1.0 / 3.0) == "0.333333");
  CHECK(format_number(kMissing).empty());
}

TEST_CASE("simulated outcomes read back") {
  const auto grid = make_grid({500, 800}, {0.05}, {0.0, 1.0}, {3.7}, 365.0, 2, 7);
  std::vector<TestSpec> specs;
  for (auto c : kAllCombinations) specs.push_back({c, 0.05});
  std::ostringstream out;
  write_outcome_header(out);
  run_grid(grid, specs, {1}, [&](const Scenario& sc, const OutcomeRow& row) { write_outcome_row(out, sc, row); });

  const auto text = out.str();
  CHECK(text.substr(0, text.find('\n')) == kOutcomeHeader);

  std::istringstream in(text);
  const auto table = read_outcome_csv(in);
  const auto rows = run_grid(grid, specs, {1});
  REQUIRE(table.rows.size() == rows.size());
  REQUIRE(table.scenarios.size() == grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(table.rows[i].signal == rows[i].signal);
    CHECK(table.rows[i].spec.combination == rows[i].spec.combination);
    CHECK(table.rows[i].status_pwsp == rows[i].status_pwsp);
    CHECK(std::isnan(table.rows[i].p_nu) == std::isnan(rows[i].p_nu));
    if (!std::isnan(rows[i].p_alpha1)) {
      CHECK(table.rows[i].p_alpha1 == doctest::Approx(rows[i].p_alpha1).epsilon(1e-5));
    }
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(table.scenarios[k].n_obs == grid[k].n_obs);
    CHECK(table.scenarios[k].adr_sd_days() == doctest::Approx(grid[k].adr_sd_days()));
  }

  const auto summaries = summarize(to_records(table.rows, table.scenarios, Stratify::background_rate));
  CHECK(summaries.size() == specs.size());
  std::ostringstream ranking;
  write_ranking_header(ranking);
  write_ranking_rows(ranking, Stratify::background_rate, 0.05, RankMetric::auc, rank(summaries, RankMetric::auc), 3);
  const auto ranked = ranking.str();
  CHECK(std::count(ranked.begin(), ranked.end(), '\n') == 4);
}

TEST_CASE("outcome CSV schema errors") {
  std::istringstream wrong_header("scenario_id,n\n");
  CHECK_THROWS_AS(read_outcome_csv(wrong_header), std::invalid_argument);

  const std::string header = std::string(kOutcomeHeader) + "\n";
  std::istringstream short_row(header + "0,100,0.05\n");
  CHECK(error_of([&] { read_outcome_csv(short_row); }).find("line 2") != std::string::npos);

  std::istringstream bad_status(header + "0,100,0.05,0,3.7,0,WSP,0.05,0,0.5,,,,maybe,,,5\n");
  CHECK(error_of([&] { read_outcome_csv(bad_status); }).find("status_wsp") != std::string::npos);

  std::istringstream clash(header + "0,100,0.05,0,3.7,0,WSP,0.05,0,0.5,,,,converged,,,5\n" +
                           "0,200,0.05,0,3.7,1,WSP,0.05,0,0.5,,,,converged,,,5\n");
  CHECK(error_of([&] { read_outcome_csv(clash); }).find("disagree") != std::string::npos);
}

TEST_CASE("power rows mark targets beyond the grid") {
  SampleSizeResult r;
  r.target_power = 0.9;
  PowerEstimate last;
  last.n_obs = 50000;
  last.power = 0.7;
  last.n_events_mean = 2600;
  r.evaluated = {last};
  std::ostringstream out;
  write_power_row(out, 0.01, 0.1, {Combination::dWSP_pWSP, 0.01}, r);
  CHECK(out.str() == "0.01,0.1,0.9,exceeds_grid,>2600,0.7,0,dWSP-pWSP,0.01\n");
}
