#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "wsp/evaluation.hpp"

using namespace wsp;

namespace {

std::vector<EvalRecord> records(TestSpec spec, double stratum, int fp, int n, int tp, int p) {
  std::vector<EvalRecord> out;
  for (int i = 0; i < n; ++i) out.push_back({spec, stratum, false, i < fp});
  for (int i = 0; i < p; ++i) out.push_back({spec, stratum, true, i < tp});
  return out;
}

EvaluationSummary summary(Combination c, double s, double auc, double acc) {
  EvaluationSummary e;
  e.combination = c;
  e.significance = s;
  e.auc = auc;
  e.accuracy = acc;
  return e;
}

PowerFunction logistic_power(double n50, double reps, int* calls = nullptr) {
  return [=](int n) {
    if (calls) ++*calls;
    PowerEstimate e;
    e.n_obs = n;
    e.power = 1.0 / (1.0 + std::exp(-(n - n50) / (0.2 * n50)));
    e.mc_se = std::sqrt(e.power * (1.0 - e.power) / reps);
    e.replicates = static_cast<long>(reps);
    return e;
  };
}

}  // namespace

TEST_CASE("single-point AUC and accuracy") {
  CHECK(single_point_auc(0.0, 1.0) == 1.0);
  CHECK(single_point_auc(0.3, 0.3) == 0.5);
  CHECK(accuracy_of(80, 100, 2, 100) == doctest::Approx(0.89));
  CHECK(single_point_auc(0.02, 0.80) == doctest::Approx(0.89));
}

TEST_CASE("summaries count FP and TP per group") {
  const TestSpec spec{Combination::dWSP, 0.01};
  const auto recs = records(spec, 0.05, 2, 100, 80, 100);
  const auto out = summarize(recs);
  REQUIRE(out.size() == 1);
  const auto& s = out[0];
  CHECK(s.fp_count == 2);
  CHECK(s.negatives == 100);
  CHECK(s.tp_count == 80);
  CHECK(s.positives == 100);
  CHECK(*s.fp == doctest::Approx(0.02));
  CHECK(*s.tp == doctest::Approx(0.80));
  CHECK(*s.accuracy == doctest::Approx(0.89));
  CHECK(*s.auc == doctest::Approx(0.89));
}

TEST_CASE("accuracy equals AUC when N equals P") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> count(0, 50);
  for (int i = 0; i < 100; ++i) {
    const auto s = summarize(records({Combination::WSP, 0.05}, 0.0, count(rng), 50, count(rng), 50))[0];
    CHECK(*s.accuracy == doctest::Approx(*s.auc));
  }
}

TEST_CASE("AUC is monotone in fp and tp") {
  for (double x = 0.0; x < 0.95; x += 0.1) {
    CHECK(single_point_auc(x + 0.05, 0.5) < single_point_auc(x, 0.5));
    CHECK(single_point_auc(0.5, x + 0.05) > single_point_auc(0.5, x));
  }
}

TEST_CASE("undefined rates stay empty") {
  const auto only_neg = summarize(records({Combination::WSP, 0.05}, 0.0, 3, 10, 0, 0))[0];
  CHECK(only_neg.fp.has_value());
  CHECK_FALSE(only_neg.tp.has_value());
  CHECK_FALSE(only_neg.auc.has_value());
  CHECK(only_neg.accuracy.has_value());
}

TEST_CASE("aggregation ignores record order and merges") {
  auto recs = records({Combination::WSP, 0.05}, 0.05, 7, 40, 21, 60);
  auto more = records({Combination::pWSP, 0.01}, 0.10, 1, 30, 12, 20);
  recs.insert(recs.end(), more.begin(), more.end());
  const auto base = summarize(recs);

  std::mt19937_64 rng(4);
  std::shuffle(recs.begin(), recs.end(), rng);
  const auto shuffled = summarize(recs);

  Summarizer a;
  Summarizer b;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    (i % 3 == 0 ? a : b).add(recs[i]);
  }
  a.merge(b);
  const auto merged = a.results();

  REQUIRE(base.size() == 2);
  for (const auto* other : {&shuffled, &merged}) {
    REQUIRE(other->size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK((*other)[i].fp_count == base[i].fp_count);
      CHECK((*other)[i].tp_count == base[i].tp_count);
      CHECK((*other)[i].negatives == base[i].negatives);
      CHECK((*other)[i].positives == base[i].positives);
    }
  }
}

TEST_CASE("ranking breaks ties by significance then name") {
  const std::vector<EvaluationSummary> in = {
      summary(Combination::WSP, 0.05, 0.8, 0.7),       summary(Combination::dWSP_pWSP, 0.02, 0.9, 0.6),
      summary(Combination::dWSP, 0.02, 0.9, 0.6),      summary(Combination::WSP_pWSP, 0.01, 0.9, 0.5),
      summary(Combination::cWSP, 0.01, 0.95, 0.9)};
  const auto r = rank(in, RankMetric::auc);
  CHECK(r[0].combination == Combination::cWSP);
  CHECK(r[1].combination == Combination::WSP_pWSP);
  CHECK(r[2].combination == Combination::dWSP);
  CHECK(r[3].combination == Combination::dWSP_pWSP);
  CHECK(r[4].combination == Combination::WSP);

  const auto by_acc = rank(in, RankMetric::accuracy);
  CHECK(by_acc[0].combination == Combination::cWSP);
  CHECK(by_acc[1].combination == Combination::WSP);

  auto missing = in;
  missing[4].auc.reset();
  CHECK(rank(missing, RankMetric::auc).back().combination == Combination::cWSP);
}

TEST_CASE("stratify names") {
  for (auto s : {Stratify::background_rate, Stratify::n_obs, Stratify::adr_sd_days, Stratify::none}) {
    CHECK(parse_stratify(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_stratify("colour"), std::invalid_argument);
  Scenario sc;
  sc.background_rate = 0.1;
  sc.n_obs = 5000;
  CHECK(stratum_value(sc, Stratify::background_rate) == 0.1);
  CHECK(stratum_value(sc, Stratify::n_obs) == 5000.0);
  CHECK(stratum_value(sc, Stratify::adr_sd_days) == doctest::Approx(3.7));
}

TEST_CASE("power from outcome rows") {
  std::vector<Scenario> scenarios(3);
  scenarios[0].adr_rate_rel = 0.0;
  scenarios[1].adr_rate_rel = 1.0;
  scenarios[2].adr_rate_rel = 1.0;
  scenarios[2].adr_sd_rel = 18.3 / 365.0;
  const TestSpec spec{Combination::dWSP_pWSP, 0.01};

  std::vector<OutcomeRow> rows;
  for (std::size_t id = 0; id < 3; ++id) {
    for (int r = 0; r < 250; ++r) {
      OutcomeRow row;
      row.scenario_id = id;
      row.rep = r;
      row.spec = spec;
      row.signal = id > 0 && r % 5 != 0;
      row.n_events = 1000;
      rows.push_back(row);
      row.spec = {Combination::WSP, 0.01};
      row.signal = false;
      rows.push_back(row);
    }
  }
  const auto p = estimate_power(rows, scenarios, 0.05, 1.0, 10000, spec);
  CHECK(p.replicates == 500);
  CHECK(p.power == doctest::Approx(0.8));
  CHECK(p.mc_se == doctest::Approx(std::sqrt(0.8 * 0.2 / 500)));
  CHECK(p.mc_se == doctest::Approx(0.0179).epsilon(0.01));
  CHECK(p.n_events_mean == 1000.0);

  for (auto& r : rows) r.signal = true;
  const auto all = estimate_power(rows, scenarios, 0.05, 1.0, 10000, spec);
  CHECK(all.power == 1.0);
  CHECK(all.mc_se == 0.0);

  CHECK_THROWS_AS(estimate_power(rows, scenarios, 0.05, 0.0, 10000, spec), std::invalid_argument);
  CHECK_THROWS_AS(estimate_power(rows, scenarios, 0.05, 0.5, 10000, spec), std::invalid_argument);
}

TEST_CASE("sample-size search on the grid") {
  const std::vector<int> grid = {100, 200, 400, 800, 1600};
  const auto r = sample_size_search(0.8, grid, 0, logistic_power(500, 1e6));
  REQUIRE(r.n_required.has_value());
  CHECK(*r.n_required == 800);
  CHECK(r.at_required->power >= 0.8);
  CHECK(r.evaluated.size() == 4);
  CHECK(r.monotone);

  const auto first = sample_size_search(0.5, grid, 50, logistic_power(10, 1e6));
  CHECK(*first.n_required == 100);

  const auto missed = sample_size_search(0.9, grid, 0, logistic_power(1e5, 1e6));
  CHECK(missed.exceeds_grid());
  CHECK(missed.evaluated.size() == grid.size());
}

TEST_CASE("sample-size search bisects between grid points") {
  // Power crosses 0.8 at n = 500 + 0.2*500*ln 4 = 638.6.
  const std::vector<int> grid = {100, 200, 400, 800, 1600};
  const auto r = sample_size_search(0.8, grid, 10, logistic_power(500, 1e6));
  REQUIRE(r.n_required.has_value());
  CHECK(*r.n_required >= 639);
  CHECK(*r.n_required <= 650);
  CHECK(r.at_required->power >= 0.8);
}

TEST_CASE("non-monotone power is flagged") {
  const std::vector<int> grid = {100, 200, 300};
  const auto r = sample_size_search(0.99, grid, 0, [](int n) {
    PowerEstimate e;
    e.n_obs = n;
    e.power = n == 200 ? 0.2 : 0.6;
    e.mc_se = 0.01;
    return e;
  });
  CHECK_FALSE(r.monotone);
  CHECK(r.exceeds_grid());
}

TEST_CASE("sample-size search rejects bad input") {
  const auto f = logistic_power(500, 1e6);
  CHECK_THROWS_AS(sample_size_search(1.0, {100}, 0, f), std::invalid_argument);
  CHECK_THROWS_AS(sample_size_search(0.8, {200, 100}, 0, f), std::invalid_argument);
  CHECK_THROWS_AS(sample_size_search(0.8, {}, 0, f), std::invalid_argument);
  CHECK_THROWS_AS(sample_size_search(0.8, {100}, -1, f), std::invalid_argument);
}

TEST_CASE("simulated power grows with cohort size") {
  Scenario sc;
  sc.background_rate = 0.05;
  sc.adr_rate_rel = 1.0;
  sc.replications = 60;
  const auto power = simulated_power({sc}, {Combination::dWSP_pWSP, 0.01}, {1});
  const auto small = power(100);
  const auto large = power(2000);
  CHECK(small.n_obs == 100);
  CHECK(large.replicates == 60);
  CHECK(large.power >= small.power);
  CHECK(large.power > 0.9);
}
