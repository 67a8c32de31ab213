#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "wsp/wsp_tests.hpp"

using namespace wsp;

namespace {

ComponentResult component(Component k, std::vector<double> p, FitStatus st = FitStatus::converged) {
  ComponentResult r;
  r.component = k;
  r.status = st;
  if (st == FitStatus::converged) {
    r.p_values = std::move(p);
  }
  return r;
}

// Background events uniform over the year plus a tight cluster of extra
// events around one day, everyone else censored at 365.
SurvivalSample clustered(int n, double bg, double adr_rel, double mean_day, double sd, std::mt19937_64& rng) {
  std::vector<Observation> obs;
  std::uniform_int_distribution<int> day(1, 365);
  std::normal_distribution<double> adr(mean_day, sd);
  std::binomial_distribution<int> nb(n, bg);
  std::binomial_distribution<int> na(n, bg * adr_rel);
  const int b = nb(rng);
  const int a = na(rng);
  for (int i = 0; i < b; ++i) {
    obs.push_back({day(rng) - 0.5, EventStatus::event});
  }
  for (int i = 0; i < a; ++i) {
    double d = 0.0;
    do {
      d = std::round(adr(rng));
    } while (d < 1.0 || d > 365.0);
    obs.push_back({d - 0.5, EventStatus::event});
  }
  for (int i = a + b; i < n; ++i) {
    obs.push_back({365.0, EventStatus::censored});
  }
  return SurvivalSample(std::move(obs), 365.0);
}

SurvivalSample exponential(int n, double rate, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(rate);
  std::vector<Observation> obs;
  for (int i = 0; i < n; ++i) {
    const double t = e(rng);
    obs.push_back(t <= 365.0 ? Observation{t, EventStatus::event} : Observation{365.0, EventStatus::censored});
  }
  return SurvivalSample(std::move(obs), 365.0);
}

}  // namespace

TEST_CASE("combination names") {
  for (auto c : kAllCombinations) {
    CHECK(parse_combination(to_string(c)) == c);
  }
  CHECK(to_string(Combination::dWSP_pWSP) == "dWSP-pWSP");
  CHECK(parse_combination("dWSP_pWSP") == Combination::dWSP_pWSP);
  CHECK(parse_combination("WSP+pWSP") == Combination::WSP_pWSP);
  CHECK_THROWS_AS(parse_combination("xWSP"), std::invalid_argument);
}

TEST_CASE("components used by each combination") {
  CHECK(uses(Combination::WSP, Component::wsp));
  CHECK_FALSE(uses(Combination::WSP, Component::cwsp));
  CHECK(uses(Combination::dWSP, Component::cwsp));
  CHECK_FALSE(uses(Combination::dWSP, Component::pwsp));
  CHECK(uses(Combination::WSP_pWSP, Component::pwsp));
  CHECK_FALSE(uses(Combination::WSP_pWSP, Component::cwsp));
  for (auto k : {Component::wsp, Component::cwsp, Component::pwsp}) {
    CHECK(uses(Combination::dWSP_pWSP, k));
  }
}

TEST_CASE("censor_at") {
  const SurvivalSample s({{10.0, EventStatus::event}, {200.0, EventStatus::event}, {365.0, EventStatus::censored}},
                         365.0);
  const auto c = censor_at(s, 182.5);
  REQUIRE(c.size() == 3);
  CHECK(c.window_end() == 182.5);
  CHECK(c.observations()[0].time == 10.0);
  CHECK(c.observations()[0].status == EventStatus::event);
  CHECK(c.observations()[1].time == 182.5);
  CHECK(c.observations()[1].status == EventStatus::censored);
  CHECK(c.observations()[2].status == EventStatus::censored);

  const SurvivalSample at_cut({{182.5, EventStatus::event}}, 365.0);
  CHECK(censor_at(at_cut, 182.5).event_count() == 1);

  CHECK_THROWS_AS(censor_at(s, 0.0), std::domain_error);
  CHECK_THROWS_AS(censor_at(s, 400.0), std::domain_error);

  const auto t = censor_at(EventTable(s), 182.5);
  CHECK(t.event_count() == 1.0);
  CHECK(t.subject_count() == 3.0);
  CHECK(t.total_time() == doctest::Approx(10.0 + 2 * 182.5));
}

TEST_CASE("pWSP needs both shape p-values below the level") {
  const TestSpec spec{Combination::pWSP, 0.05};
  CHECK_FALSE(decide(spec, {component(Component::pwsp, {0.001, 0.2})}));
  CHECK(decide({Combination::pWSP, 0.01}, {component(Component::pwsp, {0.001, 0.003})}));
  CHECK_FALSE(decide(spec, {component(Component::pwsp, {}, FitStatus::not_estimable)}));
}

TEST_CASE("p-values equal to the level do not signal") {
  CHECK_FALSE(decide({Combination::WSP, 0.05}, {component(Component::wsp, {0.05})}));
  CHECK(decide({Combination::WSP, 0.05}, {component(Component::wsp, {0.0499})}));
}

TEST_CASE("disjunctions") {
  const std::vector<ComponentResult> only_c = {component(Component::wsp, {0.3}), component(Component::cwsp, {0.001}),
                                               component(Component::pwsp, {0.5, 0.5})};
  CHECK_FALSE(decide({Combination::WSP, 0.01}, only_c));
  CHECK(decide({Combination::cWSP, 0.01}, only_c));
  CHECK(decide({Combination::dWSP, 0.01}, only_c));
  CHECK_FALSE(decide({Combination::WSP_pWSP, 0.01}, only_c));
  CHECK(decide({Combination::dWSP_pWSP, 0.01}, only_c));

  const std::vector<ComponentResult> only_p = {component(Component::wsp, {0.3}),
                                               component(Component::cwsp, {}, FitStatus::not_estimable),
                                               component(Component::pwsp, {0.001, 0.002})};
  CHECK_FALSE(decide({Combination::dWSP, 0.01}, only_p));
  CHECK(decide({Combination::WSP_pWSP, 0.01}, only_p));
  CHECK(decide({Combination::dWSP_pWSP, 0.01}, only_p));

  CHECK_FALSE(decide({Combination::dWSP_pWSP, 0.01}, {}));
}

TEST_CASE("interval excluding one signals") {
  // Point 1.342, interval [1.2, 1.5] at 95%.
  FitResult f;
  f.status = FitStatus::converged;
  f.estimates = {std::sqrt(1.2 * 1.5), 0.01};
  f.log_se = {std::log(1.5 / 1.2) / (2.0 * 1.959963984540054), 0.1};
  ComponentResult r = component(Component::wsp, {shape_pvalue(f, kWeibullShape)});
  CHECK(decide({Combination::WSP, 0.05}, {r}));
}

TEST_CASE("cWSP without events before mid-window is not estimable") {
  std::vector<Observation> obs;
  for (int i = 0; i < 50; ++i) {
    obs.push_back({200.0 + i, EventStatus::event});
  }
  for (int i = 0; i < 500; ++i) {
    obs.push_back({365.0, EventStatus::censored});
  }
  const SurvivalSample s(std::move(obs), 365.0);
  const auto out = run_cwsp(s, 0.05);
  CHECK_FALSE(out.signal);
  REQUIRE(out.components.size() == 1);
  CHECK(out.components[0].status == FitStatus::not_estimable);
  CHECK_FALSE(out.components[0].fit.has_value());
  CHECK(out.components[0].p_values.empty());
}

TEST_CASE("significance must lie in (0, 1)") {
  std::mt19937_64 rng(1);
  const auto s = exponential(200, 0.002, rng);
  CHECK_THROWS_AS(run_wsp(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(run_wsp(s, 1.0), std::invalid_argument);
}

TEST_CASE("early cluster is found by cWSP") {
  std::mt19937_64 rng(90);
  int hits = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    const auto s = clustered(10000, 0.05, 1.0, 90.0, 3.7, rng);
    hits += run_cwsp(s, 0.01).signal ? 1 : 0;
  }
  CHECK(hits > 0.8 * reps);
}

TEST_CASE("signals are monotone in the significance level") {
  std::mt19937_64 rng(5);
  for (int r = 0; r < 20; ++r) {
    const auto s = clustered(3000, 0.05, 0.3, 200.0, 18.3, rng);
    const auto comps = evaluate_components(EventTable(s), {Combination::dWSP_pWSP});
    for (auto c : kAllCombinations) {
      bool previous = false;
      for (int k = 1; k <= 10; ++k) {
        const bool now = decide({c, k / 100.0}, comps);
        CHECK((!previous || now));
        previous = now;
      }
    }
  }
}

TEST_CASE("combined decisions are unions of the parts") {
  std::mt19937_64 rng(6);
  for (int r = 0; r < 20; ++r) {
    const auto s = clustered(2000, 0.05, 0.5, 300.0, 18.3, rng);
    for (double sig : {0.01, 0.05, 0.1}) {
      const bool w = run_wsp(s, sig).signal;
      const bool c = run_cwsp(s, sig).signal;
      const bool p = run_pwsp(s, sig).signal;
      CHECK(run_combination(s, {Combination::dWSP, sig}).signal == (w || c));
      CHECK(run_combination(s, {Combination::WSP_pWSP, sig}).signal == (w || p));
      CHECK(run_combination(s, {Combination::dWSP_pWSP, sig}).signal == (w || c || p));
    }
  }
}

TEST_CASE("cWSP is WSP on the censored sample") {
  std::mt19937_64 rng(7);
  for (int r = 0; r < 10; ++r) {
    const auto s = clustered(2000, 0.05, 0.5, 100.0, 3.7, rng);
    const auto a = run_cwsp(s, 0.05);
    const auto b = run_wsp(censor_at(s, 182.5), 0.05);
    CHECK(a.signal == b.signal);
    REQUIRE(a.components.size() == 1);
    REQUIRE(b.components.size() == 1);
    CHECK(a.components[0].p_values == b.components[0].p_values);
  }
}

TEST_CASE("shared component evaluation matches single runs") {
  std::mt19937_64 rng(8);
  const auto s = clustered(4000, 0.05, 0.2, 150.0, 3.7, rng);
  const auto comps = evaluate_components(EventTable(s), {kAllCombinations.begin(), kAllCombinations.end()});
  CHECK(comps.size() == 3);
  for (auto c : kAllCombinations) {
    CHECK(decide({c, 0.05}, comps) == run_combination(s, {c, 0.05}).signal);
  }
}
