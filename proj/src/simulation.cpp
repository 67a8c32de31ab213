#include "wsp/simulation.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>
#include <thread>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <fmt/format.h>

namespace wsp {

void validate(const Scenario& sc) {
  if (sc.n_obs <= 0) {
    throw std::invalid_argument(fmt::format("n_obs must be positive, got {}", sc.n_obs));
  }
  if (!(sc.background_rate > 0.0 && sc.background_rate < 1.0)) {
    throw std::invalid_argument(fmt::format("background_rate must lie in (0, 1), got {}", sc.background_rate));
  }
  if (!(sc.adr_rate_rel >= 0.0) || !std::isfinite(sc.adr_rate_rel)) {
    throw std::invalid_argument(fmt::format("adr_rate_rel must be >= 0, got {}", sc.adr_rate_rel));
  }
  if (sc.background_rate * (1.0 + sc.adr_rate_rel) > 1.0) {
    throw std::invalid_argument(fmt::format(
        "expected events exceed n_obs: background_rate * (1 + adr_rate_rel) = {}",
        sc.background_rate * (1.0 + sc.adr_rate_rel)));
  }
  if (!(sc.adr_sd_rel > 0.0) || !std::isfinite(sc.adr_sd_rel)) {
    throw std::invalid_argument(fmt::format("adr_sd_rel must be positive, got {}", sc.adr_sd_rel));
  }
  if (!(sc.window_end >= 1.0) || !std::isfinite(sc.window_end)) {
    throw std::invalid_argument(fmt::format("window_end must be at least one day, got {}", sc.window_end));
  }
  if (!(sc.day_offset >= 0.0 && sc.day_offset < 1.0)) {
    throw std::invalid_argument(fmt::format("day_offset must lie in [0, 1), got {}", sc.day_offset));
  }
  if (sc.replications <= 0) {
    throw std::invalid_argument(fmt::format("replications must be positive, got {}", sc.replications));
  }
}

std::vector<Scenario> make_grid(const std::vector<int>& n_obs, const std::vector<double>& background_rates,
                                const std::vector<double>& adr_rates_rel,
                                const std::vector<double>& adr_sd_days, double window_end,
                                int replications, std::uint64_t master_seed, double day_offset) {
  std::vector<Scenario> grid;
  for (double bg : background_rates) {
    for (int n : n_obs) {
      for (double adr : adr_rates_rel) {
        for (double sd : adr_sd_days) {
          Scenario sc;
          sc.n_obs = n;
          sc.background_rate = bg;
          sc.adr_rate_rel = adr;
          sc.adr_sd_rel = sd / window_end;
          sc.window_end = window_end;
          sc.replications = replications;
          sc.master_seed = master_seed;
          sc.day_offset = day_offset;
          validate(sc);
          grid.push_back(sc);
        }
      }
    }
  }
  return grid;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

}  // namespace

std::uint64_t derive_seed(const Scenario& sc, int rep_index) {
  std::uint64_t h = splitmix64(sc.master_seed);
  h = mix(h, static_cast<std::uint64_t>(sc.n_obs));
  h = mix(h, std::bit_cast<std::uint64_t>(sc.background_rate));
  h = mix(h, std::bit_cast<std::uint64_t>(sc.adr_rate_rel));
  h = mix(h, std::bit_cast<std::uint64_t>(sc.adr_sd_rel));
  h = mix(h, std::bit_cast<std::uint64_t>(sc.window_end));
  h = mix(h, static_cast<std::uint64_t>(rep_index));
  return h;
}

GeneratedCohort generate_cohort(const Scenario& sc, int rep_index) {
  validate(sc);
  if (rep_index < 0 || rep_index >= sc.replications) {
    throw std::out_of_range(fmt::format("replication {} outside [0, {})", rep_index, sc.replications));
  }
  std::mt19937_64 rng(derive_seed(sc, rep_index));
  const int last_day = static_cast<int>(std::floor(sc.window_end));

  boost::random::binomial_distribution<int, double> n_background(sc.n_obs, sc.background_rate);
  const int background = n_background(rng);
  int adr = 0;
  if (sc.has_adr()) {
    boost::random::binomial_distribution<int, double> n_adr(sc.n_obs, sc.background_rate * sc.adr_rate_rel);
    // Subjects carry at most one event.
    adr = std::min(n_adr(rng), sc.n_obs - background);
  }

  std::vector<Observation> obs;
  obs.reserve(static_cast<std::size_t>(sc.n_obs));
  boost::random::uniform_int_distribution<int> day(1, last_day);
  for (int i = 0; i < background; ++i) {
    obs.push_back({day(rng) - sc.day_offset, EventStatus::event});
  }

  CohortTruth truth;
  truth.has_adr_component = sc.has_adr();
  truth.n_background_events = background;
  truth.n_adr_events = adr;
  if (sc.has_adr()) {
    boost::random::uniform_real_distribution<double> mean_day(1.0, static_cast<double>(last_day));
    const double mean = mean_day(rng);
    truth.adr_mean_day = mean;
    boost::random::normal_distribution<double> spread(mean, sc.adr_sd_days());
    for (int i = 0; i < adr; ++i) {
      double t = 0.0;
      do {
        t = std::round(spread(rng));
      } while (t < 1.0 || t > last_day);
      obs.push_back({t - sc.day_offset, EventStatus::event});
    }
  }
  obs.resize(static_cast<std::size_t>(sc.n_obs), Observation{sc.window_end, EventStatus::censored});
  return {SurvivalSample(std::move(obs), sc.window_end), truth};
}

std::string_view to_string(ComponentState s) {
  switch (s) {
    case ComponentState::not_run:
      return "";
    case ComponentState::converged:
      return "converged";
    case ComponentState::not_estimable:
      return "not_estimable";
  }
  return "";
}

namespace {

ComponentState state_of(const ComponentResult& r) {
  return r.status == FitStatus::converged ? ComponentState::converged : ComponentState::not_estimable;
}

void fill_component(OutcomeRow& row, const ComponentResult& r) {
  const bool ok = r.status == FitStatus::converged;
  switch (r.component) {
    case Component::wsp:
      row.status_wsp = state_of(r);
      if (ok) {
        row.p_alpha1 = r.p_values[0];
      }
      break;
    case Component::cwsp:
      row.status_cwsp = state_of(r);
      if (ok) {
        row.p_alpha05 = r.p_values[0];
      }
      break;
    case Component::pwsp:
      row.status_pwsp = state_of(r);
      if (ok) {
        row.p_nu = r.p_values[0];
        row.p_gamma = r.p_values[1];
      }
      break;
  }
}

std::vector<Combination> combinations_of(const std::vector<TestSpec>& specs) {
  std::vector<Combination> out;
  for (const auto& s : specs) {
    out.push_back(s.combination);
  }
  return out;
}

std::vector<OutcomeRow> failed_rows(std::size_t scenario_id, int rep, const std::vector<TestSpec>& specs) {
  std::vector<OutcomeRow> rows;
  for (const auto& spec : specs) {
    OutcomeRow row;
    row.scenario_id = scenario_id;
    row.rep = rep;
    row.spec = spec;
    if (uses(spec.combination, Component::wsp)) row.status_wsp = ComponentState::not_estimable;
    if (uses(spec.combination, Component::cwsp)) row.status_cwsp = ComponentState::not_estimable;
    if (uses(spec.combination, Component::pwsp)) row.status_pwsp = ComponentState::not_estimable;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<OutcomeRow> evaluate_cohort(const GeneratedCohort& cohort, std::size_t scenario_id, int rep,
                                        const std::vector<TestSpec>& specs) {
  const EventTable table(cohort.sample);
  const auto components = evaluate_components(table, combinations_of(specs));
  std::vector<OutcomeRow> rows;
  rows.reserve(specs.size());
  for (const auto& spec : specs) {
    OutcomeRow row;
    row.scenario_id = scenario_id;
    row.rep = rep;
    row.spec = spec;
    row.n_events = static_cast<int>(cohort.sample.event_count());
    for (const auto& r : components) {
      if (uses(spec.combination, r.component)) {
        fill_component(row, r);
      }
    }
    row.signal = decide(spec, components);
    rows.push_back(row);
  }
  return rows;
}

void run_grid(const std::vector<Scenario>& grid, const std::vector<TestSpec>& specs,
              const GridOptions& options, const RowSink& sink) {
  if (grid.empty() || specs.empty()) {
    throw std::invalid_argument("run_grid needs at least one scenario and one test spec");
  }
  for (const auto& sc : grid) {
    validate(sc);
  }
  for (const auto& spec : specs) {
    if (!(spec.significance > 0.0 && spec.significance < 1.0)) {
      throw std::invalid_argument(fmt::format("significance level must lie in (0, 1), got {}", spec.significance));
    }
  }
  unsigned threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::max(1u, threads);

  for (std::size_t id = 0; id < grid.size(); ++id) {
    const Scenario& sc = grid[id];
    std::vector<std::vector<OutcomeRow>> per_rep(static_cast<std::size_t>(sc.replications));
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int rep = next++; rep < sc.replications; rep = next++) {
        try {
          per_rep[rep] = evaluate_cohort(generate_cohort(sc, rep), id, rep, specs);
        } catch (const std::exception&) {
          per_rep[rep] = failed_rows(id, rep, specs);
        }
      }
    };
    const unsigned n_workers = std::min<unsigned>(threads, static_cast<unsigned>(sc.replications));
    if (n_workers <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(n_workers);
      for (unsigned t = 0; t < n_workers; ++t) {
        pool.emplace_back(worker);
      }
    }
    for (const auto& rows : per_rep) {
      for (const auto& row : rows) {
        sink(sc, row);
      }
    }
  }
}

std::vector<OutcomeRow> run_grid(const std::vector<Scenario>& grid, const std::vector<TestSpec>& specs,
                                 const GridOptions& options) {
  std::vector<OutcomeRow> rows;
  run_grid(grid, specs, options, [&rows](const Scenario&, const OutcomeRow& row) { rows.push_back(row); });
  return rows;
}

}  // namespace wsp
