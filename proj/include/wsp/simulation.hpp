#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "wsp/survival_models.hpp"
#include "wsp/wsp_tests.hpp"

namespace wsp {

/// One cell of the simulation grid. Rates are per subject over the window;
/// `adr_rate_rel` is the ADR probability as a multiple of the background
/// rate and `adr_sd_rel` the ADR-time standard deviation as a fraction of
/// the window.
struct Scenario {
  int n_obs = 10000;
  double background_rate = 0.05;
  double adr_rate_rel = 0.0;
  double adr_sd_rel = 3.7 / 365.0;
  double window_end = 365.0;
  int replications = 1000;
  std::uint64_t master_seed = 20240101;
  // Event days are recorded as time = day - day_offset. 0.5 puts each event
  // at the middle of its day; 0 records the day number itself, which biases
  // the Weibull shape upwards because every event is shifted late.
  double day_offset = 0.5;

  double adr_sd_days() const { return adr_sd_rel * window_end; }
  bool has_adr() const { return adr_rate_rel > 0.0; }
};

/// Throws std::invalid_argument naming the first bad field.
void validate(const Scenario& sc);

/// Builds the full factorial grid over the listed values.
/// SDs are given in days.
std::vector<Scenario> make_grid(const std::vector<int>& n_obs, const std::vector<double>& background_rates,
                                const std::vector<double>& adr_rates_rel,
                                const std::vector<double>& adr_sd_days, double window_end,
                                int replications, std::uint64_t master_seed, double day_offset = 0.5);

struct CohortTruth {
  bool has_adr_component = false;
  std::optional<double> adr_mean_day;
  int n_background_events = 0;
  int n_adr_events = 0;
};

struct GeneratedCohort {
  SurvivalSample sample;
  CohortTruth truth;
};

/// Stable per-replication seed derived from the master seed, the scenario
/// fields and the replication index.
std::uint64_t derive_seed(const Scenario& sc, int rep_index);

/// Background events: Binomial(n, background_rate) subjects with event day
/// uniform on {1..W}. ADR events: Binomial(n, background_rate * adr_rate_rel)
/// further subjects with day round(Normal(mean, sd)) resampled into [1, W],
/// where the mean is one Uniform[1, W] draw per cohort. Event times are
/// day - day_offset. Everyone else is censored at the window end.
GeneratedCohort generate_cohort(const Scenario& sc, int rep_index);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

enum class ComponentState : std::uint8_t { not_run, converged, not_estimable };

/// One (scenario, replication, spec) evaluation.
struct OutcomeRow {
  std::size_t scenario_id = 0;
  int rep = 0;
  TestSpec spec{Combination::WSP, 0.05};
  bool signal = false;
  double p_alpha1 = kMissing;
  double p_alpha05 = kMissing;
  double p_nu = kMissing;
  double p_gamma = kMissing;
  ComponentState status_wsp = ComponentState::not_run;
  ComponentState status_cwsp = ComponentState::not_run;
  ComponentState status_pwsp = ComponentState::not_run;
  int n_events = 0;
};

struct GridOptions {
  // 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Receives rows in (scenario, rep, spec) order.
using RowSink = std::function<void(const Scenario&, const OutcomeRow&)>;

/// Evaluates every (scenario, rep, spec) triple exactly once. Each cohort is
/// generated once and shared by all specs. Output order and values do not
/// depend on the thread count.
void run_grid(const std::vector<Scenario>& grid, const std::vector<TestSpec>& specs,
              const GridOptions& options, const RowSink& sink);

std::vector<OutcomeRow> run_grid(const std::vector<Scenario>& grid, const std::vector<TestSpec>& specs,
                                 const GridOptions& options = {});

/// Evaluates one cohort under every spec (the per-replication work unit).
std::vector<OutcomeRow> evaluate_cohort(const GeneratedCohort& cohort, std::size_t scenario_id, int rep,
                                        const std::vector<TestSpec>& specs);

std::string_view to_string(ComponentState s);

}  // namespace wsp
