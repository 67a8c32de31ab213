#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace wsp {

enum class EventStatus : std::uint8_t { censored = 0, event = 1 };

struct Observation {
  double time;
  EventStatus status;
};

/// Right-censored time-to-event cohort observed on (0, window_end].
///
/// Construction validates every time against the window and throws
/// std::domain_error naming the offending observation.
class SurvivalSample {
 public:
  SurvivalSample(std::vector<Observation> observations, double window_end);

  std::span<const Observation> observations() const { return observations_; }
  double window_end() const { return window_end_; }
  std::size_t size() const { return observations_.size(); }
  std::size_t event_count() const { return event_count_; }
  bool empty() const { return observations_.empty(); }

 private:
  std::vector<Observation> observations_;
  double window_end_;
  std::size_t event_count_ = 0;
};

/// Observations collapsed by distinct time: `events` of the `total` subjects
/// leaving observation at `time` had the event, the rest were censored.
struct TimeCount {
  double time;
  double events;
  double total;
};

/// Tabulated form of a SurvivalSample, sorted by time. The likelihoods only
/// depend on the sample through this table, and simulated cohorts have at
/// most one row per day, so fitting works on it directly.
class EventTable {
 public:
  EventTable() = default;
  explicit EventTable(const SurvivalSample& sample);
  EventTable(std::vector<TimeCount> rows, double window_end);

  std::span<const TimeCount> rows() const { return rows_; }
  double window_end() const { return window_end_; }
  double event_count() const { return event_count_; }
  double subject_count() const { return subject_count_; }
  double total_time() const { return total_time_; }

 private:
  void accumulate_totals();

  std::vector<TimeCount> rows_;
  double window_end_ = 0.0;
  double event_count_ = 0.0;
  double subject_count_ = 0.0;
  double total_time_ = 0.0;
};

/// Weibull with hazard shape * rate^shape * t^(shape - 1) and survival
/// exp(-(rate * t)^shape). `rate` is the inverse of the usual scale.
struct WeibullParams {
  double shape;
  double rate;
};

/// Power generalized Weibull (Bagdonavicius-Nikulin) with survival
/// exp(1 - (1 + (t / scale)^nu)^(1 / gamma)). nu = gamma = 1 is the
/// exponential with rate 1 / scale.
struct PgwParams {
  double nu;
  double gamma;
  double scale;
};

void validate(const WeibullParams& p);
void validate(const PgwParams& p);

double weibull_log_hazard(const WeibullParams& p, double t);
double weibull_hazard(const WeibullParams& p, double t);
double weibull_cumulative_hazard(const WeibullParams& p, double t);
double weibull_survival(const WeibullParams& p, double t);
double weibull_log_density(const WeibullParams& p, double t);

double pgw_log_hazard(const PgwParams& p, double t);
double pgw_hazard(const PgwParams& p, double t);
double pgw_cumulative_hazard(const PgwParams& p, double t);
double pgw_survival(const PgwParams& p, double t);
double pgw_log_density(const PgwParams& p, double t);

/// Sum over events of log hazard minus sum over all subjects of the
/// cumulative hazard at their exit time.
double censored_loglik_weibull(const WeibullParams& p, const SurvivalSample& s);
double censored_loglik_weibull(const WeibullParams& p, const EventTable& s);
double censored_loglik_pgw(const PgwParams& p, const SurvivalSample& s);
double censored_loglik_pgw(const PgwParams& p, const EventTable& s);

/// Inverse-CDF draws. Deterministic for a given generator state.
std::vector<double> sample_weibull(const WeibullParams& p, std::size_t n, std::mt19937_64& rng);

namespace detail {

// Bounds on log((t / scale)^nu) and log((rate * t)^shape) so powers stay
// within [1e-300, 1e300].
inline constexpr double kMinLogPower = -690.7755278982137;
inline constexpr double kMaxLogPower = 690.7755278982137;

double clamp_log_power(double x);

/// log(1 + exp(x)) without overflow.
double log1p_exp(double x);

}  // namespace detail

}  // namespace wsp
