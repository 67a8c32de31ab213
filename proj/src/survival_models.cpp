#include "wsp/survival_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace wsp {

SurvivalSample::SurvivalSample(std::vector<Observation> observations, double window_end)
    : observations_(std::move(observations)), window_end_(window_end) {
  if (!(window_end_ > 0.0) || !std::isfinite(window_end_)) {
    throw std::domain_error(fmt::format("window end must be positive and finite, got {}", window_end_));
  }
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const auto& o = observations_[i];
    if (!(o.time > 0.0) || o.time > window_end_) {
      throw std::domain_error(fmt::format(
          "observation {} has time {} outside (0, {}]", i, o.time, window_end_));
    }
    if (o.status == EventStatus::event) {
      ++event_count_;
    }
  }
}

EventTable::EventTable(const SurvivalSample& sample) : window_end_(sample.window_end()) {
  // Most subjects of a cohort are administratively censored at the window
  // end; count those directly and sort only the rest.
  double censored_at_end = 0.0;
  std::vector<Observation> rest;
  rest.reserve(sample.event_count() + 16);
  for (const auto& o : sample.observations()) {
    if (o.status == EventStatus::censored && o.time == window_end_) {
      censored_at_end += 1.0;
    } else {
      rest.push_back(o);
    }
  }
  std::sort(rest.begin(), rest.end(),
            [](const Observation& a, const Observation& b) { return a.time < b.time; });

  for (const auto& o : rest) {
    if (rows_.empty() || rows_.back().time != o.time) {
      rows_.push_back({o.time, 0.0, 0.0});
    }
    rows_.back().total += 1.0;
    if (o.status == EventStatus::event) {
      rows_.back().events += 1.0;
    }
  }
  if (censored_at_end > 0.0) {
    if (!rows_.empty() && rows_.back().time == window_end_) {
      rows_.back().total += censored_at_end;
    } else {
      rows_.push_back({window_end_, 0.0, censored_at_end});
    }
  }
  accumulate_totals();
}

EventTable::EventTable(std::vector<TimeCount> rows, double window_end)
    : rows_(std::move(rows)), window_end_(window_end) {
  if (!(window_end_ > 0.0) || !std::isfinite(window_end_)) {
    throw std::domain_error(fmt::format("window end must be positive and finite, got {}", window_end_));
  }
  std::sort(rows_.begin(), rows_.end(),
            [](const TimeCount& a, const TimeCount& b) { return a.time < b.time; });
  for (const auto& r : rows_) {
    if (!(r.time > 0.0) || r.time > window_end_) {
      throw std::domain_error(fmt::format("time {} outside (0, {}]", r.time, window_end_));
    }
    if (r.events < 0.0 || r.total < r.events) {
      throw std::domain_error(fmt::format("inconsistent counts at time {}", r.time));
    }
  }
  accumulate_totals();
}

void EventTable::accumulate_totals() {
  event_count_ = 0.0;
  subject_count_ = 0.0;
  total_time_ = 0.0;
  for (const auto& r : rows_) {
    event_count_ += r.events;
    subject_count_ += r.total;
    total_time_ += r.time * r.total;
  }
}

void validate(const WeibullParams& p) {
  if (!(p.shape > 0.0) || !(p.rate > 0.0) || !std::isfinite(p.shape) || !std::isfinite(p.rate)) {
    throw std::domain_error(fmt::format("invalid Weibull parameters shape={} rate={}", p.shape, p.rate));
  }
}

void validate(const PgwParams& p) {
  if (!(p.nu > 0.0) || !(p.gamma > 0.0) || !(p.scale > 0.0) || !std::isfinite(p.nu) ||
      !std::isfinite(p.gamma) || !std::isfinite(p.scale)) {
    throw std::domain_error(
        fmt::format("invalid PGW parameters nu={} gamma={} scale={}", p.nu, p.gamma, p.scale));
  }
}

namespace detail {

double clamp_log_power(double x) { return std::clamp(x, kMinLogPower, kMaxLogPower); }

double log1p_exp(double x) {
  if (x > 35.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

}  // namespace detail

namespace {

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::domain_error(fmt::format("time must be positive and finite, got {}", t));
  }
}

// log((rate * t)^shape)
double weibull_log_cumhaz(const WeibullParams& p, double log_t) {
  return detail::clamp_log_power(p.shape * (std::log(p.rate) + log_t));
}

// log((t / scale)^nu)
double pgw_log_power(const PgwParams& p, double log_t) {
  return detail::clamp_log_power(p.nu * (log_t - std::log(p.scale)));
}

double weibull_log_hazard_unchecked(const WeibullParams& p, double log_t) {
  return std::log(p.shape) + p.shape * std::log(p.rate) + (p.shape - 1.0) * log_t;
}

double pgw_log_hazard_unchecked(const PgwParams& p, double log_t) {
  const double log1p_power = detail::log1p_exp(pgw_log_power(p, log_t));
  return std::log(p.nu) - std::log(p.gamma) - p.nu * std::log(p.scale) + (p.nu - 1.0) * log_t +
         (1.0 / p.gamma - 1.0) * log1p_power;
}

double pgw_cumhaz_unchecked(const PgwParams& p, double log_t) {
  return std::expm1(detail::log1p_exp(pgw_log_power(p, log_t)) / p.gamma);
}

}  // namespace

double weibull_log_hazard(const WeibullParams& p, double t) {
  validate(p);
  check_time(t);
  return weibull_log_hazard_unchecked(p, std::log(t));
}

double weibull_hazard(const WeibullParams& p, double t) { return std::exp(weibull_log_hazard(p, t)); }

double weibull_cumulative_hazard(const WeibullParams& p, double t) {
  validate(p);
  check_time(t);
  return std::exp(weibull_log_cumhaz(p, std::log(t)));
}

double weibull_survival(const WeibullParams& p, double t) { return std::exp(-weibull_cumulative_hazard(p, t)); }

double weibull_log_density(const WeibullParams& p, double t) {
  return weibull_log_hazard(p, t) - weibull_cumulative_hazard(p, t);
}

double pgw_log_hazard(const PgwParams& p, double t) {
  validate(p);
  check_time(t);
  return pgw_log_hazard_unchecked(p, std::log(t));
}

double pgw_hazard(const PgwParams& p, double t) { return std::exp(pgw_log_hazard(p, t)); }

double pgw_cumulative_hazard(const PgwParams& p, double t) {
  validate(p);
  check_time(t);
  return pgw_cumhaz_unchecked(p, std::log(t));
}

double pgw_survival(const PgwParams& p, double t) { return std::exp(-pgw_cumulative_hazard(p, t)); }

double pgw_log_density(const PgwParams& p, double t) {
  return pgw_log_hazard(p, t) - pgw_cumulative_hazard(p, t);
}

double censored_loglik_weibull(const WeibullParams& p, const SurvivalSample& s) {
  validate(p);
  if (s.empty()) {
    throw std::invalid_argument("log-likelihood of an empty sample");
  }
  double ll = 0.0;
  for (const auto& o : s.observations()) {
    const double log_t = std::log(o.time);
    if (o.status == EventStatus::event) {
      ll += weibull_log_hazard_unchecked(p, log_t);
    }
    ll -= std::exp(weibull_log_cumhaz(p, log_t));
  }
  return ll;
}

double censored_loglik_weibull(const WeibullParams& p, const EventTable& s) {
  validate(p);
  if (s.rows().empty()) {
    throw std::invalid_argument("log-likelihood of an empty sample");
  }
  double ll = 0.0;
  for (const auto& r : s.rows()) {
    const double log_t = std::log(r.time);
    if (r.events > 0.0) {
      ll += r.events * weibull_log_hazard_unchecked(p, log_t);
    }
    ll -= r.total * std::exp(weibull_log_cumhaz(p, log_t));
  }
  return ll;
}

double censored_loglik_pgw(const PgwParams& p, const SurvivalSample& s) {
  validate(p);
  if (s.empty()) {
    throw std::invalid_argument("log-likelihood of an empty sample");
  }
  double ll = 0.0;
  for (const auto& o : s.observations()) {
    const double log_t = std::log(o.time);
    if (o.status == EventStatus::event) {
      ll += pgw_log_hazard_unchecked(p, log_t);
    }
    ll -= pgw_cumhaz_unchecked(p, log_t);
  }
  return ll;
}

double censored_loglik_pgw(const PgwParams& p, const EventTable& s) {
  validate(p);
  if (s.rows().empty()) {
    throw std::invalid_argument("log-likelihood of an empty sample");
  }
  double ll = 0.0;
  for (const auto& r : s.rows()) {
    const double log_t = std::log(r.time);
    if (r.events > 0.0) {
      ll += r.events * pgw_log_hazard_unchecked(p, log_t);
    }
    ll -= r.total * pgw_cumhaz_unchecked(p, log_t);
  }
  return ll;
}

std::vector<double> sample_weibull(const WeibullParams& p, std::size_t n, std::mt19937_64& rng) {
  validate(p);
  std::vector<double> out;
  out.reserve(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    // 1 - U lies in (0, 1]; reject the single value that maps to t = 0.
    double e = 0.0;
    while (e == 0.0) {
      e = -std::log1p(-unif(rng));
    }
    out.push_back(std::pow(e, 1.0 / p.shape) / p.rate);
  }
  return out;
}

}  // namespace wsp
