#include "wsp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace wsp {

std::string_view to_string(Stratify s) {
  switch (s) {
    case Stratify::background_rate:
      return "background_rate";
    case Stratify::n_obs:
      return "n_obs";
    case Stratify::adr_sd_days:
      return "adr_sd_days";
    case Stratify::none:
      return "none";
  }
  return "none";
}

Stratify parse_stratify(std::string_view name) {
  for (auto s : {Stratify::background_rate, Stratify::n_obs, Stratify::adr_sd_days, Stratify::none}) {
    if (to_string(s) == name) {
      return s;
    }
  }
  throw std::invalid_argument(fmt::format("unknown stratification key '{}'", name));
}

double stratum_value(const Scenario& sc, Stratify by) {
  switch (by) {
    case Stratify::background_rate:
      return sc.background_rate;
    case Stratify::n_obs:
      return sc.n_obs;
    case Stratify::adr_sd_days:
      return sc.adr_sd_days();
    case Stratify::none:
      return 0.0;
  }
  return 0.0;
}

double single_point_auc(double fp, double tp) { return (tp + (1.0 - fp)) / 2.0; }

double accuracy_of(long tp_count, long positives, long fp_count, long negatives) {
  return static_cast<double>(tp_count + (negatives - fp_count)) / static_cast<double>(positives + negatives);
}

void Summarizer::add(const EvalRecord& r) {
  auto& c = groups_[{static_cast<int>(r.spec.combination), r.spec.significance, r.stratum}];
  if (r.has_adr) {
    ++c.p;
    c.tp += r.signal ? 1 : 0;
  } else {
    ++c.n;
    c.fp += r.signal ? 1 : 0;
  }
}

void Summarizer::merge(const Summarizer& other) {
  for (const auto& [key, counts] : other.groups_) {
    auto& c = groups_[key];
    c.fp += counts.fp;
    c.n += counts.n;
    c.tp += counts.tp;
    c.p += counts.p;
  }
}

std::vector<EvaluationSummary> Summarizer::results() const {
  std::vector<EvaluationSummary> out;
  out.reserve(groups_.size());
  for (const auto& [key, c] : groups_) {
    EvaluationSummary s;
    s.combination = static_cast<Combination>(std::get<0>(key));
    s.significance = std::get<1>(key);
    s.stratum = std::get<2>(key);
    s.fp_count = c.fp;
    s.negatives = c.n;
    s.tp_count = c.tp;
    s.positives = c.p;
    if (c.n > 0) {
      s.fp = static_cast<double>(c.fp) / static_cast<double>(c.n);
    }
    if (c.p > 0) {
      s.tp = static_cast<double>(c.tp) / static_cast<double>(c.p);
    }
    if (c.n + c.p > 0) {
      s.accuracy = accuracy_of(c.tp, c.p, c.fp, c.n);
    }
    if (s.fp && s.tp) {
      s.auc = single_point_auc(*s.fp, *s.tp);
    }
    out.push_back(s);
  }
  return out;
}

std::vector<EvaluationSummary> summarize(std::span<const EvalRecord> records) {
  Summarizer acc;
  for (const auto& r : records) {
    acc.add(r);
  }
  return acc.results();
}

std::vector<EvalRecord> to_records(std::span<const OutcomeRow> rows, std::span<const Scenario> scenarios,
                                   Stratify by) {
  std::vector<EvalRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.scenario_id >= scenarios.size()) {
      throw std::out_of_range(fmt::format("outcome row refers to unknown scenario {}", row.scenario_id));
    }
    const Scenario& sc = scenarios[row.scenario_id];
    out.push_back({row.spec, stratum_value(sc, by), sc.has_adr(), row.signal});
  }
  return out;
}

std::vector<EvaluationSummary> rank(std::vector<EvaluationSummary> summaries, RankMetric by) {
  auto metric = [by](const EvaluationSummary& s) { return by == RankMetric::auc ? s.auc : s.accuracy; };
  std::stable_sort(summaries.begin(), summaries.end(), [&](const EvaluationSummary& a, const EvaluationSummary& b) {
    const auto ma = metric(a);
    const auto mb = metric(b);
    if (ma.has_value() != mb.has_value()) {
      return ma.has_value();
    }
    if (ma && *ma != *mb) {
      return *ma > *mb;
    }
    if (a.significance != b.significance) {
      return a.significance < b.significance;
    }
    return to_string(a.combination) < to_string(b.combination);
  });
  return summaries;
}

PowerEstimate estimate_power(std::span<const OutcomeRow> rows, std::span<const Scenario> scenarios,
                             double background_rate, double adr_rate_rel, int n_obs, const TestSpec& spec) {
  if (!(adr_rate_rel > 0.0)) {
    throw std::invalid_argument("power is undefined for a background-only scenario");
  }
  PowerEstimate out;
  out.background_rate = background_rate;
  out.adr_rate_rel = adr_rate_rel;
  out.n_obs = n_obs;
  long signals = 0;
  double events = 0.0;
  for (const auto& row : rows) {
    if (row.scenario_id >= scenarios.size()) {
      throw std::out_of_range(fmt::format("outcome row refers to unknown scenario {}", row.scenario_id));
    }
    const Scenario& sc = scenarios[row.scenario_id];
    if (sc.background_rate != background_rate || sc.adr_rate_rel != adr_rate_rel || sc.n_obs != n_obs ||
        row.spec.combination != spec.combination || row.spec.significance != spec.significance) {
      continue;
    }
    ++out.replicates;
    signals += row.signal ? 1 : 0;
    events += row.n_events;
  }
  if (out.replicates == 0) {
    throw std::invalid_argument(fmt::format("no outcome rows for background_rate={} adr_rate_rel={} n_obs={} {}@{}",
                                            background_rate, adr_rate_rel, n_obs, to_string(spec.combination),
                                            spec.significance));
  }
  const double reps = static_cast<double>(out.replicates);
  out.power = static_cast<double>(signals) / reps;
  out.mc_se = std::sqrt(out.power * (1.0 - out.power) / reps);
  out.n_events_mean = events / reps;
  return out;
}

PowerFunction simulated_power(std::vector<Scenario> templates, TestSpec spec, GridOptions options) {
  if (templates.empty()) {
    throw std::invalid_argument("simulated_power needs at least one scenario template");
  }
  return [templates = std::move(templates), spec, options](int n_obs) {
    std::vector<Scenario> grid = templates;
    for (auto& sc : grid) {
      sc.n_obs = n_obs;
      if (sc.background_rate != grid.front().background_rate || sc.adr_rate_rel != grid.front().adr_rate_rel) {
        throw std::invalid_argument("pooled power templates must share background and ADR rates");
      }
    }
    const auto rows = run_grid(grid, {spec}, options);
    return estimate_power(rows, grid, grid.front().background_rate, grid.front().adr_rate_rel, n_obs, spec);
  };
}

SampleSizeResult sample_size_search(double target_power, const std::vector<int>& n_grid, int granularity,
                                    const PowerFunction& power) {
  if (!(target_power > 0.0 && target_power < 1.0)) {
    throw std::invalid_argument(fmt::format("target power must lie in (0, 1), got {}", target_power));
  }
  if (n_grid.empty() || !std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end() || n_grid.front() <= 0) {
    throw std::invalid_argument("n_grid must be positive and strictly ascending");
  }
  if (granularity < 0) {
    throw std::invalid_argument("granularity must be non-negative");
  }

  SampleSizeResult out;
  out.target_power = target_power;
  auto evaluate = [&](int n) {
    out.evaluated.push_back(power(n));
    return out.evaluated.back();
  };

  std::optional<PowerEstimate> previous;
  std::size_t hit = n_grid.size();
  PowerEstimate at_hit;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const PowerEstimate est = evaluate(n_grid[i]);
    if (previous) {
      const double se = std::hypot(previous->mc_se, est.mc_se);
      if (est.power < previous->power - 2.0 * se) {
        out.monotone = false;
      }
    }
    previous = est;
    if (est.power >= target_power) {
      hit = i;
      at_hit = est;
      break;
    }
  }
  if (hit == n_grid.size()) {
    return out;
  }
  if (hit == 0 || granularity == 0) {
    out.n_required = n_grid[hit];
    out.at_required = at_hit;
    return out;
  }

  int lo = n_grid[hit - 1];
  int hi = n_grid[hit];
  PowerEstimate at_hi = at_hit;
  while (hi - lo > granularity) {
    int mid = lo + (hi - lo) / 2;
    mid = static_cast<int>(std::lround(static_cast<double>(mid) / granularity)) * granularity;
    if (mid <= lo || mid >= hi) {
      break;
    }
    const PowerEstimate est = evaluate(mid);
    if (est.power >= target_power) {
      hi = mid;
      at_hi = est;
    } else {
      lo = mid;
    }
  }
  out.n_required = hi;
  out.at_required = at_hi;
  return out;
}

}  // namespace wsp
