#include "wsp/table_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace wsp {

std::string format_number(double x) {
  if (std::isnan(x)) {
    return {};
  }
  return fmt::format("{:.6g}", x);
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) {
      break;
    }
    line.remove_prefix(comma + 1);
  }
  return out;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') {
    s.remove_suffix(1);
  }
  return s;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) {
    return {};
  }
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

template <class T>
bool parse_field(std::string_view text, T& value) {
  text = trim(text);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end && !text.empty();
}

[[noreturn]] void fail_line(int line_no, std::string_view what) {
  throw std::invalid_argument(fmt::format("line {}: {}", line_no, what));
}

}  // namespace

SurvivalSample read_dataset_csv(std::istream& in, double window_end) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("dataset is empty; expected header 'id,time,status'");
  }
  ++line_no;
  const auto header = split_csv(strip_cr(line));
  if (header.size() != 3 || trim(header[0]) != "id" || trim(header[1]) != "time" || trim(header[2]) != "status") {
    fail_line(line_no, "expected header 'id,time,status'");
  }
  std::vector<Observation> obs;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = strip_cr(line);
    if (trim(view).empty()) {
      continue;
    }
    const auto fields = split_csv(view);
    if (fields.size() != 3) {
      fail_line(line_no, fmt::format("expected 3 fields, found {}", fields.size()));
    }
    double time = 0.0;
    if (!parse_field(fields[1], time) || !std::isfinite(time)) {
      fail_line(line_no, fmt::format("cannot parse time '{}'", fields[1]));
    }
    if (!(time > 0.0)) {
      fail_line(line_no, fmt::format("time must be positive, got {}", time));
    }
    if (time > window_end) {
      fail_line(line_no, fmt::format("time {} is beyond the window end {}", time, window_end));
    }
    int status = -1;
    if (!parse_field(fields[2], status) || (status != 0 && status != 1)) {
      fail_line(line_no, fmt::format("status must be 0 or 1, got '{}'", fields[2]));
    }
    obs.push_back({time, status == 1 ? EventStatus::event : EventStatus::censored});
  }
  return SurvivalSample(std::move(obs), window_end);
}

void write_outcome_header(std::ostream& out) { out << kOutcomeHeader << '\n'; }

void write_outcome_row(std::ostream& out, const Scenario& sc, const OutcomeRow& row) {
  fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", row.scenario_id, sc.n_obs,
             format_number(sc.background_rate), format_number(sc.adr_rate_rel), format_number(sc.adr_sd_days()),
             row.rep, to_string(row.spec.combination), format_number(row.spec.significance), row.signal ? 1 : 0,
             format_number(row.p_alpha1), format_number(row.p_alpha05), format_number(row.p_nu),
             format_number(row.p_gamma), to_string(row.status_wsp), to_string(row.status_cwsp),
             to_string(row.status_pwsp), row.n_events);
}

namespace {

double parse_optional(std::string_view text, int line_no, std::string_view column) {
  if (trim(text).empty()) {
    return kMissing;
  }
  double v = 0.0;
  if (!parse_field(text, v)) {
    fail_line(line_no, fmt::format("{}: cannot parse '{}'", column, text));
  }
  return v;
}

ComponentState parse_state(std::string_view text, int line_no, std::string_view column) {
  text = trim(text);
  if (text.empty()) {
    return ComponentState::not_run;
  }
  if (text == "converged") {
    return ComponentState::converged;
  }
  if (text == "not_estimable") {
    return ComponentState::not_estimable;
  }
  fail_line(line_no, fmt::format("{}: unknown status '{}'", column, text));
}

template <class T>
T parse_required(std::string_view text, int line_no, std::string_view column) {
  T v{};
  if (!parse_field(text, v)) {
    fail_line(line_no, fmt::format("{}: cannot parse '{}'", column, text));
  }
  return v;
}

}  // namespace

OutcomeTable read_outcome_csv(std::istream& in, double window_end) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || strip_cr(line) != kOutcomeHeader) {
    throw std::invalid_argument(fmt::format("outcome table header mismatch; expected '{}'", kOutcomeHeader));
  }
  ++line_no;
  const std::size_t n_columns = split_csv(kOutcomeHeader).size();

  OutcomeTable table;
  std::map<std::size_t, Scenario> scenarios;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = strip_cr(line);
    if (trim(view).empty()) {
      continue;
    }
    const auto f = split_csv(view);
    if (f.size() != n_columns) {
      fail_line(line_no, fmt::format("expected {} fields, found {}", n_columns, f.size()));
    }
    OutcomeRow row;
    row.scenario_id = parse_required<std::size_t>(f[0], line_no, "scenario_id");
    Scenario sc;
    sc.n_obs = parse_required<int>(f[1], line_no, "n_obs");
    sc.background_rate = parse_required<double>(f[2], line_no, "background_rate");
    sc.adr_rate_rel = parse_required<double>(f[3], line_no, "adr_rate_rel");
    sc.window_end = window_end;
    sc.adr_sd_rel = parse_required<double>(f[4], line_no, "adr_sd_days") / window_end;
    row.rep = parse_required<int>(f[5], line_no, "rep");
    try {
      row.spec.combination = parse_combination(trim(f[6]));
    } catch (const std::invalid_argument& e) {
      fail_line(line_no, e.what());
    }
    row.spec.significance = parse_required<double>(f[7], line_no, "significance");
    const int signal = parse_required<int>(f[8], line_no, "signal");
    if (signal != 0 && signal != 1) {
      fail_line(line_no, "signal must be 0 or 1");
    }
    row.signal = signal == 1;
    row.p_alpha1 = parse_optional(f[9], line_no, "p_alpha1");
    row.p_alpha05 = parse_optional(f[10], line_no, "p_alpha05");
    row.p_nu = parse_optional(f[11], line_no, "p_nu");
    row.p_gamma = parse_optional(f[12], line_no, "p_gamma");
    row.status_wsp = parse_state(f[13], line_no, "status_wsp");
    row.status_cwsp = parse_state(f[14], line_no, "status_cwsp");
    row.status_pwsp = parse_state(f[15], line_no, "status_pwsp");
    row.n_events = parse_required<int>(f[16], line_no, "n_events");

    const auto [it, inserted] = scenarios.emplace(row.scenario_id, sc);
    if (!inserted) {
      const Scenario& prev = it->second;
      if (prev.n_obs != sc.n_obs || prev.background_rate != sc.background_rate ||
          prev.adr_rate_rel != sc.adr_rate_rel || prev.adr_sd_rel != sc.adr_sd_rel) {
        fail_line(line_no, fmt::format("scenario {} fields disagree with earlier rows", row.scenario_id));
      }
    }
    table.rows.push_back(row);
  }

  // Renumber densely so scenario ids index the scenario vector.
  std::map<std::size_t, std::size_t> dense;
  for (const auto& [id, sc] : scenarios) {
    dense[id] = table.scenarios.size();
    table.scenarios.push_back(sc);
  }
  for (auto& row : table.rows) {
    row.scenario_id = dense[row.scenario_id];
  }
  return table;
}

void write_ranking_header(std::ostream& out) { out << kRankingHeader << '\n'; }

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string_view metric_name(RankMetric m) { return m == RankMetric::auc ? "auc" : "accuracy"; }

}  // namespace

void write_ranking_rows(std::ostream& out, Stratify by, double stratum, RankMetric metric,
                        const std::vector<EvaluationSummary>& ranked, std::size_t top_k) {
  const std::size_t n = std::min(top_k, ranked.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = ranked[i];
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(by), format_number(stratum),
               metric_name(metric), i + 1, to_string(s.combination), format_number(s.significance), opt(s.auc),
               opt(s.accuracy), opt(s.fp), opt(s.tp), s.fp_count, s.negatives, s.tp_count, s.positives);
  }
}

namespace {

std::string stratum_title(Stratify by, double stratum) {
  switch (by) {
    case Stratify::background_rate:
      return fmt::format("Background rate of {:.2f}", stratum);
    case Stratify::n_obs:
      return fmt::format("Number of observations {}", format_number(stratum));
    case Stratify::adr_sd_days:
      return fmt::format("ADR time SD of {} days", format_number(stratum));
    case Stratify::none:
      return "All scenarios";
  }
  return {};
}

std::string metric_cell(const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : "NA"; }

}  // namespace

void write_ranking_report(std::ostream& out, Stratify by, const std::vector<EvaluationSummary>& summaries,
                          std::size_t top_k) {
  std::map<double, std::vector<EvaluationSummary>> strata;
  for (const auto& s : summaries) {
    strata[s.stratum].push_back(s);
  }
  for (const auto& [stratum, group] : strata) {
    const auto by_auc = rank(group, RankMetric::auc);
    const auto by_acc = rank(group, RankMetric::accuracy);
    fmt::print(out, "{}\n", stratum_title(by, stratum));
    fmt::print(out, "{:>4}  {:<10} {:>7} {:>8}    {:<10} {:>7} {:>8}\n", "", "Test combi.", "signif.", "AUC",
               "Test combi.", "signif.", "Acc");
    const std::size_t n = std::min(top_k, group.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = by_auc[i];
      const auto& b = by_acc[i];
      fmt::print(out, "{:>4}  {:<10} {:>7.2f} {:>8}    {:<10} {:>7.2f} {:>8}\n", i + 1, to_string(a.combination),
                 a.significance, metric_cell(a.auc), to_string(b.combination), b.significance,
                 metric_cell(b.accuracy));
    }
    out << '\n';
  }
}

void write_power_header(std::ostream& out) { out << kPowerHeader << '\n'; }

void write_power_row(std::ostream& out, double background_rate, double adr_rate_rel, const TestSpec& spec,
                     const SampleSizeResult& r) {
  std::string n_required;
  std::string events;
  std::string power;
  std::string se;
  if (r.n_required) {
    n_required = std::to_string(*r.n_required);
    events = format_number(r.at_required->n_events_mean);
    power = format_number(r.at_required->power);
    se = format_number(r.at_required->mc_se);
  } else {
    n_required = "exceeds_grid";
    if (!r.evaluated.empty()) {
      const auto& last = r.evaluated.back();
      events = ">" + format_number(last.n_events_mean);
      power = format_number(last.power);
      se = format_number(last.mc_se);
    }
  }
  fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", format_number(background_rate), format_number(adr_rate_rel),
             format_number(r.target_power), n_required, events, power, se, to_string(spec.combination),
             format_number(spec.significance));
}

}  // namespace wsp
