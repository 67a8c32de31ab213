#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wsp/evaluation.hpp"
#include "wsp/simulation.hpp"
#include "wsp/survival_models.hpp"

namespace wsp {

/// Six significant digits; NaN is written as an empty field.
std::string format_number(double x);

/// Reads `id,time,status` rows (status 1 = event, 0 = censored). Errors
/// are std::invalid_argument messages naming the file line.
SurvivalSample read_dataset_csv(std::istream& in, double window_end);

inline constexpr std::string_view kOutcomeHeader =
    "scenario_id,n_obs,background_rate,adr_rate_rel,adr_sd_days,rep,combination,significance,signal,"
    "p_alpha1,p_alpha05,p_nu,p_gamma,status_wsp,status_cwsp,status_pwsp,n_events";

void write_outcome_header(std::ostream& out);
void write_outcome_row(std::ostream& out, const Scenario& sc, const OutcomeRow& row);

/// Outcome table read back from CSV. Scenarios are rebuilt from the
/// per-row fields and indexed by scenario_id.
struct OutcomeTable {
  std::vector<Scenario> scenarios;
  std::vector<OutcomeRow> rows;
};

/// Throws std::invalid_argument on any schema mismatch.
OutcomeTable read_outcome_csv(std::istream& in, double window_end = 365.0);

inline constexpr std::string_view kRankingHeader =
    "stratify,stratum,metric,rank,combination,significance,auc,accuracy,fp,tp,FP,N,TP,P";

void write_ranking_header(std::ostream& out);
void write_ranking_rows(std::ostream& out, Stratify by, double stratum, RankMetric metric,
                        const std::vector<EvaluationSummary>& ranked, std::size_t top_k);

/// Side-by-side AUC and accuracy rankings per stratum.
void write_ranking_report(std::ostream& out, Stratify by, const std::vector<EvaluationSummary>& summaries,
                          std::size_t top_k);

inline constexpr std::string_view kPowerHeader =
    "background_rate,adr_rate_rel,target,n_required,n_events_mean,power,mc_se,combination,significance";

void write_power_header(std::ostream& out);
void write_power_row(std::ostream& out, double background_rate, double adr_rate_rel, const TestSpec& spec,
                     const SampleSizeResult& r);

}  // namespace wsp
