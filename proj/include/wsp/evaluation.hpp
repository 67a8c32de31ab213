#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "wsp/simulation.hpp"
#include "wsp/wsp_tests.hpp"

namespace wsp {

/// Which scenario field defines the strata of a summary.
enum class Stratify { background_rate, n_obs, adr_sd_days, none };

std::string_view to_string(Stratify s);
Stratify parse_stratify(std::string_view name);
double stratum_value(const Scenario& sc, Stratify by);

/// Minimal per-replication record the aggregation needs.
struct EvalRecord {
  TestSpec spec;
  double stratum = 0.0;
  bool has_adr = false;
  bool signal = false;
};

/// Counts and rates for one (combination, significance, stratum).
/// Replicates without an ADR component are the negatives (N), the others
/// the positives (P).
struct EvaluationSummary {
  Combination combination = Combination::WSP;
  double significance = 0.0;
  double stratum = 0.0;
  long fp_count = 0;
  long negatives = 0;
  long tp_count = 0;
  long positives = 0;
  std::optional<double> fp;
  std::optional<double> tp;
  std::optional<double> accuracy;
  // Single-operating-point AUC (tp + 1 - fp) / 2; undefined unless both
  // N and P are positive.
  std::optional<double> auc;
};

double single_point_auc(double fp, double tp);
double accuracy_of(long tp_count, long positives, long fp_count, long negatives);

/// Order-free fold over records; partial summarizers merge associatively.
class Summarizer {
 public:
  void add(const EvalRecord& r);
  void merge(const Summarizer& other);
  std::vector<EvaluationSummary> results() const;

 private:
  struct Counts {
    long fp = 0;
    long n = 0;
    long tp = 0;
    long p = 0;
  };
  // Key: (combination, significance, stratum).
  std::map<std::tuple<int, double, double>, Counts> groups_;
};

std::vector<EvaluationSummary> summarize(std::span<const EvalRecord> records);

/// Turns outcome rows into evaluation records using the scenario table.
std::vector<EvalRecord> to_records(std::span<const OutcomeRow> rows, std::span<const Scenario> scenarios,
                                   Stratify by);

enum class RankMetric { auc, accuracy };

/// Descending by the metric; ties go to the smaller significance, then to
/// the combination name. Entries without the metric sort last.
std::vector<EvaluationSummary> rank(std::vector<EvaluationSummary> summaries, RankMetric by);

struct PowerEstimate {
  double background_rate = 0.0;
  double adr_rate_rel = 0.0;
  int n_obs = 0;
  double power = 0.0;
  double mc_se = 0.0;
  double n_events_mean = 0.0;
  long replicates = 0;
};

/// Power of `spec` pooled over every scenario with the given rates and
/// size (for example both ADR-time spreads). Throws std::invalid_argument
/// for a background-only key or when nothing matches.
PowerEstimate estimate_power(std::span<const OutcomeRow> rows, std::span<const Scenario> scenarios,
                             double background_rate, double adr_rate_rel, int n_obs, const TestSpec& spec);

/// Power at a given cohort size.
using PowerFunction = std::function<PowerEstimate(int n_obs)>;

/// Simulates `templates` (one per pooled ADR spread) at the requested size
/// and estimates the power of `spec`.
PowerFunction simulated_power(std::vector<Scenario> templates, TestSpec spec, GridOptions options = {});

struct SampleSizeResult {
  double target_power = 0.0;
  // Absent when even the largest grid size misses the target.
  std::optional<int> n_required;
  std::optional<PowerEstimate> at_required;
  // Every size evaluated, in evaluation order.
  std::vector<PowerEstimate> evaluated;
  // False when power fell by more than two Monte Carlo SEs between
  // consecutive grid sizes, which points at too few replications.
  bool monotone = true;

  bool exceeds_grid() const { return !n_required.has_value(); }
};

/// Smallest grid size whose power reaches the target, refined by bisection
/// between the bracketing grid points down to `granularity` observations
/// (0 disables refinement).
SampleSizeResult sample_size_search(double target_power, const std::vector<int>& n_grid, int granularity,
                                    const PowerFunction& power);

}  // namespace wsp
