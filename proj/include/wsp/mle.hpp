#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "wsp/survival_models.hpp"

namespace wsp {

enum class Model { weibull, pgw };
enum class FitStatus { converged, not_estimable };

std::string_view to_string(Model m);
std::string_view to_string(FitStatus s);

// Parameter positions inside FitResult::estimates / log_se.
inline constexpr std::size_t kWeibullShape = 0;
inline constexpr std::size_t kWeibullRate = 1;
inline constexpr std::size_t kPgwNu = 0;
inline constexpr std::size_t kPgwGamma = 1;
inline constexpr std::size_t kPgwScale = 2;

/// Outcome of one maximum-likelihood fit. `estimates` are on the natural
/// scale, `log_se` are standard errors of the log-parameters. Both are empty
/// unless the fit converged.
struct FitResult {
  Model model = Model::weibull;
  FitStatus status = FitStatus::not_estimable;
  std::vector<double> estimates;
  std::vector<double> log_se;
  double loglik = 0.0;
  int iterations = 0;

  bool converged() const { return status == FitStatus::converged; }
};

struct OptimizerOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
  // Smallest eigenvalue the observed information may have.
  double min_information_eigenvalue = 1e-10;
};

/// Throws std::invalid_argument when the sample has no events.
FitResult fit_weibull(const SurvivalSample& s, const OptimizerOptions& options = {});
FitResult fit_weibull(const EventTable& s, const OptimizerOptions& options = {});
FitResult fit_pgw(const SurvivalSample& s, const OptimizerOptions& options = {});
FitResult fit_pgw(const EventTable& s, const OptimizerOptions& options = {});

struct WaldInterval {
  double point;
  double lower;
  double upper;
  double level;
};

/// exp(log estimate -/+ z_{1 - level/2} * log_se). `level` is the
/// significance level, so 0.05 gives the 95% interval.
WaldInterval wald_interval(const FitResult& f, std::size_t param_index, double level);

/// Two-sided Wald p-value for H0: parameter == 1 on the log scale.
double shape_pvalue(const FitResult& f, std::size_t param_index);

/// Standard normal upper quantile z with P(|Z| > z) = level.
double two_sided_z(double level);

/// Log-likelihood and its gradient with respect to the log-parameters
/// (log shape, log rate) or (log nu, log gamma, log scale). Exposed so the
/// optimizer's gradient can be checked independently.
double weibull_loglik_log_params(const EventTable& s, std::span<const double> log_params,
                                 std::span<double> gradient);
double pgw_loglik_log_params(const EventTable& s, std::span<const double> log_params,
                             std::span<double> gradient);

}  // namespace wsp
