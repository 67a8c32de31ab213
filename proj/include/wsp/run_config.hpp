#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wsp/simulation.hpp"
#include "wsp/wsp_tests.hpp"

namespace wsp {

/// Settings for the `simulate` and `power` commands.
///
/// Stored as plain text, one `key = value` per line; lists are comma
/// separated, `#` starts a comment. Keys and defaults:
///
///   n_obs              5000, 10000, 20000, 50000
///   background_rate    0.01, 0.05, 0.1
///   adr_rate_rel       0, 0.1, 0.2, 0.5, 1
///   adr_sd_days        3.7, 18.3
///   window_end         365
///   day_offset         0.5 (event time = day - day_offset)
///   replications       1000
///   master_seed        20240101
///   combinations       WSP, cWSP, pWSP, dWSP, WSP-pWSP, dWSP-pWSP
///   significance       0.01, 0.02, ..., 0.1
///   threads            0 (all hardware threads)
///   output             (empty: standard output)
///   targets            0.8, 0.9                    power only
///   n_grid             100, 150, ..., 50000        power only
///   granularity        0                           power only
///   power_combination  dWSP-pWSP                   power only
///   power_significance 0.01                        power only
struct RunConfig {
  std::vector<int> n_obs{5000, 10000, 20000, 50000};
  std::vector<double> background_rates{0.01, 0.05, 0.10};
  std::vector<double> adr_rates_rel{0.0, 0.1, 0.2, 0.5, 1.0};
  std::vector<double> adr_sd_days{3.7, 18.3};
  double window_end = 365.0;
  double day_offset = 0.5;
  int replications = 1000;
  std::uint64_t master_seed = 20240101;
  std::vector<Combination> combinations{kAllCombinations.begin(), kAllCombinations.end()};
  std::vector<double> significance = default_significance_levels();
  unsigned threads = 0;
  std::string output;

  std::vector<double> targets{0.8, 0.9};
  std::vector<int> n_grid = default_n_grid();
  int granularity = 0;
  TestSpec power_spec{Combination::dWSP_pWSP, 0.01};

  std::vector<Scenario> scenarios() const;
  std::vector<TestSpec> specs() const;

  static std::vector<double> default_significance_levels();
  static std::vector<int> default_n_grid();
};

/// Throws std::invalid_argument naming the offending key (and line).
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);
void validate(const RunConfig& cfg);

/// Serializes every field, so the output is a self-contained manifest
/// that parses back to the same configuration.
std::string to_config_text(const RunConfig& cfg);

}  // namespace wsp
