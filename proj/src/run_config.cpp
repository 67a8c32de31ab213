#include "wsp/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace wsp {

std::vector<double> RunConfig::default_significance_levels() {
  std::vector<double> out;
  for (int k = 1; k <= 10; ++k) {
    out.push_back(k / 100.0);
  }
  return out;
}

std::vector<int> RunConfig::default_n_grid() {
  return {100,  150,  200,  300,  400,  500,   600,   800,   1000,  1400,  1500,  2000,  2500, 3000,
          3500, 4000, 5000, 5500, 6000, 7000, 7500, 8000, 10000, 12000, 15000, 20000, 25000, 30000, 40000, 50000};
}

std::vector<Scenario> RunConfig::scenarios() const {
  return make_grid(n_obs, background_rates, adr_rates_rel, adr_sd_days, window_end, replications, master_seed,
                   day_offset);
}

std::vector<TestSpec> RunConfig::specs() const {
  std::vector<TestSpec> out;
  for (auto c : combinations) {
    for (double s : significance) {
      out.push_back({c, s});
    }
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) {
      out.push_back(item);
    }
    if (comma == std::string_view::npos) {
      break;
    }
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(fmt::format("{}: cannot parse '{}' as a number", key, text));
  }
  return value;
}

template <class T>
std::vector<T> parse_numbers(std::string_view key, std::string_view text) {
  std::vector<T> out;
  for (auto item : split_list(text)) {
    out.push_back(parse_number<T>(key, item));
  }
  if (out.empty()) {
    throw std::invalid_argument(fmt::format("{}: empty list", key));
  }
  return out;
}

void require(bool ok, std::string_view key, std::string_view what) {
  if (!ok) {
    throw std::invalid_argument(fmt::format("{}: {}", key, what));
  }
}

}  // namespace

void validate(const RunConfig& cfg) {
  require(!cfg.n_obs.empty(), "n_obs", "empty list");
  require(std::all_of(cfg.n_obs.begin(), cfg.n_obs.end(), [](int n) { return n > 0; }), "n_obs",
          "values must be positive");
  require(!cfg.background_rates.empty(), "background_rate", "empty list");
  require(std::all_of(cfg.background_rates.begin(), cfg.background_rates.end(),
                      [](double r) { return r > 0.0 && r < 1.0; }),
          "background_rate", "values must lie in (0, 1)");
  require(!cfg.adr_rates_rel.empty(), "adr_rate_rel", "empty list");
  require(std::all_of(cfg.adr_rates_rel.begin(), cfg.adr_rates_rel.end(), [](double r) { return r >= 0.0; }),
          "adr_rate_rel", "values must be >= 0");
  require(!cfg.adr_sd_days.empty(), "adr_sd_days", "empty list");
  require(std::all_of(cfg.adr_sd_days.begin(), cfg.adr_sd_days.end(), [](double s) { return s > 0.0; }),
          "adr_sd_days", "values must be positive");
  require(cfg.window_end >= 1.0, "window_end", "must be at least one day");
  require(cfg.day_offset >= 0.0 && cfg.day_offset < 1.0, "day_offset", "must lie in [0, 1)");
  require(cfg.replications > 0, "replications", "must be positive");
  require(!cfg.combinations.empty(), "combinations", "empty list");
  require(!cfg.significance.empty(), "significance", "empty list");
  require(std::all_of(cfg.significance.begin(), cfg.significance.end(), [](double s) { return s > 0.0 && s < 1.0; }),
          "significance", "values must lie in (0, 1)");
  require(!cfg.targets.empty(), "targets", "empty list");
  require(std::all_of(cfg.targets.begin(), cfg.targets.end(), [](double t) { return t > 0.0 && t < 1.0; }),
          "targets", "values must lie in (0, 1)");
  require(!cfg.n_grid.empty() && std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end()) &&
              std::adjacent_find(cfg.n_grid.begin(), cfg.n_grid.end()) == cfg.n_grid.end() && cfg.n_grid.front() > 0,
          "n_grid", "must be positive and strictly ascending");
  require(cfg.granularity >= 0, "granularity", "must be non-negative");
  require(cfg.power_spec.significance > 0.0 && cfg.power_spec.significance < 1.0, "power_significance",
          "must lie in (0, 1)");
  for (double bg : cfg.background_rates) {
    for (double adr : cfg.adr_rates_rel) {
      require(bg * (1.0 + adr) <= 1.0, "adr_rate_rel",
              fmt::format("background_rate {} with adr_rate_rel {} exceeds one event per subject", bg, adr));
    }
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) {
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument(fmt::format("line {}: expected 'key = value'", line_no));
    }
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    if (!seen.emplace(key).second) {
      throw std::invalid_argument(fmt::format("line {}: {}: duplicate key", line_no, key));
    }
    try {
      if (key == "n_obs") {
        cfg.n_obs = parse_numbers<int>(key, value);
      } else if (key == "background_rate") {
        cfg.background_rates = parse_numbers<double>(key, value);
      } else if (key == "adr_rate_rel") {
        cfg.adr_rates_rel = parse_numbers<double>(key, value);
      } else if (key == "adr_sd_days") {
        cfg.adr_sd_days = parse_numbers<double>(key, value);
      } else if (key == "window_end") {
        cfg.window_end = parse_number<double>(key, value);
      } else if (key == "day_offset") {
        cfg.day_offset = parse_number<double>(key, value);
      } else if (key == "replications") {
        cfg.replications = parse_number<int>(key, value);
      } else if (key == "master_seed") {
        cfg.master_seed = parse_number<std::uint64_t>(key, value);
      } else if (key == "combinations") {
        cfg.combinations.clear();
        for (auto item : split_list(value)) {
          cfg.combinations.push_back(parse_combination(item));
        }
      } else if (key == "significance") {
        cfg.significance = parse_numbers<double>(key, value);
      } else if (key == "threads") {
        cfg.threads = parse_number<unsigned>(key, value);
      } else if (key == "output") {
        cfg.output = std::string(value);
      } else if (key == "targets") {
        cfg.targets = parse_numbers<double>(key, value);
      } else if (key == "n_grid") {
        cfg.n_grid = parse_numbers<int>(key, value);
      } else if (key == "granularity") {
        cfg.granularity = parse_number<int>(key, value);
      } else if (key == "power_combination") {
        cfg.power_spec.combination = parse_combination(value);
      } else if (key == "power_significance") {
        cfg.power_spec.significance = parse_number<double>(key, value);
      } else {
        throw std::invalid_argument(fmt::format("{}: unknown key", key));
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument(fmt::format("cannot open config file '{}'", path.string()));
  }
  return parse_config(in);
}

std::string to_config_text(const RunConfig& cfg) {
  std::vector<std::string_view> combos;
  for (auto c : cfg.combinations) {
    combos.push_back(to_string(c));
  }
  std::ostringstream out;
  out << fmt::format("n_obs = {}\n", fmt::join(cfg.n_obs, ", "));
  out << fmt::format("background_rate = {}\n", fmt::join(cfg.background_rates, ", "));
  out << fmt::format("adr_rate_rel = {}\n", fmt::join(cfg.adr_rates_rel, ", "));
  out << fmt::format("adr_sd_days = {}\n", fmt::join(cfg.adr_sd_days, ", "));
  out << fmt::format("window_end = {}\n", cfg.window_end);
  out << fmt::format("day_offset = {}\n", cfg.day_offset);
  out << fmt::format("replications = {}\n", cfg.replications);
  out << fmt::format("master_seed = {}\n", cfg.master_seed);
  out << fmt::format("combinations = {}\n", fmt::join(combos, ", "));
  out << fmt::format("significance = {}\n", fmt::join(cfg.significance, ", "));
  out << fmt::format("threads = {}\n", cfg.threads);
  if (!cfg.output.empty()) {
    out << fmt::format("output = {}\n", cfg.output);
  }
  out << fmt::format("targets = {}\n", fmt::join(cfg.targets, ", "));
  out << fmt::format("n_grid = {}\n", fmt::join(cfg.n_grid, ", "));
  out << fmt::format("granularity = {}\n", cfg.granularity);
  out << fmt::format("power_combination = {}\n", to_string(cfg.power_spec.combination));
  out << fmt::format("power_significance = {}\n", cfg.power_spec.significance);
  return out.str();
}

}  // namespace wsp
