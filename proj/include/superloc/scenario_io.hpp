#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "superloc/localization.hpp"

namespace superloc {

/// Builds a scenario from its JSON description and runs validate_scenario.
/// Throws ParseError with the dotted key of the first invalid entry.
Scenario scenario_from_json(const nlohmann::ordered_json& j);

/// A file holds one scenario object, an array of them, or {"scenarios": [...]}.
/// Directories are scanned for *.json in name order.
std::vector<Scenario> load_scenarios(const std::string& path);

enum class Mode { Verify, Spa, Morse, Integrate };
Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

struct RunOptions {
  Mode mode = Mode::Verify;
  bool exact_only = false;
  std::optional<double> tol;
  std::vector<double> lambdas;  // overrides the scenario grid when nonempty
};

/// One output line: value and reference are JSON scalars, arrays [re, im] or strings.
struct ReportRow {
  std::string quantity;
  nlohmann::json value;
  nlohmann::json reference;  // null when there is none
  std::optional<double> residual;
  std::optional<bool> pass;
};

struct ScenarioRecord {
  std::string id;
  Mode mode = Mode::Verify;
  std::vector<ReportRow> rows;
  bool pass = false;
};

ScenarioRecord run_scenario(const Scenario& sc, const RunOptions& options);

/// Fixed-width table with columns quantity, value, reference, residual, pass.
std::string format_text(const std::vector<ScenarioRecord>& records);
/// One JSON object per record on a single line; keys are sorted, no timing fields.
std::string format_json_line(const ScenarioRecord& record);

/// Fitted slope of log|r| against log(lambda); nullopt with fewer than two usable points.
std::optional<double> log_log_slope(const std::vector<double>& lambdas, const std::vector<double>& values);

}  // namespace superloc
