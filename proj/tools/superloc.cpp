#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "superloc/scenario_io.hpp"

using namespace superloc;

namespace {

int run(const std::vector<std::string>& paths, const RunOptions& options, bool json, const std::string& out_dir) {
  std::vector<Scenario> scenarios;
  try {
    for (const auto& p : paths)
      for (auto& sc : load_scenarios(p)) scenarios.push_back(std::move(sc));
  } catch (const ParseError& e) {
    std::string what = e.what();
    if (!e.key().empty() && what.rfind(e.key() + ": ", 0) == 0) what = what.substr(e.key().size() + 2);
    std::cerr << "parse error: invalid key '" << e.key() << "': " << what << "\n";
    return 2;
  }

  std::vector<ScenarioRecord> records;
  for (const auto& sc : scenarios) records.push_back(run_scenario(sc, options));

  std::string json_text;
  for (const auto& r : records) json_text += format_json_line(r) + "\n";
  int passed = 0;
  for (const auto& r : records) passed += r.pass;
  nlohmann::json summary = {{"record", "summary"},
                            {"scenarios", records.size()},
                            {"passed", passed},
                            {"failed", static_cast<int>(records.size()) - passed}};
  json_text += summary.dump() + "\n";
  const std::string text = format_text(records);

  std::cout << (json ? json_text : text);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(std::filesystem::path(out_dir) / "report.txt") << text;
    std::ofstream(std::filesystem::path(out_dir) / "report.jsonl") << json_text;
  }
  return passed == static_cast<int>(records.size()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Berezin integrals, stationary phase and localization on R^{m|n}"};
  app.require_subcommand(1);

  std::vector<std::string> paths;
  std::string mode = "verify";
  std::optional<double> tol;
  std::vector<double> lambdas;
  bool exact = false, json = false;
  std::string out_dir;

  CLI::App* cmd = app.add_subcommand("run", "run scenario files or directories");
  cmd->add_option("paths", paths, "scenario JSON files or directories")->required();
  cmd->add_option("--mode", mode, "verify | spa | morse | integrate")
      ->check(CLI::IsMember({"verify", "spa", "morse", "integrate"}));
  cmd->add_option("--tol", tol, "tolerance for the numerical comparisons")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", lambdas, "lambda values, comma separated")->delimiter(',');
  cmd->add_flag("--exact", exact, "exact identities only, no quadrature");
  cmd->add_flag("--json", json, "line-delimited JSON records instead of the table");
  cmd->add_option("--out", out_dir, "directory for report.txt and report.jsonl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  RunOptions options;
  options.mode = mode_from_string(mode);
  options.exact_only = exact;
  options.tol = tol;
  options.lambdas = lambdas;
  return run(paths, options, json, out_dir);
}
