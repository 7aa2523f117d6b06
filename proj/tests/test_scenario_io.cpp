#include <cmath>

#include "doctest.h"
#include "superloc/scenario_io.hpp"

using namespace superloc;
using ojson = nlohmann::ordered_json;

namespace {

ojson golden_json() {
  return ojson::parse(R"json({
    "id": "g",
    "dims": {"m": 2, "n": 2},
    "coordinates": {"even": ["x", "y"], "odd": ["a", "b"]},
    "Q": {"x": "a", "y": "b", "a": "-y", "b": "x"},
    "mu": {"coefficient": "exp(-(x^2 + y^2)/2) * (1 - a*b)"},
    "rotation_action": [{"plane": ["x", "y"], "weight": 1}, {"plane": ["a", "b"], "weight": "1"}],
    "N": {"normal_even": ["x", "y"], "normal_odd": ["a", "b"]},
    "lambda_grid": [0, 10]
  })json");
}

std::string rejected_key(const ojson& j) {
  try {
    scenario_from_json(j);
  } catch (const ParseError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("scenario loading") {
  Scenario sc = scenario_from_json(golden_json());
  CHECK(sc.id == "g");
  CHECK(sc.names.odd == std::vector<std::string>{"a", "b"});
  CHECK(sc.q.odd[0] == -SuperFunction::even_coordinate(1));
  REQUIRE(sc.locus);
  CHECK(sc.locus->normal_odd == std::vector<int>{0, 1});
  CHECK(sc.lambda_grid == std::vector<double>{0.0, 10.0});
  CHECK(sc.rotation.size() == 2);
}

TEST_CASE("the first invalid key is named") {
  ojson j = golden_json();
  j["Q"]["b"] = "x +";
  CHECK(rejected_key(j) == "Q.b");

  j = golden_json();
  j["Q"]["z"] = "a";
  CHECK(rejected_key(j) == "Q.z");

  j = golden_json();
  j["colour"] = 1;
  CHECK(rejected_key(j) == "colour");

  j = golden_json();
  j["dims"]["n"] = "two";
  CHECK(rejected_key(j) == "dims.n");

  j = golden_json();
  j["coordinates"]["odd"] = {"a", "a"};
  CHECK(rejected_key(j) == "coordinates.odd");

  j = golden_json();
  j["N"]["normal_odd"] = {"x"};
  CHECK(rejected_key(j) == "N.normal_odd");

  j = golden_json();
  j["rotation_action"][1]["weight"] = 2;
  CHECK(rejected_key(j) == "rotation_action");

  j = golden_json();
  j["mu"]["coefficient"] = "exp(-(x^2 + y^2)/2)";
  CHECK(rejected_key(j) == "mu");

  j = golden_json();
  j["quadrature"] = {{"box", {{0, 1}}}};
  CHECK(rejected_key(j) == "quadrature.box");

  j = golden_json();
  j.erase("mu");
  CHECK(rejected_key(j) == "mu");
}

TEST_CASE("records and formatting") {
  Scenario sc = scenario_from_json(golden_json());
  RunOptions options;
  ScenarioRecord a = run_scenario(sc, options);
  ScenarioRecord b = run_scenario(sc, options);
  CHECK(a.pass);
  const std::string line = format_json_line(a);
  CHECK(line == format_json_line(b));
  CHECK(line.find('\n') == std::string::npos);
  const auto parsed = nlohmann::json::parse(line);
  CHECK(parsed.at("identities.ber_HLIprime_eq_1") == true);
  CHECK(parsed.at("pass") == true);
  CHECK(std::abs(parsed.at("direct_integral")[0].get<double>() + 2 * M_PI) < 1e-9);

  const std::string text = format_text({a});
  CHECK(text.find("quantity") != std::string::npos);
  CHECK(text.find("residual") != std::string::npos);
  CHECK(text.find("direct_integral") != std::string::npos);
  CHECK(format_text({}) == "summary: 0 scenarios, 0 passed, 0 failed\n");

  options.mode = Mode::Morse;
  CHECK(run_scenario(sc, options).pass);
  options.mode = Mode::Verify;
  options.exact_only = true;
  ScenarioRecord exact = run_scenario(sc, options);
  CHECK(exact.pass);
  CHECK(format_json_line(exact).find("direct_integral") == std::string::npos);
}

TEST_CASE("log-log slope") {
  std::vector<double> lambdas = {50, 100, 200, 400}, values;
  for (double l : lambdas) values.push_back(3.0 * std::pow(l, -1.5));
  CHECK(std::abs(*log_log_slope(lambdas, values) + 1.5) < 1e-12);
  CHECK_FALSE(log_log_slope({1.0}, {1.0}));
}
