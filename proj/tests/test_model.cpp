#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "vppm/errors.hpp"
#include "vppm/model.hpp"

using namespace vppm;
using nlohmann::json;

namespace {

const char* kScenarioPath = SCENARIO_DIR "/paper_case.json";

json minimal_json() {
  return json{
      {"horizon", 2},
      {"dt", 1.0},
      {"big_m", 30.0},
      {"contract", {{"cep", {1.2, 1.0}}, {"ces", {0.3, 0.4}}}},
      {"vpps",
       {{{"id", "v1"},
         {"trade_cap_buy", 10.0},
         {"trade_cap_sell", 10.0},
         {"demand", {1.0, 2.0}},
         {"turbines",
          {{{"a", 0.1},
            {"b", 0.6},
            {"c", 1.0},
            {"p_max", 5.0},
            {"ramp_up", 3.0},
            {"ramp_down", -3.0}}}},
         {"batteries",
          {{{"e", 0.05},
            {"p_max", 0.6},
            {"e_max", 1.0},
            {"soc0", 0.4},
            {"soc_min", 0.2},
            {"soc_max", 0.9}}}},
         {"winds", {{{"availability", {0.5, 1.0}}}}}}}}};
}

}  // namespace

TEST_CASE("bundled scenario loads with the documented parameters") {
  const Scenario s = load_scenario(kScenarioPath);
  CHECK(s.horizon == 24);
  CHECK(s.big_m == 30.0);
  REQUIRE(s.vpps.size() == 3);
  const VppConfig& v2 = s.vpps[1];
  REQUIRE(v2.turbines.size() == 1);
  CHECK(v2.turbines[0].a == 0.1);
  CHECK(v2.turbines[0].b == 0.6);
  CHECK(v2.turbines[0].c == 1.0);
  CHECK(v2.turbines[0].p_max == 5.0);
  CHECK(v2.turbines[0].ramp_up == 3.0);
  CHECK(v2.turbines[0].ramp_down == -3.0);
  // soc_unit=percent entries arrive as fractions
  CHECK(s.vpps[0].batteries[0].soc0 == doctest::Approx(0.40));
  CHECK(s.vpps[1].batteries[0].soc0 == doctest::Approx(0.20));
  CHECK(s.vpps[2].batteries[0].soc0 == doctest::Approx(0.90));
  CHECK(validate_scenario(s).empty());
}

TEST_CASE("percent SoC conversion") {
  json j = minimal_json();
  j["soc_unit"] = "percent";
  j["vpps"][0]["batteries"][0]["soc0"] = 40;
  j["vpps"][0]["batteries"][0]["soc_min"] = 20;
  j["vpps"][0]["batteries"][0]["soc_max"] = 90;
  const Scenario s = scenario_from_json(j);
  CHECK(s.vpps[0].batteries[0].soc0 == doctest::Approx(0.40));
  CHECK(s.vpps[0].batteries[0].soc_min == doctest::Approx(0.20));
  CHECK(s.vpps[0].batteries[0].soc_max == doctest::Approx(0.90));
}

TEST_CASE("cep below ces is flagged at the offending index") {
  json j = minimal_json();
  j["contract"]["cep"][1] = 0.2;
  j["contract"]["ces"][1] = 0.3;
  const Scenario s = scenario_from_json(j);
  const auto violations = validate_scenario(s);
  REQUIRE_FALSE(violations.empty());
  bool found = false;
  for (const Violation& v : violations)
    found = found || (v.field == "contract.cep[1]" && !v.advisory);
  CHECK(found);
}

TEST_CASE("series length mismatch is a violation") {
  json j = minimal_json();
  j["vpps"][0]["demand"] = {1.0};  // horizon is 2
  const Scenario s = scenario_from_json(j);
  bool found = false;
  for (const Violation& v : validate_scenario(s))
    found = found || (v.field == "vpps[0].demand" &&
                      v.rule.find("length mismatch") != std::string::npos);
  CHECK(found);
}

TEST_CASE("small big_m is advisory only") {
  json j = minimal_json();
  j["big_m"] = 5.0;  // J * max cap = 10
  const Scenario s = scenario_from_json(j);
  const auto violations = validate_scenario(s);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].advisory);
  CHECK(violations[0].field == "big_m");
  CHECK(violations[0].rule.find("safe bound") != std::string::npos);
}

TEST_CASE("validation is pure") {
  const Scenario s = scenario_from_json(minimal_json());
  const auto a = validate_scenario(s);
  const auto b = validate_scenario(s);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].field == b[i].field);
    CHECK(a[i].rule == b[i].rule);
    CHECK(a[i].advisory == b[i].advisory);
  }
}

TEST_CASE("json round-trip is bit-exact") {
  const Scenario s = load_scenario(kScenarioPath);
  const Scenario r = scenario_from_json(scenario_to_json(s));
  CHECK(r.horizon == s.horizon);
  CHECK(r.dt == s.dt);
  CHECK(r.contract.cep == s.contract.cep);
  CHECK(r.contract.ces == s.contract.ces);
  REQUIRE(r.vpps.size() == s.vpps.size());
  for (size_t j = 0; j < s.vpps.size(); ++j) {
    CHECK(r.vpps[j].demand == s.vpps[j].demand);
    CHECK(r.vpps[j].batteries[0].soc0 == s.vpps[j].batteries[0].soc0);
    CHECK(r.vpps[j].winds[0].availability == s.vpps[j].winds[0].availability);
  }
  CHECK(scenario_fingerprint(r) == scenario_fingerprint(s));
}

TEST_CASE("file round-trip through write_scenario") {
  const Scenario s = load_scenario(kScenarioPath);
  const std::string tmp =
      (std::filesystem::temp_directory_path() / "roundtrip_case.json")
          .string();
  write_scenario(s, tmp);
  const Scenario r = load_scenario(tmp);
  CHECK(scenario_fingerprint(r) == scenario_fingerprint(s));
  std::remove(tmp.c_str());
}

TEST_CASE("fingerprint reacts to any field change") {
  Scenario s = load_scenario(kScenarioPath);
  const std::uint64_t h = scenario_fingerprint(s);
  s.vpps[0].demand[3] += 1e-9;
  CHECK(scenario_fingerprint(s) != h);
}

TEST_CASE("parse errors carry field paths") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), ParseError);
  json j = minimal_json();
  j.erase("contract");
  CHECK_THROWS_WITH_AS(scenario_from_json(j),
                       "missing key scenario.contract", ParseError);
  j = minimal_json();
  j["vpps"][0]["turbines"][0].erase("p_max");
  CHECK_THROWS_AS(scenario_from_json(j), ParseError);
  j = minimal_json();
  j["soc_unit"] = "permille";
  CHECK_THROWS_AS(scenario_from_json(j), ParseError);
}

TEST_CASE("load_scenario rejects hard violations") {
  json j = minimal_json();
  j["contract"]["cep"][0] = 0.1;  // below ces[0]=0.3
  const std::string tmp =
      (std::filesystem::temp_directory_path() / "invalid_case.json").string();
  {
    std::FILE* f = std::fopen(tmp.c_str(), "w");
    REQUIRE(f);
    const std::string text = j.dump();
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_scenario(tmp), ValidationError);
  std::remove(tmp.c_str());
}
