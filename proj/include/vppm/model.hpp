#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace vppm {

using Series = std::vector<double>;

// Wholesale contract prices, EUR/MWh, indexed by hour.
struct ContractPrices {
  Series cep;  // contractual purchase price
  Series ces;  // contractual sale price
};

// Leader decision: hourly prices the DSO quotes to the VPPs.
struct PriceSchedule {
  Series es;  // sale price paid to VPPs
  Series ep;  // purchase price charged to VPPs
};

struct MicroTurbine {
  double a = 0.0;  // EUR/MWh^2
  double b = 0.0;  // EUR/MWh
  double c = 0.0;  // EUR, fixed per-hour term (charged every hour)
  double p_max = 0.0;      // MW
  double ramp_up = 0.0;    // MW/h, >= 0
  double ramp_down = 0.0;  // MW/h, <= 0
};

struct Battery {
  double e = 0.0;      // EUR/MWh^2 degradation coefficient
  double p_max = 0.0;  // MW, symmetric charge/discharge limit
  double e_max = 0.0;  // MWh capacity
  // SoC stored as fractions of capacity. Positive output is discharge:
  // SoC_t = SoC_{t-1} - (dt / e_max) * P_t.
  double soc0 = 0.0;
  double soc_min = 0.0;
  double soc_max = 0.0;
};

struct WindUnit {
  Series availability;  // MW per hour
};

struct VppConfig {
  std::string id;
  double trade_cap_buy = 0.0;   // MWh per hour
  double trade_cap_sell = 0.0;  // MWh per hour
  std::vector<MicroTurbine> turbines;
  std::vector<Battery> batteries;
  std::vector<WindUnit> winds;
  Series demand;  // MW per hour
};

struct SolverConfig {
  double feas_tol = 1e-6;
  double comp_tol = 1e-6;
  int eval_budget = 5000;  // leader evaluations
  std::uint64_t seed = 0;
  int restarts = 8;
};

struct Scenario {
  int horizon = 0;   // T, hours
  double dt = 1.0;   // hours
  ContractPrices contract;
  std::vector<VppConfig> vpps;
  double big_m = 0.0;  // MW
  SolverConfig solver;
};

struct Violation {
  std::string field;
  std::string rule;
  bool advisory = false;  // advisory violations do not fail loading
};

// Parses and validates a scenario file. Throws ParseError on malformed
// input and ValidationError on the first hard invariant violation.
// SoC values given as percents (top-level "soc_unit": "percent") are
// converted to fractions.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json scenario_to_json(const Scenario& s);
void write_scenario(const Scenario& s, const std::string& path);

// Pure: empty iff every type invariant holds.
std::vector<Violation> validate_scenario(const Scenario& s);

// FNV-1a over the canonical JSON serialization; embedded in result.json.
std::uint64_t scenario_fingerprint(const Scenario& s);

}  // namespace vppm
