// Command-line front end. Links only against the C interface.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vppmarket.h"

namespace {

int status_to_exit(vppm_status st) {
  switch (st) {
    case VPPM_OK: return 0;
    case VPPM_ECHECK: return 1;
    case VPPM_EPARSE: return 2;
    case VPPM_EVALIDATION: return 2;
    case VPPM_EARG: return 2;
    case VPPM_ESOLVER: return 3;
    case VPPM_EGUARD: return 4;
  }
  return 3;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Single-line machine-readable diagnostic on stderr.
int fail(vppm_status st) {
  std::cerr << "{\"error\":\"" << json_escape(vppm_last_error_name())
            << "\",\"message\":\"" << json_escape(vppm_last_error())
            << "\"}\n";
  return status_to_exit(st);
}

struct SolverOverrides {
  double budget = -1, seed = -1, restarts = -1, feas_tol = -1, comp_tol = -1;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--budget", budget, "Leader evaluation budget");
    cmd->add_option("--seed", seed, "Search seed");
    cmd->add_option("--restarts", restarts, "Pattern-search restarts");
    cmd->add_option("--feas-tol", feas_tol, "Feasibility tolerance");
    cmd->add_option("--comp-tol", comp_tol, "Complementarity tolerance");
  }

  vppm_status apply(vppm_scenario* s) const {
    struct { const char* key; double value; } kv[] = {
        {"eval_budget", budget}, {"seed", seed},       {"restarts", restarts},
        {"feas_tol", feas_tol},  {"comp_tol", comp_tol}};
    for (const auto& [key, value] : kv) {
      if (value < 0) continue;
      if (vppm_status st = vppm_scenario_set(s, key, value); st != VPPM_OK)
        return st;
    }
    return VPPM_OK;
  }
};

int cmd_simulate(const std::string& scenario, const std::string& mode,
                 const std::string& out_dir, const SolverOverrides& ov) {
  vppm_scenario* s = nullptr;
  if (vppm_status st = vppm_scenario_load(scenario.c_str(), &s);
      st != VPPM_OK)
    return fail(st);
  if (vppm_status st = ov.apply(s); st != VPPM_OK) {
    vppm_scenario_free(s);
    return fail(st);
  }
  const int mode_bits = mode == "mode1" ? 1 : mode == "mode2" ? 2 : 3;
  vppm_result* r = nullptr;
  const vppm_status st = vppm_run(s, mode_bits, &r);
  vppm_scenario_free(s);
  if (st != VPPM_OK) return fail(st);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  size_t count = 0;
  vppm_result_file_count(r, &count);
  for (size_t i = 0; i < count; ++i) {
    char* name = nullptr;
    char* content = nullptr;
    vppm_result_file_name(r, i, &name);
    vppm_result_file_content(r, i, &content);
    const std::filesystem::path path = std::filesystem::path(out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    const bool ok = f.good();
    vppm_string_free(name);
    vppm_string_free(content);
    if (!ok) {
      std::cerr << "{\"error\":\"IoError\",\"message\":\"cannot write "
                << json_escape(path.string()) << "\"}\n";
      vppm_result_free(r);
      return 3;
    }
  }
  vppm_result_free(r);
  return 0;
}

int cmd_oracle(const std::string& scenario, int price_grid, double power_step,
               const SolverOverrides& ov) {
  vppm_scenario* s = nullptr;
  if (vppm_status st = vppm_scenario_load(scenario.c_str(), &s);
      st != VPPM_OK)
    return fail(st);
  if (vppm_status st = ov.apply(s); st != VPPM_OK) {
    vppm_scenario_free(s);
    return fail(st);
  }
  char* report = nullptr;
  const vppm_status st = vppm_oracle_check(s, price_grid, power_step, &report);
  vppm_scenario_free(s);
  if (report) {
    std::cout << report << "\n";
    vppm_string_free(report);
  }
  if (st != VPPM_OK && st != VPPM_ECHECK) return fail(st);
  return status_to_exit(st);
}

int cmd_validate(const std::string& scenario) {
  vppm_scenario* s = nullptr;
  const vppm_status load_st = vppm_scenario_load(scenario.c_str(), &s);
  if (load_st == VPPM_EVALIDATION) {
    // Invalid but parseable: report the violation and exit 1.
    std::cout << vppm_last_error() << "\n";
    return 1;
  }
  if (load_st != VPPM_OK) return fail(load_st);
  char* report = nullptr;
  const vppm_status st = vppm_scenario_validate(s, &report);
  vppm_scenario_free(s);
  if (st != VPPM_OK) return fail(st);
  const std::string rep = report ? report : "[]";
  vppm_string_free(report);
  std::cout << rep << "\n";
  // Advisory entries do not fail validation; loading already rejected
  // hard violations, so any leftover non-advisory entry is defensive.
  return rep.find("\"advisory\":false") == std::string::npos ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg electricity-trading simulator"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "out", mode = "both";
  int price_grid = 21;
  double power_step = 0.01;
  SolverOverrides ov;

  CLI::App* sim = app.add_subcommand("simulate", "Run and write reports");
  sim->add_option("--scenario", scenario, "Scenario JSON path")->required();
  sim->add_option("--mode", mode, "mode1, mode2, or both")
      ->check(CLI::IsMember({"mode1", "mode2", "both"}));
  sim->add_option("--out", out_dir, "Output directory");
  ov.add_flags(sim);

  CLI::App* orc = app.add_subcommand("oracle", "Brute-force cross-check");
  orc->add_option("--scenario", scenario, "Scenario JSON path")->required();
  orc->add_option("--price-grid", price_grid, "Price lattice points per hour");
  orc->add_option("--power-step", power_step, "Dispatch grid step, MW");
  ov.add_flags(orc);

  CLI::App* val = app.add_subcommand("validate", "Check scenario invariants");
  val->add_option("--scenario", scenario, "Scenario JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) return cmd_simulate(scenario, mode, out_dir, ov);
  if (orc->parsed()) return cmd_oracle(scenario, price_grid, power_step, ov);
  return cmd_validate(scenario);
}
