#include "vppmarket.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vppm/bilevel.hpp"
#include "vppm/dispatch.hpp"
#include "vppm/errors.hpp"
#include "vppm/model.hpp"
#include "vppm/oracle.hpp"
#include "vppm/report.hpp"
#include "vppm/settlement.hpp"

using nlohmann::json;

namespace {

thread_local std::string g_error_msg;
thread_local std::string g_error_name;

void set_error(const char* name, const std::string& msg) {
  g_error_name = name;
  g_error_msg = msg;
}

// Runs f, translating exceptions into status codes.
template <typename F>
vppm_status guarded(F&& f) {
  try {
    return f();
  } catch (const vppm::ParseError& e) {
    set_error("ParseError", e.what());
    return VPPM_EPARSE;
  } catch (const vppm::ValidationError& e) {
    set_error("ValidationError", e.what());
    return VPPM_EVALIDATION;
  } catch (const vppm::InfeasibleDispatch& e) {
    set_error("InfeasibleDispatch", e.what());
    return VPPM_ESOLVER;
  } catch (const vppm::GridTooLarge& e) {
    set_error("GridTooLarge", e.what());
    return VPPM_EGUARD;
  } catch (const vppm::ScenarioMismatch& e) {
    set_error("ScenarioMismatch", e.what());
    return VPPM_EARG;
  } catch (const vppm::DimensionMismatch& e) {
    set_error("DimensionMismatch", e.what());
    return VPPM_EARG;
  } catch (const vppm::ModelError& e) {
    set_error("ModelError", e.what());
    return VPPM_ESOLVER;
  } catch (const json::exception& e) {
    set_error("ParseError", e.what());
    return VPPM_EPARSE;
  } catch (const std::exception& e) {
    set_error("InternalError", e.what());
    return VPPM_ESOLVER;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

json dispatch_json(const vppm::DispatchSolution& d) {
  return json{{"vpp_id", d.vpp_id},
              {"p_buy", d.p_buy},
              {"p_sell", d.p_sell},
              {"p_mt", d.p_mt},
              {"p_bs", d.p_bs},
              {"p_wt", d.p_wt},
              {"soc", d.soc},
              {"cost", d.cost},
              {"production_cost", d.production_cost}};
}

json residuals_json(const vppm::KktResiduals& r) {
  return json{{"stationarity", r.stationarity_inf},
              {"primal", r.primal_inf},
              {"dual", r.dual_inf},
              {"complementarity", r.comp_inf}};
}

}  // namespace

struct vppm_scenario {
  vppm::Scenario s;
};

struct vppm_result {
  int mode = 0;  // 1, 2, or 3
  std::vector<vppm::DispatchSolution> mode1;
  vppm::EquilibriumResult eq;
  vppm::ModeComparison comparison;
  bool has_comparison = false;
  std::string json_text;
  std::vector<std::pair<std::string, std::string>> files;  // name, content
};

extern "C" {

vppm_status vppm_scenario_load(const char* path, vppm_scenario** out) {
  if (!path || !out) {
    set_error("ArgumentError", "null argument");
    return VPPM_EARG;
  }
  return guarded([&] {
    auto* h = new vppm_scenario{vppm::load_scenario(path)};
    *out = h;
    return VPPM_OK;
  });
}

vppm_status vppm_scenario_parse(const char* json_text, vppm_scenario** out) {
  if (!json_text || !out) {
    set_error("ArgumentError", "null argument");
    return VPPM_EARG;
  }
  return guarded([&] {
    json j;
    try {
      j = json::parse(json_text);
    } catch (const json::exception& e) {
      throw vppm::ParseError(e.what());
    }
    auto* h = new vppm_scenario{vppm::scenario_from_json(j)};
    const auto violations = vppm::validate_scenario(h->s);
    for (const auto& v : violations)
      if (!v.advisory) {
        delete h;
        throw vppm::ValidationError(v.field, v.rule);
      }
    *out = h;
    return VPPM_OK;
  });
}

void vppm_scenario_free(vppm_scenario* s) { delete s; }

vppm_status vppm_scenario_validate(const vppm_scenario* s,
                                   char** report_json) {
  if (!s) {
    set_error("ArgumentError", "null scenario");
    return VPPM_EARG;
  }
  return guarded([&] {
    json rep = json::array();
    for (const vppm::Violation& v : vppm::validate_scenario(s->s))
      rep.push_back({{"field", v.field},
                     {"rule", v.rule},
                     {"advisory", v.advisory}});
    if (report_json) *report_json = dup_string(rep.dump());
    return VPPM_OK;
  });
}

vppm_status vppm_scenario_set(vppm_scenario* s, const char* key,
                              double value) {
  if (!s || !key) {
    set_error("ArgumentError", "null argument");
    return VPPM_EARG;
  }
  const std::string k = key;
  vppm::SolverConfig& c = s->s.solver;
  if (k == "eval_budget")
    c.eval_budget = static_cast<int>(value);
  else if (k == "seed")
    c.seed = static_cast<std::uint64_t>(value);
  else if (k == "restarts")
    c.restarts = static_cast<int>(value);
  else if (k == "feas_tol")
    c.feas_tol = value;
  else if (k == "comp_tol")
    c.comp_tol = value;
  else {
    set_error("ArgumentError", "unknown key: " + k);
    return VPPM_EARG;
  }
  return VPPM_OK;
}

vppm_status vppm_run(const vppm_scenario* sh, int mode, vppm_result** out) {
  if (!sh || !out || mode < 1 || mode > 3) {
    set_error("ArgumentError", "null argument or bad mode");
    return VPPM_EARG;
  }
  return guarded([&] {
    const vppm::Scenario& s = sh->s;
    auto r = std::make_unique<vppm_result>();
    r->mode = mode;
    const bool run1 = mode & 1, run2 = mode & 2;

    if (run1) r->mode1 = vppm::mode1_dispatch(s);
    if (run2) r->eq = vppm::solve_stackelberg(s);

    json root;
    root["scenario_hash"] = hash_hex(vppm::scenario_fingerprint(s));
    root["mode"] = mode == 1 ? "mode1" : mode == 2 ? "mode2" : "both";

    if (run1) {
      json m1;
      m1["dispatches"] = json::array();
      double outflow = 0.0;
      for (const auto& d : r->mode1) {
        m1["dispatches"].push_back(dispatch_json(d));
        for (int t = 0; t < d.T; ++t)
          outflow += s.contract.cep[t] * d.p_buy[t] -
                     s.contract.ces[t] * d.p_sell[t];
      }
      m1["wholesale_inflow"] = outflow;
      root["mode1"] = std::move(m1);
    }

    if (run2) {
      const vppm::EquilibriumResult& eq = r->eq;
      json e;
      e["prices"] = {{"es", eq.prices.es}, {"ep", eq.prices.ep}};
      e["leader_objective"] = eq.leader_objective;
      e["evaluations_used"] = eq.evaluations_used;
      e["restarts_best"] = eq.restarts_best;
      e["converged"] = eq.converged;
      e["dispatches"] = json::array();
      for (const auto& d : eq.dispatches)
        e["dispatches"].push_back(dispatch_json(d));
      e["settlement"] = {{"p_dso", eq.settlement.p_dso},
                         {"p_dso_buy", eq.settlement.p_dso_buy},
                         {"p_dso_sell", eq.settlement.p_dso_sell},
                         {"z", eq.settlement.z1},
                         {"hourly_profit", eq.settlement.hourly_profit},
                         {"dso_profit", eq.settlement.dso_profit},
                         {"wholesale_inflow", eq.settlement.wholesale_inflow}};
      e["follower_certificates"] = json::array();
      for (const auto& c : eq.follower_certificates)
        e["follower_certificates"].push_back(residuals_json(c));
      const vppm::MpecReport mp = vppm::complementarity_report(eq, s);
      e["mpec"] = {{"stationarity", mp.stationarity_inf},
                   {"primal", mp.primal_inf},
                   {"dual", mp.dual_inf},
                   {"complementarity", mp.comp_inf},
                   {"big_m_feasible", mp.big_m_feasible},
                   {"big_m_violations", mp.big_m_violations},
                   {"price_box_violation", mp.price_box_violation},
                   {"net_position_residual", mp.net_position_residual}};
      root["equilibrium"] = std::move(e);
    }

    std::string prices_file;
    if (run2) {
      prices_file = vppm::prices_csv(s.contract, r->eq.prices);
    } else {
      // No game: the VPPs face the contract prices directly.
      vppm::PriceSchedule p{s.contract.ces, s.contract.cep};
      prices_file = vppm::prices_csv(s.contract, p);
    }
    r->files.emplace_back("prices.csv", prices_file);

    const auto& dispatches = run2 ? r->eq.dispatches : r->mode1;
    for (const auto& d : dispatches)
      r->files.emplace_back("dispatch_" + d.vpp_id + ".csv",
                            vppm::dispatch_csv(d));

    if (run1 && run2) {
      r->comparison = vppm::mode_comparison(r->mode1, r->eq, s);
      r->has_comparison = true;
      json cmp;
      cmp["vpps"] = json::array();
      for (const auto& row : r->comparison.vpps)
        cmp["vpps"].push_back({{"id", row.id},
                               {"mode1", row.mode1},
                               {"mode2", row.mode2},
                               {"delta", row.delta},
                               {"delta_pct", row.delta_pct}});
      cmp["dso_profit"] = r->comparison.dso_profit;
      cmp["wholesale_inflow_mode1"] = r->comparison.inflow_mode1;
      cmp["wholesale_inflow_mode2"] = r->comparison.inflow_mode2;
      cmp["production_cost_mode1"] = r->comparison.production_mode1;
      cmp["production_cost_mode2"] = r->comparison.production_mode2;
      cmp["identity_residual"] = r->comparison.identity_residual;
      root["comparison"] = std::move(cmp);

      r->files.emplace_back("comparison.csv",
                            vppm::comparison_csv(r->comparison));
      for (const vppm::VppDiffTable& tab :
           vppm::solution_diff(r->mode1, r->eq))
        r->files.emplace_back("diff_" + tab.vpp_id + ".csv",
                              vppm::diff_csv(tab));
    }

    r->json_text = root.dump(2) + "\n";
    r->files.emplace_back("result.json", r->json_text);
    *out = r.release();
    return VPPM_OK;
  });
}

void vppm_result_free(vppm_result* r) { delete r; }

vppm_status vppm_result_json(const vppm_result* r, char** json_text) {
  if (!r || !json_text) {
    set_error("ArgumentError", "null argument");
    return VPPM_EARG;
  }
  *json_text = dup_string(r->json_text);
  return VPPM_OK;
}

vppm_status vppm_result_file_count(const vppm_result* r, size_t* count) {
  if (!r || !count) {
    set_error("ArgumentError", "null argument");
    return VPPM_EARG;
  }
  *count = r->files.size();
  return VPPM_OK;
}

vppm_status vppm_result_file_name(const vppm_result* r, size_t i,
                                  char** name) {
  if (!r || !name || i >= r->files.size()) {
    set_error("ArgumentError", "null argument or index out of range");
    return VPPM_EARG;
  }
  *name = dup_string(r->files[i].first);
  return VPPM_OK;
}

vppm_status vppm_result_file_content(const vppm_result* r, size_t i,
                                     char** content) {
  if (!r || !content || i >= r->files.size()) {
    set_error("ArgumentError", "null argument or index out of range");
    return VPPM_EARG;
  }
  *content = dup_string(r->files[i].second);
  return VPPM_OK;
}

vppm_status vppm_result_leader_objective(const vppm_result* r, double* out) {
  if (!r || !out || !(r->mode & 2)) {
    set_error("ArgumentError", "no equilibrium in this result");
    return VPPM_EARG;
  }
  *out = r->eq.leader_objective;
  return VPPM_OK;
}

vppm_status vppm_result_identity_residual(const vppm_result* r, double* out) {
  if (!r || !out || !r->has_comparison) {
    set_error("ArgumentError", "no comparison in this result");
    return VPPM_EARG;
  }
  *out = r->comparison.identity_residual;
  return VPPM_OK;
}

vppm_status vppm_result_vpp_count(const vppm_result* r, size_t* out) {
  if (!r || !out) {
    set_error("ArgumentError", "null argument");
    return VPPM_EARG;
  }
  *out = (r->mode & 2) ? r->eq.dispatches.size() : r->mode1.size();
  return VPPM_OK;
}

vppm_status vppm_result_vpp_cost(const vppm_result* r, size_t j, int mode,
                                 double* out) {
  if (!r || !out) {
    set_error("ArgumentError", "null argument");
    return VPPM_EARG;
  }
  if (mode == 1 && (r->mode & 1) && j < r->mode1.size()) {
    *out = r->mode1[j].cost;
    return VPPM_OK;
  }
  if (mode == 2 && (r->mode & 2) && j < r->eq.dispatches.size()) {
    *out = r->eq.dispatches[j].cost;
    return VPPM_OK;
  }
  set_error("ArgumentError", "mode not run or index out of range");
  return VPPM_EARG;
}

vppm_status vppm_oracle_check(const vppm_scenario* sh, int price_points,
                              double power_step, char** report_json) {
  if (!sh || price_points < 2 || !(power_step > 0.0)) {
    set_error("ArgumentError", "null scenario or bad grid parameters");
    return VPPM_EARG;
  }
  return guarded([&]() -> vppm_status {
    const vppm::Scenario& s = sh->s;
    const vppm::GridSpec grid{price_points, power_step};
    bool all_pass = true;
    json rep;

    // Lower level: solver vs enumeration at the contract prices.
    vppm::PriceSchedule contract_prices{s.contract.ces, s.contract.cep};
    rep["dispatch_checks"] = json::array();
    for (const vppm::VppConfig& v : s.vpps) {
      const vppm::DispatchSolution d = vppm::solve_vpp_dispatch(
          v, contract_prices, s.contract, s.horizon, s.dt, s.solver);
      const vppm::DispatchOracleResult o = vppm::brute_force_dispatch(
          v, contract_prices, s.contract, s.horizon, s.dt, grid);
      if (!o.feasible)
        throw vppm::ModelError(v.id + ": oracle found no feasible point");
      const double delta = std::abs(d.cost - o.cost);
      // Fixed 1e-6 term: a mis-set solver tolerance must not widen the
      // acceptance band.
      const double bound = o.slope * power_step + 1e-6;
      const bool pass = delta <= bound;
      all_pass = all_pass && pass;
      rep["dispatch_checks"].push_back({{"vpp", v.id},
                                        {"solver_cost", d.cost},
                                        {"oracle_cost", o.cost},
                                        {"delta", delta},
                                        {"bound", bound},
                                        {"pass", pass}});
    }

    // Upper level: pattern search vs full price lattice.
    const vppm::EquilibriumOracleResult eo =
        vppm::brute_force_equilibrium(s, grid);
    const vppm::EquilibriumResult eq = vppm::solve_stackelberg(s);
    double caps = 0.0;
    for (const vppm::VppConfig& v : s.vpps)
      caps += v.trade_cap_buy + v.trade_cap_sell;
    double spacing = 0.0;
    for (int t = 0; t < s.horizon; ++t)
      spacing = std::max(spacing, (s.contract.cep[t] - s.contract.ces[t]) /
                                      (price_points - 1));
    const double bound = caps * spacing * 2 * s.horizon;
    const double shortfall = eo.profit - eq.leader_objective;
    const bool pass = shortfall <= bound;
    all_pass = all_pass && pass;
    rep["equilibrium_check"] = {{"solver_profit", eq.leader_objective},
                                {"oracle_profit", eo.profit},
                                {"shortfall", shortfall},
                                {"bound", bound},
                                {"oracle_evaluations", eo.evaluations},
                                {"pass", pass}};
    rep["pass"] = all_pass;
    if (report_json) *report_json = dup_string(rep.dump());
    if (!all_pass) {
      set_error("CheckFailed", "oracle deltas exceed documented bounds");
      return VPPM_ECHECK;
    }
    return VPPM_OK;
  });
}

void vppm_string_free(char* s) { std::free(s); }

const char* vppm_last_error(void) { return g_error_msg.c_str(); }
const char* vppm_last_error_name(void) { return g_error_name.c_str(); }

}  // extern "C"
