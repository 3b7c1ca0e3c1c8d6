#pragma once

#include <vector>

#include "vppm/dispatch.hpp"
#include "vppm/model.hpp"
#include "vppm/settlement.hpp"

namespace vppm {

struct EquilibriumResult {
  PriceSchedule prices;
  std::vector<DispatchSolution> dispatches;
  SettlementResult settlement;
  double leader_objective = 0.0;
  long evaluations_used = 0;
  int restarts_best = 0;
  std::vector<KktResiduals> follower_certificates;
  bool converged = false;  // true when the winning restart stalled below step tolerance
};

// Componentwise clamp into [ces_t, cep_t]; idempotent.
PriceSchedule project_prices(const PriceSchedule& raw,
                             const ContractPrices& contract);

struct LeaderEvaluation {
  double profit = 0.0;
  std::vector<DispatchSolution> dispatches;
  SettlementResult settlement;
};

// Solves every follower at the given prices and settles the DSO side.
LeaderEvaluation evaluate_leader(const PriceSchedule& prices,
                                 const Scenario& s);

// Deterministic multi-restart coordinate pattern search over the 2T price
// variables. Start set: contract prices, both box corners, then seeded
// random points. Steps halve from (cep-ces)/4 down to 1e-4*(cep-ces).
// Ties break toward smaller L1 distance from the contract prices. The
// contract point is always evaluated, so the result dominates it.
EquilibriumResult solve_stackelberg(const Scenario& s);

// Aggregate feasibility evidence for the single-level reduction: maxima
// of the follower KKT residuals recomputed from the stored dispatches,
// sign-split / indicator-encoding feasibility, and price-box slack.
struct MpecReport {
  double stationarity_inf = 0.0;
  double primal_inf = 0.0;
  double dual_inf = 0.0;
  double comp_inf = 0.0;
  bool big_m_feasible = true;
  int big_m_violations = 0;
  double price_box_violation = 0.0;
  double net_position_residual = 0.0;  // stored settlement vs recomputed sums

  bool feasible(double feas_tol, double comp_tol) const {
    return stationarity_inf <= feas_tol && primal_inf <= feas_tol &&
           dual_inf <= feas_tol && comp_inf <= comp_tol && big_m_feasible &&
           price_box_violation <= feas_tol && net_position_residual <= feas_tol;
  }
};

MpecReport complementarity_report(const EquilibriumResult& result,
                                  const Scenario& s);

}  // namespace vppm
