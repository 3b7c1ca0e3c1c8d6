#pragma once

#include <vector>

#include "vppm/model.hpp"
#include "vppm/qp.hpp"

namespace vppm {

// Follower decision for one VPP over the horizon. Hourly series are
// 0-based internally; CSV output uses 1-based hours.
struct DispatchSolution {
  std::string vpp_id;
  int T = 0;
  Series p_buy;   // MWh bought from the DSO per hour
  Series p_sell;  // MWh sold to the DSO per hour
  std::vector<Series> p_mt;   // per turbine, MW
  std::vector<Series> p_bs;   // per battery, MW (positive = discharge)
  std::vector<Series> p_wt;   // per wind unit, MW
  std::vector<Series> soc;    // per battery, fraction, soc[b][t] = SoC after hour t
  double cost = 0.0;            // full objective, recomputed from the series
  double production_cost = 0.0; // MT + BS terms only (incl. fixed c terms)
  QpSolution certificate;       // follower optimality multipliers
};

// Stable variable layout of the follower QP: for each hour t the block
// [p_buy, p_sell, mt_0.., bs_0.., wt_0..]. SoC is eliminated by
// substituting the recursion into the box bounds (running-sum rows);
// the cyclic condition SoC_T = SoC_0 becomes one equality per battery.
struct VppQpLayout {
  int T = 0;
  int n_mt = 0, n_bs = 0, n_wt = 0;
  int block() const { return 2 + n_mt + n_bs + n_wt; }
  int buy(int t) const { return t * block(); }
  int sell(int t) const { return t * block() + 1; }
  int mt(int t, int i) const { return t * block() + 2 + i; }
  int bs(int t, int i) const { return t * block() + 2 + n_mt + i; }
  int wt(int t, int i) const { return t * block() + 2 + n_mt + n_bs + i; }
  int n() const { return T * block(); }
};

VppQpLayout vpp_qp_layout(const VppConfig& v, int T);

QuadraticProgram build_vpp_qp(const VppConfig& v, const PriceSchedule& prices,
                              const ContractPrices& contract, int T,
                              double dt = 1.0);

// Solves the follower economic dispatch at the given prices. Throws
// InfeasibleDispatch with the binding hour when demand is unservable.
DispatchSolution solve_vpp_dispatch(const VppConfig& v,
                                    const PriceSchedule& prices,
                                    const ContractPrices& contract, int T,
                                    double dt, const SolverConfig& cfg);

// Mode 1: every VPP trades at the contract prices; no game is played.
std::vector<DispatchSolution> mode1_dispatch(const Scenario& s);

// Reassembles the QP variable vector from the solution series (used by
// the MPEC feasibility report, which re-checks the stored dispatch).
Eigen::VectorXd dispatch_to_x(const VppConfig& v, const DispatchSolution& d);

}  // namespace vppm
