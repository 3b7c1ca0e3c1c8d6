#pragma once

#include "vppm/bilevel.hpp"
#include "vppm/model.hpp"

namespace vppm {

struct GridSpec {
  int price_points = 21;    // lattice points per price coordinate
  double power_step = 0.01; // MW granularity for dispatch enumeration
};

struct DispatchOracleResult {
  bool feasible = false;
  double cost = 0.0;
  std::vector<Series> p_mt, p_bs, p_wt;
  Series p_buy, p_sell;
  double slope = 0.0;  // summed per-variable cost slope bound, for the grid error bound
};

// Exhaustive device-output enumeration on the power grid; trades are
// completed in closed form per hour (linear in the wash volume, so an
// endpoint is optimal). T=1 forces p_bs=0 and T=2 forces
// p_bs[1]=-p_bs[0] through the cyclic SoC condition, which keeps the
// grid exactly feasible. Throws GridTooLarge beyond 1e8 points.
DispatchOracleResult brute_force_dispatch(const VppConfig& v,
                                          const PriceSchedule& prices,
                                          const ContractPrices& contract,
                                          int T, double dt, const GridSpec& g);

struct EquilibriumOracleResult {
  PriceSchedule prices;
  double profit = 0.0;
  long evaluations = 0;
};

// Full price-lattice sweep of evaluate_leader, box endpoints included.
// Guarded: T <= 2 and price_points^(2T) <= 1e6.
EquilibriumOracleResult brute_force_equilibrium(const Scenario& s,
                                                const GridSpec& g);

}  // namespace vppm
