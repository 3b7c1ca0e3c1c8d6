#pragma once

#include <string>
#include <vector>

#include "vppm/bilevel.hpp"
#include "vppm/model.hpp"

namespace vppm {

struct StakeholderRow {
  std::string id;
  double mode1 = 0.0;
  double mode2 = 0.0;
  double delta = 0.0;      // mode1 - mode2 for VPP costs (reduction)
  double delta_pct = 0.0;  // base = mode1; 0 when the base is 0
};

struct ModeComparison {
  std::vector<StakeholderRow> vpps;  // operating costs
  double dso_profit = 0.0;
  double inflow_mode1 = 0.0;  // wholesale inflow, mode 1
  double inflow_mode2 = 0.0;
  double production_mode1 = 0.0;
  double production_mode2 = 0.0;
  double identity_residual = 0.0;
};

ModeComparison mode_comparison(const std::vector<DispatchSolution>& m1,
                               const EquilibriumResult& m2,
                               const Scenario& s);

// (W1-W2) - [D + sum_j(C1_j-C2_j) + (Prod2-Prod1)], exact from stored parts.
double accounting_identity_check(const ModeComparison& mc);

struct DiffRow {
  int hour = 0;  // 1-based
  double buy_diff = 0.0;   // mode2 - mode1, MWh
  double sell_diff = 0.0;
  double mt_diff = 0.0;    // summed over turbines, MW
  double wt_diff = 0.0;
  double soc_mode2_pct = 0.0;  // first battery; 0 when the VPP has none
  double soc_mode1_pct = 0.0;
};

struct VppDiffTable {
  std::string vpp_id;
  std::vector<DiffRow> rows;  // hours where some diff magnitude > 1e-6
};

std::vector<VppDiffTable> solution_diff(const std::vector<DispatchSolution>& m1,
                                        const EquilibriumResult& m2);

// CSV emission. UTF-8, '.' decimal separator, '\n' newlines, shortest
// round-trip number formatting (bit-exact reparse).
std::string comparison_csv(const ModeComparison& mc);
std::string diff_csv(const VppDiffTable& table);
std::string prices_csv(const ContractPrices& contract, const PriceSchedule& prices);
std::string dispatch_csv(const DispatchSolution& d);

ModeComparison parse_comparison_csv(const std::string& text);

}  // namespace vppm
