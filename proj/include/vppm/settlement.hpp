#pragma once

#include <vector>

#include "vppm/dispatch.hpp"
#include "vppm/model.hpp"

namespace vppm {

struct SignSplit {
  Series buy;          // wholesale purchase volume per hour, >= 0
  Series sell;         // wholesale sale volume per hour, >= 0
  std::vector<int> z;  // indicator, 1 when net position >= 0
};

struct BigMRowViolation {
  int t = 0;           // 0-based hour
  std::string row;     // which inequality failed
  double amount = 0.0; // violation magnitude
};

struct BigMReport {
  bool feasible = true;
  std::vector<BigMRowViolation> violations;
};

struct SettlementResult {
  Series p_dso;       // net position per hour (buys positive)
  Series p_dso_buy;   // wholesale purchases
  Series p_dso_sell;  // wholesale sales
  std::vector<int> z1, z2;
  Series hourly_profit;
  double dso_profit = 0.0;
  double wholesale_inflow = 0.0;  // sum cep*buy - ces*sell
};

// Exact sum of VPP trades per hour. Throws DimensionMismatch.
Series net_position(const std::vector<DispatchSolution>& dispatches);

// Exact sign split with the canonical z=1 at zero net position.
SignSplit sign_split(const Series& p_dso);

// Checks every row of the indicator encoding plus z1=z2; report-valued.
BigMReport big_m_check(const Series& p_dso, const Series& p_dso_buy,
                       const Series& p_dso_sell, const std::vector<int>& z1,
                       const std::vector<int>& z2, double big_m);

SettlementResult dso_profit(const PriceSchedule& prices,
                            const std::vector<DispatchSolution>& dispatches,
                            const ContractPrices& contract);

}  // namespace vppm
