#include "vppm/settlement.hpp"

#include <cmath>

#include "vppm/errors.hpp"

namespace vppm {

Series net_position(const std::vector<DispatchSolution>& dispatches) {
  if (dispatches.empty()) return {};
  const size_t T = dispatches.front().p_buy.size();
  for (const DispatchSolution& d : dispatches)
    if (d.p_buy.size() != T || d.p_sell.size() != T)
      throw DimensionMismatch("dispatches must share the horizon");
  Series out(T, 0.0);
  for (size_t t = 0; t < T; ++t)
    for (const DispatchSolution& d : dispatches)
      out[t] += d.p_buy[t] - d.p_sell[t];
  return out;
}

SignSplit sign_split(const Series& p_dso) {
  SignSplit out;
  out.buy.resize(p_dso.size());
  out.sell.resize(p_dso.size());
  out.z.resize(p_dso.size());
  for (size_t t = 0; t < p_dso.size(); ++t) {
    if (p_dso[t] >= 0.0) {  // zero takes the purchase branch, z = 1
      out.buy[t] = p_dso[t];
      out.sell[t] = 0.0;
      out.z[t] = 1;
    } else {
      out.buy[t] = 0.0;
      out.sell[t] = -p_dso[t];
      out.z[t] = 0;
    }
  }
  return out;
}

BigMReport big_m_check(const Series& p_dso, const Series& p_dso_buy,
                       const Series& p_dso_sell, const std::vector<int>& z1,
                       const std::vector<int>& z2, double big_m) {
  const size_t T = p_dso.size();
  if (p_dso_buy.size() != T || p_dso_sell.size() != T || z1.size() != T ||
      z2.size() != T)
    throw DimensionMismatch("big_m_check series must share the horizon");

  BigMReport rep;
  auto fail = [&](size_t t, const char* row, double amount) {
    rep.feasible = false;
    rep.violations.push_back({static_cast<int>(t), row, amount});
  };
  auto rng = [&](size_t t, const char* row, double lo, double val, double hi) {
    if (val < lo) fail(t, row, lo - val);
    if (val > hi) fail(t, row, val - hi);
  };
  for (size_t t = 0; t < T; ++t) {
    const double p = p_dso[t], pb = p_dso_buy[t], ps = p_dso_sell[t];
    const double a = z1[t], c = z2[t];
    rng(t, "-M(1-z1) <= P <= M z1", -big_m * (1 - a), p, big_m * a);
    rng(t, "-M(1-z1) <= Pbuy-P <= M(1-z1)", -big_m * (1 - a), pb - p,
        big_m * (1 - a));
    rng(t, "-M z1 <= Pbuy <= M z1", -big_m * a, pb, big_m * a);
    rng(t, "-M(1-z2) <= P <= M z2", -big_m * (1 - c), p, big_m * c);
    rng(t, "-M(1-z2) <= Psell <= M(1-z2)", -big_m * (1 - c), ps,
        big_m * (1 - c));
    rng(t, "-M z2 <= Psell+P <= M z2", -big_m * c, ps + p, big_m * c);
    if (z1[t] != z2[t]) fail(t, "z1 = z2", 1.0);
  }
  return rep;
}

SettlementResult dso_profit(const PriceSchedule& prices,
                            const std::vector<DispatchSolution>& dispatches,
                            const ContractPrices& contract) {
  const Series net = net_position(dispatches);
  const size_t T = net.size();
  if (prices.ep.size() != T || prices.es.size() != T ||
      contract.cep.size() != T || contract.ces.size() != T)
    throw DimensionMismatch("price series must share the dispatch horizon");

  const SignSplit split = sign_split(net);
  SettlementResult r;
  r.p_dso = net;
  r.p_dso_buy = split.buy;
  r.p_dso_sell = split.sell;
  r.z1 = split.z;
  r.z2 = split.z;
  r.hourly_profit.resize(T);
  for (size_t t = 0; t < T; ++t) {
    double vpp_buy = 0.0, vpp_sell = 0.0;
    for (const DispatchSolution& d : dispatches) {
      vpp_buy += d.p_buy[t];
      vpp_sell += d.p_sell[t];
    }
    const double h = contract.ces[t] * split.sell[t] -
                     contract.cep[t] * split.buy[t] +
                     prices.ep[t] * vpp_buy - prices.es[t] * vpp_sell;
    r.hourly_profit[t] = h;
    r.dso_profit += h;
    r.wholesale_inflow +=
        contract.cep[t] * split.buy[t] - contract.ces[t] * split.sell[t];
  }
  return r;
}

}  // namespace vppm
