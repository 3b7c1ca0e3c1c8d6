#include "vppm/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "vppm/errors.hpp"

namespace vppm {

namespace {

// Shortest representation that reparses to the same double.
std::string fmt(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string fmt(int x) { return std::to_string(x); }

double wholesale_outflow(const std::vector<DispatchSolution>& dispatches,
                         const ContractPrices& c) {
  // What the wholesale market collects if every VPP trade clears at the
  // contract prices (the mode-1 accounting).
  double w = 0.0;
  for (const DispatchSolution& d : dispatches)
    for (int t = 0; t < d.T; ++t)
      w += c.cep[t] * d.p_buy[t] - c.ces[t] * d.p_sell[t];
  return w;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// Percent columns are display values; keep them at 2 decimals in the
// struct too, so CSV round-trips are bit-exact.
double pct2(double delta, double base) {
  if (base == 0.0) return 0.0;
  const double p = std::round(10000.0 * delta / base) / 100.0;
  return p == 0.0 ? 0.0 : p;  // avoid -0 in reports
}

double parse_num(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("bad numeric cell: '" + s + "'");
  return v;
}

}  // namespace

ModeComparison mode_comparison(const std::vector<DispatchSolution>& m1,
                               const EquilibriumResult& m2,
                               const Scenario& s) {
  if (m1.size() != m2.dispatches.size() || m1.size() != s.vpps.size())
    throw DimensionMismatch("mode comparison needs matching VPP lists");

  ModeComparison mc;
  for (size_t j = 0; j < m1.size(); ++j) {
    StakeholderRow row;
    row.id = m1[j].vpp_id;
    row.mode1 = m1[j].cost;
    row.mode2 = m2.dispatches[j].cost;
    row.delta = row.mode1 - row.mode2;
    row.delta_pct = pct2(row.delta, row.mode1);
    mc.vpps.push_back(row);
    mc.production_mode1 += m1[j].production_cost;
    mc.production_mode2 += m2.dispatches[j].production_cost;
  }
  mc.dso_profit = m2.settlement.dso_profit;
  mc.inflow_mode1 = wholesale_outflow(m1, s.contract);
  mc.inflow_mode2 = m2.settlement.wholesale_inflow;
  mc.identity_residual = accounting_identity_check(mc);
  return mc;
}

double accounting_identity_check(const ModeComparison& mc) {
  double cost_delta = 0.0;
  for (const StakeholderRow& r : mc.vpps) cost_delta += r.delta;
  const double lhs = mc.inflow_mode1 - mc.inflow_mode2;
  const double rhs = mc.dso_profit + cost_delta +
                     (mc.production_mode2 - mc.production_mode1);
  return lhs - rhs;
}

std::vector<VppDiffTable> solution_diff(const std::vector<DispatchSolution>& m1,
                                        const EquilibriumResult& m2) {
  if (m1.size() != m2.dispatches.size())
    throw DimensionMismatch("diff needs matching VPP lists");
  std::vector<VppDiffTable> out;
  for (size_t j = 0; j < m1.size(); ++j) {
    const DispatchSolution& a = m1[j];
    const DispatchSolution& b = m2.dispatches[j];
    VppDiffTable tab;
    tab.vpp_id = a.vpp_id;
    for (int t = 0; t < a.T; ++t) {
      DiffRow r;
      r.hour = t + 1;
      r.buy_diff = b.p_buy[t] - a.p_buy[t];
      r.sell_diff = b.p_sell[t] - a.p_sell[t];
      for (size_t i = 0; i < a.p_mt.size(); ++i)
        r.mt_diff += b.p_mt[i][t] - a.p_mt[i][t];
      for (size_t i = 0; i < a.p_wt.size(); ++i)
        r.wt_diff += b.p_wt[i][t] - a.p_wt[i][t];
      double soc_diff = 0.0;
      if (!a.soc.empty()) {
        r.soc_mode1_pct = 100.0 * a.soc[0][t];
        r.soc_mode2_pct = 100.0 * b.soc[0][t];
        soc_diff = b.soc[0][t] - a.soc[0][t];
      }
      const double mag =
          std::max({std::abs(r.buy_diff), std::abs(r.sell_diff),
                    std::abs(r.mt_diff), std::abs(r.wt_diff),
                    std::abs(soc_diff)});
      if (mag > 1e-6) tab.rows.push_back(r);
    }
    out.push_back(std::move(tab));
  }
  return out;
}

std::string comparison_csv(const ModeComparison& mc) {
  std::string out = "stakeholder,mode1_eur,mode2_eur,delta_eur,delta_pct\n";
  for (const StakeholderRow& r : mc.vpps) {
    out += r.id + ',' + fmt(r.mode1) + ',' + fmt(r.mode2) + ',' +
           fmt(r.delta) + ',' + fmt(r.delta_pct) + '\n';
  }
  // The DSO has no mode-1 profit; the wholesale and production rows carry
  // the remaining identity terms.
  out += "dso,0," + fmt(mc.dso_profit) + ',' + fmt(-mc.dso_profit) + ",0\n";
  out += "wholesale," + fmt(mc.inflow_mode1) + ',' + fmt(mc.inflow_mode2) +
         ',' + fmt(mc.inflow_mode1 - mc.inflow_mode2) + ',' +
         fmt(pct2(mc.inflow_mode1 - mc.inflow_mode2, mc.inflow_mode1)) + '\n';
  out += "production," + fmt(mc.production_mode1) + ',' +
         fmt(mc.production_mode2) + ',' +
         fmt(mc.production_mode1 - mc.production_mode2) + ',' +
         fmt(pct2(mc.production_mode1 - mc.production_mode2,
                  mc.production_mode1)) +
         '\n';
  return out;
}

std::string diff_csv(const VppDiffTable& table) {
  std::string out =
      "hour,buy_diff_mwh,sell_diff_mwh,mt_diff_mw,wt_diff_mw,"
      "soc_mode2_pct,soc_mode1_pct\n";
  for (const DiffRow& r : table.rows) {
    out += fmt(r.hour) + ',' + fmt(r.buy_diff) + ',' + fmt(r.sell_diff) +
           ',' + fmt(r.mt_diff) + ',' + fmt(r.wt_diff) + ',' +
           fmt(r.soc_mode2_pct) + ',' + fmt(r.soc_mode1_pct) + '\n';
  }
  return out;
}

std::string prices_csv(const ContractPrices& contract,
                       const PriceSchedule& prices) {
  std::string out = "hour,cep,ces,ep,es\n";
  for (size_t t = 0; t < prices.ep.size(); ++t) {
    out += fmt(static_cast<int>(t) + 1) + ',' + fmt(contract.cep[t]) + ',' +
           fmt(contract.ces[t]) + ',' + fmt(prices.ep[t]) + ',' +
           fmt(prices.es[t]) + '\n';
  }
  return out;
}

std::string dispatch_csv(const DispatchSolution& d) {
  std::string out = "hour,buy,sell";
  for (size_t i = 0; i < d.p_mt.size(); ++i)
    out += ",mt" + std::to_string(i + 1);
  for (size_t i = 0; i < d.p_bs.size(); ++i)
    out += ",bs" + std::to_string(i + 1) + ",soc" + std::to_string(i + 1);
  for (size_t i = 0; i < d.p_wt.size(); ++i)
    out += ",wt" + std::to_string(i + 1);
  out += '\n';
  for (int t = 0; t < d.T; ++t) {
    out += fmt(t + 1) + ',' + fmt(d.p_buy[t]) + ',' + fmt(d.p_sell[t]);
    for (size_t i = 0; i < d.p_mt.size(); ++i) out += ',' + fmt(d.p_mt[i][t]);
    for (size_t i = 0; i < d.p_bs.size(); ++i)
      out += ',' + fmt(d.p_bs[i][t]) + ',' + fmt(d.soc[i][t]);
    for (size_t i = 0; i < d.p_wt.size(); ++i) out += ',' + fmt(d.p_wt[i][t]);
    out += '\n';
  }
  return out;
}

ModeComparison parse_comparison_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) ||
      line != "stakeholder,mode1_eur,mode2_eur,delta_eur,delta_pct")
    throw ParseError("unexpected comparison header");
  ModeComparison mc;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> c = split_line(line);
    if (c.size() != 5) throw ParseError("expected 5 cells: '" + line + "'");
    if (c[0] == "dso") {
      mc.dso_profit = parse_num(c[2]);
    } else if (c[0] == "wholesale") {
      mc.inflow_mode1 = parse_num(c[1]);
      mc.inflow_mode2 = parse_num(c[2]);
    } else if (c[0] == "production") {
      mc.production_mode1 = parse_num(c[1]);
      mc.production_mode2 = parse_num(c[2]);
    } else {
      StakeholderRow r;
      r.id = c[0];
      r.mode1 = parse_num(c[1]);
      r.mode2 = parse_num(c[2]);
      r.delta = parse_num(c[3]);
      r.delta_pct = parse_num(c[4]);
      mc.vpps.push_back(std::move(r));
    }
  }
  mc.identity_residual = accounting_identity_check(mc);
  return mc;
}

}  // namespace vppm
