#include <doctest.h>

#include "helpers.hpp"
#include "vppm/bilevel.hpp"
#include "vppm/errors.hpp"
#include "vppm/report.hpp"

using namespace vppm;

namespace {

// One solved scenario shared by the suite.
struct Fixture {
  Scenario s;
  std::vector<DispatchSolution> m1;
  EquilibriumResult m2;
  Fixture() : s(testutil::random_scenario(314, 8, 2)) {
    s.solver.eval_budget = 400;
    m1 = mode1_dispatch(s);
    m2 = solve_stackelberg(s);
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("comparison fields and the accounting identity") {
  const Fixture& f = fixture();
  const ModeComparison mc = mode_comparison(f.m1, f.m2, f.s);
  REQUIRE(mc.vpps.size() == 2);
  for (const StakeholderRow& r : mc.vpps) {
    CHECK(r.delta == r.mode1 - r.mode2);
    CHECK(r.delta >= -1e-6);  // follower rationality
  }
  CHECK(std::abs(mc.identity_residual) <= 1e-6);
  CHECK(mc.dso_profit == f.m2.settlement.dso_profit);
}

TEST_CASE("corrupting one cost moves the residual by one") {
  ModeComparison mc = mode_comparison(fixture().m1, fixture().m2, fixture().s);
  mc.vpps[0].mode1 += 1.0;
  mc.vpps[0].delta += 1.0;
  CHECK(std::abs(accounting_identity_check(mc)) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("identical prices give the all-but-DSO-zero comparison") {
  Scenario s = testutil::random_scenario(271, 6, 2);
  const auto m1 = mode1_dispatch(s);
  // degenerate "equilibrium" pinned at the contract prices
  EquilibriumResult eq;
  eq.prices = {s.contract.ces, s.contract.cep};
  eq.dispatches = mode1_dispatch(s);
  eq.settlement = dso_profit(eq.prices, eq.dispatches, s.contract);
  eq.leader_objective = eq.settlement.dso_profit;
  const ModeComparison mc = mode_comparison(m1, eq, s);
  for (const StakeholderRow& r : mc.vpps) CHECK(std::abs(r.delta) <= 1e-9);
  CHECK(std::abs(mc.identity_residual) <= 1e-9);
  // the DSO still earns the netting spread
  double spread_profit = 0.0;
  for (int t = 0; t < s.horizon; ++t) {
    double b = 0.0, sl = 0.0;
    for (const auto& d : m1) {
      b += d.p_buy[t];
      sl += d.p_sell[t];
    }
    spread_profit +=
        (s.contract.cep[t] - s.contract.ces[t]) * std::min(b, sl);
  }
  CHECK(mc.dso_profit == doctest::Approx(spread_profit).epsilon(1e-9));
}

TEST_CASE("diff tables drop unchanged hours") {
  const Fixture& f = fixture();
  // identical inputs: empty tables
  EquilibriumResult same;
  same.prices = {f.s.contract.ces, f.s.contract.cep};
  same.dispatches = f.m1;
  same.settlement = dso_profit(same.prices, f.m1, f.s.contract);
  for (const VppDiffTable& t : solution_diff(f.m1, same))
    CHECK(t.rows.empty());

  // a single bumped hour yields a single row
  EquilibriumResult bumped = same;
  bumped.dispatches[0].p_buy[3] += 0.1;
  const auto tabs = solution_diff(f.m1, bumped);
  REQUIRE(tabs[0].rows.size() == 1);
  CHECK(tabs[0].rows[0].hour == 4);  // 1-based
  CHECK(tabs[0].rows[0].buy_diff == doctest::Approx(0.1));
  CHECK(tabs[1].rows.empty());
}

TEST_CASE("SoC columns are percentages") {
  const Fixture& f = fixture();
  EquilibriumResult bumped;
  bumped.prices = {f.s.contract.ces, f.s.contract.cep};
  bumped.dispatches = f.m1;
  bumped.dispatches[0].p_buy[0] += 1.0;
  const auto tabs = solution_diff(f.m1, bumped);
  REQUIRE_FALSE(tabs[0].rows.empty());
  CHECK(tabs[0].rows[0].soc_mode1_pct ==
        doctest::Approx(100.0 * f.m1[0].soc[0][0]));
}

TEST_CASE("comparison CSV round-trips bit-exactly") {
  const ModeComparison mc = mode_comparison(fixture().m1, fixture().m2,
                                            fixture().s);
  const std::string text = comparison_csv(mc);
  CHECK(text.rfind("stakeholder,mode1_eur,mode2_eur,delta_eur,delta_pct\n",
                   0) == 0);
  const ModeComparison rt = parse_comparison_csv(text);
  REQUIRE(rt.vpps.size() == mc.vpps.size());
  for (size_t j = 0; j < mc.vpps.size(); ++j) {
    CHECK(rt.vpps[j].mode1 == mc.vpps[j].mode1);
    CHECK(rt.vpps[j].mode2 == mc.vpps[j].mode2);
    CHECK(rt.vpps[j].delta == mc.vpps[j].delta);
    CHECK(rt.vpps[j].delta_pct == mc.vpps[j].delta_pct);
  }
  CHECK(rt.dso_profit == mc.dso_profit);
  CHECK(rt.inflow_mode1 == mc.inflow_mode1);
  CHECK(rt.inflow_mode2 == mc.inflow_mode2);
  CHECK(rt.production_mode1 == mc.production_mode1);
  CHECK(rt.production_mode2 == mc.production_mode2);
}

TEST_CASE("percent reductions carry two decimals") {
  const ModeComparison mc = mode_comparison(fixture().m1, fixture().m2,
                                            fixture().s);
  for (const StakeholderRow& r : mc.vpps)
    CHECK(r.delta_pct == doctest::Approx(std::round(r.delta_pct * 100) / 100)
                             .epsilon(1e-12));
}

TEST_CASE("prices and dispatch CSVs carry the documented headers") {
  const Fixture& f = fixture();
  const std::string pc = prices_csv(f.s.contract, f.m2.prices);
  CHECK(pc.rfind("hour,cep,ces,ep,es\n", 0) == 0);
  const std::string dc = dispatch_csv(f.m2.dispatches[0]);
  CHECK(dc.rfind("hour,buy,sell,mt1,bs1,soc1,wt1\n", 0) == 0);
  // one data line per hour
  CHECK(std::count(dc.begin(), dc.end(), '\n') == f.s.horizon + 1);
  const std::string diff = diff_csv(solution_diff(f.m1, f.m2)[0]);
  CHECK(diff.rfind("hour,buy_diff_mwh,sell_diff_mwh,mt_diff_mw,wt_diff_mw,"
                   "soc_mode2_pct,soc_mode1_pct\n",
                   0) == 0);
}

TEST_CASE("malformed comparison CSVs are rejected") {
  CHECK_THROWS_AS(parse_comparison_csv("bad,header\n"), ParseError);
  CHECK_THROWS_AS(
      parse_comparison_csv(
          "stakeholder,mode1_eur,mode2_eur,delta_eur,delta_pct\nv1,1,2\n"),
      ParseError);
  CHECK_THROWS_AS(
      parse_comparison_csv(
          "stakeholder,mode1_eur,mode2_eur,delta_eur,delta_pct\n"
          "v1,a,b,c,d\n"),
      ParseError);
}
