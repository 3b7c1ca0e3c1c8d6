// Scenario builders shared across the test suites.
#pragma once

#include <random>
#include <vector>

#include "vppm/model.hpp"

namespace testutil {

using vppm::Scenario;
using vppm::Series;
using vppm::VppConfig;

// T=1, one VPP that must buy its whole demand: profit(ep) = (ep - cep) * d.
inline Scenario forced_buyer(double demand = 1.0) {
  Scenario s;
  s.horizon = 1;
  s.dt = 1.0;
  s.big_m = 30.0;
  s.contract.cep = {1.2};
  s.contract.ces = {0.3};
  VppConfig v;
  v.id = "buyer";
  v.trade_cap_buy = 10.0;
  v.trade_cap_sell = 10.0;
  v.demand = {demand};
  s.vpps.push_back(v);
  s.solver.seed = 7;
  s.solver.eval_budget = 400;
  s.solver.restarts = 4;
  return s;
}

// Adds a pure seller (wind 1, demand 0): profit(ep, es) = ep - es, since
// the unit wholesale flows cancel.
inline Scenario forced_buyer_seller() {
  Scenario s = forced_buyer(1.0);
  VppConfig v;
  v.id = "seller";
  v.trade_cap_buy = 10.0;
  v.trade_cap_sell = 10.0;
  v.demand = {0.0};
  v.winds.push_back({Series{1.0}});
  s.vpps.push_back(v);
  return s;
}

inline Scenario all_zero_scenario() {
  Scenario s = forced_buyer(0.0);
  s.vpps[0].id = "idle";
  return s;
}

inline Series smooth_series(std::mt19937_64& rng, int T, double lo, double hi) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Series out(T);
  double level = uni(rng);
  for (int t = 0; t < T; ++t) {
    level = std::clamp(level + 0.3 * (uni(rng) - 0.5), 0.0, 1.0);
    out[t] = lo + (hi - lo) * level;
  }
  return out;
}

// A feasible scenario in the bundled scenario's style. Demand stays
// below the trade caps, so every dispatch is servable.
inline Scenario random_scenario(std::uint64_t seed, int T = 24, int J = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Scenario s;
  s.horizon = T;
  s.dt = 1.0;
  s.big_m = 30.0 * J;
  s.contract.ces = smooth_series(rng, T, 0.25, 0.8);
  s.contract.cep.resize(T);
  for (int t = 0; t < T; ++t)
    s.contract.cep[t] = s.contract.ces[t] + 0.4 + 0.5 * uni(rng);
  for (int j = 0; j < J; ++j) {
    VppConfig v;
    v.id = "vpp" + std::to_string(j + 1);
    v.trade_cap_buy = 10.0;
    v.trade_cap_sell = 10.0;
    vppm::MicroTurbine mt;
    mt.a = 0.05 + 0.15 * uni(rng);
    mt.b = 0.4 + 0.6 * uni(rng);
    mt.c = 0.5 + uni(rng);
    mt.p_max = 3.0 + 3.0 * uni(rng);
    mt.ramp_up = 2.0 + 2.0 * uni(rng);
    mt.ramp_down = -mt.ramp_up;
    v.turbines.push_back(mt);
    vppm::Battery b;
    b.e = 0.05;
    b.p_max = 0.5 + 0.7 * uni(rng);
    b.e_max = 1.0 + uni(rng);
    b.soc_min = 0.1;
    b.soc_max = 0.95;
    b.soc0 = 0.2 + 0.7 * uni(rng);
    v.batteries.push_back(b);
    v.winds.push_back({smooth_series(rng, T, 0.0, 0.5 + 2.5 * uni(rng))});
    v.demand = smooth_series(rng, T, 1.0, 8.0);
    s.vpps.push_back(std::move(v));
  }
  s.solver.seed = seed;
  return s;
}

}  // namespace testutil
