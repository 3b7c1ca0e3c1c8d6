#include "vppm/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "vppm/errors.hpp"

namespace vppm {

namespace {

// One enumerated device output: which series it writes into.
struct Axis {
  enum Kind { Mt, Bs, Wt } kind;
  int device = 0;
  int hour = 0;
  std::vector<double> values;
};

std::vector<double> grid_values(double lo, double hi, double step) {
  std::vector<double> v;
  for (double x = lo; x < hi - 1e-12; x += step) v.push_back(x);
  v.push_back(hi);
  if (lo < 0.0 && hi > 0.0 &&
      std::none_of(v.begin(), v.end(), [](double x) { return x == 0.0; }))
    v.push_back(0.0);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

DispatchOracleResult brute_force_dispatch(const VppConfig& v,
                                          const PriceSchedule& prices,
                                          const ContractPrices& contract,
                                          int T, double dt, const GridSpec& g) {
  (void)contract;
  if (!(g.power_step > 0.0)) throw ModelError("power_step must be > 0");
  if (!v.batteries.empty() && T > 2)
    throw GridTooLarge(
        "battery enumeration relies on the cyclic SoC condition; T <= 2 only");

  std::vector<Axis> axes;
  for (int i = 0; i < static_cast<int>(v.turbines.size()); ++i)
    for (int t = 0; t < T; ++t)
      axes.push_back({Axis::Mt, i, t,
                      grid_values(0.0, v.turbines[i].p_max, g.power_step)});
  for (int i = 0; i < static_cast<int>(v.winds.size()); ++i)
    for (int t = 0; t < T; ++t)
      axes.push_back({Axis::Wt, i, t,
                      grid_values(0.0, v.winds[i].availability[t], g.power_step)});
  if (T == 2) {
    // p_bs[1] = -p_bs[0]; the first-hour SoC box bounds the free value.
    for (int i = 0; i < static_cast<int>(v.batteries.size()); ++i) {
      const Battery& b = v.batteries[i];
      const double lo =
          std::max(-b.p_max, -(b.soc_max - b.soc0) * b.e_max / dt);
      const double hi = std::min(b.p_max, (b.soc0 - b.soc_min) * b.e_max / dt);
      if (lo > hi) return {};  // no feasible battery profile
      axes.push_back({Axis::Bs, i, 0, grid_values(lo, hi, g.power_step)});
    }
  }

  double points = 1.0;
  for (const Axis& a : axes) points *= static_cast<double>(a.values.size());
  if (points > 1e8) throw GridTooLarge("dispatch grid exceeds 1e8 points");

  DispatchOracleResult best;
  best.cost = qp_infinity();

  std::vector<Series> mt(v.turbines.size(), Series(T, 0.0));
  std::vector<Series> bs(v.batteries.size(), Series(T, 0.0));
  std::vector<Series> wt(v.winds.size(), Series(T, 0.0));
  std::vector<size_t> odo(axes.size(), 0);
  std::vector<double> cur(axes.size(), 0.0), best_assign;

  const auto evaluate = [&]() {
    for (size_t a = 0; a < axes.size(); ++a) {
      const Axis& ax = axes[a];
      const double val = ax.values[odo[a]];
      cur[a] = val;
      switch (ax.kind) {
        case Axis::Mt: mt[ax.device][ax.hour] = val; break;
        case Axis::Wt: wt[ax.device][ax.hour] = val; break;
        case Axis::Bs:
          bs[ax.device][0] = val;
          bs[ax.device][1] = -val;
          break;
      }
    }
    // Ramp feasibility between consecutive hours.
    for (size_t i = 0; i < v.turbines.size(); ++i)
      for (int t = 0; t + 1 < T; ++t) {
        const double d = mt[i][t + 1] - mt[i][t];
        if (d > v.turbines[i].ramp_up * dt + 1e-12 ||
            d < v.turbines[i].ramp_down * dt - 1e-12)
          return;
      }
    double cost = 0.0;
    Series buy(T, 0.0), sell(T, 0.0);
    for (int t = 0; t < T; ++t) {
      double gen = 0.0;
      for (size_t i = 0; i < mt.size(); ++i) gen += mt[i][t];
      for (size_t i = 0; i < bs.size(); ++i) gen += bs[i][t];
      for (size_t i = 0; i < wt.size(); ++i) gen += wt[i][t];
      const double r = (v.demand[t] - gen) * dt;  // required net purchase
      double pb = std::max(r, 0.0), ps = std::max(-r, 0.0);
      if (pb > v.trade_cap_buy + 1e-12 || ps > v.trade_cap_sell + 1e-12)
        return;
      if (prices.ep[t] < prices.es[t]) {
        // The price box permits ep < es; the optimal wash volume is the
        // full remaining headroom.
        const double w =
            std::min(v.trade_cap_buy - pb, v.trade_cap_sell - ps);
        pb += w;
        ps += w;
      }
      buy[t] = pb;
      sell[t] = ps;
      cost += prices.ep[t] * pb - prices.es[t] * ps;
      for (size_t i = 0; i < mt.size(); ++i) {
        const double e = mt[i][t] * dt;
        cost += v.turbines[i].a * e * e + v.turbines[i].b * e + v.turbines[i].c;
      }
      for (size_t i = 0; i < bs.size(); ++i) {
        const double e = bs[i][t] * dt;
        cost += v.batteries[i].e * e * e;
      }
    }
    const bool better =
        cost < best.cost - 1e-15 ||
        (std::abs(cost - best.cost) <= 1e-15 &&
         std::lexicographical_compare(cur.begin(), cur.end(),
                                      best_assign.begin(), best_assign.end()));
    if (better) {
      best.feasible = true;
      best.cost = cost;
      best.p_mt = mt;
      best.p_bs = bs;
      best.p_wt = wt;
      best.p_buy = buy;
      best.p_sell = sell;
      best_assign = cur;
    }
  };

  // Odometer sweep over all axes (also covers the zero-axis case once).
  for (;;) {
    evaluate();
    size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++odo[a] < axes[a].values.size()) break;
      odo[a] = 0;
    }
    if (a == axes.size()) break;
  }

  double slope = 0.0;
  double price_max = 0.0;
  for (int t = 0; t < T; ++t)
    price_max = std::max({price_max, prices.ep[t], prices.es[t]});
  for (const Axis& a : axes) {
    if (a.kind == Axis::Mt) {
      const MicroTurbine& m = v.turbines[a.device];
      slope += 2.0 * m.a * m.p_max * dt * dt + m.b * dt + price_max * dt;
    } else if (a.kind == Axis::Bs) {
      const Battery& b = v.batteries[a.device];
      // the mirrored second hour doubles the sensitivity
      slope += 2.0 * (2.0 * b.e * b.p_max * dt * dt + price_max * dt);
    } else {
      slope += price_max * dt;
    }
  }
  best.slope = slope;
  return best;
}

EquilibriumOracleResult brute_force_equilibrium(const Scenario& s,
                                                const GridSpec& g) {
  const int T = s.horizon;
  if (T > 2) throw GridTooLarge("price lattice search is guarded to T <= 2");
  if (g.price_points < 2) throw ModelError("price_points must be >= 2");
  const double combos = std::pow(static_cast<double>(g.price_points), 2.0 * T);
  if (combos > 1e6) throw GridTooLarge("price lattice exceeds 1e6 points");

  std::vector<std::vector<double>> lattice(2 * T);
  for (int c = 0; c < 2 * T; ++c) {
    const int t = c % T;
    lattice[c].resize(g.price_points);
    for (int k = 0; k < g.price_points; ++k)
      lattice[c][k] = s.contract.ces[t] +
                      (s.contract.cep[t] - s.contract.ces[t]) * k /
                          (g.price_points - 1);
  }

  EquilibriumOracleResult best;
  best.profit = -qp_infinity();
  std::vector<size_t> odo(2 * T, 0);
  std::vector<double> cur(2 * T, 0.0), best_vec;
  PriceSchedule p;
  p.ep.resize(T);
  p.es.resize(T);
  for (;;) {
    for (int c = 0; c < 2 * T; ++c) {
      cur[c] = lattice[c][odo[c]];
      if (c < T)
        p.ep[c] = cur[c];
      else
        p.es[c - T] = cur[c];
    }
    const LeaderEvaluation ev = evaluate_leader(p, s);
    ++best.evaluations;
    const bool better =
        ev.profit > best.profit + 1e-15 ||
        (std::abs(ev.profit - best.profit) <= 1e-15 && !best_vec.empty() &&
         std::lexicographical_compare(cur.begin(), cur.end(), best_vec.begin(),
                                      best_vec.end()));
    if (better || best_vec.empty()) {
      best.profit = ev.profit;
      best.prices = p;
      best_vec = cur;
    }
    size_t a = 0;
    for (; a < odo.size(); ++a) {
      if (++odo[a] < lattice[a].size()) break;
      odo[a] = 0;
    }
    if (a == odo.size()) break;
  }
  return best;
}

}  // namespace vppm
