#include "vppm/dispatch.hpp"

#include <algorithm>
#include <cmath>

#include "vppm/errors.hpp"

namespace vppm {

namespace {

// Variables this close to a bound are snapped onto it after solving, so
// flat-objective instances give exact ties (and exact zero trades).
constexpr double kSnapTol = 1e-7;

void check_series_lengths(const VppConfig& v, int T) {
  if (static_cast<int>(v.demand.size()) != T)
    throw ModelError(v.id + ": demand series length != T");
  for (const WindUnit& w : v.winds)
    if (static_cast<int>(w.availability.size()) != T)
      throw ModelError(v.id + ": wind availability series length != T");
}

}  // namespace

VppQpLayout vpp_qp_layout(const VppConfig& v, int T) {
  VppQpLayout l;
  l.T = T;
  l.n_mt = static_cast<int>(v.turbines.size());
  l.n_bs = static_cast<int>(v.batteries.size());
  l.n_wt = static_cast<int>(v.winds.size());
  return l;
}

QuadraticProgram build_vpp_qp(const VppConfig& v, const PriceSchedule& prices,
                              const ContractPrices& contract, int T,
                              double dt) {
  check_series_lengths(v, T);
  if (static_cast<int>(prices.ep.size()) != T ||
      static_cast<int>(prices.es.size()) != T)
    throw ModelError(v.id + ": price series length != T");
  (void)contract;

  const VppQpLayout l = vpp_qp_layout(v, T);
  const int n = l.n();
  QuadraticProgram p;
  p.n = n;
  p.Q = Eigen::MatrixXd::Zero(n, n);
  p.q = Eigen::VectorXd::Zero(n);
  p.lb = Eigen::VectorXd::Constant(n, -qp_infinity());
  p.ub = Eigen::VectorXd::Constant(n, qp_infinity());

  double fixed = 0.0;
  for (const MicroTurbine& mt : v.turbines) fixed += mt.c;
  p.constant = fixed * T;

  for (int t = 0; t < T; ++t) {
    p.q[l.buy(t)] = prices.ep[t];
    p.q[l.sell(t)] = -prices.es[t];
    p.lb[l.buy(t)] = 0.0;
    p.ub[l.buy(t)] = v.trade_cap_buy;
    p.lb[l.sell(t)] = 0.0;
    p.ub[l.sell(t)] = v.trade_cap_sell;
    for (int i = 0; i < l.n_mt; ++i) {
      const MicroTurbine& mt = v.turbines[i];
      p.Q(l.mt(t, i), l.mt(t, i)) = 2.0 * mt.a * dt * dt;
      p.q[l.mt(t, i)] = mt.b * dt;
      p.lb[l.mt(t, i)] = 0.0;
      p.ub[l.mt(t, i)] = mt.p_max;
    }
    for (int i = 0; i < l.n_bs; ++i) {
      const Battery& b = v.batteries[i];
      p.Q(l.bs(t, i), l.bs(t, i)) = 2.0 * b.e * dt * dt;
      p.lb[l.bs(t, i)] = -b.p_max;
      p.ub[l.bs(t, i)] = b.p_max;
    }
    for (int i = 0; i < l.n_wt; ++i) {
      p.lb[l.wt(t, i)] = 0.0;
      p.ub[l.wt(t, i)] = v.winds[i].availability[t];
    }
  }

  // Hourly balance plus one cyclic SoC equality per battery.
  const int me = T + l.n_bs;
  p.eq_A = Eigen::MatrixXd::Zero(me, n);
  p.eq_b = Eigen::VectorXd::Zero(me);
  for (int t = 0; t < T; ++t) {
    p.eq_A(t, l.buy(t)) = 1.0;
    p.eq_A(t, l.sell(t)) = -1.0;
    for (int i = 0; i < l.n_mt; ++i) p.eq_A(t, l.mt(t, i)) = dt;
    for (int i = 0; i < l.n_bs; ++i) p.eq_A(t, l.bs(t, i)) = dt;
    for (int i = 0; i < l.n_wt; ++i) p.eq_A(t, l.wt(t, i)) = dt;
    p.eq_b[t] = v.demand[t] * dt;
  }
  for (int i = 0; i < l.n_bs; ++i) {
    for (int t = 0; t < T; ++t) p.eq_A(T + i, l.bs(t, i)) = 1.0;
    p.eq_b[T + i] = 0.0;
  }

  // Ramp rows between in-horizon hours, then SoC box rows in running-sum
  // form for t = 1..T-1 (the cyclic equality pins hour T).
  const int mi = 2 * (T - 1) * l.n_mt + 2 * (T - 1) * l.n_bs;
  p.ineq_A = Eigen::MatrixXd::Zero(mi, n);
  p.ineq_b = Eigen::VectorXd::Zero(mi);
  int r = 0;
  for (int i = 0; i < l.n_mt; ++i) {
    const MicroTurbine& mt = v.turbines[i];
    for (int t = 0; t + 1 < T; ++t) {
      p.ineq_A(r, l.mt(t + 1, i)) = 1.0;
      p.ineq_A(r, l.mt(t, i)) = -1.0;
      p.ineq_b[r] = mt.ramp_up * dt;
      ++r;
      p.ineq_A(r, l.mt(t, i)) = 1.0;
      p.ineq_A(r, l.mt(t + 1, i)) = -1.0;
      p.ineq_b[r] = -mt.ramp_down * dt;
      ++r;
    }
  }
  for (int i = 0; i < l.n_bs; ++i) {
    const Battery& b = v.batteries[i];
    for (int t = 0; t + 1 < T; ++t) {
      // soc_min <= soc0 - (dt/e_max) * sum_{tau<=t} p_bs <= soc_max
      for (int tau = 0; tau <= t; ++tau) p.ineq_A(r, l.bs(tau, i)) = 1.0;
      p.ineq_b[r] = (b.soc0 - b.soc_min) * b.e_max / dt;
      ++r;
      for (int tau = 0; tau <= t; ++tau) p.ineq_A(r, l.bs(tau, i)) = -1.0;
      p.ineq_b[r] = (b.soc_max - b.soc0) * b.e_max / dt;
      ++r;
    }
  }
  return p;
}

DispatchSolution solve_vpp_dispatch(const VppConfig& v,
                                    const PriceSchedule& prices,
                                    const ContractPrices& contract, int T,
                                    double dt, const SolverConfig& cfg) {
  QuadraticProgram p = build_vpp_qp(v, prices, contract, T, dt);
  QpSolution qs = solve_qp(p, cfg);
  if (qs.status != QpStatus::Optimal) {
    // Binding hour: largest per-hour deficit of servable power.
    int hour = 1;
    double worst = -qp_infinity();
    for (int t = 0; t < T; ++t) {
      double supply = v.trade_cap_buy / dt;
      for (const MicroTurbine& mt : v.turbines) supply += mt.p_max;
      for (const Battery& b : v.batteries) supply += b.p_max;
      for (const WindUnit& w : v.winds) supply += w.availability[t];
      const double deficit = v.demand[t] - supply;
      if (deficit > worst) {
        worst = deficit;
        hour = t + 1;
      }
    }
    throw InfeasibleDispatch(v.id, hour);
  }

  const VppQpLayout l = vpp_qp_layout(v, T);
  Eigen::VectorXd& x = qs.x;
  for (int i = 0; i < p.n; ++i) {
    if (std::isfinite(p.lb[i]) && std::abs(x[i] - p.lb[i]) <= kSnapTol)
      x[i] = p.lb[i];
    else if (std::isfinite(p.ub[i]) && std::abs(x[i] - p.ub[i]) <= kSnapTol)
      x[i] = p.ub[i];
  }

  DispatchSolution d;
  d.vpp_id = v.id;
  d.T = T;
  d.p_buy.resize(T);
  d.p_sell.resize(T);
  d.p_mt.assign(l.n_mt, Series(T, 0.0));
  d.p_bs.assign(l.n_bs, Series(T, 0.0));
  d.p_wt.assign(l.n_wt, Series(T, 0.0));
  d.soc.assign(l.n_bs, Series(T, 0.0));
  for (int t = 0; t < T; ++t) {
    d.p_buy[t] = x[l.buy(t)];
    d.p_sell[t] = x[l.sell(t)];
    for (int i = 0; i < l.n_mt; ++i) d.p_mt[i][t] = x[l.mt(t, i)];
    for (int i = 0; i < l.n_bs; ++i) d.p_bs[i][t] = x[l.bs(t, i)];
    for (int i = 0; i < l.n_wt; ++i) d.p_wt[i][t] = x[l.wt(t, i)];
  }

  // Wash-trade tie-break: at ep>=es simultaneous buy/sell never lowers
  // the cost; shift the overlap out of both sides. At ep<es the overlap
  // is genuine arbitrage the follower keeps.
  for (int t = 0; t < T; ++t) {
    if (prices.ep[t] < prices.es[t]) continue;
    const double w = std::min(d.p_buy[t], d.p_sell[t]);
    if (w > 0.0) {
      d.p_buy[t] -= w;
      d.p_sell[t] -= w;
    }
  }
  // Wind tie-break at es=0: prefer maximal wind output, selling the
  // surplus at the (zero) price, as far as the caps allow.
  for (int t = 0; t < T; ++t) {
    if (prices.es[t] != 0.0) continue;
    for (int i = 0; i < l.n_wt; ++i) {
      const double headroom =
          std::min(v.winds[i].availability[t] - d.p_wt[i][t],
                   (v.trade_cap_sell - d.p_sell[t]) / dt);
      if (headroom > 0.0) {
        d.p_wt[i][t] += headroom;
        d.p_sell[t] += headroom * dt;
      }
    }
  }

  for (int i = 0; i < l.n_bs; ++i) {
    const Battery& b = v.batteries[i];
    double soc = b.soc0;
    for (int t = 0; t < T; ++t) {
      soc -= dt / b.e_max * d.p_bs[i][t];
      d.soc[i][t] = soc;
    }
  }

  // Cost is recomputed from the series, not taken from the QP value, so
  // the regularization never leaks into the accounting.
  double trade = 0.0, prod = 0.0;
  for (int t = 0; t < T; ++t) {
    trade += prices.ep[t] * d.p_buy[t] - prices.es[t] * d.p_sell[t];
    for (int i = 0; i < l.n_mt; ++i) {
      const MicroTurbine& mt = v.turbines[i];
      const double e = d.p_mt[i][t] * dt;
      prod += mt.a * e * e + mt.b * e + mt.c;
    }
    for (int i = 0; i < l.n_bs; ++i) {
      const double e = d.p_bs[i][t] * dt;
      prod += v.batteries[i].e * e * e;
    }
  }
  d.production_cost = prod;
  d.cost = trade + prod;

  // Keep the certificate aligned with the reported (tie-broken) series.
  for (int t = 0; t < T; ++t) {
    qs.x[l.buy(t)] = d.p_buy[t];
    qs.x[l.sell(t)] = d.p_sell[t];
    for (int i = 0; i < l.n_wt; ++i) qs.x[l.wt(t, i)] = d.p_wt[i][t];
  }
  d.certificate = std::move(qs);
  return d;
}

std::vector<DispatchSolution> mode1_dispatch(const Scenario& s) {
  PriceSchedule contract_prices{s.contract.ces, s.contract.cep};
  std::vector<DispatchSolution> out;
  out.reserve(s.vpps.size());
  for (const VppConfig& v : s.vpps)
    out.push_back(solve_vpp_dispatch(v, contract_prices, s.contract, s.horizon,
                                     s.dt, s.solver));
  return out;
}

Eigen::VectorXd dispatch_to_x(const VppConfig& v, const DispatchSolution& d) {
  const VppQpLayout l = vpp_qp_layout(v, d.T);
  Eigen::VectorXd x(l.n());
  for (int t = 0; t < d.T; ++t) {
    x[l.buy(t)] = d.p_buy[t];
    x[l.sell(t)] = d.p_sell[t];
    for (int i = 0; i < l.n_mt; ++i) x[l.mt(t, i)] = d.p_mt[i][t];
    for (int i = 0; i < l.n_bs; ++i) x[l.bs(t, i)] = d.p_bs[i][t];
    for (int i = 0; i < l.n_wt; ++i) x[l.wt(t, i)] = d.p_wt[i][t];
  }
  return x;
}

}  // namespace vppm
