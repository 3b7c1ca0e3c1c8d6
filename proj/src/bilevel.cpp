#include "vppm/bilevel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vppm/errors.hpp"

namespace vppm {

namespace {

double l1_distance_to_contract(const PriceSchedule& p,
                               const ContractPrices& c) {
  double d = 0.0;
  for (size_t t = 0; t < p.ep.size(); ++t) {
    d += std::abs(p.ep[t] - c.cep[t]);
    d += std::abs(p.es[t] - c.ces[t]);
  }
  return d;
}

bool in_price_box(const PriceSchedule& p, const ContractPrices& c) {
  for (size_t t = 0; t < p.ep.size(); ++t) {
    if (p.ep[t] < c.ces[t] || p.ep[t] > c.cep[t]) return false;
    if (p.es[t] < c.ces[t] || p.es[t] > c.cep[t]) return false;
  }
  return true;
}

struct RestartOutcome {
  PriceSchedule prices;
  LeaderEvaluation eval;
  double dist = 0.0;
  long evals = 0;
  bool converged = false;
  bool evaluated = false;
};

// Greedy coordinate pattern search from one start point; steps are
// scaled per hour by the box width and halve together.
RestartOutcome pattern_search(const Scenario& s, PriceSchedule start,
                              long budget) {
  const int T = s.horizon;
  const ContractPrices& c = s.contract;
  RestartOutcome out;
  if (budget <= 0) return out;

  PriceSchedule cur = project_prices(start, c);
  out.eval = evaluate_leader(cur, s);
  out.prices = cur;
  out.dist = l1_distance_to_contract(cur, c);
  out.evals = 1;
  out.evaluated = true;

  Series range(T);
  for (int t = 0; t < T; ++t) range[t] = c.cep[t] - c.ces[t];

  double scale = 0.25;  // step = scale * (cep - ces)
  const double min_scale = 1e-4;
  while (scale >= min_scale && out.evals < budget) {
    bool improved = false;
    for (int coord = 0; coord < 2 * T && out.evals < budget; ++coord) {
      const int t = coord % T;
      const bool is_ep = coord < T;
      if (range[t] <= 0.0) continue;
      for (double sign : {+1.0, -1.0}) {
        if (out.evals >= budget) break;
        PriceSchedule cand = out.prices;
        double& p = is_ep ? cand.ep[t] : cand.es[t];
        p += sign * scale * range[t];
        p = std::clamp(p, c.ces[t], c.cep[t]);
        const double before = is_ep ? out.prices.ep[t] : out.prices.es[t];
        if (p == before) continue;  // projection made the move a no-op
        LeaderEvaluation ev = evaluate_leader(cand, s);
        ++out.evals;
        const double dist = l1_distance_to_contract(cand, c);
        const double tol = 1e-12 * std::max(1.0, std::abs(out.eval.profit));
        if (ev.profit > out.eval.profit + tol ||
            (std::abs(ev.profit - out.eval.profit) <= tol &&
             dist < out.dist)) {
          const bool strictly = ev.profit > out.eval.profit + tol;
          out.prices = cand;
          out.eval = std::move(ev);
          out.dist = dist;
          if (strictly) improved = true;
        }
      }
    }
    if (!improved) scale *= 0.5;
  }
  out.converged = scale < min_scale;
  return out;
}

}  // namespace

PriceSchedule project_prices(const PriceSchedule& raw,
                             const ContractPrices& contract) {
  PriceSchedule out = raw;
  for (size_t t = 0; t < out.ep.size(); ++t) {
    out.ep[t] = std::clamp(out.ep[t], contract.ces[t], contract.cep[t]);
    out.es[t] = std::clamp(out.es[t], contract.ces[t], contract.cep[t]);
  }
  return out;
}

LeaderEvaluation evaluate_leader(const PriceSchedule& prices,
                                 const Scenario& s) {
  if (!in_price_box(prices, s.contract))
    throw ModelError("prices outside the contract price box");
  LeaderEvaluation ev;
  ev.dispatches.reserve(s.vpps.size());
  for (const VppConfig& v : s.vpps)
    ev.dispatches.push_back(solve_vpp_dispatch(v, prices, s.contract,
                                               s.horizon, s.dt, s.solver));
  ev.settlement = dso_profit(prices, ev.dispatches, s.contract);
  ev.profit = ev.settlement.dso_profit;
  return ev;
}

EquilibriumResult solve_stackelberg(const Scenario& s) {
  const int T = s.horizon;
  const ContractPrices& c = s.contract;
  const int restarts = std::max(1, s.solver.restarts);
  const long budget = std::max<long>(1, s.solver.eval_budget);

  // Start set: contract point first (always evaluated), both box
  // corners, then seeded random points in the box.
  std::vector<PriceSchedule> starts;
  starts.push_back({c.ces, c.cep});  // es = ces, ep = cep
  if (restarts > 1) starts.push_back({c.cep, c.cep});
  if (restarts > 2) starts.push_back({c.ces, c.ces});
  std::mt19937_64 rng(s.solver.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  while (static_cast<int>(starts.size()) < restarts) {
    PriceSchedule p;
    p.es.resize(T);
    p.ep.resize(T);
    for (int t = 0; t < T; ++t)
      p.es[t] = c.ces[t] + uni(rng) * (c.cep[t] - c.ces[t]);
    for (int t = 0; t < T; ++t)
      p.ep[t] = c.ces[t] + uni(rng) * (c.cep[t] - c.ces[t]);
    starts.push_back(std::move(p));
  }

  const long per_restart = budget / restarts;
  const long remainder = budget % restarts;

  std::vector<RestartOutcome> outcomes(starts.size());
  for (size_t i = 0; i < starts.size(); ++i) {
    const long b = per_restart + (i == 0 ? remainder : 0);
    outcomes[i] = pattern_search(s, starts[i], b);
  }

  // Merge: best objective, ties toward the contract point, then the
  // lower restart index.
  int best = -1;
  long used = 0;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    used += outcomes[i].evals;
    if (!outcomes[i].evaluated) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const RestartOutcome& a = outcomes[i];
    const RestartOutcome& bst = outcomes[best];
    const double tol = 1e-12 * std::max(1.0, std::abs(bst.eval.profit));
    if (a.eval.profit > bst.eval.profit + tol ||
        (std::abs(a.eval.profit - bst.eval.profit) <= tol &&
         a.dist < bst.dist)) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw ModelError("no leader evaluation fit in the budget");

  EquilibriumResult r;
  RestartOutcome& w = outcomes[best];
  r.prices = std::move(w.prices);
  r.dispatches = std::move(w.eval.dispatches);
  r.settlement = std::move(w.eval.settlement);
  r.leader_objective = w.eval.profit;
  r.evaluations_used = used;
  r.restarts_best = best;
  r.converged = w.converged;
  r.follower_certificates.reserve(r.dispatches.size());
  for (size_t j = 0; j < r.dispatches.size(); ++j) {
    const QuadraticProgram p =
        build_vpp_qp(s.vpps[j], r.prices, s.contract, T, s.dt);
    r.follower_certificates.push_back(
        qp_kkt_residuals(p, r.dispatches[j].certificate));
  }
  return r;
}

MpecReport complementarity_report(const EquilibriumResult& result,
                                  const Scenario& s) {
  MpecReport rep;
  for (size_t j = 0; j < result.dispatches.size(); ++j) {
    const DispatchSolution& d = result.dispatches[j];
    QuadraticProgram p =
        build_vpp_qp(s.vpps[j], result.prices, s.contract, s.horizon, s.dt);
    QpSolution probe = d.certificate;
    probe.x = dispatch_to_x(s.vpps[j], d);  // re-check the stored series
    const KktResiduals kr = qp_kkt_residuals(p, probe);
    rep.stationarity_inf = std::max(rep.stationarity_inf, kr.stationarity_inf);
    rep.primal_inf = std::max(rep.primal_inf, kr.primal_inf);
    rep.dual_inf = std::max(rep.dual_inf, kr.dual_inf);
    rep.comp_inf = std::max(rep.comp_inf, kr.comp_inf);
  }

  const Series net = net_position(result.dispatches);
  for (size_t t = 0; t < net.size(); ++t)
    rep.net_position_residual = std::max(
        rep.net_position_residual, std::abs(net[t] - result.settlement.p_dso[t]));

  const BigMReport bm = big_m_check(
      result.settlement.p_dso, result.settlement.p_dso_buy,
      result.settlement.p_dso_sell, result.settlement.z1,
      result.settlement.z2, s.big_m);
  rep.big_m_feasible = bm.feasible;
  rep.big_m_violations = static_cast<int>(bm.violations.size());

  for (size_t t = 0; t < result.prices.ep.size(); ++t) {
    rep.price_box_violation = std::max(
        {rep.price_box_violation, s.contract.ces[t] - result.prices.ep[t],
         result.prices.ep[t] - s.contract.cep[t],
         s.contract.ces[t] - result.prices.es[t],
         result.prices.es[t] - s.contract.cep[t]});
  }
  rep.price_box_violation = std::max(rep.price_box_violation, 0.0);
  return rep;
}

}  // namespace vppm
