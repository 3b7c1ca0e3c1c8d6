// Acceptance gate: one PASS/FAIL line per criterion.
// Usage: acceptance <bundled scenario.json> <vppmkt binary>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "vppm/bilevel.hpp"
#include "vppm/oracle.hpp"
#include "vppm/report.hpp"
#include "vppm/settlement.hpp"

using namespace vppm;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

struct CorpusRun {
  std::string name;
  Scenario s;
  std::vector<DispatchSolution> m1;
  EquilibriumResult eq;
  ModeComparison mc;
  MpecReport mpec;
  double seconds = 0.0;
};

CorpusRun run_scenario(std::string name, Scenario s) {
  CorpusRun r;
  r.name = std::move(name);
  r.s = std::move(s);
  const auto t0 = std::chrono::steady_clock::now();
  r.m1 = mode1_dispatch(r.s);
  r.eq = solve_stackelberg(r.s);
  r.seconds = std::chrono::duration<double>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  r.mc = mode_comparison(r.m1, r.eq, r.s);
  r.mpec = complementarity_report(r.eq, r.s);
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <scenario.json> <vppmkt>\n");
    return 2;
  }
  const std::string scenario_path = argv[1];
  const std::string cli_path = argv[2];

  // Corpus: the bundled scenario plus 20 seeded random ones (T=24, J=3),
  // each solved once and reused by criteria 1-4.
  std::vector<CorpusRun> corpus;
  corpus.push_back(run_scenario("bundled", load_scenario(scenario_path)));
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    corpus.push_back(run_scenario("seed" + std::to_string(seed),
                                  testutil::random_scenario(seed, 24, 3)));

  {  // 1. follower rationality + runtime
    bool pass = true;
    std::string detail;
    double worst_time = 0.0;
    for (const CorpusRun& r : corpus) {
      worst_time = std::max(worst_time, r.seconds);
      if (r.seconds > 60.0) {
        pass = false;
        detail = r.name + " took " + std::to_string(r.seconds) + " s";
      }
      for (size_t j = 0; j < r.m1.size(); ++j)
        if (r.eq.dispatches[j].cost > r.m1[j].cost + 1e-6) {
          pass = false;
          detail = r.name + "/" + r.m1[j].vpp_id + " cost rose";
        }
    }
    if (pass) {
      std::ostringstream os;
      os << "all VPP costs decrease on " << corpus.size()
         << " scenarios; slowest " << worst_time << " s";
      detail = os.str();
    }
    report(1, pass, detail);
  }

  {  // 2. DSO non-loss and the bundled sign pattern
    bool pass = true;
    std::string detail;
    for (const CorpusRun& r : corpus)
      if (r.eq.leader_objective < -1e-9) {
        pass = false;
        detail = r.name + " profit " + std::to_string(r.eq.leader_objective);
      }
    const CorpusRun& b = corpus.front();
    if (!(b.eq.leader_objective > 0.0)) {
      pass = false;
      detail = "bundled profit not positive";
    }
    if (!(b.mc.inflow_mode2 < b.mc.inflow_mode1)) {
      pass = false;
      detail = "bundled wholesale inflow did not shrink";
    }
    if (pass) {
      std::ostringstream os;
      os << "profit >= 0 everywhere; bundled profit "
         << b.eq.leader_objective << ", inflow " << b.mc.inflow_mode1
         << " -> " << b.mc.inflow_mode2;
      detail = os.str();
    }
    report(2, pass, detail);
  }

  {  // 3. exact accounting identity
    bool pass = true;
    double worst = 0.0;
    std::string detail;
    for (const CorpusRun& r : corpus) {
      worst = std::max(worst, std::abs(r.mc.identity_residual));
      if (std::abs(r.mc.identity_residual) > 1e-6) {
        pass = false;
        detail = r.name + " residual " +
                 std::to_string(r.mc.identity_residual);
      }
    }
    if (pass) {
      std::ostringstream os;
      os << "max |residual| " << worst;
      detail = os.str();
    }
    report(3, pass, detail);
  }

  {  // 4. follower KKT certification
    bool pass = true;
    double worst = 0.0;
    std::string detail;
    for (const CorpusRun& r : corpus) {
      for (const KktResiduals& c : r.eq.follower_certificates) {
        worst = std::max({worst, c.stationarity_inf, c.primal_inf,
                          c.dual_inf, c.comp_inf});
        if (!c.within(1e-6, 1e-6)) pass = false;
      }
      if (!r.mpec.feasible(1e-6, 1e-6)) {
        pass = false;
        detail = r.name + " MPEC report infeasible";
      }
    }
    if (pass) {
      std::ostringstream os;
      os << "max KKT residual " << worst;
      detail = os.str();
    }
    report(4, pass, detail);
  }

  {  // 5. big-M / sign-split equivalence on 1000 bounded vectors
    std::mt19937_64 rng(8675309);
    std::uniform_real_distribution<double> uni(-30.0, 30.0);
    int mismatches = 0;
    for (int rep = 0; rep < 1000; ++rep) {
      Series p(4);
      for (double& x : p) x = uni(rng);
      const SignSplit split = sign_split(p);
      if (!big_m_check(p, split.buy, split.sell, split.z, split.z, 30.0)
               .feasible)
        ++mismatches;
      for (size_t t = 0; t < p.size(); ++t) {
        std::vector<int> zf = split.z;
        zf[t] = 1 - zf[t];
        const bool ok =
            big_m_check(p, split.buy, split.sell, zf, zf, 30.0).feasible;
        if (ok != (p[t] == 0.0)) ++mismatches;
      }
    }
    report(5, mismatches == 0,
           mismatches == 0 ? "0 mismatches on 1000 vectors"
                           : std::to_string(mismatches) + " mismatches");
  }

  {  // 6. dispatch oracle equivalence on 50 single-hour instances
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(60606);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    bool pass = true;
    double worst = 0.0;
    const ContractPrices box{{10.0}, {0.0}};
    for (int rep = 0; rep < 50; ++rep) {
      VppConfig v;
      v.id = "inst" + std::to_string(rep);
      v.trade_cap_buy = 10.0;
      v.trade_cap_sell = 10.0;
      MicroTurbine mt;
      mt.a = 0.05 + 0.15 * uni(rng);
      mt.b = 0.4 + 0.6 * uni(rng);
      mt.c = 0.5 + uni(rng);
      mt.p_max = 2.0 + 2.0 * uni(rng);
      mt.ramp_up = 3.0;
      mt.ramp_down = -3.0;
      v.turbines.push_back(mt);
      v.winds.push_back({{2.0 * uni(rng)}});
      v.demand = {6.0 * uni(rng)};
      PriceSchedule prices;
      prices.es = {0.8 * uni(rng)};
      prices.ep = {prices.es[0] + 0.6 * uni(rng)};
      const DispatchSolution d =
          solve_vpp_dispatch(v, prices, box, 1, 1.0, SolverConfig{});
      const DispatchOracleResult o =
          brute_force_dispatch(v, prices, box, 1, 1.0, {21, 0.01});
      const double delta = std::abs(d.cost - o.cost);
      const double bound = o.slope * 0.01 + 1e-6;
      worst = std::max(worst, delta - bound);
      if (!o.feasible || delta > bound) pass = false;
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    if (secs > 300.0) pass = false;
    std::ostringstream os;
    os << "50 instances in " << secs << " s, worst delta-bound margin "
       << worst;
    report(6, pass, os.str());
  }

  {  // 7. bilevel oracle equivalence
    bool pass = true;
    std::string detail;
    const Scenario micro = testutil::forced_buyer_seller();
    const EquilibriumResult mr = solve_stackelberg(micro);
    if (std::abs(mr.leader_objective - 0.9) > 1e-6 ||
        std::abs(mr.prices.ep[0] - 1.2) > 1e-6 ||
        std::abs(mr.prices.es[0] - 0.3) > 1e-6) {
      pass = false;
      detail = "micro-case missed the 0.9 corner optimum";
    }
    for (std::uint64_t seed = 1; seed <= 5 && pass; ++seed) {
      const int T = 1 + static_cast<int>(seed % 2);
      Scenario s = testutil::random_scenario(seed + 100, T, 2);
      s.solver.eval_budget = 2000;
      const int points = T == 1 ? 21 : 9;
      const EquilibriumOracleResult oracle =
          brute_force_equilibrium(s, {points, 0.01});
      const EquilibriumResult eq = solve_stackelberg(s);
      double caps = 0.0;
      for (const VppConfig& v : s.vpps)
        caps += v.trade_cap_buy + v.trade_cap_sell;
      double spacing = 0.0;
      for (int t = 0; t < T; ++t)
        spacing = std::max(spacing, (s.contract.cep[t] - s.contract.ces[t]) /
                                        (points - 1));
      const double bound = caps * spacing * 2 * T;
      if (eq.leader_objective < oracle.profit - bound) {
        pass = false;
        detail = "seed " + std::to_string(seed) + " short of oracle by " +
                 std::to_string(oracle.profit - eq.leader_objective);
      }
    }
    if (pass)
      detail = "micro-case exact at (1.2, 0.3); 5 lattice checks within bound";
    report(7, pass, detail);
  }

  {  // 8. degenerate-price reduction to Mode 1
    bool pass = true;
    std::string detail;
    for (size_t k = 0; k < 4; ++k) {
      const CorpusRun& r = corpus[k];
      const PriceSchedule contract{r.s.contract.ces, r.s.contract.cep};
      const LeaderEvaluation ev = evaluate_leader(contract, r.s);
      for (size_t j = 0; j < r.m1.size(); ++j)
        if (std::abs(ev.dispatches[j].cost - r.m1[j].cost) > 1e-9) {
          pass = false;
          detail = r.name + "/" + r.m1[j].vpp_id + " cost mismatch";
        }
      double spread_profit = 0.0;
      for (int t = 0; t < r.s.horizon; ++t) {
        double b = 0.0, sl = 0.0;
        for (const DispatchSolution& d : ev.dispatches) {
          b += d.p_buy[t];
          sl += d.p_sell[t];
        }
        spread_profit += (r.s.contract.cep[t] - r.s.contract.ces[t]) *
                         std::min(b, sl);
      }
      if (std::abs(ev.profit - spread_profit) > 1e-9) {
        pass = false;
        detail = r.name + " profit != spread * matched volume";
      }
    }
    if (pass) detail = "contract prices reproduce Mode 1 on 4 scenarios";
    report(8, pass, detail);
  }

  {  // 9. CLI determinism: byte-identical outputs for the same seed
    const fs::path base = fs::temp_directory_path() / "acceptance_cli";
    fs::remove_all(base);
    const fs::path out1 = base / "run1", out2 = base / "run2";
    bool pass = true;
    std::string detail;
    for (const fs::path& out : {out1, out2}) {
      const std::string cmd = "\"" + cli_path + "\" simulate --scenario \"" +
                              scenario_path + "\" --mode both --out \"" +
                              out.string() + "\" --budget 1000 >/dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        pass = false;
        detail = "CLI run failed";
      }
    }
    int compared = 0;
    if (pass) {
      for (const auto& entry : fs::directory_iterator(out1)) {
        const fs::path twin = out2 / entry.path().filename();
        if (!fs::exists(twin) ||
            read_file(entry.path()) != read_file(twin)) {
          pass = false;
          detail = entry.path().filename().string() + " differs";
        }
        ++compared;
      }
      if (compared < 9) {
        pass = false;
        detail = "expected 9 output files, saw " + std::to_string(compared);
      }
    }
    if (pass)
      detail = "two runs produced " + std::to_string(compared) +
               " byte-identical files";
    report(9, pass, detail);
    fs::remove_all(base);
  }

  return g_failures == 0 ? 0 : 1;
}
