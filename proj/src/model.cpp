#include "vppm/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vppm/errors.hpp"

namespace vppm {

using nlohmann::json;

namespace {

std::string idx(const std::string& base, size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void require_finite_series(const Series& s, const std::string& field,
                           std::vector<Violation>& out) {
  for (size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i]))
      out.push_back({idx(field, i), "must be a finite number", false});
  }
}

void check_length(const Series& s, int T, const std::string& field,
                  std::vector<Violation>& out) {
  if (static_cast<int>(s.size()) != T)
    out.push_back({field, "length mismatch: expected " + std::to_string(T) +
                              ", got " + std::to_string(s.size()),
                   false});
}

Series get_series(const json& j, const std::string& key,
                  const std::string& path) {
  if (!j.contains(key)) throw ParseError("missing key " + path + "." + key);
  const json& a = j.at(key);
  if (!a.is_array()) throw ParseError(path + "." + key + " must be an array");
  Series out;
  out.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number())
      throw ParseError(idx(path + "." + key, i) + " must be a number");
    out.push_back(a[i].get<double>());
  }
  return out;
}

double get_num(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ParseError("missing key " + path + "." + key);
  if (!j.at(key).is_number())
    throw ParseError(path + "." + key + " must be a number");
  return j.at(key).get<double>();
}

double get_num_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<double>();
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("scenario root must be a JSON object");
  Scenario s;
  s.horizon = static_cast<int>(get_num(j, "horizon", "scenario"));
  s.dt = get_num(j, "dt", "scenario");
  s.big_m = get_num(j, "big_m", "scenario");

  bool soc_percent = false;
  if (j.contains("soc_unit")) {
    const std::string unit = j.at("soc_unit").get<std::string>();
    if (unit == "percent")
      soc_percent = true;
    else if (unit != "fraction")
      throw ParseError("scenario.soc_unit must be \"percent\" or \"fraction\"");
  }

  if (!j.contains("contract")) throw ParseError("missing key scenario.contract");
  s.contract.cep = get_series(j.at("contract"), "cep", "contract");
  s.contract.ces = get_series(j.at("contract"), "ces", "contract");

  if (j.contains("solver")) {
    const json& sj = j.at("solver");
    s.solver.feas_tol = get_num_or(sj, "feas_tol", s.solver.feas_tol);
    s.solver.comp_tol = get_num_or(sj, "comp_tol", s.solver.comp_tol);
    s.solver.eval_budget =
        static_cast<int>(get_num_or(sj, "eval_budget", s.solver.eval_budget));
    s.solver.seed = static_cast<std::uint64_t>(get_num_or(sj, "seed", 0.0));
    s.solver.restarts =
        static_cast<int>(get_num_or(sj, "restarts", s.solver.restarts));
  }

  if (!j.contains("vpps") || !j.at("vpps").is_array())
    throw ParseError("scenario.vpps must be an array");
  size_t vi = 0;
  for (const json& vj : j.at("vpps")) {
    const std::string vpath = idx("vpps", vi);
    VppConfig v;
    v.id = vj.contains("id") ? vj.at("id").get<std::string>()
                             : "vpp" + std::to_string(vi + 1);
    v.trade_cap_buy = get_num(vj, "trade_cap_buy", vpath);
    v.trade_cap_sell = get_num(vj, "trade_cap_sell", vpath);
    v.demand = get_series(vj, "demand", vpath);
    if (vj.contains("turbines")) {
      size_t ti = 0;
      for (const json& tj : vj.at("turbines")) {
        const std::string tpath = idx(vpath + ".turbines", ti++);
        MicroTurbine mt;
        mt.a = get_num(tj, "a", tpath);
        mt.b = get_num(tj, "b", tpath);
        mt.c = get_num(tj, "c", tpath);
        mt.p_max = get_num(tj, "p_max", tpath);
        mt.ramp_up = get_num(tj, "ramp_up", tpath);
        mt.ramp_down = get_num(tj, "ramp_down", tpath);
        v.turbines.push_back(mt);
      }
    }
    if (vj.contains("batteries")) {
      size_t bi = 0;
      for (const json& bj : vj.at("batteries")) {
        const std::string bpath = idx(vpath + ".batteries", bi++);
        Battery b;
        b.e = get_num(bj, "e", bpath);
        b.p_max = get_num(bj, "p_max", bpath);
        b.e_max = get_num(bj, "e_max", bpath);
        b.soc0 = get_num(bj, "soc0", bpath);
        b.soc_min = get_num(bj, "soc_min", bpath);
        b.soc_max = get_num(bj, "soc_max", bpath);
        if (soc_percent) {
          b.soc0 /= 100.0;
          b.soc_min /= 100.0;
          b.soc_max /= 100.0;
        }
        v.batteries.push_back(b);
      }
    }
    if (vj.contains("winds")) {
      size_t wi = 0;
      for (const json& wj : vj.at("winds")) {
        const std::string wpath = idx(vpath + ".winds", wi++);
        WindUnit w;
        w.availability = get_series(wj, "availability", wpath);
        v.winds.push_back(w);
      }
    }
    s.vpps.push_back(std::move(v));
    ++vi;
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scenario JSON: ") + e.what());
  }
  Scenario s = scenario_from_json(j);
  for (const Violation& v : validate_scenario(s)) {
    if (!v.advisory) throw ValidationError(v.field, v.rule);
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["horizon"] = s.horizon;
  j["dt"] = s.dt;
  j["big_m"] = s.big_m;
  j["contract"] = {{"cep", s.contract.cep}, {"ces", s.contract.ces}};
  j["solver"] = {{"feas_tol", s.solver.feas_tol},
                 {"comp_tol", s.solver.comp_tol},
                 {"eval_budget", s.solver.eval_budget},
                 {"seed", s.solver.seed},
                 {"restarts", s.solver.restarts}};
  j["vpps"] = json::array();
  for (const VppConfig& v : s.vpps) {
    json vj;
    vj["id"] = v.id;
    vj["trade_cap_buy"] = v.trade_cap_buy;
    vj["trade_cap_sell"] = v.trade_cap_sell;
    vj["demand"] = v.demand;
    vj["turbines"] = json::array();
    for (const MicroTurbine& mt : v.turbines)
      vj["turbines"].push_back({{"a", mt.a},
                                {"b", mt.b},
                                {"c", mt.c},
                                {"p_max", mt.p_max},
                                {"ramp_up", mt.ramp_up},
                                {"ramp_down", mt.ramp_down}});
    vj["batteries"] = json::array();
    for (const Battery& b : v.batteries)
      vj["batteries"].push_back({{"e", b.e},
                                 {"p_max", b.p_max},
                                 {"e_max", b.e_max},
                                 {"soc0", b.soc0},
                                 {"soc_min", b.soc_min},
                                 {"soc_max", b.soc_max}});
    vj["winds"] = json::array();
    for (const WindUnit& w : v.winds)
      vj["winds"].push_back({{"availability", w.availability}});
    j["vpps"].push_back(std::move(vj));
  }
  return j;
}

void write_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write scenario file: " + path);
  out << scenario_to_json(s).dump(2) << "\n";
}

std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> out;
  const int T = s.horizon;
  if (T < 1) out.push_back({"horizon", "must be >= 1", false});
  if (!(s.dt > 0.0)) out.push_back({"dt", "must be > 0", false});
  if (!(s.big_m > 0.0)) out.push_back({"big_m", "must be > 0", false});

  check_length(s.contract.cep, T, "contract.cep", out);
  check_length(s.contract.ces, T, "contract.ces", out);
  require_finite_series(s.contract.cep, "contract.cep", out);
  require_finite_series(s.contract.ces, "contract.ces", out);
  if (s.contract.cep.size() == s.contract.ces.size()) {
    for (size_t t = 0; t < s.contract.cep.size(); ++t) {
      if (s.contract.ces[t] < 0.0)
        out.push_back({idx("contract.ces", t), "must be >= 0", false});
      if (s.contract.cep[t] < s.contract.ces[t])
        out.push_back({idx("contract.cep", t), "must be >= ces", false});
    }
  }

  if (!(s.solver.feas_tol > 0.0))
    out.push_back({"solver.feas_tol", "must be > 0", false});
  if (!(s.solver.comp_tol > 0.0))
    out.push_back({"solver.comp_tol", "must be > 0", false});
  if (s.solver.eval_budget < 1)
    out.push_back({"solver.eval_budget", "must be >= 1", false});
  if (s.solver.restarts < 1)
    out.push_back({"solver.restarts", "must be >= 1", false});

  double max_cap = 0.0;
  for (size_t j = 0; j < s.vpps.size(); ++j) {
    const VppConfig& v = s.vpps[j];
    const std::string vp = idx("vpps", j);
    max_cap = std::max({max_cap, v.trade_cap_buy, v.trade_cap_sell});
    if (v.trade_cap_buy < 0.0)
      out.push_back({vp + ".trade_cap_buy", "must be >= 0", false});
    if (v.trade_cap_sell < 0.0)
      out.push_back({vp + ".trade_cap_sell", "must be >= 0", false});
    check_length(v.demand, T, vp + ".demand", out);
    require_finite_series(v.demand, vp + ".demand", out);
    for (size_t t = 0; t < v.demand.size(); ++t)
      if (v.demand[t] < 0.0)
        out.push_back({idx(vp + ".demand", t), "must be >= 0", false});
    for (size_t i = 0; i < v.turbines.size(); ++i) {
      const MicroTurbine& mt = v.turbines[i];
      const std::string tp = idx(vp + ".turbines", i);
      if (!(mt.a > 0.0)) out.push_back({tp + ".a", "must be > 0", false});
      if (!(mt.p_max > 0.0)) out.push_back({tp + ".p_max", "must be > 0", false});
      if (mt.ramp_up < 0.0) out.push_back({tp + ".ramp_up", "must be >= 0", false});
      if (mt.ramp_down > 0.0)
        out.push_back({tp + ".ramp_down", "must be <= 0", false});
    }
    for (size_t i = 0; i < v.batteries.size(); ++i) {
      const Battery& b = v.batteries[i];
      const std::string bp = idx(vp + ".batteries", i);
      if (!(b.e > 0.0)) out.push_back({bp + ".e", "must be > 0", false});
      if (!(b.p_max > 0.0)) out.push_back({bp + ".p_max", "must be > 0", false});
      if (!(b.e_max > 0.0)) out.push_back({bp + ".e_max", "must be > 0", false});
      if (b.soc_min < 0.0) out.push_back({bp + ".soc_min", "must be >= 0", false});
      if (!(b.soc_min < b.soc_max))
        out.push_back({bp + ".soc_min", "must be < soc_max", false});
      if (b.soc_max > 1.0) out.push_back({bp + ".soc_max", "must be <= 1", false});
      if (b.soc0 < b.soc_min || b.soc0 > b.soc_max)
        out.push_back({bp + ".soc0", "must lie in [soc_min, soc_max]", false});
    }
    for (size_t i = 0; i < v.winds.size(); ++i) {
      const WindUnit& w = v.winds[i];
      const std::string wp = idx(vp + ".winds", i);
      check_length(w.availability, T, wp + ".availability", out);
      require_finite_series(w.availability, wp + ".availability", out);
      for (size_t t = 0; t < w.availability.size(); ++t)
        if (w.availability[t] < 0.0)
          out.push_back({idx(wp + ".availability", t), "must be >= 0", false});
    }
  }

  const double safe_m = static_cast<double>(s.vpps.size()) * max_cap;
  if (s.big_m < safe_m) {
    std::ostringstream msg;
    msg << "big_m below safe bound J*max(trade caps) = " << safe_m;
    out.push_back({"big_m", msg.str(), true});
  }
  return out;
}

std::uint64_t scenario_fingerprint(const Scenario& s) {
  const std::string text = scenario_to_json(s).dump();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace vppm
