// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace smartcomp {

using nlohmann::json;

namespace {

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
  return j.at(key);
}

template <class T>
T as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": wrong type");
  }
}

template <class T>
T field(const json& j, const std::string& key, const std::string& where) {
  return as<T>(need(j, key, where), where + "." + key);
}

template <class T>
T optional(const json& j, const std::string& key, T def, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return def;
  return as<T>(j.at(key), where + "." + key);
}

Vec vecField(const json& j, const std::string& key, const std::string& where) {
  auto v = field<std::vector<double>>(j, key, where);
  return Eigen::Map<Vec>(v.data(), v.size());
}

json toJson(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

PriceCurve parsePrices(const json& j, const std::string& where) {
  PriceCurve p;
  p.alpha = field<std::vector<double>>(j, "alpha", where);
  p.beta = field<std::vector<double>>(j, "beta", where);
  if (p.alpha.size() != p.beta.size()) throw ValidationError(where + ": alpha and beta lengths differ");
  return p;
}

json pricesJson(const PriceCurve& p) { return {{"alpha", p.alpha}, {"beta", p.beta}}; }

UncertaintySet parseSet(const json& j, const std::string& where) {
  auto type = field<std::string>(j, "type", where);
  if (type == "polyhedral") {
    PolyhedralSet s;
    s.lower = vecField(j, "lower", where);
    s.upper = vecField(j, "upper", where);
    if (j.contains("sub_horizons")) {
      int n = 0;
      for (const auto& h : j.at("sub_horizons")) {
        std::string w = where + ".sub_horizons[" + std::to_string(n++) + "]";
        SubHorizon sh;
        sh.slots = field<std::vector<int>>(h, "slots", w);
        if (h.contains("min_sum") && !h.at("min_sum").is_null()) sh.minSum = field<double>(h, "min_sum", w);
        if (h.contains("max_sum") && !h.at("max_sum").is_null()) sh.maxSum = field<double>(h, "max_sum", w);
        s.subHorizons.push_back(sh);
      }
    } else {
      SubHorizon all;
      for (int t = 0; t < s.lower.size(); ++t) all.slots.push_back(t);
      s.subHorizons.push_back(all);
    }
    return s;
  }
  if (type == "ellipsoidal") {
    EllipsoidalSet s;
    s.center = vecField(j, "center", where);
    auto rows = field<std::vector<std::vector<double>>>(j, "shape", where);
    s.shape = Mat(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (rows[a].size() != rows[0].size()) throw ValidationError(where + ".shape: ragged rows");
      for (std::size_t b = 0; b < rows[a].size(); ++b) s.shape(a, b) = rows[a][b];
    }
    return s;
  }
  if (type == "singleton") return SingletonSet{vecField(j, "point", where)};
  throw ValidationError(where + ": unknown set type '" + type + "'");
}

json setJson(const UncertaintySet& set) {
  if (auto* p = std::get_if<PolyhedralSet>(&set)) {
    json hs = json::array();
    for (const auto& h : p->subHorizons) {
      json x{{"slots", h.slots}};
      x["min_sum"] = h.minSum ? json(*h.minSum) : json(nullptr);
      x["max_sum"] = h.maxSum ? json(*h.maxSum) : json(nullptr);
      hs.push_back(x);
    }
    return {{"type", "polyhedral"}, {"lower", toJson(p->lower)}, {"upper", toJson(p->upper)}, {"sub_horizons", hs}};
  }
  if (auto* e = std::get_if<EllipsoidalSet>(&set)) {
    json rows = json::array();
    for (int a = 0; a < e->shape.rows(); ++a) rows.push_back(toJson(e->shape.row(a).transpose()));
    return {{"type", "ellipsoidal"}, {"center", toJson(e->center)}, {"shape", rows}};
  }
  return {{"type", "singleton"}, {"point", toJson(std::get<SingletonSet>(set).point)}};
}

void parseSolver(const json& j, CoordinatorOptions& o) {
  const std::string w = "solver";
  o.step.value = optional<double>(j, "stepsize", o.step.value, w);
  auto rule = optional<std::string>(j, "step_rule", "constant", w);
  if (rule == "constant") o.step.rule = StepRule::Constant;
  else if (rule == "diminishing") o.step.rule = StepRule::Diminishing;
  else throw ValidationError("solver.step_rule: expected constant or diminishing");
  o.maxIter = optional<int>(j, "max_iter", o.maxIter, w);
  o.tolGap = optional<double>(j, "tol_gap", o.tolGap, w);
  o.tolResidual = optional<double>(j, "tol_residual", o.tolResidual, w);
  o.threads = optional<int>(j, "threads", o.threads, w);
  auto mode = optional<std::string>(j, "mode", "robust", w);
  if (mode == "robust") o.mode = BeamformingMode::Robust;
  else if (mode == "nonrobust") o.mode = BeamformingMode::NonRobust;
  else throw ValidationError("solver.mode: expected robust or nonrobust");
  o.costBox = optional<bool>(j, "cost_box", o.costBox, w);
  o.distributed = optional<bool>(j, "distributed", o.distributed, w);
  o.recordMessages = optional<bool>(j, "record_messages", o.recordMessages, w);
  if (j.contains("bundle")) {
    const auto& b = j.at("bundle");
    const std::string wb = "solver.bundle";
    o.bundle.theta = optional<double>(b, "theta", o.bundle.theta, wb);
    o.bundle.rho0 = optional<double>(b, "rho0", o.bundle.rho0, wb);
    o.bundle.rhoMin = optional<double>(b, "rho_min", o.bundle.rhoMin, wb);
    o.bundle.rhoMax = optional<double>(b, "rho_max", o.bundle.rhoMax, wb);
    o.bundle.maxIter = optional<int>(b, "max_iter", o.bundle.maxIter, wb);
    o.bundle.maxCuts = optional<int>(b, "max_cuts", o.bundle.maxCuts, wb);
    o.bundle.etaTol = optional<double>(b, "eta_tol", o.bundle.etaTol, wb);
  }
  if (j.contains("ipm")) {
    const auto& p = j.at("ipm");
    const std::string wp = "solver.ipm";
    o.ipm.maxIter = optional<int>(p, "max_iter", o.ipm.maxIter, wp);
    o.ipm.feastol = optional<double>(p, "feastol", o.ipm.feastol, wp);
    o.ipm.abstol = optional<double>(p, "abstol", o.ipm.abstol, wp);
    o.ipm.reltol = optional<double>(p, "reltol", o.ipm.reltol, wp);
  }
  const auto& b = o.bundle;
  if (!(b.theta > 0 && b.theta < 1)) throw ValidationError("solver.bundle.theta must lie in (0, 1)");
  if (!(b.rhoMin > 0 && b.rhoMin <= b.rho0 && b.rho0 <= b.rhoMax))
    throw ValidationError("solver.bundle: need 0 < rho_min <= rho0 <= rho_max");
  if (b.maxIter < 1 || b.maxCuts < 2) throw ValidationError("solver.bundle: max_iter >= 1 and max_cuts >= 2");
  if (o.ipm.maxIter < 1) throw ValidationError("solver.ipm.max_iter must be at least 1");
  o.validate();
}

json solverJson(const CoordinatorOptions& o) {
  return {{"stepsize", o.step.value},
          {"step_rule", o.step.rule == StepRule::Constant ? "constant" : "diminishing"},
          {"max_iter", o.maxIter},
          {"tol_gap", o.tolGap},
          {"tol_residual", o.tolResidual},
          {"threads", o.threads},
          {"mode", o.mode == BeamformingMode::Robust ? "robust" : "nonrobust"},
          {"cost_box", o.costBox},
          {"distributed", o.distributed},
          {"record_messages", o.recordMessages},
          {"bundle",
           {{"theta", o.bundle.theta},
            {"rho0", o.bundle.rho0},
            {"rho_min", o.bundle.rhoMin},
            {"rho_max", o.bundle.rhoMax},
            {"max_iter", o.bundle.maxIter},
            {"max_cuts", o.bundle.maxCuts},
            {"eta_tol", o.bundle.etaTol}}},
          {"ipm",
           {{"max_iter", o.ipm.maxIter},
            {"feastol", o.ipm.feastol},
            {"abstol", o.ipm.abstol},
            {"reltol", o.ipm.reltol}}}};
}

}  // namespace

RunConfig parseConfig(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  cfg.name = optional<std::string>(j, "name", "", "config");
  cfg.r = optional<double>(j, "r", -1.0, "config");
  cfg.seed = optional<std::uint64_t>(j, "seed", 1, "config");

  ProblemInstance inst;
  const auto& dims = need(j, "dimensions", "config");
  inst.dims.T = field<int>(dims, "T", "dimensions");
  inst.dims.I = field<int>(dims, "I", "dimensions");
  inst.dims.K = field<int>(dims, "K", "dimensions");
  inst.dims.M = field<int>(dims, "M", "dimensions");
  inst.dims.validate();
  inst.prices = parsePrices(need(j, "prices", "config"), "prices");

  const auto& bss = need(j, "base_stations", "config");
  int n = 0;
  for (const auto& b : bss) {
    std::string w = "base_stations[" + std::to_string(n++) + "]";
    BsParams p;
    p.battery.C0 = field<double>(b, "C0", w);
    p.battery.Cmax = field<double>(b, "Cmax", w);
    p.battery.PbMin = field<double>(b, "PbMin", w);
    p.battery.PbMax = field<double>(b, "PbMax", w);
    p.battery.varpi = field<double>(b, "varpi", w);
    p.Pc = field<double>(b, "Pc", w);
    p.PgMax = field<double>(b, "PgMax", w);
    p.xi = optional<double>(b, "xi", 1.0, w);
    p.res = parseSet(need(b, "res", w), w + ".res");
    if (b.contains("prices")) p.prices = parsePrices(b.at("prices"), w + ".prices");
    inst.bs.push_back(p);
  }

  const auto& d = inst.dims;
  const int N = d.beamLength();
  inst.channels.assign(static_cast<std::size_t>(d.K) * d.T, ChannelEstimate{});
  std::vector<char> seen(inst.channels.size(), 0);
  n = 0;
  for (const auto& c : need(j, "channels", "config")) {
    std::string w = "channels[" + std::to_string(n++) + "]";
    int k = field<int>(c, "user", w), t = field<int>(c, "slot", w);
    if (k < 0 || k >= d.K || t < 0 || t >= d.T) throw ValidationError(w + ": user or slot out of range");
    auto h = field<std::vector<double>>(c, "h", w);
    if (static_cast<int>(h.size()) != 2 * N)
      throw ValidationError(w + ".h: expected " + std::to_string(2 * N) + " interleaved real/imag values");
    ChannelEstimate ch;
    ch.hHat = CVec(N);
    for (int a = 0; a < N; ++a) ch.hHat(a) = Complex(h[2 * a], h[2 * a + 1]);
    ch.epsilon = field<double>(c, "epsilon", w);
    ch.sigma2 = field<double>(c, "sigma2", w);
    ch.gamma = field<double>(c, "gamma", w);
    if (seen[k * d.T + t]) throw ValidationError(w + ": duplicate (user, slot)");
    seen[k * d.T + t] = 1;
    inst.channel(k, t) = ch;
  }
  for (std::size_t a = 0; a < seen.size(); ++a)
    if (!seen[a])
      throw ValidationError("channels: missing user " + std::to_string(a / d.T) + " slot " + std::to_string(a % d.T));
  cfg.instance = buildInstance(std::move(inst));

  if (j.contains("solver")) parseSolver(j.at("solver"), cfg.solver);
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    cfg.eval.nChannelRealizations = optional<int>(e, "channel_realizations", cfg.eval.nChannelRealizations, "eval");
    cfg.eval.nResRealizations = optional<int>(e, "res_realizations", cfg.eval.nResRealizations, "eval");
    cfg.eval.kappas = optional<std::vector<double>>(e, "kappas", cfg.eval.kappas, "eval");
    cfg.eval.seed = optional<std::uint64_t>(e, "seed", cfg.eval.seed, "eval");
    cfg.rounding.samples = optional<int>(e, "rounding_samples", cfg.rounding.samples, "eval");
    cfg.eval.validate();
    if (cfg.rounding.samples < 1) throw ValidationError("eval.rounding_samples must be at least 1");
  }
  cfg.rounding.seed = cfg.eval.seed;
  cfg.rounding.mode = cfg.solver.mode;
  return cfg;
}

RunConfig loadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parseConfig(ss.str());
}

std::string dumpConfig(const RunConfig& cfg) {
  const auto& inst = cfg.instance;
  const auto& d = inst.dims;
  json j;
  j["name"] = cfg.name;
  j["r"] = cfg.r;
  j["seed"] = cfg.seed;
  j["dimensions"] = {{"T", d.T}, {"I", d.I}, {"K", d.K}, {"M", d.M}};
  j["prices"] = pricesJson(inst.prices);
  json bss = json::array();
  for (const auto& b : inst.bs) {
    json x{{"C0", b.battery.C0},       {"Cmax", b.battery.Cmax}, {"PbMin", b.battery.PbMin},
           {"PbMax", b.battery.PbMax}, {"varpi", b.battery.varpi}, {"Pc", b.Pc},
           {"PgMax", b.PgMax},         {"xi", b.xi},             {"res", setJson(b.res)}};
    if (b.prices) x["prices"] = pricesJson(*b.prices);
    bss.push_back(x);
  }
  j["base_stations"] = bss;
  json chs = json::array();
  for (int k = 0; k < d.K; ++k)
    for (int t = 0; t < d.T; ++t) {
      const auto& c = inst.channel(k, t);
      std::vector<double> h;
      for (int a = 0; a < c.hHat.size(); ++a) {
        h.push_back(c.hHat(a).real());
        h.push_back(c.hHat(a).imag());
      }
      chs.push_back({{"user", k}, {"slot", t}, {"h", h}, {"epsilon", c.epsilon}, {"sigma2", c.sigma2}, {"gamma", c.gamma}});
    }
  j["channels"] = chs;
  j["solver"] = solverJson(cfg.solver);
  j["eval"] = {{"channel_realizations", cfg.eval.nChannelRealizations},
               {"res_realizations", cfg.eval.nResRealizations},
               {"kappas", cfg.eval.kappas},
               {"seed", cfg.eval.seed},
               {"rounding_samples", cfg.rounding.samples}};
  return j.dump(2);
}

RunConfig presetConfig(const PresetOptions& opt, const std::string& name) {
  RunConfig cfg;
  cfg.name = name;
  cfg.r = opt.r;
  cfg.seed = opt.seed;
  cfg.instance = generateInstance(opt);
  cfg.eval.seed = opt.seed;
  cfg.rounding.seed = opt.seed;
  return cfg;
}

}  // namespace smartcomp
