// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "smartcomp/config.hpp"
#include "smartcomp/io.hpp"

namespace smartcomp {

using nlohmann::json;

namespace {

struct SolveFlags {
  std::string config;
  std::string out = "out";
  int threads = 0;
  long long seed = -1;
  double stepsize = 0;
  double tolGap = -1;
  int maxIter = 0;
  bool distributed = false;
};

struct EvalFlags {
  std::string schedule;
  std::string config;
  std::string out = "out";
  std::string mode = "robust";
  std::vector<double> kappas;
  long long seed = -1;
  int realizations = 0;
  int threads = 0;
};

struct GenerateFlags {
  std::string preset = "c1";
  std::string out = "config.json";
  long long seed = 1;
  double r = 1.0;
  double epsilon = -1;
  double gamma = -1;
};

void applySolveFlags(RunConfig& cfg, const SolveFlags& f) {
  if (f.threads > 0) cfg.solver.threads = f.threads;
  if (f.seed >= 0) {
    cfg.eval.seed = static_cast<std::uint64_t>(f.seed);
    cfg.rounding.seed = cfg.eval.seed;
  }
  if (f.stepsize != 0) cfg.solver.step.value = f.stepsize;
  if (f.tolGap >= 0) cfg.solver.tolGap = f.tolGap;
  if (f.maxIter > 0) cfg.solver.maxIter = f.maxIter;
  if (f.distributed) {
    cfg.solver.distributed = true;
    cfg.solver.recordMessages = true;
  }
  cfg.solver.validate();
}

json reportJson(const RunConfig& cfg, const ConvergenceReport& r) {
  json t{{"sdp", r.timers.sdp}, {"lp", r.timers.lp}, {"bundle", r.timers.bundle},
         {"overhead", r.timers.overhead()}, {"total", r.timers.total}};
  return {{"name", cfg.name},
          {"r", cfg.r},
          {"status", statusName(r.status)},
          {"stopping_rule", r.stoppingRule},
          {"iterations", r.iterations},
          {"primal", r.primal},
          {"best_dual", r.bestDual},
          {"gap", r.gap},
          {"rel_gap", r.relGap},
          {"residual", r.residual},
          {"projection_shift", r.projectionShift},
          {"coupling_residual", r.couplingResidual},
          {"sdp_max_primal_residual", r.sdpMaxPres},
          {"sdp_max_rel_gap", r.sdpMaxRelGap},
          {"timers", t}};
}

json extractionJson(const ExtractionResult& ex) {
  int rounded = static_cast<int>(std::count(ex.method.begin(), ex.method.end(), ExtractionMethod::Randomized));
  int pairs = static_cast<int>(ex.rankOneRatio.size()), exact = 0;
  for (int a = 0; a < pairs; ++a)
    if (ex.rankOneRatio.data()[a] <= kRankOneTol) ++exact;
  return {{"rounded_slots", rounded},
          {"rank_one_pairs", exact},
          {"pairs", pairs},
          {"max_rank_one_ratio", pairs ? ex.rankOneRatio.maxCoeff() : 0.0},
          {"feasibility_scaled", ex.feasibilityScaled},
          {"max_power_change", ex.maxPowerChange}};
}

RunManifest startManifest(const std::string& command, const std::string& configPath, const RunConfig& cfg) {
  RunManifest m;
  m.command = command;
  m.configPath = configPath;
  m.configHash = hex64(fnv1a64(readFile(configPath)));
  m.seed = cfg.eval.seed;
  return m;
}

void finishManifest(RunManifest& m, const std::string& dir) {
  std::string path = dir + "/manifest.json";
  m.outputs.push_back(path);
  std::filesystem::create_directories(dir);
  std::ofstream(path) << m.toJson() << '\n';
}

int cmdGenerate(const GenerateFlags& f, std::ostream& out) {
  PresetOptions o;
  if (f.preset == "c1") o = presetC1();
  else if (f.preset == "c2") o = presetC2();
  else throw ValidationError("generate: unknown preset '" + f.preset + "', expected c1 or c2");
  o.seed = static_cast<std::uint64_t>(f.seed);
  o.r = f.r;
  if (f.epsilon >= 0) o.epsilon = f.epsilon;
  if (f.gamma > 0) o.gamma = f.gamma;
  auto cfg = presetConfig(o, f.preset);
  std::ofstream file(f.out);
  if (!file) throw ValidationError("generate: cannot write " + f.out);
  file << dumpConfig(cfg) << '\n';
  out << "wrote " << f.out << '\n';
  return kExitOk;
}

int cmdSolve(const SolveFlags& f, std::ostream& out) {
  auto cfg = loadConfig(f.config);
  applySolveFlags(cfg, f);
  auto m = startManifest("solve", f.config, cfg);
  auto res = solve(cfg.instance, cfg.solver);
  RoundingOptions ro = cfg.rounding;
  ro.mode = cfg.solver.mode;
  auto ex = extractBeamformers(res.schedule, cfg.instance, ro);

  std::ostringstream sched, conv;
  writeScheduleCsv(sched, res.schedule);
  writeIterationLog(conv, res.report);
  json rep = reportJson(cfg, res.report);
  rep["extraction"] = extractionJson(ex);
  writeArtifact(m, f.out, "schedule.csv", sched.str());
  writeArtifact(m, f.out, "schedule.json", scheduleToJson(res.schedule));
  writeArtifact(m, f.out, "beamformers.json", beamformersToJson(res.schedule, cfg.instance.dims.T));
  writeArtifact(m, f.out, "convergence.csv", conv.str());
  writeArtifact(m, f.out, "report.json", rep.dump(2));
  if (cfg.solver.recordMessages) {
    std::ostringstream msgs;
    res.messages.writeJsonLines(msgs);
    writeArtifact(m, f.out, "messages.jsonl", msgs.str());
  }
  finishManifest(m, f.out);
  const auto& r = res.report;
  out << "status " << statusName(r.status) << " after " << r.iterations << " iterations\n";
  char line[200];
  std::snprintf(line, sizeof line, "objective %.9g  best dual %.9g  relative gap %.3e  time %.1f s\n", r.primal,
                r.bestDual, r.relGap, r.timers.total);
  out << line << "artifacts in " << f.out << '\n';
  return kExitOk;
}

std::vector<std::string> userLabels(const std::string& prefix, int K) {
  std::vector<std::string> l;
  for (int k = 0; k < K; ++k) l.push_back(prefix + "_user" + std::to_string(k + 1));
  return l;
}

std::vector<std::string> kappaLabels(const std::string& prefix, const std::vector<double>& ks) {
  std::vector<std::string> l;
  for (double k : ks) {
    std::ostringstream s;
    s << prefix << "_kappa" << k;
    l.push_back(s.str());
  }
  return l;
}

int cmdEvaluate(const EvalFlags& f, std::ostream& out) {
  auto cfg = loadConfig(f.config);
  if (!f.kappas.empty()) cfg.eval.kappas = f.kappas;
  if (f.seed >= 0) cfg.eval.seed = static_cast<std::uint64_t>(f.seed);
  if (f.realizations > 0) {
    cfg.eval.nChannelRealizations = f.realizations;
    cfg.eval.nResRealizations = f.realizations;
  }
  if (f.threads > 0) cfg.solver.threads = f.threads;
  cfg.eval.validate();
  Schedule s = scheduleFromJson(readFile(f.schedule));
  const auto& d = cfg.instance.dims;
  if (s.P.rows() != d.I || s.P.cols() != d.T || static_cast<int>(s.w.size()) != d.K * d.T)
    throw ValidationError("evaluate: schedule does not match the config dimensions");
  auto m = startManifest("evaluate --mode " + f.mode, f.config, cfg);

  auto sinr = sinrCdf(s, cfg.instance, cfg.eval);
  auto cost = costCdf(s, cfg.instance, cfg.eval);
  std::vector<CdfTable> sinrTables = sinr.perUser, costTables = cost.tables;
  auto sinrNames = userLabels("robust", d.K);
  auto costNames = kappaLabels("robust", cfg.eval.kappas);
  json summary{{"name", cfg.name}, {"r", cfg.r}, {"mode", f.mode}, {"seed", cfg.eval.seed},
               {"channel_realizations", cfg.eval.nChannelRealizations},
               {"res_realizations", cfg.eval.nResRealizations}, {"kappas", cfg.eval.kappas},
               {"robust", {{"violation_rate", sinr.violationRate}, {"user_violation", sinr.userViolation},
                           {"mean_cost", cost.means}, {"worst_case_cost", cost.worstCase},
                           {"max_excess_over_worst_case", cost.maxExcess}}}};
  auto profile = priceResponseProfile(s, cfg.instance.prices);
  summary["price_response"] = {{"total", std::vector<double>(profile.total.begin(), profile.total.end())},
                               {"argmin_slot", profile.argmin + 1},
                               {"check_skipped", profile.checkSkipped},
                               {"in_slots_4_to_6", profile.inExpected}};

  if (f.mode == "nonrobust") {
    auto nr = solveNonRobustBaseline(cfg.instance, cfg.solver);
    RoundingOptions ro = cfg.rounding;
    ro.mode = BeamformingMode::NonRobust;
    extractBeamformers(nr.schedule, cfg.instance, ro);
    auto b = sinrCdf(nr.schedule, cfg.instance, cfg.eval);
    for (auto& t : b.perUser) sinrTables.push_back(t);
    auto l = userLabels("nonrobust", d.K);
    sinrNames.insert(sinrNames.end(), l.begin(), l.end());
    summary["nonrobust"] = {{"violation_rate", b.violationRate}, {"user_violation", b.userViolation},
                            {"objective", nr.report.primal}};
  } else if (f.mode == "heuristic") {
    auto hb = solveHeuristicBaseline(cfg.instance, cfg.solver);
    auto c = costCdf(hb.schedule, cfg.instance, cfg.eval);
    for (auto& t : c.tables) costTables.push_back(t);
    auto l = kappaLabels("heuristic", cfg.eval.kappas);
    costNames.insert(costNames.end(), l.begin(), l.end());
    summary["heuristic"] = {{"mean_cost", c.means},
                            {"robust_no_worse_fraction", pairedDominance(s, hb.schedule, cfg.instance, cfg.eval)}};
  } else if (f.mode != "robust") {
    throw ValidationError("evaluate: --mode must be robust, nonrobust or heuristic");
  }

  std::ostringstream a, b;
  writeCdfCsv(a, sinrNames, sinrTables);
  writeCdfCsv(b, costNames, costTables);
  writeArtifact(m, f.out, "sinr_cdf.csv", a.str());
  writeArtifact(m, f.out, "cost_cdf.csv", b.str());
  writeArtifact(m, f.out, "eval_summary.json", summary.dump(2));
  finishManifest(m, f.out);
  char line[200];
  std::snprintf(line, sizeof line, "violation rate %.4f, mean cost", sinr.violationRate);
  out << line;
  for (double c : cost.means) out << ' ' << c;
  out << "\nartifacts in " << f.out << '\n';
  return kExitOk;
}

int cmdBench(const SolveFlags& f, std::ostream& out) {
  auto cfg = loadConfig(f.config);
  applySolveFlags(cfg, f);
  auto res = solve(cfg.instance, cfg.solver);
  const auto& r = res.report;
  const auto& t = r.timers;
  char buf[400];
  std::snprintf(buf, sizeof buf,
                "iterations %d (%s)\nobjective %.12g\nSDP solves   %10.3f s\nbundle       %10.3f s\n"
                "LP           %10.3f s\ncoordinator  %10.3f s\ntotal        %10.3f s\n",
                r.iterations, statusName(r.status), r.primal, t.sdp, t.bundle, t.lp, t.overhead(), t.total);
  out << buf;
  return kExitOk;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust energy and beamforming scheduling for a coordinated multi-point cluster", "smartcomp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenerateFlags gf;
  auto* gen = app.add_subcommand("generate", "write a synthetic config with Rayleigh channels");
  gen->add_option("--preset", gf.preset, "c1 or c2")->capture_default_str();
  gen->add_option("--seed", gf.seed, "channel seed")->capture_default_str();
  gen->add_option("--r", gf.r, "sell to buy price ratio")->capture_default_str();
  gen->add_option("--epsilon", gf.epsilon, "channel error radius");
  gen->add_option("--gamma", gf.gamma, "SINR target of every user");
  gen->add_option("-o,--out", gf.out, "output path")->capture_default_str();

  SolveFlags sf;
  auto addSolveFlags = [](CLI::App* c, SolveFlags& f) {
    c->add_option("config", f.config, "config JSON")->required();
    c->add_option("-o,--out", f.out, "artifact directory")->capture_default_str();
    c->add_option("--threads", f.threads, "worker threads");
    c->add_option("--seed", f.seed, "rounding and evaluation seed");
    c->add_option("--stepsize", f.stepsize, "dual stepsize");
    c->add_option("--tol-gap", f.tolGap, "relative duality gap tolerance");
    c->add_option("--max-iter", f.maxIter, "dual iteration cap");
    c->add_flag("--distributed", f.distributed, "route BS subproblems through serialized messages");
  };
  auto* sol = app.add_subcommand("solve", "solve a config and write the schedule");
  addSolveFlags(sol, sf);
  SolveFlags bf;
  auto* ben = app.add_subcommand("bench", "time one solve per module");
  addSolveFlags(ben, bf);

  EvalFlags ef;
  auto* ev = app.add_subcommand("evaluate", "Monte-Carlo SINR and cost evaluation of a solved schedule");
  ev->add_option("schedule", ef.schedule, "schedule.json from solve")->required();
  ev->add_option("config", ef.config, "config JSON")->required();
  ev->add_option("-o,--out", ef.out, "artifact directory")->capture_default_str();
  ev->add_option("--mode", ef.mode, "baseline: robust (none), nonrobust or heuristic")->capture_default_str();
  ev->add_option("--kappa", ef.kappas, "renewable scaling, repeatable");
  ev->add_option("--seed", ef.seed, "sampling seed");
  ev->add_option("--realizations", ef.realizations, "channel and renewable sample count");
  ev->add_option("--threads", ef.threads, "worker threads for baseline solves");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*gen) return cmdGenerate(gf, out);
    if (*sol) return cmdSolve(sf, out);
    if (*ben) return cmdBench(bf, out);
    if (*ev) return cmdEvaluate(ef, out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const AdmissionControlRequired& e) {
    err << e.what() << '\n';
    return kExitAdmission;
  } catch (const StepsizeTooAggressive& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const RoundingFailed& e) {
    err << "numerical failure: rounding failed: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace smartcomp
