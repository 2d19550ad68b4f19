// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/coordinator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "smartcomp/cost.hpp"

namespace smartcomp {

double Stepsize::at(int j) const {
  return rule == StepRule::Constant ? value : value / (1.0 + j);
}

void Stepsize::validate() const {
  if (!(value > 0) || !std::isfinite(value)) throw ValidationError("stepsize must be positive and finite");
}

void CoordinatorOptions::validate() const {
  step.validate();
  if (maxIter < 1) throw ValidationError("coordinator: maxIter must be at least 1");
  if (!(tolGap >= 0) || !(tolResidual >= 0)) throw ValidationError("coordinator: tolerances must be nonnegative");
  if (threads < 1) throw ValidationError("coordinator: threads must be at least 1");
}

const char* statusName(SolveStatus s) {
  switch (s) {
    case SolveStatus::GapReached: return "GapReached";
    case SolveStatus::ResidualReached: return "ResidualReached";
    case SolveStatus::IterationCap: return "IterationCap";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// Runs fn(0..n-1) on up to `threads` workers; the first exception in index
// order is rethrown.
template <class F>
void parallelFor(int n, int threads, F fn) {
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](int i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  int workers = std::min(threads, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) run(i);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<double> toStd(const Vec& v) { return {v.data(), v.data() + v.size()}; }
Vec fromStd(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), v.size()); }

struct BsReply {
  Vec Pb, C, P;
  double lpObjective = 0;
  double costValue = 0;
  double lpTime = 0, bundleTime = 0;
};

BsReply solveBs(const ProblemInstance& inst, int i, const Vec& lambda, const CoordinatorOptions& opt) {
  BsReply r;
  auto t0 = Clock::now();
  auto lp = solveBatteryLp({lambda, inst.bs[i].battery});
  auto t1 = Clock::now();
  auto sub = CostSubproblem::forBs(inst.bs[i], inst.prices, lambda, opt.costBox);
  auto b = solveCostSubproblem(sub, opt.bundle);
  auto t2 = Clock::now();
  if (b.status == BundleStatus::Unbounded)
    throw StepsizeTooAggressive("bs " + std::to_string(i + 1) +
                                ": multipliers left the price band, cost subproblem unbounded");
  r.Pb = lp.Pb;
  r.C = lp.C;
  r.lpObjective = lp.objective;
  r.P = b.p;
  r.costValue = b.value;
  r.lpTime = seconds(t0, t1);
  r.bundleTime = seconds(t1, t2);
  return r;
}

}  // namespace

void cesaroUpdate(AveragedPrimal& avg, const PrimalIterate& z, double mu) {
  if (!(mu > 0)) throw ValidationError("cesaroUpdate: step must be positive");
  if (avg.count == 0) {
    avg.mean = z;
    avg.muSum = mu;
    avg.count = 1;
    return;
  }
  if (avg.mean.X.size() != z.X.size() || avg.mean.Pb.rows() != z.Pb.rows() ||
      avg.mean.Pb.cols() != z.Pb.cols())
    throw ValidationError("cesaroUpdate: shape mismatch");
  const double total = avg.muSum + mu;
  const double a = mu / total, b = avg.muSum / total;
  auto& m = avg.mean;
  for (std::size_t n = 0; n < m.X.size(); ++n) m.X[n] = a * z.X[n] + b * m.X[n];
  m.tau = a * z.tau + b * m.tau;
  m.transmit = a * z.transmit + b * m.transmit;
  m.Pb = a * z.Pb + b * m.Pb;
  m.C = a * z.C + b * m.C;
  m.P = a * z.P + b * m.P;
  avg.muSum = total;
  ++avg.count;
}

DualEvaluation evaluateDual(const ProblemInstance& inst, const Mat& lambda, const CoordinatorOptions& opt,
                            Timers* timers, MessageLog* log, int iteration) {
  const auto& d = inst.dims;
  if (lambda.rows() != d.I || lambda.cols() != d.T) throw ValidationError("multipliers must be I x T");
  DualEvaluation ev;
  auto& z = ev.z;
  z.X.assign(static_cast<std::size_t>(d.K) * d.T, CMat());
  z.tau = Mat::Zero(d.K, d.T);
  z.transmit = Mat::Zero(d.I, d.T);
  z.Pb = Mat::Zero(d.I, d.T);
  z.C = Mat::Zero(d.I, d.T);
  z.P = Mat::Zero(d.I, d.T);

  // Beamforming subproblems, one per slot, kept at the controller.
  auto t0 = Clock::now();
  std::vector<SdpSolution> sdp(d.T);
  parallelFor(d.T, opt.threads, [&](int t) {
    SlotSubproblem sub{t, lambda.col(t), opt.mode};
    sdp[t] = solveSlotSdp(inst, sub, opt.ipm);
  });
  auto t1 = Clock::now();
  double value = 0;
  for (int t = 0; t < d.T; ++t) {
    const auto& s = sdp[t];
    if (s.status == SdpStatus::Infeasible) {
      auto users = infeasibleUsers(inst, t, opt.mode, opt.ipm);
      std::string who = users.empty() ? "no single user is infeasible alone, the targets conflict jointly"
                                      : "users infeasible even without interference:";
      for (int k : users) who += " " + std::to_string(k + 1);
      throw AdmissionControlRequired(t, s.detail + "; " + who);
    }
    if (s.status != SdpStatus::Optimal)
      throw NumericalFailure("slot " + std::to_string(t + 1) + ": " + s.detail);
    for (int k = 0; k < d.K; ++k) {
      z.X[k * d.T + t] = s.X[k];
      z.tau(k, t) = s.tau(k);
    }
    z.transmit.col(t) = s.transmit;
    value += lambda.col(t).dot(s.transmit);
    ev.sdpMaxPres = std::max(ev.sdpMaxPres, s.pres);
    ev.sdpMaxRelGap = std::max(ev.sdpMaxRelGap, s.relgap);
  }

  // Battery and cost subproblems, one per BS.
  std::vector<BsReply> replies(d.I);
  if (opt.distributed) {
    std::vector<Message> down(d.I), up(d.I);
    for (int i = 0; i < d.I; ++i) {
      Message m;
      m.iteration = iteration;
      m.kind = MessageKind::Multipliers;
      m.bs = i;
      m.lambda = toStd(lambda.row(i).transpose());
      down[i] = deserialize(serialize(m));
    }
    parallelFor(d.I, opt.threads, [&](int i) {
      BsReply local = solveBs(inst, i, fromStd(down[i].lambda), opt);
      Message m;
      m.iteration = iteration;
      m.kind = MessageKind::Decisions;
      m.bs = i;
      m.Pb = toStd(local.Pb);
      m.P = toStd(local.P);
      m.lpObjective = local.lpObjective;
      m.costValue = local.costValue;
      up[i] = deserialize(serialize(m));
      replies[i].Pb = fromStd(up[i].Pb);
      replies[i].P = fromStd(up[i].P);
      replies[i].C = batteryLevels(replies[i].Pb, inst.bs[i].battery);
      replies[i].lpObjective = up[i].lpObjective;
      replies[i].costValue = up[i].costValue;
      replies[i].lpTime = local.lpTime;
      replies[i].bundleTime = local.bundleTime;
    });
    if (log) {
      for (auto& m : down) log->entries.push_back(m);
      for (auto& m : up) log->entries.push_back(m);
    }
  } else {
    parallelFor(d.I, opt.threads, [&](int i) { replies[i] = solveBs(inst, i, lambda.row(i).transpose(), opt); });
  }

  double lpTime = 0, bundleTime = 0;
  for (int i = 0; i < d.I; ++i) {
    const auto& r = replies[i];
    z.Pb.row(i) = r.Pb.transpose();
    z.C.row(i) = r.C.transpose();
    z.P.row(i) = r.P.transpose();
    value += r.lpObjective + r.costValue + inst.bs[i].Pc * lambda.row(i).sum();
    lpTime += r.lpTime;
    bundleTime += r.bundleTime;
  }
  ev.g = z.transmit + z.Pb - z.P;
  for (int i = 0; i < d.I; ++i) ev.g.row(i).array() += inst.bs[i].Pc;
  ev.value = value;
  if (timers) {
    timers->sdp += seconds(t0, t1);
    timers->lp += lpTime;
    timers->bundle += bundleTime;
  }
  return ev;
}

DualEvaluation dualStep(DualState& state, const ProblemInstance& inst, const CoordinatorOptions& opt,
                        AveragedPrimal& avg, Timers* timers, MessageLog* log) {
  DualEvaluation ev = evaluateDual(inst, state.lambda, opt, timers, log, state.iteration);
  double mu = state.step.at(state.iteration);
  state.lambda += mu * ev.g;
  state.muSum += mu;
  ++state.iteration;
  cesaroUpdate(avg, ev.z, mu);
  return ev;
}

double primalObjective(const ProblemInstance& inst, const Mat& transmit, const Mat& Pb) {
  double v = 0;
  for (int i = 0; i < inst.dims.I; ++i) {
    Vec p = (transmit.row(i) + Pb.row(i)).transpose();
    p.array() += inst.bs[i].Pc;
    v += worstCost(p, inst.bs[i].res, inst.pricesFor(i)).value;
  }
  return v;
}

Vec batteryLevels(const Vec& Pb, const BatteryParams& b) {
  Vec c(Pb.size());
  double level = b.C0;
  for (int t = 0; t < Pb.size(); ++t) {
    level += Pb(t);
    c(t) = level;
  }
  return c;
}

Vec projectBattery(const Vec& Pb, const BatteryParams& b, double tol, int maxCycles) {
  const int T = static_cast<int>(Pb.size());
  // Half-spaces a'x <= r in Pb coordinates.
  std::vector<Vec> A;
  std::vector<double> rhs;
  for (int t = 0; t < T; ++t) {
    Vec cum = Vec::Zero(T);
    cum.head(t + 1).setOnes();
    A.push_back(cum);  // C^t <= Cmax
    rhs.push_back(b.Cmax - b.C0);
    A.push_back(-cum);  // C^t >= 0
    rhs.push_back(b.C0);
    Vec eff = Vec::Zero(T);  // -Pb^t - varpi C^{t-1} <= 0
    eff(t) = -1;
    eff.head(t).setConstant(-b.varpi);
    A.push_back(eff);
    rhs.push_back(b.varpi * b.C0);
  }
  const int m = static_cast<int>(A.size());
  Vec x = Pb;
  Vec boxInc = Vec::Zero(T);
  std::vector<Vec> inc(m, Vec::Zero(T));
  for (int cycle = 0; cycle < maxCycles; ++cycle) {
    double change = 0;
    Vec y = x + boxInc;
    Vec px = y.cwiseMax(b.PbMin).cwiseMin(b.PbMax);
    boxInc = y - px;
    change = std::max(change, (px - x).lpNorm<Eigen::Infinity>());
    x = px;
    for (int h = 0; h < m; ++h) {
      y = x + inc[h];
      double viol = A[h].dot(y) - rhs[h];
      px = viol > 0 ? Vec(y - viol / A[h].squaredNorm() * A[h]) : y;
      inc[h] = y - px;
      change = std::max(change, (px - x).lpNorm<Eigen::Infinity>());
      x = px;
    }
    if (change <= tol) break;
  }
  return x;
}

SolveResult solve(const ProblemInstance& inst, const CoordinatorOptions& opt) {
  inst.validate();
  opt.validate();
  const auto& d = inst.dims;
  auto start = Clock::now();

  SolveResult res;
  auto& st = res.dual;
  st.step = opt.step;
  st.lambda = Mat(d.I, d.T);
  for (int i = 0; i < d.I; ++i)
    for (int t = 0; t < d.T; ++t) st.lambda(i, t) = inst.pricesFor(i).phi(t);

  AveragedPrimal avg;
  auto& rep = res.report;
  rep.bestDual = -std::numeric_limits<double>::infinity();
  MessageLog* log = opt.recordMessages ? &res.messages : nullptr;
  for (int j = 0; j < opt.maxIter; ++j) {
    double mu = st.step.at(st.iteration);
    DualEvaluation ev = dualStep(st, inst, opt, avg, &rep.timers, log);
    rep.sdpMaxPres = std::max(rep.sdpMaxPres, ev.sdpMaxPres);
    rep.sdpMaxRelGap = std::max(rep.sdpMaxRelGap, ev.sdpMaxRelGap);
    rep.bestDual = std::max(rep.bestDual, ev.value);

    const auto& m = avg.mean;
    IterationRecord rec;
    rec.iteration = j + 1;
    rec.dual = ev.value;
    rec.bestDual = rep.bestDual;
    rec.primal = primalObjective(inst, m.transmit, m.Pb);
    rec.subgradNorm = ev.g.norm();
    Mat gbar = m.transmit + m.Pb - m.P;
    for (int i = 0; i < d.I; ++i) gbar.row(i).array() += inst.bs[i].Pc;
    rec.residual = gbar.norm();
    rec.gap = rec.primal - rep.bestDual;
    rec.relGap = rec.gap / std::max(1.0, std::abs(rec.primal));
    rec.step = mu;
    rep.records.push_back(rec);
    rep.iterations = j + 1;
    if (rec.relGap <= opt.tolGap) {
      rep.status = SolveStatus::GapReached;
      break;
    }
    if (rec.residual <= opt.tolResidual) {
      rep.status = SolveStatus::ResidualReached;
      break;
    }
  }
  rep.stoppingRule = "relative gap (primal at averaged iterate minus best dual value, over max(1, |primal|)) <= " +
                     std::to_string(opt.tolGap) + ", or ||g|| of averaged primal <= " +
                     std::to_string(opt.tolResidual) + ", or " + std::to_string(opt.maxIter) + " iterations";

  // Schedule from the averages; the battery trajectory is projected and C
  // recomputed from the dynamics.
  const auto& m = avg.mean;
  auto& s = res.schedule;
  s.X = m.X;
  s.tau = m.tau;
  s.transmit = m.transmit;
  s.Pb = Mat(d.I, d.T);
  s.C = Mat(d.I, d.T);
  s.P = Mat(d.I, d.T);
  for (int i = 0; i < d.I; ++i) {
    Vec raw = m.Pb.row(i).transpose();
    Vec pb = projectBattery(raw, inst.bs[i].battery);
    rep.projectionShift = std::max(rep.projectionShift, (pb - raw).lpNorm<Eigen::Infinity>());
    s.Pb.row(i) = pb.transpose();
    s.C.row(i) = batteryLevels(pb, inst.bs[i].battery).transpose();
    s.P.row(i) = (s.transmit.row(i) + s.Pb.row(i)).array() + inst.bs[i].Pc;
  }
  Mat coupling = s.P - s.transmit - s.Pb;
  for (int i = 0; i < d.I; ++i) coupling.row(i).array() -= inst.bs[i].Pc;
  rep.couplingResidual = coupling.cwiseAbs().maxCoeff();
  rep.primal = primalObjective(inst, s.transmit, s.Pb);
  rep.gap = rep.primal - rep.bestDual;
  rep.relGap = rep.gap / std::max(1.0, std::abs(rep.primal));
  rep.residual = rep.records.back().residual;
  rep.timers.total = seconds(start, Clock::now());
  return res;
}

void writeIterationLog(std::ostream& os, const ConvergenceReport& r) {
  os << "iteration,objective,subgrad_norm,residual,dual,gap,rel_gap\n";
  os.precision(17);
  for (const auto& x : r.records)
    os << x.iteration << ',' << x.primal << ',' << x.subgradNorm << ',' << x.residual << ',' << x.dual << ','
       << x.gap << ',' << x.relGap << '\n';
}

}  // namespace smartcomp
