// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

#include "smartcomp/bundle.hpp"
#include "smartcomp/lp.hpp"
#include "smartcomp/messages.hpp"
#include "smartcomp/sdp.hpp"

namespace smartcomp {

enum class StepRule { Constant, Diminishing };

/// Constant: mu(j) = value. Diminishing: mu(j) = value / (1 + j).
struct Stepsize {
  StepRule rule = StepRule::Constant;
  double value = 1e-3;

  double at(int j) const;
  void validate() const;
};

struct DualState {
  Mat lambda;  // I x T
  int iteration = 0;
  Stepsize step;
  double muSum = 0;
};

/// Primal iterate of one dual step. P is the minimizer of the cost
/// subproblem, not the coupled value.
struct PrimalIterate {
  std::vector<CMat> X;  // K*T, index k*T+t
  Mat tau;              // K x T
  Mat transmit;         // I x T
  Mat Pb;               // I x T
  Mat C;                // I x T
  Mat P;                // I x T
};

/// Step-weighted running averages of the primal iterates.
struct AveragedPrimal {
  PrimalIterate mean;
  double muSum = 0;
  int count = 0;
};

/// mean <- (mu/muSum') Z + (muSum/muSum') mean with muSum' = muSum + mu.
void cesaroUpdate(AveragedPrimal& avg, const PrimalIterate& z, double mu);

struct CoordinatorOptions {
  Stepsize step;
  int maxIter = 1000;
  double tolGap = 1e-3;       // relative duality gap
  double tolResidual = 1e-2;  // ||g|| of the averaged primal
  int threads = 1;
  BeamformingMode mode = BeamformingMode::Robust;
  conic::IpmOptions ipm;
  BundleOptions bundle;
  bool costBox = true;     // redundant box in the cost subproblem
  bool distributed = false;  // route BS work through serialized messages
  bool recordMessages = false;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double dual = 0;         // D(lambda(j))
  double bestDual = 0;
  double primal = 0;       // objective at the averaged primal
  double subgradNorm = 0;  // ||g(j)||
  double residual = 0;     // ||g|| of the averaged primal
  double gap = 0;          // primal - bestDual
  double relGap = 0;
  double step = 0;
};

enum class SolveStatus { GapReached, ResidualReached, IterationCap };

const char* statusName(SolveStatus s);

struct Timers {
  double sdp = 0;
  double lp = 0;
  double bundle = 0;
  double total = 0;

  double overhead() const { return total - sdp - lp - bundle; }
};

struct ConvergenceReport {
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::IterationCap;
  std::string stoppingRule;
  double primal = 0;
  double bestDual = 0;
  double gap = 0;
  double relGap = 0;
  double residual = 0;
  double projectionShift = 0;  // ||Pb_projected - Pb_averaged||_inf
  double couplingResidual = 0; // max |P - Pc - transmit - Pb| of the schedule
  double sdpMaxPres = 0;       // worst relative primal residual over all SDP solves
  double sdpMaxRelGap = 0;
  int iterations = 0;
  Timers timers;
};

struct SolveResult {
  Schedule schedule;
  ConvergenceReport report;
  DualState dual;
  MessageLog messages;
};

/// Quantities returned by one pass over all subproblems at fixed lambda.
struct DualEvaluation {
  PrimalIterate z;
  Mat g;         // I x T coupling subgradient
  double value = 0;  // D(lambda)
  double sdpMaxPres = 0;
  double sdpMaxRelGap = 0;
};

/// Solves every subproblem at the multipliers of the state. Throws
/// AdmissionControlRequired, StepsizeTooAggressive or NumericalFailure.
DualEvaluation evaluateDual(const ProblemInstance& inst, const Mat& lambda,
                            const CoordinatorOptions& opt, Timers* timers = nullptr,
                            MessageLog* log = nullptr, int iteration = 0);

/// One ascent step: evaluates D at lambda(j), then lambda(j+1) = lambda(j) + mu(j) g(j)
/// and folds the iterate into the averages.
DualEvaluation dualStep(DualState& state, const ProblemInstance& inst, const CoordinatorOptions& opt,
                        AveragedPrimal& avg, Timers* timers = nullptr, MessageLog* log = nullptr);

/// lambda^t starts at phi^t; see CoordinatorOptions for the stopping rules.
SolveResult solve(const ProblemInstance& inst, const CoordinatorOptions& opt = {});

/// sum_i G_i(P_i) with P = Pc + transmit + Pb.
double primalObjective(const ProblemInstance& inst, const Mat& transmit, const Mat& Pb);

/// Euclidean projection of one BS trajectory onto the storage constraints
/// (Dykstra's method over the half-spaces).
Vec projectBattery(const Vec& Pb, const BatteryParams& b, double tol = 1e-13, int maxCycles = 100000);

/// C^t = C^{t-1} + Pb^t from C0.
Vec batteryLevels(const Vec& Pb, const BatteryParams& b);

/// Iteration log CSV with header "iteration,objective,subgrad_norm,residual,dual,gap,rel_gap".
void writeIterationLog(std::ostream& os, const ConvergenceReport& r);

}  // namespace smartcomp
