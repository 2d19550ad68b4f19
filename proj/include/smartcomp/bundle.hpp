// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <iosfwd>

#include "smartcomp/model.hpp"

namespace smartcomp {

struct OracleValue {
  double value = 0;
  Vec subgrad;
};

using BundleOracle = std::function<OracleValue(const Vec&)>;

/// Supporting hyperplane value + subgrad'(p - point).
struct Cut {
  Vec point;
  double value = 0;
  Vec subgrad;

  double at(const Vec& p) const { return value + subgrad.dot(p - point); }
};

struct BundleOptions {
  double theta = 0.5;
  double rho0 = 1.0;
  double rhoMin = 1e-3;
  double rhoMax = 1e3;
  int maxIter = 500;
  int maxCuts = 50;
  double stepTol = 1e-9;  // stop when the prox point equals the center
  double etaTol = 1e-8;   // stop when eta <= etaTol (1 + |value at center|)
};

struct BundleState {
  std::vector<Cut> cuts;
  std::vector<int> age;    // iteration each cut was added
  std::vector<char> active;  // cut had positive weight in the last QP
  Vec center;
  double centerValue = 0;
  double rho = 1.0;
  double eta = 0;
  BundleOptions options;
};

struct ProxQpResult {
  Vec p;
  double eta = 0;
  Vec xi;          // weights on the simplex, one per cut
  double model = 0;  // cutting-plane model at p
  double kkt = 0;  // worst violation of the simplex QP optimality conditions
  int iterations = 0;
};

/// Minimizes the cutting-plane model plus (rho/2)||p - y||^2 through its
/// dual over the probability simplex, by a primal active-set method.
ProxQpResult solveProximalQp(const BundleState& state);

/// Serious step: max(rho/10, rhoMin). Null step: min(10 rho, rhoMax).
double updateWeight(double rho, bool serious, const BundleOptions& opt);
double updateWeight(const BundleState& state, bool serious);

enum class BundleStatus { Converged, IterationLimit, Unbounded };

const char* statusName(BundleStatus s);

struct BundleTraceRow {
  int iteration = 0;
  double value = 0;  // at the center after the step
  double eta = 0;
  double rho = 0;    // weight used to compute the step
  bool serious = false;
};

struct BundleResult {
  BundleStatus status = BundleStatus::IterationLimit;
  Vec p;
  double value = 0;
  double initialValue = 0;
  int iterations = 0;
  int seriousSteps = 0;
  std::vector<BundleTraceRow> trace;
};

BundleResult bundleMinimize(const BundleOracle& oracle, const Vec& p0, const BundleOptions& opt = {});

/// Trace CSV with header "iteration,value,eta,rho,step".
void writeBundleTrace(std::ostream& os, const BundleResult& r);

/// Worst-case cost of one BS minus lambda'p. With a box, p is kept inside
/// [lower, upper] by an exact penalty whose slope dominates every
/// subgradient of the cost, so the minimum is the box-constrained one.
struct CostSubproblem {
  UncertaintySet set;
  PriceCurve prices;
  Vec lambda;
  bool useBox = true;
  Vec lower;
  Vec upper;
  Vec start;  // (Pc + PgMax)/2 per slot for a BS

  /// Box from the fixed consumption, the consumption cap and the battery
  /// limits: Pc + PbMin <= p <= PgMax + PbMax.
  static CostSubproblem forBs(const BsParams& bs, const PriceCurve& prices, const Vec& lambda,
                              bool useBox = true);

  OracleValue evaluate(const Vec& p) const;
  double penaltySlope(int t) const;

  /// Without a box the problem is unbounded below iff some lambda^t lies
  /// outside [beta^t, alpha^t].
  bool unbounded() const;
};

BundleResult solveCostSubproblem(const CostSubproblem& sub, const BundleOptions& opt = {});

/// Subgradient method with normalized diminishing steps a_s/sqrt(1+j),
/// restarted from the best point seen in `stages` equal stages with
/// a_{s+1} = a_s/shrink. Independent reference for the bundle method.
BundleResult subgradientReference(const BundleOracle& oracle, const Vec& p0, int iterations,
                                  double a0 = 20.0, int stages = 20, double shrink = 3.0);

}  // namespace smartcomp
