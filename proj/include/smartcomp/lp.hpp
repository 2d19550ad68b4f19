// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "smartcomp/model.hpp"

namespace smartcomp {

enum class RowType { Equal, LessEqual, GreaterEqual };
enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* statusName(LpStatus s);

/// min c'x  s.t.  row_i(A) x {=,<=,>=} b_i,  lower <= x <= upper.
/// Bounds may be infinite.
struct LpProblem {
  Vec c;
  Mat A;
  Vec b;
  std::vector<RowType> rows;
  Vec lower;
  Vec upper;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  Vec y;        // row duals, c = A'y + d
  Vec reduced;  // d
  double objective = 0;
  double dualObjective = 0;
  int iterations = 0;
};

/// Two-phase bounded-variable primal simplex on a dense tableau with Bland's
/// rule for both the entering and the leaving choice.
LpResult denseSimplex(const LpProblem& lp, int maxIter = 10000);

struct BatteryLp {
  Vec lambda;
  BatteryParams battery;
};

struct BatterySolution {
  Vec Pb;
  Vec C;
  double objective = 0;
  double dualObjective = 0;  // certificate of the first stage
  int iterations = 0;
};

/// min lambda'Pb over the storage dynamics, capacity, (dis)charge limits and
/// the discharge-efficiency rows. Among optimal trajectories the one with
/// the smallest sum |Pb| is returned.
BatterySolution solveBatteryLp(const BatteryLp& prob);

/// Largest violation of the storage constraints by (Pb, C).
double batteryResidual(const Vec& Pb, const Vec& C, const BatteryParams& b);

}  // namespace smartcomp
