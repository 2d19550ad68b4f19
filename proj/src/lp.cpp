// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/lp.hpp"

#include <cmath>
#include <limits>

namespace smartcomp {

const char* statusName(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

struct Tableau {
  int m = 0, n = 0, N = 0;
  Mat A;          // m x N, [A, I, diag(sign)]
  Mat T;          // B^{-1} A
  Vec lo, up, x;  // per column
  std::vector<int> basis;
  std::vector<char> isBasic;
  Vec sign;
  Vec b;

  Mat basisInverse() const {
    Mat binv(m, m);
    for (int i = 0; i < m; ++i) binv.col(i) = T.col(n + m + i) / sign(i);
    return binv;
  }

  void recomputeBasic() {
    Vec r = b;
    for (int j = 0; j < N; ++j)
      if (!isBasic[j] && x(j) != 0.0) r -= A.col(j) * x(j);
    Vec xb = basisInverse() * r;
    for (int i = 0; i < m; ++i) x(basis[i]) = xb(i);
  }

  void pivot(int r, int j) {
    double p = T(r, j);
    T.row(r) /= p;
    for (int i = 0; i < m; ++i)
      if (i != r && T(i, j) != 0.0) T.row(i) -= T(i, j) * T.row(r);
    isBasic[basis[r]] = 0;
    basis[r] = j;
    isBasic[j] = 1;
  }

  // Returns Optimal, Unbounded or IterationLimit.
  LpStatus run(const Vec& cost, int& iterations, int maxIter) {
    while (true) {
      if (iterations >= maxIter) return LpStatus::IterationLimit;
      Vec cb(m);
      for (int i = 0; i < m; ++i) cb(i) = cost(basis[i]);
      Vec d = cost - T.transpose() * cb;

      int enter = -1, dir = 0;
      for (int j = 0; j < N && enter < 0; ++j) {
        if (isBasic[j] || lo(j) == up(j)) continue;
        if (d(j) < -kCostTol && x(j) < up(j)) {
          enter = j;
          dir = 1;
        } else if (d(j) > kCostTol && x(j) > lo(j)) {
          enter = j;
          dir = -1;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      ++iterations;

      double tmax = dir > 0 ? up(enter) - x(enter) : x(enter) - lo(enter);
      int leave = -1;
      double best = kInf;
      for (int i = 0; i < m; ++i) {
        double rate = -dir * T(i, enter);
        int v = basis[i];
        double lim = kInf;
        if (rate < -kPivotTol)
          lim = (x(v) - lo(v)) / -rate;
        else if (rate > kPivotTol)
          lim = (up(v) - x(v)) / rate;
        else
          continue;
        if (std::isinf(lim)) continue;
        lim = std::max(0.0, lim);
        if (leave < 0 || lim < best - 1e-12 || (lim <= best + 1e-12 && v < basis[leave])) {
          best = leave < 0 ? lim : std::min(best, lim);
          leave = i;
        }
      }
      if (std::isinf(tmax) && leave < 0) return LpStatus::Unbounded;

      if (leave < 0 || tmax <= best) {
        double t = tmax;
        for (int i = 0; i < m; ++i) x(basis[i]) -= dir * t * T(i, enter);
        x(enter) = dir > 0 ? up(enter) : lo(enter);
        continue;
      }
      double t = best;
      int lv = basis[leave];
      double rate = -dir * T(leave, enter);
      for (int i = 0; i < m; ++i) x(basis[i]) -= dir * t * T(i, enter);
      x(enter) += dir * t;
      x(lv) = rate < 0 ? lo(lv) : up(lv);
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult denseSimplex(const LpProblem& lp, int maxIter) {
  const int m = static_cast<int>(lp.A.rows());
  const int n = static_cast<int>(lp.A.cols());
  if (lp.c.size() != n || lp.b.size() != m || static_cast<int>(lp.rows.size()) != m ||
      lp.lower.size() != n || lp.upper.size() != n)
    throw ValidationError("denseSimplex: inconsistent problem dimensions");
  for (int j = 0; j < n; ++j)
    if (lp.lower(j) > lp.upper(j)) throw ValidationError("denseSimplex: lower bound exceeds upper");

  Tableau tb;
  tb.m = m;
  tb.n = n;
  tb.N = n + 2 * m;
  tb.b = lp.b;
  tb.A = Mat::Zero(m, tb.N);
  tb.A.leftCols(n) = lp.A;
  tb.A.block(0, n, m, m).setIdentity();
  tb.lo = Vec::Zero(tb.N);
  tb.up = Vec::Zero(tb.N);
  tb.x = Vec::Zero(tb.N);
  for (int j = 0; j < n; ++j) {
    tb.lo(j) = lp.lower(j);
    tb.up(j) = lp.upper(j);
    tb.x(j) = std::isfinite(lp.lower(j)) ? lp.lower(j) : (std::isfinite(lp.upper(j)) ? lp.upper(j) : 0.0);
  }
  for (int i = 0; i < m; ++i) {
    int s = n + i;
    switch (lp.rows[i]) {
      case RowType::Equal: tb.lo(s) = 0; tb.up(s) = 0; break;
      case RowType::LessEqual: tb.lo(s) = 0; tb.up(s) = kInf; break;
      case RowType::GreaterEqual: tb.lo(s) = -kInf; tb.up(s) = 0; break;
    }
  }
  Vec r = lp.b - lp.A * tb.x.head(n);
  tb.sign = Vec(m);
  tb.basis.resize(m);
  tb.isBasic.assign(tb.N, 0);
  for (int i = 0; i < m; ++i) {
    int a = n + m + i;
    tb.sign(i) = r(i) >= 0 ? 1.0 : -1.0;
    tb.A(i, a) = tb.sign(i);
    tb.lo(a) = 0;
    tb.up(a) = kInf;
    tb.x(a) = std::abs(r(i));
    tb.basis[i] = a;
    tb.isBasic[a] = 1;
  }
  tb.T = tb.A;
  for (int i = 0; i < m; ++i) tb.T.row(i) /= tb.sign(i);

  LpResult res;
  Vec phase1 = Vec::Zero(tb.N);
  phase1.tail(m).setOnes();
  LpStatus st = tb.run(phase1, res.iterations, maxIter);
  if (st == LpStatus::IterationLimit) {
    res.status = st;
    return res;
  }
  tb.recomputeBasic();
  double infeas = tb.x.tail(m).cwiseAbs().sum();
  double bscale = m > 0 ? lp.b.cwiseAbs().maxCoeff() : 0.0;
  if (infeas > 1e-9 * (1.0 + bscale)) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  for (int i = 0; i < m; ++i) {
    int a = n + m + i;
    tb.up(a) = 0;
    tb.x(a) = 0;
  }
  tb.recomputeBasic();

  Vec cost = Vec::Zero(tb.N);
  cost.head(n) = lp.c;
  st = tb.run(cost, res.iterations, maxIter);
  res.status = st;
  if (st != LpStatus::Optimal) return res;
  tb.recomputeBasic();

  res.x = tb.x.head(n);
  for (int j = 0; j < n; ++j) {
    if (res.x(j) < lp.lower(j)) res.x(j) = lp.lower(j);
    if (res.x(j) > lp.upper(j)) res.x(j) = lp.upper(j);
  }
  res.objective = lp.c.dot(res.x);
  Vec cb(m);
  for (int i = 0; i < m; ++i) cb(i) = cost(tb.basis[i]);
  res.y = tb.basisInverse().transpose() * cb;
  res.reduced = lp.c - lp.A.transpose() * res.y;
  res.dualObjective = lp.b.dot(res.y);
  for (int j = 0; j < n; ++j) {
    double d = res.reduced(j);
    if (std::abs(d) <= kCostTol) continue;
    res.dualObjective += d > 0 ? d * lp.lower(j) : d * lp.upper(j);
  }
  return res;
}

BatterySolution solveBatteryLp(const BatteryLp& prob) {
  prob.battery.validate();
  const auto& bp = prob.battery;
  const int T = static_cast<int>(prob.lambda.size());
  if (T < 1) throw ValidationError("battery LP: empty horizon");
  if (!prob.lambda.allFinite()) throw ValidationError("battery LP: non-finite multipliers");

  // Variables: Pb (0..T-1), C (T..2T-1), and for the second stage u (2T..3T-1).
  const int nv = 3 * T;
  const int rows = T + (T - 1) + 2 * T + 1;
  LpProblem lp;
  lp.A = Mat::Zero(rows, nv);
  lp.b = Vec::Zero(rows);
  lp.rows.assign(rows, RowType::Equal);
  lp.lower = Vec::Zero(nv);
  lp.upper = Vec::Zero(nv);
  for (int t = 0; t < T; ++t) {
    lp.lower(t) = bp.PbMin;
    lp.upper(t) = bp.PbMax;
    lp.lower(T + t) = 0;
    lp.upper(T + t) = bp.Cmax;
    lp.lower(2 * T + t) = 0;
    lp.upper(2 * T + t) = kInf;
  }
  lp.lower(0) = std::max(bp.PbMin, -bp.varpi * bp.C0);
  int row = 0;
  for (int t = 0; t < T; ++t, ++row) {
    lp.A(row, T + t) = 1;
    lp.A(row, t) = -1;
    if (t == 0)
      lp.b(row) = bp.C0;
    else
      lp.A(row, T + t - 1) = -1;
  }
  for (int t = 1; t < T; ++t, ++row) {
    lp.A(row, t) = 1;
    lp.A(row, T + t - 1) = bp.varpi;
    lp.rows[row] = RowType::GreaterEqual;
  }
  const int absRows = row;
  for (int t = 0; t < T; ++t) {
    lp.A(absRows + 2 * t, 2 * T + t) = 1;
    lp.A(absRows + 2 * t, t) = -1;
    lp.A(absRows + 2 * t + 1, 2 * T + t) = 1;
    lp.A(absRows + 2 * t + 1, t) = 1;
    lp.rows[absRows + 2 * t] = RowType::GreaterEqual;
    lp.rows[absRows + 2 * t + 1] = RowType::GreaterEqual;
  }
  const int capRow = absRows + 2 * T;
  lp.A.row(capRow).head(T) = prob.lambda.transpose();
  lp.rows[capRow] = RowType::LessEqual;

  // Stage 1 uses the storage rows only.
  LpProblem first;
  first.c = Vec::Zero(2 * T);
  first.c.head(T) = prob.lambda;
  first.A = lp.A.topLeftCorner(absRows, 2 * T);
  first.b = lp.b.head(absRows);
  first.rows.assign(lp.rows.begin(), lp.rows.begin() + absRows);
  first.lower = lp.lower.head(2 * T);
  first.upper = lp.upper.head(2 * T);
  auto r1 = denseSimplex(first);
  if (r1.status != LpStatus::Optimal)
    throw NumericalFailure(std::string("battery LP: first stage ") + statusName(r1.status));

  lp.b(capRow) = r1.objective + 1e-12 * (1.0 + std::abs(r1.objective));
  lp.c = Vec::Zero(nv);
  lp.c.tail(T).setOnes();
  auto r2 = denseSimplex(lp);

  BatterySolution out;
  out.dualObjective = r1.dualObjective;
  out.iterations = r1.iterations;
  Vec x = r1.x;
  if (r2.status == LpStatus::Optimal) {
    x = r2.x.head(2 * T);
    out.iterations += r2.iterations;
  }
  out.Pb = x.head(T);
  // Storage follows the dynamics exactly.
  out.C = Vec(T);
  double c = bp.C0;
  for (int t = 0; t < T; ++t) {
    c += out.Pb(t);
    out.C(t) = c;
  }
  out.objective = prob.lambda.dot(out.Pb);
  return out;
}

double batteryResidual(const Vec& Pb, const Vec& C, const BatteryParams& b) {
  double worst = 0;
  double prev = b.C0;
  for (int t = 0; t < Pb.size(); ++t) {
    worst = std::max(worst, std::abs(C(t) - prev - Pb(t)));
    worst = std::max(worst, -C(t));
    worst = std::max(worst, C(t) - b.Cmax);
    worst = std::max(worst, b.PbMin - Pb(t));
    worst = std::max(worst, Pb(t) - b.PbMax);
    worst = std::max(worst, -b.varpi * prev - Pb(t));
    prev = C(t);
  }
  return worst;
}

}  // namespace smartcomp
