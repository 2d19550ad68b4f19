#include "doctest.h"

#include <limits>
#include <random>

#include "smartcomp/conic.hpp"
#include "smartcomp/lp.hpp"

using namespace smartcomp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BatteryParams tableBattery() { return {5, 30, -10, 10, 0.95}; }

// Exhaustive search over a uniform grid of storage levels.
double gridOracle(const Vec& lambda, const BatteryParams& b, int points) {
  const int T = static_cast<int>(lambda.size());
  const double h = b.Cmax / (points - 1);
  std::vector<double> best(points, kInf), next(points);
  // First slot from the fixed initial level.
  for (int g = 0; g < points; ++g) {
    double pb = g * h - b.C0;
    if (pb < b.PbMin - 1e-12 || pb > b.PbMax + 1e-12 || pb < -b.varpi * b.C0 - 1e-12) continue;
    best[g] = lambda(0) * pb;
  }
  for (int t = 1; t < T; ++t) {
    std::fill(next.begin(), next.end(), kInf);
    for (int g = 0; g < points; ++g) {
      if (std::isinf(best[g])) continue;
      double c = g * h;
      int lo = std::max(0, static_cast<int>(std::floor((c + std::max(b.PbMin, -b.varpi * c)) / h)) - 1);
      int hi = std::min(points - 1, static_cast<int>(std::ceil((c + b.PbMax) / h)) + 1);
      for (int q = lo; q <= hi; ++q) {
        double pb = q * h - c;
        if (pb < b.PbMin - 1e-12 || pb > b.PbMax + 1e-12 || pb < -b.varpi * c - 1e-12) continue;
        next[q] = std::min(next[q], best[g] + lambda(t) * pb);
      }
    }
    best.swap(next);
  }
  return *std::min_element(best.begin(), best.end());
}

// Same problem with C eliminated, solved by the conic interior point method.
double conicBattery(const Vec& lambda, const BatteryParams& b) {
  const int T = static_cast<int>(lambda.size());
  // Rows per slot: Pb <= PbMax, -Pb <= -PbMin, C <= Cmax, -C <= 0, -Pb - varpi C_prev <= 0.
  conic::ConeSpec spec{5 * T, {}};
  std::vector<conic::ConeVec> cols(T, conic::ConeVec::zeros(spec));
  conic::ConeVec h = conic::ConeVec::zeros(spec);
  for (int t = 0; t < T; ++t) {
    int r = 5 * t;
    cols[t].lp(r) = 1;
    h.lp(r) = b.PbMax;
    cols[t].lp(r + 1) = -1;
    h.lp(r + 1) = -b.PbMin;
    for (int s = 0; s <= t; ++s) {
      cols[s].lp(r + 2) = 1;
      cols[s].lp(r + 3) = -1;
    }
    h.lp(r + 2) = b.Cmax - b.C0;
    h.lp(r + 3) = b.C0;
    cols[t].lp(r + 4) = -1;
    for (int s = 0; s < t; ++s) cols[s].lp(r + 4) -= b.varpi;
    h.lp(r + 4) = b.varpi * b.C0;
  }
  conic::DenseConicOperator op(spec, cols);
  auto res = conic::ipmSolve(op, lambda, h);
  REQUIRE(res.status == conic::IpmStatus::Optimal);
  return res.pcost;
}

}  // namespace

TEST_CASE("simplex: bounded single variable") {
  LpProblem lp;
  lp.c = Vec::Ones(1);
  lp.A = Mat::Zero(0, 1);
  lp.b = Vec::Zero(0);
  lp.lower = Vec::Zero(1);
  lp.upper = Vec::Ones(1);
  auto r = denseSimplex(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(r.x(0) == doctest::Approx(0.0));
}

TEST_CASE("simplex: textbook LP with duals") {
  // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3, x, y >= 0 -> (3, 1), value 11.
  LpProblem lp;
  lp.c = Vec(2);
  lp.c << -3, -2;
  lp.A = Mat(2, 2);
  lp.A << 1, 1, 1, 3;
  lp.b = Vec(2);
  lp.b << 4, 6;
  lp.rows = {RowType::LessEqual, RowType::LessEqual};
  lp.lower = Vec::Zero(2);
  lp.upper = Vec(2);
  lp.upper << 3, kInf;
  auto r = denseSimplex(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x(0) == doctest::Approx(3.0));
  CHECK(r.x(1) == doctest::Approx(1.0));
  CHECK(r.objective == doctest::Approx(-11.0));
  CHECK(r.dualObjective == doctest::Approx(-11.0).epsilon(1e-12));
  CHECK((lp.c - lp.A.transpose() * r.y - r.reduced).norm() < 1e-12);
}

TEST_CASE("simplex: infeasible and unbounded statuses") {
  LpProblem lp;
  lp.c = Vec::Ones(1);
  lp.A = Mat::Ones(1, 1);
  lp.b = Vec::Constant(1, 2.0);
  lp.rows = {RowType::GreaterEqual};
  lp.lower = Vec::Zero(1);
  lp.upper = Vec::Ones(1);
  CHECK(denseSimplex(lp).status == LpStatus::Infeasible);

  lp.c = -Vec::Ones(1);
  lp.upper = Vec::Constant(1, kInf);
  CHECK(denseSimplex(lp).status == LpStatus::Unbounded);
}

TEST_CASE("simplex: equal costs give a deterministic vertex") {
  // min x + y  s.t. x + y >= 1: every point of the segment is optimal.
  LpProblem lp;
  lp.c = Vec::Ones(2);
  lp.A = Mat::Ones(1, 2);
  lp.b = Vec::Ones(1);
  lp.rows = {RowType::GreaterEqual};
  lp.lower = Vec::Zero(2);
  lp.upper = Vec::Constant(2, kInf);
  auto a = denseSimplex(lp);
  auto b = denseSimplex(lp);
  REQUIRE(a.status == LpStatus::Optimal);
  CHECK(a.objective == doctest::Approx(1.0));
  CHECK(a.x == b.x);
  CHECK(std::min(a.x(0), a.x(1)) == 0.0);
}

TEST_CASE("battery LP: zero prices keep the battery idle") {
  BatteryLp p{Vec::Zero(8), tableBattery()};
  auto s = solveBatteryLp(p);
  CHECK(s.objective == doctest::Approx(0.0));
  CHECK(s.Pb.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(batteryResidual(s.Pb, s.C, p.battery) < 1e-9);
}

TEST_CASE("battery LP: single negative price charges to the limit") {
  BatteryLp p{Vec::Constant(1, -1.0), tableBattery()};
  auto s = solveBatteryLp(p);
  CHECK(s.Pb(0) == doctest::Approx(10.0));
  CHECK(s.C(0) == doctest::Approx(15.0));
}

TEST_CASE("battery LP: positive prices discharge as fast as allowed") {
  BatteryLp p{Vec::Ones(3), tableBattery()};
  auto s = solveBatteryLp(p);
  // Each slot releases at most 0.95 of the stored energy: 5 -> 0.25 -> 0.0125 -> 0.000625.
  CHECK(s.Pb(0) == doctest::Approx(-4.75));
  CHECK(s.C(2) == doctest::Approx(0.000625).epsilon(1e-9));
  CHECK(s.objective == doctest::Approx(-4.999375).epsilon(1e-10));
  CHECK(s.objective == doctest::Approx(gridOracle(p.lambda, p.battery, 10001)).epsilon(1e-3));
}

TEST_CASE("battery LP: grid oracle and duality on random prices") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 6; ++trial) {
    int T = 1 + trial % 3;
    Vec lambda(T);
    for (int t = 0; t < T; ++t) lambda(t) = u(rng);
    BatteryLp p{lambda, tableBattery()};
    auto s = solveBatteryLp(p);
    CAPTURE(trial);
    CHECK(batteryResidual(s.Pb, s.C, p.battery) <= 1e-9);
    CHECK(std::abs(s.objective - s.dualObjective) <= 1e-9 * (1 + std::abs(s.objective)));
    double grid = gridOracle(lambda, p.battery, 10001);
    CHECK(grid >= s.objective - 1e-3);
    CHECK(grid - s.objective <= 0.05);
  }
}

TEST_CASE("battery LP: agrees with the interior point method") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int T : {4, 8, 16}) {
    Vec lambda(T);
    for (int t = 0; t < T; ++t) lambda(t) = u(rng);
    BatteryParams b = tableBattery();
    b.varpi = 0.8;
    auto s = solveBatteryLp({lambda, b});
    CAPTURE(T);
    CHECK(s.objective == doctest::Approx(conicBattery(lambda, b)).epsilon(1e-7));
    CHECK(batteryResidual(s.Pb, s.C, b) <= 1e-9);
  }
}

TEST_CASE("battery LP: tie-break picks the smallest total throughput") {
  // Zero-price middle slots admit charge/discharge cycles at no cost; none should appear.
  Vec lambda(4);
  lambda << -1, 0, 0, 1;
  auto s = solveBatteryLp({lambda, tableBattery()});
  CHECK(s.objective == doctest::Approx(-20.0));
  CHECK(s.Pb(0) == doctest::Approx(10.0));
  CHECK(std::abs(s.Pb(1)) < 1e-9);
  CHECK(std::abs(s.Pb(2)) < 1e-9);
  CHECK(s.Pb(3) == doctest::Approx(-10.0));
}
