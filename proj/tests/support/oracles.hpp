// Independent reference computations shared by the unit and acceptance suites.
#pragma once

#include <cmath>
#include <limits>
#include <random>

#include "smartcomp/cost.hpp"
#include "smartcomp/uncertainty.hpp"

namespace smartcomp::oracle {

// Maximum of the transaction cost over every vertex of a polyhedral set,
// found by intersecting T of its bounding hyperplanes at a time.
inline double vertexMaximum(const PolyhedralSet& set, const Vec& p, const PriceCurve& prices) {
  const int T = set.slots();
  std::vector<Vec> a;
  std::vector<double> b;
  for (int t = 0; t < T; ++t) {
    Vec e = Vec::Zero(T);
    e(t) = 1;
    a.push_back(e);
    b.push_back(set.upper(t));
    a.push_back(-e);
    b.push_back(-set.lower(t));
  }
  for (const auto& h : set.subHorizons) {
    Vec s = Vec::Zero(T);
    for (int t : h.slots) s(t) = 1;
    if (h.maxSum) {
      a.push_back(s);
      b.push_back(*h.maxSum);
    }
    if (h.minSum) {
      a.push_back(-s);
      b.push_back(-*h.minSum);
    }
  }
  const int m = static_cast<int>(a.size());
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> pick(T);
  // Enumerate T-subsets in lexicographic order.
  for (int j = 0; j < T; ++j) pick[j] = j;
  while (true) {
    Mat A(T, T);
    Vec rhs(T);
    for (int j = 0; j < T; ++j) {
      A.row(j) = a[pick[j]].transpose();
      rhs(j) = b[pick[j]];
    }
    Eigen::FullPivLU<Mat> lu(A);
    if (lu.rank() == T) {
      Vec e = lu.solve(rhs);
      bool feasible = true;
      for (int c = 0; c < m && feasible; ++c)
        if (a[c].dot(e) > b[c] + 1e-9 * (1 + std::abs(b[c]))) feasible = false;
      if (feasible) best = std::max(best, transactionCost(p, e, prices));
    }
    int j = T - 1;
    while (j >= 0 && pick[j] == m - T + j) --j;
    if (j < 0) break;
    ++pick[j];
    for (int q = j + 1; q < T; ++q) pick[q] = pick[q - 1] + 1;
  }
  return best;
}

// Random box with one or two sub-horizons and random optional sum bounds,
// guaranteed nonempty.
inline PolyhedralSet randomPolyhedralSet(int T, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 10), f(0, 1);
  PolyhedralSet s;
  s.lower = Vec(T);
  s.upper = Vec(T);
  for (int t = 0; t < T; ++t) {
    double x = u(rng), y = u(rng);
    s.lower(t) = std::min(x, y);
    s.upper(t) = std::max(x, y) + 0.1;
  }
  int split = T > 1 && f(rng) < 0.5 ? 1 + static_cast<int>(f(rng) * (T - 1)) : T;
  for (int part = 0; part < (split < T ? 2 : 1); ++part) {
    SubHorizon h;
    int from = part == 0 ? 0 : split, to = part == 0 ? split : T;
    double lo = 0, hi = 0;
    for (int t = from; t < to; ++t) {
      h.slots.push_back(t);
      lo += s.lower(t);
      hi += s.upper(t);
    }
    double a = lo + f(rng) * (hi - lo), b = lo + f(rng) * (hi - lo);
    if (f(rng) < 0.6) h.minSum = std::min(a, b);
    if (f(rng) < 0.8) h.maxSum = std::max(a, b);
    s.subHorizons.push_back(h);
  }
  return s;
}

inline PriceCurve randomPrices(int T, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 2), f(0, 0.95);
  PriceCurve p;
  for (int t = 0; t < T; ++t) {
    double a = u(rng);
    p.alpha.push_back(a);
    p.beta.push_back(f(rng) * a);
  }
  return p;
}

}  // namespace smartcomp::oracle
