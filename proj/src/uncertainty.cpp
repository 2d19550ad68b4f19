// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smartcomp {

namespace {

std::vector<std::vector<int>> partitionOf(const PolyhedralSet& set) {
  std::vector<std::vector<int>> parts;
  if (set.subHorizons.empty()) {
    std::vector<int> all(set.slots());
    std::iota(all.begin(), all.end(), 0);
    parts.push_back(std::move(all));
  } else {
    for (const auto& s : set.subHorizons) parts.push_back(s.slots);
  }
  return parts;
}

}  // namespace

void PolyhedralSet::validate() const {
  const int T = slots();
  if (T < 1) throw ValidationError("polyhedral set: no slots");
  if (upper.size() != T) throw ValidationError("polyhedral set: lower/upper lengths differ");
  for (int t = 0; t < T; ++t) {
    if (!std::isfinite(lower(t)) || !std::isfinite(upper(t)))
      throw ValidationError("polyhedral set: non-finite bound");
    if (lower(t) > upper(t))
      throw ValidationError("polyhedral set: lower exceeds upper at slot " + std::to_string(t + 1));
  }
  if (subHorizons.empty()) return;
  std::vector<int> seen(T, 0);
  for (const auto& s : subHorizons) {
    if (s.slots.empty()) throw ValidationError("polyhedral set: empty sub-horizon");
    double lo = 0, hi = 0;
    for (int t : s.slots) {
      if (t < 0 || t >= T) throw ValidationError("polyhedral set: sub-horizon slot out of range");
      ++seen[t];
      lo += lower(t);
      hi += upper(t);
    }
    if (s.minSum && s.maxSum && *s.minSum > *s.maxSum)
      throw ValidationError("polyhedral set: sub-horizon min sum exceeds max sum");
    if (s.maxSum && lo > *s.maxSum + 1e-12 * (1 + std::abs(lo)))
      throw ValidationError("polyhedral set: empty (sum of lower bounds exceeds max sum)");
    if (s.minSum && hi < *s.minSum - 1e-12 * (1 + std::abs(hi)))
      throw ValidationError("polyhedral set: empty (sum of upper bounds below min sum)");
  }
  for (int t = 0; t < T; ++t)
    if (seen[t] != 1)
      throw ValidationError("polyhedral set: sub-horizons do not partition the horizon");
}

bool PolyhedralSet::contains(const Vec& e, double tol) const {
  if (e.size() != slots()) return false;
  for (int t = 0; t < slots(); ++t)
    if (e(t) < lower(t) - tol || e(t) > upper(t) + tol) return false;
  for (const auto& s : subHorizons) {
    double sum = 0;
    for (int t : s.slots) sum += e(t);
    if (s.minSum && sum < *s.minSum - tol) return false;
    if (s.maxSum && sum > *s.maxSum + tol) return false;
  }
  return true;
}

PolyhedralSet PolyhedralSet::withTotalBounds(Vec lower, Vec upper, std::optional<double> minSum,
                                             std::optional<double> maxSum) {
  PolyhedralSet s;
  const int T = static_cast<int>(lower.size());
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  SubHorizon h;
  h.slots.resize(T);
  std::iota(h.slots.begin(), h.slots.end(), 0);
  h.minSum = minSum;
  h.maxSum = maxSum;
  s.subHorizons.push_back(std::move(h));
  return s;
}

void EllipsoidalSet::validate() const {
  const int T = slots();
  if (T < 1) throw ValidationError("ellipsoidal set: no slots");
  if (shape.rows() != T || shape.cols() != T)
    throw ValidationError("ellipsoidal set: shape matrix has wrong size");
  if ((shape - shape.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, shape.cwiseAbs().maxCoeff()))
    throw ValidationError("ellipsoidal set: shape matrix not symmetric");
  Eigen::LLT<Mat> llt(shape);
  if (llt.info() != Eigen::Success)
    throw ValidationError("ellipsoidal set: shape matrix not positive definite");
}

bool EllipsoidalSet::contains(const Vec& e, double tol) const {
  if (e.size() != slots()) return false;
  Vec s = e - center;
  double q = s.dot(shape.ldlt().solve(s));
  return q <= 1.0 + tol;
}

int slotsOf(const UncertaintySet& set) {
  return std::visit([](const auto& s) { return s.slots(); }, set);
}

void validateSet(const UncertaintySet& set) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SingletonSet>) {
          if (s.slots() < 1) throw ValidationError("singleton set: no slots");
          if (!s.point.allFinite()) throw ValidationError("singleton set: non-finite point");
        } else {
          s.validate();
        }
      },
      set);
}

bool setContains(const UncertaintySet& set, const Vec& e, double tol) {
  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SingletonSet>) {
          return e.size() == s.point.size() && (e - s.point).cwiseAbs().maxCoeff() <= tol;
        } else {
          return s.contains(e, tol);
        }
      },
      set);
}

Vec greedyBoxSumLp(const Vec& cIn, const PolyhedralSet& set, Sense sense) {
  const int T = set.slots();
  if (cIn.size() != T) throw ValidationError("greedyBoxSumLp: cost length mismatch");
  const Vec c = sense == Sense::Maximize ? cIn : Vec(-cIn);
  Vec e(T);
  for (int t = 0; t < T; ++t) e(t) = c(t) > 0 ? set.upper(t) : set.lower(t);

  auto parts = partitionOf(set);
  for (std::size_t s = 0; s < parts.size(); ++s) {
    const auto& slots = parts[s];
    std::optional<double> minSum, maxSum;
    if (!set.subHorizons.empty()) {
      minSum = set.subHorizons[s].minSum;
      maxSum = set.subHorizons[s].maxSum;
    }
    double sum = 0;
    for (int t : slots) sum += e(t);
    double lo = 0, hi = 0;
    for (int t : slots) {
      lo += set.lower(t);
      hi += set.upper(t);
    }
    if ((maxSum && lo > *maxSum + 1e-12 * (1 + std::abs(lo))) ||
        (minSum && hi < *minSum - 1e-12 * (1 + std::abs(hi))))
      throw ValidationError("greedyBoxSumLp: infeasible bounds");

    if (maxSum && sum > *maxSum) {
      // Lower the cheapest coordinates first; on ties, the earliest slot.
      std::vector<int> order(slots);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (c(a) != c(b)) return c(a) < c(b);
        return a < b;
      });
      double excess = sum - *maxSum;
      for (int t : order) {
        if (excess <= 0) break;
        double room = e(t) - set.lower(t);
        double d = std::min(room, excess);
        e(t) -= d;
        excess -= d;
      }
    } else if (minSum && sum < *minSum) {
      // Raise the most valuable coordinates first; on ties, the latest slot.
      std::vector<int> order(slots);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (c(a) != c(b)) return c(a) > c(b);
        return a > b;
      });
      double deficit = *minSum - sum;
      for (int t : order) {
        if (deficit <= 0) break;
        double room = set.upper(t) - e(t);
        double d = std::min(room, deficit);
        e(t) += d;
        deficit -= d;
      }
    }
  }
  return e;
}

namespace {

double costObjective(const Vec& p, const Vec& e, const PriceCurve& prices) {
  double v = 0;
  for (int t = 0; t < p.size(); ++t) {
    double d = p(t) - e(t);
    v += prices.psi(t) * std::abs(d) + prices.phi(t) * d;
  }
  return v;
}

bool lexLess(const Vec& a, const Vec& b) {
  for (int t = 0; t < a.size(); ++t) {
    if (a(t) < b(t)) return true;
    if (a(t) > b(t)) return false;
  }
  return false;
}

}  // namespace

WorstCaseEnergy signPatternMaximize(const UncertaintySet& set, const Vec& p,
                                    const PriceCurve& prices, int patternCap) {
  const int T = slotsOf(set);
  if (p.size() != T) throw ValidationError("worstCaseEnergy: power vector length mismatch");
  if (prices.slots() != T) throw ValidationError("worstCaseEnergy: price length mismatch");
  if (!p.allFinite()) throw ValidationError("worstCaseEnergy: non-finite power vector");

  if (const auto* single = std::get_if<SingletonSet>(&set)) {
    return {single->point, costObjective(p, single->point, prices)};
  }
  if (T > patternCap)
    throw ValidationError("worstCaseEnergy: horizon " + std::to_string(T) +
                          " exceeds sign-pattern cap " + std::to_string(patternCap));

  Vec weights(T);
  Vec best;
  double bestValue = -std::numeric_limits<double>::infinity();
  const unsigned long patterns = 1ul << T;
  for (unsigned long mask = 0; mask < patterns; ++mask) {
    // Bit t set: buy-side branch psi + phi = alpha^t; clear: sell side beta^t.
    for (int t = 0; t < T; ++t)
      weights(t) = (mask >> t & 1ul) ? prices.alpha[t] : prices.beta[t];
    Vec e;
    if (const auto* poly = std::get_if<PolyhedralSet>(&set)) {
      e = greedyBoxSumLp(-weights, *poly, Sense::Maximize);
    } else {
      const auto& ell = std::get<EllipsoidalSet>(set);
      Vec sw = ell.shape * weights;
      double norm = std::sqrt(std::max(0.0, weights.dot(sw)));
      e = norm > 0 ? Vec(ell.center - sw / norm) : ell.center;
    }
    double v = costObjective(p, e, prices);
    double tol = 1e-12 * (1.0 + std::abs(v));
    if (v > bestValue + tol || (v >= bestValue - tol && lexLess(e, best))) {
      if (v > bestValue) bestValue = v;
      best = std::move(e);
    }
  }
  return {best, costObjective(p, best, prices)};
}

WorstCaseEnergy worstCaseEnergy(const UncertaintySet& set, const Vec& p, const PriceCurve& prices,
                                int patternCap) {
  return signPatternMaximize(set, p, prices, patternCap);
}

Vec sampleRealization(const PolyhedralSet& set, double kappa, std::mt19937_64& rng) {
  if (kappa < 0.0 || kappa > 1.0) throw ValidationError("sampleRealization: kappa outside [0,1]");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec e(set.slots());
  for (int t = 0; t < set.slots(); ++t)
    e(t) = set.lower(t) + kappa * unif(rng) * (set.upper(t) - set.lower(t));
  return e;
}

}  // namespace smartcomp
