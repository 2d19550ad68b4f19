// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <random>
#include <variant>

#include "smartcomp/common.hpp"

namespace smartcomp {

/// Consecutive slots whose summed harvest is bounded; either bound may be
/// omitted.
struct SubHorizon {
  std::vector<int> slots;
  std::optional<double> minSum;
  std::optional<double> maxSum;
};

/// Box per slot plus per-sub-horizon sum bounds.
struct PolyhedralSet {
  Vec lower;
  Vec upper;
  std::vector<SubHorizon> subHorizons;  // partition of 0..T-1

  int slots() const { return static_cast<int>(lower.size()); }
  void validate() const;
  bool contains(const Vec& e, double tol = 1e-9) const;

  /// Single sub-horizon covering every slot.
  static PolyhedralSet withTotalBounds(Vec lower, Vec upper, std::optional<double> minSum,
                                       std::optional<double> maxSum);
};

/// { center + s : s' shape^{-1} s <= 1 } with shape symmetric positive definite.
struct EllipsoidalSet {
  Vec center;
  Mat shape;

  int slots() const { return static_cast<int>(center.size()); }
  void validate() const;
  bool contains(const Vec& e, double tol = 1e-9) const;
};

/// Degenerate one-point set.
struct SingletonSet {
  Vec point;
  int slots() const { return static_cast<int>(point.size()); }
};

using UncertaintySet = std::variant<PolyhedralSet, EllipsoidalSet, SingletonSet>;

int slotsOf(const UncertaintySet& set);
void validateSet(const UncertaintySet& set);
bool setContains(const UncertaintySet& set, const Vec& e, double tol = 1e-9);

struct WorstCaseEnergy {
  Vec energy;    // maximizer e*
  double value;  // sum_t psi|p-e*| + phi(p-e*)
};

inline constexpr int kDefaultPatternCap = 16;

/// Exact maximizer of the transaction cost over the set. Enumerates the 2^T
/// sign patterns of |p - e|; each pattern is a linear program over the set
/// solved in closed form. Among equal maximizers the lexicographically
/// smallest e* is returned.
WorstCaseEnergy worstCaseEnergy(const UncertaintySet& set, const Vec& p, const PriceCurve& prices,
                                int patternCap = kDefaultPatternCap);

/// Same computation; kept as a named entry point for the enumeration itself.
WorstCaseEnergy signPatternMaximize(const UncertaintySet& set, const Vec& p,
                                    const PriceCurve& prices, int patternCap = kDefaultPatternCap);

enum class Sense { Maximize, Minimize };

/// Exact vertex solution of  opt c'e  s.t.  lower <= e <= upper and the
/// sub-horizon sum bounds. Within a sub-horizon coordinates start at their
/// preferred bound and are then moved in order of least objective loss until
/// the violated sum bound is met. Ties move the coordinate that keeps e
/// lexicographically smallest.
Vec greedyBoxSumLp(const Vec& c, const PolyhedralSet& set, Sense sense = Sense::Maximize);

/// e = lower + kappa * U .* (upper - lower), U iid uniform on [0,1].
Vec sampleRealization(const PolyhedralSet& set, double kappa, std::mt19937_64& rng);

}  // namespace smartcomp
