// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/cost.hpp"

#include <cmath>

namespace smartcomp {

double transactionCost(const Vec& p, const Vec& e, const PriceCurve& prices) {
  if (p.size() != e.size() || p.size() != prices.slots())
    throw ValidationError("transactionCost: length mismatch");
  double v = 0;
  for (int t = 0; t < p.size(); ++t) {
    double d = p(t) - e(t);
    v += d >= 0 ? prices.alpha[t] * d : prices.beta[t] * d;
  }
  return v;
}

double transactionCostPsiPhi(const Vec& p, const Vec& e, const PriceCurve& prices) {
  if (p.size() != e.size() || p.size() != prices.slots())
    throw ValidationError("transactionCost: length mismatch");
  double v = 0;
  for (int t = 0; t < p.size(); ++t) {
    double d = p(t) - e(t);
    v += prices.psi(t) * std::abs(d) + prices.phi(t) * d;
  }
  return v;
}

CostEval worstCost(const Vec& p, const UncertaintySet& set, const PriceCurve& prices) {
  auto wc = worstCaseEnergy(set, p, prices);
  CostEval out;
  out.eStar = std::move(wc.energy);
  out.value = transactionCost(p, out.eStar, prices);
  return out;
}

CostEval tildeGSubgradient(const Vec& p, const Vec& lambda, const UncertaintySet& set,
                           const PriceCurve& prices) {
  if (lambda.size() != p.size()) throw ValidationError("tildeGSubgradient: lambda length mismatch");
  CostEval out = worstCost(p, set, prices);
  out.subgrad.resize(p.size());
  for (int t = 0; t < p.size(); ++t)
    out.subgrad(t) = (p(t) >= out.eStar(t) ? prices.alpha[t] : prices.beta[t]) - lambda(t);
  out.value -= lambda.dot(p);
  return out;
}

}  // namespace smartcomp
