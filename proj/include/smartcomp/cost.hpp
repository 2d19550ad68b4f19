// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "smartcomp/common.hpp"
#include "smartcomp/uncertainty.hpp"

namespace smartcomp {

struct CostEval {
  double value = 0;
  Vec eStar;
  Vec subgrad;  // empty unless requested through tildeGSubgradient
};

/// sum_t alpha^t [p-e]^+ - beta^t [p-e]^-
double transactionCost(const Vec& p, const Vec& e, const PriceCurve& prices);

/// Same quantity in the psi/phi form; used to cross-check the two forms.
double transactionCostPsiPhi(const Vec& p, const Vec& e, const PriceCurve& prices);

/// max over the set of transactionCost(p, e).
CostEval worstCost(const Vec& p, const UncertaintySet& set, const PriceCurve& prices);

/// Worst cost plus a subgradient of G(p) - lambda'p. Entry t is
/// alpha^t - lambda^t when p^t >= e*^t (the kink goes to the buy side),
/// beta^t - lambda^t otherwise. The returned value includes -lambda'p.
CostEval tildeGSubgradient(const Vec& p, const Vec& lambda, const UncertaintySet& set,
                           const PriceCurve& prices);

}  // namespace smartcomp
