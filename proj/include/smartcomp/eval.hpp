// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>

#include "smartcomp/coordinator.hpp"
#include "smartcomp/extraction.hpp"

namespace smartcomp {

struct EvalConfig {
  int nChannelRealizations = 5000;
  int nResRealizations = 100000;
  std::vector<double> kappas{0.01, 0.1, 0.5};
  std::uint64_t seed = 1;

  void validate() const;
};

/// Empirical CDF: sorted samples, probability (j+1)/n at sample j.
struct CdfTable {
  std::vector<double> values;
  std::vector<double> probs;

  static CdfTable fromSamples(std::vector<double> samples);
  std::size_t size() const { return values.size(); }
  double at(double x) const;  // fraction of samples <= x
  double mean() const;
};

/// sup_x |F_n(x) - F(x)|, evaluated at the jumps of F_n.
double ksStatistic(const CdfTable& table, const std::function<double(double)>& cdf);

/// Kolmogorov bound c(a)/sqrt(n) at level 0.01.
double ksCritical(std::size_t n);

struct SinrReport {
  std::vector<CdfTable> perUser;  // pooled over slots and realizations
  std::vector<double> userViolation;
  double violationRate = 0;       // over all (realization, user, slot)
  double gamma = 0;               // common threshold when all users share one, else 0
};

/// Perturbs every channel by a complex Gaussian rescaled to ||delta|| = epsilon
/// and evaluates the SINR with the schedule's beamformers. A sample violates
/// when SINR < gamma (1 - 1e-9).
SinrReport sinrCdf(const Schedule& schedule, const ProblemInstance& inst, const EvalConfig& cfg);

SolveResult solveNonRobustBaseline(const ProblemInstance& inst, CoordinatorOptions opt = {});

/// Every polyhedral renewable set replaced by the point (lower + upper)/2.
ProblemInstance heuristicInstance(const ProblemInstance& inst);
SolveResult solveHeuristicBaseline(const ProblemInstance& inst, const CoordinatorOptions& opt = {});

struct CostReport {
  std::vector<double> kappas;
  std::vector<CdfTable> tables;  // total cluster cost per kappa
  std::vector<double> means;
  double worstCase = 0;          // sum_i G_i(P_i) of the schedule
  double maxExcess = 0;          // max sample cost - worstCase, <= 0 when dominated
};

/// Realized cluster cost sum_i transactionCost(P_i, E~_i) with
/// E~ = lower + kappa U (upper - lower). Samples for kappa index q use the
/// generator seeded with seed + q, so two schedules see the same draws.
CostReport costCdf(const Schedule& schedule, const ProblemInstance& inst, const EvalConfig& cfg);

/// Paired comparison: fraction of draws in which cost(a) <= cost(b), per kappa.
std::vector<double> pairedDominance(const Schedule& a, const Schedule& b, const ProblemInstance& inst,
                                    const EvalConfig& cfg);

struct PriceProfile {
  Vec total;               // sum_i P_i^t
  int argmin = -1;         // 0-based slot
  bool checkSkipped = false;  // flat prices give no slot preference
  bool inExpected = false;    // argmin in {3, 4, 5}, i.e. slots 4..6
};

PriceProfile priceResponseProfile(const Schedule& schedule, const PriceCurve& prices);

void writeCdfCsv(std::ostream& os, const std::vector<std::string>& labels, const std::vector<CdfTable>& tables);

}  // namespace smartcomp
