// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "smartcomp/cost.hpp"

namespace smartcomp {

void EvalConfig::validate() const {
  if (nChannelRealizations < 1 || nResRealizations < 1)
    throw ValidationError("eval: realization counts must be at least 1");
  for (double k : kappas)
    if (!(k >= 0 && k <= 1)) throw ValidationError("eval: kappa must lie in [0, 1]");
}

CdfTable CdfTable::fromSamples(std::vector<double> samples) {
  CdfTable t;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  t.probs.resize(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) t.probs[j] = (j + 1) / n;
  if (!t.probs.empty()) t.probs.back() = 1.0;
  t.values = std::move(samples);
  return t;
}

double CdfTable::at(double x) const {
  if (values.empty()) return 0;
  auto it = std::upper_bound(values.begin(), values.end(), x);
  return static_cast<double>(it - values.begin()) / values.size();
}

double CdfTable::mean() const {
  if (values.empty()) return 0;
  return std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

double ksStatistic(const CdfTable& table, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(table.size());
  double d = 0;
  for (std::size_t j = 0; j < table.size(); ++j) {
    double f = cdf(table.values[j]);
    d = std::max({d, (j + 1) / n - f, f - j / n});
  }
  return d;
}

double ksCritical(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

SinrReport sinrCdf(const Schedule& schedule, const ProblemInstance& inst, const EvalConfig& cfg) {
  cfg.validate();
  if (!schedule.hasBeamformers()) throw ValidationError("sinrCdf: schedule has no extracted beamformers");
  const auto& d = inst.dims;
  const int N = d.beamLength();
  SinrReport rep;
  std::vector<std::vector<double>> samples(d.K);
  std::vector<long> violations(d.K, 0);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  rep.gamma = inst.channel(0, 0).gamma;
  for (const auto& ch : inst.channels)
    if (ch.gamma != rep.gamma) rep.gamma = 0;

  std::vector<CVec> w(d.K);
  for (int n = 0; n < cfg.nChannelRealizations; ++n)
    for (int t = 0; t < d.T; ++t) {
      for (int k = 0; k < d.K; ++k) w[k] = schedule.w[k * d.T + t];
      for (int k = 0; k < d.K; ++k) {
        const auto& ch = inst.channel(k, t);
        CVec delta(N);
        for (int j = 0; j < N; ++j) delta(j) = Complex(normal(rng), normal(rng));
        double norm = delta.norm();
        CVec h = ch.hHat;
        if (ch.epsilon > 0 && norm > 0) h += (ch.epsilon / norm) * delta;
        double s = evaluateSinr(w, k, h, ch.sigma2);
        samples[k].push_back(s);
        if (s < ch.gamma * (1 - 1e-9)) ++violations[k];
      }
    }
  long total = 0;
  for (int k = 0; k < d.K; ++k) {
    rep.userViolation.push_back(static_cast<double>(violations[k]) / samples[k].size());
    total += violations[k];
    rep.perUser.push_back(CdfTable::fromSamples(std::move(samples[k])));
  }
  rep.violationRate = static_cast<double>(total) / (static_cast<double>(cfg.nChannelRealizations) * d.K * d.T);
  return rep;
}

SolveResult solveNonRobustBaseline(const ProblemInstance& inst, CoordinatorOptions opt) {
  opt.mode = BeamformingMode::NonRobust;
  return solve(inst, opt);
}

ProblemInstance heuristicInstance(const ProblemInstance& inst) {
  ProblemInstance h = inst;
  for (std::size_t i = 0; i < h.bs.size(); ++i) {
    auto* poly = std::get_if<PolyhedralSet>(&h.bs[i].res);
    if (!poly) throw ValidationError("heuristic baseline: BS " + std::to_string(i + 1) + " needs a polyhedral set");
    h.bs[i].res = SingletonSet{0.5 * (poly->lower + poly->upper)};
  }
  return h;
}

SolveResult solveHeuristicBaseline(const ProblemInstance& inst, const CoordinatorOptions& opt) {
  return solve(heuristicInstance(inst), opt);
}

namespace {

// Cluster cost per sample for one kappa; draws are slot-major per BS.
std::vector<double> costSamples(const Schedule& s, const ProblemInstance& inst, double kappa, int n,
                                std::uint64_t seed) {
  const auto& d = inst.dims;
  std::vector<const PolyhedralSet*> sets(d.I);
  for (int i = 0; i < d.I; ++i) {
    sets[i] = std::get_if<PolyhedralSet>(&inst.bs[i].res);
    if (!sets[i]) throw ValidationError("costCdf: BS " + std::to_string(i + 1) + " needs a polyhedral set");
  }
  std::vector<Vec> p(d.I);
  for (int i = 0; i < d.I; ++i) p[i] = s.P.row(i).transpose();
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) {
    double c = 0;
    for (int i = 0; i < d.I; ++i) c += transactionCost(p[i], sampleRealization(*sets[i], kappa, rng), inst.pricesFor(i));
    out[j] = c;
  }
  return out;
}

}  // namespace

CostReport costCdf(const Schedule& schedule, const ProblemInstance& inst, const EvalConfig& cfg) {
  cfg.validate();
  const auto& d = inst.dims;
  CostReport rep;
  rep.kappas = cfg.kappas;
  for (int i = 0; i < d.I; ++i)
    rep.worstCase += worstCost(schedule.P.row(i).transpose(), inst.bs[i].res, inst.pricesFor(i)).value;
  rep.maxExcess = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < cfg.kappas.size(); ++q) {
    auto s = costSamples(schedule, inst, cfg.kappas[q], cfg.nResRealizations, cfg.seed + q);
    for (double v : s) rep.maxExcess = std::max(rep.maxExcess, v - rep.worstCase);
    rep.tables.push_back(CdfTable::fromSamples(std::move(s)));
    rep.means.push_back(rep.tables.back().mean());
  }
  return rep;
}

std::vector<double> pairedDominance(const Schedule& a, const Schedule& b, const ProblemInstance& inst,
                                    const EvalConfig& cfg) {
  cfg.validate();
  std::vector<double> out;
  for (std::size_t q = 0; q < cfg.kappas.size(); ++q) {
    auto sa = costSamples(a, inst, cfg.kappas[q], cfg.nResRealizations, cfg.seed + q);
    auto sb = costSamples(b, inst, cfg.kappas[q], cfg.nResRealizations, cfg.seed + q);
    long wins = 0;
    for (std::size_t j = 0; j < sa.size(); ++j)
      if (sa[j] <= sb[j]) ++wins;
    out.push_back(static_cast<double>(wins) / sa.size());
  }
  return out;
}

PriceProfile priceResponseProfile(const Schedule& schedule, const PriceCurve& prices) {
  PriceProfile pr;
  pr.total = schedule.P.colwise().sum().transpose();
  Eigen::Index arg = 0;
  pr.total.minCoeff(&arg);
  pr.argmin = static_cast<int>(arg);
  bool flat = true;
  for (int t = 1; t < prices.slots(); ++t)
    if (prices.alpha[t] != prices.alpha[0] || prices.beta[t] != prices.beta[0]) flat = false;
  pr.checkSkipped = flat;
  pr.inExpected = pr.argmin >= 3 && pr.argmin <= 5;
  return pr;
}

void writeCdfCsv(std::ostream& os, const std::vector<std::string>& labels, const std::vector<CdfTable>& tables) {
  os << "series,value,probability\n";
  os.precision(17);
  for (std::size_t s = 0; s < tables.size(); ++s)
    for (std::size_t j = 0; j < tables[s].size(); ++j)
      os << labels[s] << ',' << tables[s].values[j] << ',' << tables[s].probs[j] << '\n';
}

}  // namespace smartcomp
