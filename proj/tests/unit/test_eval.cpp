#include "doctest.h"

#include <random>
#include <sstream>

#include "smartcomp/cost.hpp"
#include "smartcomp/eval.hpp"
#include "smartcomp/presets.hpp"

using namespace smartcomp;

namespace {

PresetOptions smallOptions(double epsilon, int T = 3) {
  PresetOptions o;
  o.K = 2;
  o.I = 2;
  o.M = 2;
  o.T = T;
  o.r = 0.3;
  o.epsilon = epsilon;
  return o;
}

SolveResult solvedSmall(const ProblemInstance& inst, int iters = 20) {
  CoordinatorOptions c;
  c.maxIter = iters;
  auto res = solve(inst, c);
  extractBeamformers(res.schedule, inst);
  return res;
}

EvalConfig smallEval(int n) {
  EvalConfig e;
  e.nChannelRealizations = n;
  e.nResRealizations = n;
  return e;
}

}  // namespace

TEST_CASE("empirical CDF and the Kolmogorov-Smirnov statistic") {
  CdfTable t = CdfTable::fromSamples({3, 1, 2, 2});
  CHECK(t.values == std::vector<double>{1, 2, 2, 3});
  CHECK(t.probs.back() == 1.0);
  CHECK(t.at(0.5) == 0.0);
  CHECK(t.at(2.0) == 0.75);
  CHECK(t.at(10) == 1.0);
  CHECK(t.mean() == doctest::Approx(2.0));

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  const std::size_t n = 100000;
  std::vector<double> s(n), shifted(n);
  for (std::size_t j = 0; j < n; ++j) {
    s[j] = u(rng);
    shifted[j] = std::min(1.0, s[j] + 0.02);
  }
  auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ksStatistic(CdfTable::fromSamples(s), uniform) < ksCritical(n));
  CHECK(ksStatistic(CdfTable::fromSamples(shifted), uniform) > ksCritical(n));
  CHECK(ksCritical(n) == doctest::Approx(1.628 / std::sqrt(1e5)));
}

TEST_CASE("exact channels give one SINR value per user and slot") {
  auto inst = generateInstance(smallOptions(0.0));
  auto res = solvedSmall(inst);
  auto rep = sinrCdf(res.schedule, inst, smallEval(200));
  CHECK(rep.violationRate == 0.0);
  REQUIRE(rep.perUser.size() == 2);
  for (int k = 0; k < 2; ++k) {
    std::vector<double> direct;
    for (int t = 0; t < inst.dims.T; ++t) {
      std::vector<CVec> w;
      for (int l = 0; l < inst.dims.K; ++l) w.push_back(res.schedule.w[l * inst.dims.T + t]);
      direct.push_back(evaluateSinr(w, k, inst.channel(k, t).hHat, inst.channel(k, t).sigma2));
    }
    const auto& v = rep.perUser[k].values;
    CHECK(v.size() == 200 * static_cast<std::size_t>(inst.dims.T));
    for (double x : v) {
      bool match = false;
      for (double d : direct) match = match || x == doctest::Approx(d).epsilon(1e-12);
      CHECK(match);
    }
  }
}

TEST_CASE("realized costs stay below the worst case and fall with more renewables") {
  auto inst = generateInstance(smallOptions(0.05));
  auto res = solvedSmall(inst);
  EvalConfig cfg = smallEval(2000);
  auto rep = costCdf(res.schedule, inst, cfg);
  double g = 0;
  for (int i = 0; i < inst.dims.I; ++i)
    g += worstCost(res.schedule.P.row(i).transpose(), inst.bs[i].res, inst.pricesFor(i)).value;
  CHECK(rep.worstCase == doctest::Approx(g).epsilon(1e-12));
  CHECK(rep.maxExcess <= 1e-9);
  REQUIRE(rep.means.size() == 3);
  CHECK(rep.means[0] > rep.means[1]);
  CHECK(rep.means[1] > rep.means[2]);

  auto again = costCdf(res.schedule, inst, cfg);
  CHECK(again.tables[2].values == rep.tables[2].values);
  auto self = pairedDominance(res.schedule, res.schedule, inst, cfg);
  for (double f : self) CHECK(f == 1.0);

  std::ostringstream os;
  writeCdfCsv(os, {"a", "b", "c"}, rep.tables);
  std::string text = os.str();
  CHECK(text.rfind("series,value,probability\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 2000);
}

TEST_CASE("the heuristic baseline coincides with the robust model on degenerate sets") {
  auto inst = generateInstance(smallOptions(0.05));
  for (auto& b : inst.bs) {
    auto& p = std::get<PolyhedralSet>(b.res);
    p = PolyhedralSet::withTotalBounds(p.lower, p.lower, std::nullopt, std::nullopt);
  }
  inst.validate();
  auto h = heuristicInstance(inst);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-5, 20);
  for (int rep = 0; rep < 20; ++rep) {
    Vec p(inst.dims.T);
    for (int t = 0; t < inst.dims.T; ++t) p(t) = u(rng);
    for (int i = 0; i < inst.dims.I; ++i)
      CHECK(worstCost(p, h.bs[i].res, h.pricesFor(i)).value ==
            doctest::Approx(worstCost(p, inst.bs[i].res, inst.pricesFor(i)).value).epsilon(1e-12));
  }
}

// The peak moves from slot 3 to slot 1 (0-based). Slot 0 stays available for
// charging; with the peak in slot 0 the initial charge alone limits discharge.
TEST_CASE("price response follows an early tariff peak") {
  PresetOptions o = smallOptions(0.05, 8);
  o.r = 1.0;
  auto base = generateInstance(o);
  auto shifted = base;
  const int T = 8;
  for (int t = 0; t < T; ++t) {
    shifted.prices.alpha[t] = base.prices.alpha[(t + 2) % T];
    shifted.prices.beta[t] = base.prices.beta[(t + 2) % T];
  }
  shifted.validate();
  CoordinatorOptions c;
  c.maxIter = 50;
  auto a = priceResponseProfile(solve(base, c).schedule, base.prices);
  auto b = priceResponseProfile(solve(shifted, c).schedule, shifted.prices);
  CHECK_FALSE(a.checkSkipped);
  CHECK(a.inExpected);
  CHECK(b.argmin >= 0);
  CHECK(b.argmin <= 2);

  auto flat = base;
  flat.prices = PriceCurve{std::vector<double>(T, 1.0), std::vector<double>(T, 0.5)};
  CHECK(priceResponseProfile(solve(flat, c).schedule, flat.prices).checkSkipped);
}

TEST_CASE("evaluation settings are validated") {
  EvalConfig e;
  CHECK_NOTHROW(e.validate());
  e.kappas = {1.5};
  CHECK_THROWS_AS(e.validate(), ValidationError);
  e.kappas = {0.1};
  e.nResRealizations = 0;
  CHECK_THROWS_AS(e.validate(), ValidationError);
}
