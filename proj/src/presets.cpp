// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/presets.hpp"

#include <algorithm>
#include <random>

namespace smartcomp {

namespace {

const std::vector<std::vector<double>> kLower = {
    {2.47, 2.27, 2.18, 1.97, 2.28, 2.66, 3.10, 3.38},
    {2.57, 1.88, 2.16, 1.56, 1.95, 3.07, 3.44, 3.11},
    {2.32, 2.43, 1.27, 1.39, 2.14, 1.98, 2.68, 4.04},
    {2.04, 1.92, 2.33, 2.07, 2.13, 2.36, 3.13, 4.16},
    {2.11, 1.19, 2.26, 2.19, 1.55, 2.71, 3.37, 2.45},
    {2.01, 2.29, 2.20, 0.98, 2.43, 3.22, 2.74, 3.93},
};

const std::vector<double> kAlpha = {0.402, 0.44, 0.724, 1.32, 1.166, 0.798, 0.506, 0.468};

// Equal buy and sell prices are rejected by validation, so a ratio of one is
// realized one part in a million below.
constexpr double kMaxRatio = 1.0 - 1e-9;

const double kPgMax[] = {50, 45, 45, 45, 50, 45};

CVec drawChannel(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CVec h(n);
  for (int a = 0; a < n; ++a) h(a) = Complex(g(rng), g(rng));
  return h;
}

}  // namespace

PresetOptions presetC1() { return {}; }

PresetOptions presetC2() {
  PresetOptions p;
  p.I = 6;
  p.K = 20;
  return p;
}

const std::vector<double>& tablePurchasePrices() { return kAlpha; }

const std::vector<double>& tableRenewableLower(int i) {
  if (i < 0 || i >= static_cast<int>(kLower.size()))
    throw ValidationError("renewable table: BS index out of range");
  return kLower[i];
}

ProblemInstance generateInstance(const PresetOptions& opt) {
  ProblemInstance inst;
  inst.dims = {opt.T, opt.I, opt.K, opt.M};
  inst.dims.validate();
  std::vector<double> alpha(opt.T);
  for (int t = 0; t < opt.T; ++t) alpha[t] = kAlpha[t % kAlpha.size()];
  inst.prices = PriceCurve::fromRatio(alpha, std::min(opt.r, kMaxRatio));

  for (int i = 0; i < opt.I; ++i) {
    BsParams b;
    b.battery = {5.0, 30.0, -10.0, 10.0, 0.95};
    b.Pc = opt.Pc;
    b.PgMax = kPgMax[i % 6];
    b.xi = opt.xi;
    Vec lo(opt.T), hi(opt.T);
    for (int t = 0; t < opt.T; ++t) {
      lo(t) = kLower[i % 6][t % 8];
      hi(t) = opt.upperFactor * lo(t);
    }
    double cap = opt.totalFactor * hi.sum();
    b.res = PolyhedralSet::withTotalBounds(lo, hi, std::nullopt, cap);
    inst.bs.push_back(std::move(b));
  }
  inst.channels.resize(opt.K * opt.T);
  for (auto& c : inst.channels) {
    c.epsilon = opt.epsilon;
    c.sigma2 = opt.sigma2;
    c.gamma = opt.gamma;
  }
  redrawChannels(inst, opt.seed);
  return buildInstance(std::move(inst));
}

void redrawChannels(ProblemInstance& inst, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < inst.dims.K; ++k)
    for (int t = 0; t < inst.dims.T; ++t)
      inst.channel(k, t).hHat = drawChannel(inst.dims.beamLength(), rng);
}

}  // namespace smartcomp
