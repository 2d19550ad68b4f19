// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "smartcomp/linalg.hpp"

namespace smartcomp {

const char* statusName(RankOneStatus s) {
  switch (s) {
    case RankOneStatus::RankOne: return "RankOne";
    case RankOneStatus::NotRankOne: return "NotRankOne";
    case RankOneStatus::RankDeficient: return "RankDeficient";
  }
  return "?";
}

namespace {

// Rotates w so its largest-magnitude entry (first on ties) is real >= 0.
void canonicalPhase(CVec& w) {
  if (w.size() == 0) return;
  int best = 0;
  for (int j = 1; j < w.size(); ++j)
    if (std::abs(w(j)) > std::abs(w(best))) best = j;
  double mag = std::abs(w(best));
  if (mag > 0) w *= std::conj(w(best)) / mag;
  w(best) = Complex(std::abs(w(best)), 0);
}

CMat outer(const CVec& w) { return w * w.adjoint(); }

double selectedPower(const CVec& w, int i, const Dimensions& d, double xi) {
  return w.segment(i * d.M, d.M).squaredNorm() / xi;
}

CMat interferenceY(std::span<const CVec> w, int k, double gamma) {
  CMat y = outer(w[k]) / gamma;
  for (std::size_t l = 0; l < w.size(); ++l)
    if (static_cast<int>(l) != k) y -= outer(w[l]);
  return 0.5 * (y + y.adjoint());
}

}  // namespace

RankOneResult extractRankOne(const CMat& x, double tol) {
  RankOneResult r;
  const int N = static_cast<int>(x.rows());
  r.w = CVec::Zero(N);
  if (N == 0) return r;
  auto e = linalg::eigh(linalg::HermitianMatrix(0.5 * (x + x.adjoint())));
  double l1 = e.values(N - 1);
  if (!(l1 > 1e-12)) {
    r.status = RankOneStatus::RankDeficient;
    return r;
  }
  r.ratio = N > 1 ? std::max(0.0, e.values(N - 2)) / l1 : 0.0;
  r.w = std::sqrt(l1) * e.vectors.col(N - 1);
  canonicalPhase(r.w);
  r.status = r.ratio <= tol ? RankOneStatus::RankOne : RankOneStatus::NotRankOne;
  return r;
}

WorstCaseMargin worstCaseMargin(const CMat& y, const CVec& h, double eps) {
  WorstCaseMargin out;
  if (eps == 0) {
    out.value = h.dot(y * h).real();
    return out;
  }
  auto e = linalg::eigh(linalg::HermitianMatrix(0.5 * (y + y.adjoint())));
  const Vec& mu = e.values;
  Vec c2 = (e.vectors.adjoint() * h).cwiseAbs2();
  const double eps2 = eps * eps;
  // Dual function of the trust-region problem, concave in tau over
  // tau > max(0, -mu_min); its maximum equals the minimum (lossless S-lemma).
  auto dual = [&](double tau) {
    double v = -tau * eps2;
    for (int j = 0; j < mu.size(); ++j) {
      double den = mu(j) + tau;
      if (den > 0) v += mu(j) * tau / den * c2(j);
      else if (c2(j) > 0) return -std::numeric_limits<double>::infinity();
    }
    return v;
  };
  auto slope = [&](double tau) {
    double s = -eps2;
    for (int j = 0; j < mu.size(); ++j) {
      double den = mu(j) + tau;
      if (den > 0) s += mu(j) * mu(j) / (den * den) * c2(j);
      else if (c2(j) > 0) return std::numeric_limits<double>::infinity();
    }
    return s;
  };
  const double scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
  double lo = std::max(0.0, -mu(0));
  if (lo == 0 && slope(0) <= 0) {
    out.tau = 0;
    out.value = dual(0);
    return out;
  }
  double hi = lo + scale;
  for (int it = 0; it < 200 && slope(hi) > 0; ++it) hi = lo + 2 * (hi - lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0) lo = mid;
    else hi = mid;
  }
  // hi lies in the domain, so dual(hi) is a valid lower bound.
  out.tau = hi;
  out.value = dual(hi);
  return out;
}

double worstCaseSinrMargin(std::span<const CVec> w, int k, const ChannelEstimate& ch) {
  CMat y = interferenceY(w, k, ch.gamma);
  return worstCaseMargin(y, ch.hHat, ch.epsilon).value / ch.sigma2;
}

RoundingResult randomizedRound(std::span<const CMat> Xs, const ProblemInstance& inst, int slot,
                               const RoundingOptions& opt) {
  const auto& d = inst.dims;
  const int K = d.K, N = d.beamLength();
  if (static_cast<int>(Xs.size()) != K) throw ValidationError("randomizedRound: need one matrix per user");
  if (opt.samples < 1) throw ValidationError("randomizedRound: samples must be at least 1");
  RoundingResult res;

  auto power = [&](std::span<const CVec> w, int i) {
    double p = 0;
    for (const auto& v : w) p += selectedPower(v, i, d, inst.bs[i].xi);
    return p;
  };

  std::vector<CVec> principal(K);
  bool allRankOne = true;
  std::vector<linalg::Eigh> eig(K);
  for (int k = 0; k < K; ++k) {
    auto r = extractRankOne(Xs[k]);
    principal[k] = r.w;
    if (r.status == RankOneStatus::NotRankOne) allRankOne = false;
    eig[k] = linalg::eigh(linalg::HermitianMatrix(0.5 * (Xs[k] + Xs[k].adjoint())));
  }
  if (allRankOne) {
    res.ok = true;
    res.w = principal;
    res.scale = 1;
    res.candidate = 0;
    for (int i = 0; i < d.I; ++i) res.objective += power(res.w, i);
    return res;
  }

  // Smallest common factor making every QoS constraint hold, or +inf.
  auto scaleFor = [&](const std::vector<CVec>& w, std::vector<double>& taus) {
    double s = 0;
    taus.assign(K, 0);
    for (int k = 0; k < K; ++k) {
      const auto& ch = inst.channel(k, slot);
      double eps = opt.mode == BeamformingMode::Robust ? ch.epsilon : 0.0;
      auto m = worstCaseMargin(interferenceY(w, k, ch.gamma), ch.hHat, eps);
      if (!(m.value > 0)) return std::numeric_limits<double>::infinity();
      s = std::max(s, ch.sigma2 / m.value);
      taus[k] = m.tau;
    }
    return s * (1 + 1e-10);
  };

  // Certificate: the S-procedure matrix (or the scalar form) of every user
  // at the scaled candidate, with multiplier scale * tau.
  auto certified = [&](const std::vector<CVec>& w, double s, const std::vector<double>& taus) {
    std::vector<CMat> lifted(K);
    for (int k = 0; k < K; ++k) lifted[k] = s * outer(w[k]);
    for (int k = 0; k < K; ++k) {
      ChannelEstimate ch = inst.channel(k, slot);
      if (opt.mode == BeamformingMode::NonRobust) ch.epsilon = 0;
      if (ch.epsilon == 0) {
        CMat y = buildY(lifted, k, ch.gamma);
        if (ch.hHat.dot(y * ch.hHat).real() - ch.sigma2 < -1e-9 * ch.sigma2) return false;
        continue;
      }
      auto g = buildGamma(lifted, k, ch, s * taus[k]);
      double mag = std::max(1.0, g.matrix().cwiseAbs().maxCoeff());
      if (linalg::minEigenvalue(g) < -1e-9 * mag) return false;
    }
    return true;
  };

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  double best = std::numeric_limits<double>::infinity();
  int rejectedQos = 0, rejectedCap = 0;
  std::vector<CVec> cand(K);
  std::vector<double> taus;
  for (int n = 0; n <= opt.samples; ++n) {
    if (n == 0) {
      cand = principal;
    } else {
      for (int k = 0; k < K; ++k) {
        CVec z(N);
        for (int j = 0; j < N; ++j) z(j) = Complex(normal(rng), normal(rng));
        Vec root = eig[k].values.cwiseMax(0.0).cwiseSqrt();
        cand[k] = eig[k].vectors * (root.cast<Complex>().asDiagonal() * z);
      }
    }
    double s = scaleFor(cand, taus);
    if (!std::isfinite(s) || !certified(cand, s, taus)) {
      ++rejectedQos;
      continue;
    }
    double objective = 0;
    bool capOk = true;
    for (int i = 0; i < d.I; ++i) {
      double p = s * power(cand, i);
      double cap = inst.bs[i].transmitCap();
      if (p > cap * (1 + 1e-9) + 1e-12) capOk = false;
      objective += p;
    }
    if (!capOk) {
      ++rejectedCap;
      continue;
    }
    if (objective < best) {
      best = objective;
      res.ok = true;
      res.objective = objective;
      res.scale = s;
      res.candidate = n;
      res.w.assign(K, CVec());
      const double root = std::sqrt(s);
      for (int k = 0; k < K; ++k) {
        res.w[k] = root * cand[k];
        canonicalPhase(res.w[k]);
      }
    }
  }
  if (!res.ok)
    res.detail = "no feasible candidate among " + std::to_string(opt.samples + 1) + " (" +
                 std::to_string(rejectedQos) + " QoS, " + std::to_string(rejectedCap) + " power cap)";
  return res;
}

ExtractionResult extractBeamformers(Schedule& schedule, const ProblemInstance& inst,
                                    const RoundingOptions& opt, double tol) {
  const auto& d = inst.dims;
  if (static_cast<int>(schedule.X.size()) != d.K * d.T)
    throw ValidationError("extraction: schedule has no lifted beamformers");
  ExtractionResult out;
  out.w.assign(static_cast<std::size_t>(d.K) * d.T, CVec::Zero(d.beamLength()));
  out.method.assign(d.T, ExtractionMethod::RankOne);
  out.rankOneRatio = Mat::Zero(d.K, d.T);
  for (int t = 0; t < d.T; ++t) {
    bool exact = true;
    std::vector<CMat> xs(d.K);
    for (int k = 0; k < d.K; ++k) {
      xs[k] = schedule.lifted(k, t, d.T);
      auto r = extractRankOne(xs[k], tol);
      out.rankOneRatio(k, t) = r.ratio;
      out.w[k * d.T + t] = r.w;
      if (r.status == RankOneStatus::NotRankOne) exact = false;
    }
    if (exact) continue;
    RoundingOptions ro = opt;
    ro.seed = opt.seed + static_cast<std::uint64_t>(t);
    auto rr = randomizedRound(xs, inst, t, ro);
    if (!rr.ok) throw RoundingFailed("slot " + std::to_string(t + 1) + ": " + rr.detail);
    out.method[t] = ExtractionMethod::Randomized;
    out.feasibilityScaled = true;
    for (int k = 0; k < d.K; ++k) out.w[k * d.T + t] = rr.w[k];
    for (int i = 0; i < d.I; ++i) {
      double p = 0;
      for (int k = 0; k < d.K; ++k) p += selectedPower(rr.w[k], i, d, inst.bs[i].xi);
      out.maxPowerChange = std::max(out.maxPowerChange, std::abs(p - schedule.transmit(i, t)));
      schedule.transmit(i, t) = p;
      schedule.P(i, t) = inst.bs[i].Pc + p + schedule.Pb(i, t);
    }
  }
  schedule.w = out.w;
  return out;
}

}  // namespace smartcomp
