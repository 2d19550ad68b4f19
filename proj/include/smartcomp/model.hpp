// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>

#include "smartcomp/common.hpp"
#include "smartcomp/uncertainty.hpp"

namespace smartcomp {

/// T slots, I base stations, K single-antenna users, M antennas per BS.
struct Dimensions {
  int T = 0;
  int I = 0;
  int K = 0;
  int M = 0;

  int beamLength() const { return M * I; }
  void validate() const;
};

struct BatteryParams {
  double C0 = 0;
  double Cmax = 0;
  double PbMin = 0;  // < 0, discharge limit
  double PbMax = 0;  // > 0, charge limit
  double varpi = 1;  // discharge efficiency, fraction of stored energy available

  void validate() const;
};

struct BsParams {
  BatteryParams battery;
  double Pc = 0;     // fixed consumption
  double PgMax = 0;  // cap on total consumption Pc + transmit power
  double xi = 1;     // amplifier efficiency, folded into the selection matrix
  UncertaintySet res = SingletonSet{};
  std::optional<PriceCurve> prices;  // overrides the cluster-wide curve

  double transmitCap() const { return PgMax - Pc; }
};

/// Estimated channel of one user in one slot, stacked over all BSs.
struct ChannelEstimate {
  CVec hHat;
  double epsilon = 0;  // radius of the error ball
  double sigma2 = 1;   // noise variance
  double gamma = 1;    // SINR target
};

struct ProblemInstance {
  Dimensions dims;
  PriceCurve prices;
  std::vector<BsParams> bs;
  std::vector<ChannelEstimate> channels;  // index k * T + t

  const ChannelEstimate& channel(int k, int t) const { return channels[k * dims.T + t]; }
  ChannelEstimate& channel(int k, int t) { return channels[k * dims.T + t]; }
  const PriceCurve& pricesFor(int i) const { return bs[i].prices ? *bs[i].prices : prices; }

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
};

/// Validates and returns the instance; the single entry point used by the
/// config loader and the presets.
ProblemInstance buildInstance(ProblemInstance raw);

/// Diagonal of the selection matrix of BS i (0-based): 1/xi on rows
/// i*M .. i*M+M-1, zero elsewhere.
Vec selectionDiagonal(int i, const Dimensions& dims, double xi);
Mat selectionMatrix(int i, const Dimensions& dims, double xi);

/// Transmit power contribution tr(B_i X) with B_i already scaled by 1/xi.
double selectedTrace(const CMat& x, int i, const Dimensions& dims, double xi);

/// |h^H w_k|^2 / (sum_{l != k} |h^H w_l|^2 + sigma2).
double evaluateSinr(std::span<const CVec> w, int k, const CVec& h, double sigma2);

/// Per-slot, per-BS energy decisions and per-(k,t) beamformers.
struct Schedule {
  Mat P;   // I x T, P = Pc + tr(B_i X) + Pb
  Mat Pb;  // I x T
  Mat C;   // I x T, C(:,t) is the stored energy after slot t
  Mat transmit;  // I x T, sum_k tr(B_i X_k^t)
  std::vector<CMat> X;  // K*T lifted beamformers, index k*T+t
  Mat tau;              // K x T
  std::vector<CVec> w;  // extracted beamformers, index k*T+t; empty until extraction

  const CMat& lifted(int k, int t, int T) const { return X[k * T + t]; }
  bool hasBeamformers() const { return !w.empty(); }
};

}  // namespace smartcomp
