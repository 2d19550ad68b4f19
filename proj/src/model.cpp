// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/model.hpp"

#include <cmath>

namespace smartcomp {

namespace {

std::string bsTag(int i) { return "bs " + std::to_string(i + 1) + ": "; }

}  // namespace

void Dimensions::validate() const {
  if (T < 1 || I < 1 || K < 1 || M < 1)
    throw ValidationError("dimensions: T, I, K, M must all be >= 1");
}

void BatteryParams::validate() const {
  if (!(C0 >= 0.0)) throw ValidationError("battery: C0 must be >= 0");
  if (!(C0 <= Cmax)) throw ValidationError("battery: C0 must not exceed Cmax");
  if (!(PbMin < 0.0)) throw ValidationError("battery: PbMin must be < 0");
  if (!(PbMax > 0.0)) throw ValidationError("battery: PbMax must be > 0");
  if (!(varpi > 0.0 && varpi <= 1.0))
    throw ValidationError("battery: varpi must lie in (0, 1]");
}

void ProblemInstance::validate() const {
  dims.validate();
  prices.validate();
  if (prices.slots() != dims.T) throw ValidationError("prices: length must equal T");
  if (static_cast<int>(bs.size()) != dims.I)
    throw ValidationError("base stations: expected " + std::to_string(dims.I) + " entries");
  for (int i = 0; i < dims.I; ++i) {
    const auto& b = bs[i];
    try {
      b.battery.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(bsTag(i) + e.what());
    }
    if (!(b.Pc > 0.0)) throw ValidationError(bsTag(i) + "Pc must be > 0");
    if (!(b.Pc <= b.PgMax)) throw ValidationError(bsTag(i) + "Pc must not exceed PgMax");
    if (!(b.xi > 0.0)) throw ValidationError(bsTag(i) + "xi must be > 0");
    if (slotsOf(b.res) != dims.T)
      throw ValidationError(bsTag(i) + "renewable set must cover T slots");
    try {
      validateSet(b.res);
    } catch (const ValidationError& e) {
      throw ValidationError(bsTag(i) + e.what());
    }
    if (b.prices) {
      try {
        b.prices->validate();
      } catch (const ValidationError& e) {
        throw ValidationError(bsTag(i) + e.what());
      }
      if (b.prices->slots() != dims.T)
        throw ValidationError(bsTag(i) + "price override length must equal T");
    }
  }
  if (static_cast<int>(channels.size()) != dims.K * dims.T)
    throw ValidationError("channels: expected K*T = " + std::to_string(dims.K * dims.T) +
                          " entries");
  for (int k = 0; k < dims.K; ++k) {
    for (int t = 0; t < dims.T; ++t) {
      const auto& c = channel(k, t);
      std::string tag = "channel (user " + std::to_string(k + 1) + ", slot " +
                        std::to_string(t + 1) + "): ";
      if (c.hHat.size() != dims.beamLength())
        throw ValidationError(tag + "hHat length must be M*I");
      if (!c.hHat.allFinite()) throw ValidationError(tag + "hHat not finite");
      if (!(c.epsilon >= 0.0)) throw ValidationError(tag + "epsilon must be >= 0");
      if (!(c.sigma2 > 0.0)) throw ValidationError(tag + "sigma2 must be > 0");
      if (!(c.gamma > 0.0)) throw ValidationError(tag + "gamma must be > 0");
    }
  }
}

ProblemInstance buildInstance(ProblemInstance raw) {
  raw.validate();
  return raw;
}

Vec selectionDiagonal(int i, const Dimensions& dims, double xi) {
  if (i < 0 || i >= dims.I) throw ValidationError("selectionMatrix: BS index out of range");
  if (!(xi > 0.0)) throw ValidationError("selectionMatrix: xi must be > 0");
  Vec d = Vec::Zero(dims.beamLength());
  d.segment(i * dims.M, dims.M).setConstant(1.0 / xi);
  return d;
}

Mat selectionMatrix(int i, const Dimensions& dims, double xi) {
  return selectionDiagonal(i, dims, xi).asDiagonal();
}

double selectedTrace(const CMat& x, int i, const Dimensions& dims, double xi) {
  return x.diagonal().real().segment(i * dims.M, dims.M).sum() / xi;
}

double evaluateSinr(std::span<const CVec> w, int k, const CVec& h, double sigma2) {
  double signal = std::norm(h.dot(w[k]));  // Eigen dot conjugates the left operand
  double interference = 0;
  for (std::size_t l = 0; l < w.size(); ++l)
    if (static_cast<int>(l) != k) interference += std::norm(h.dot(w[l]));
  return signal / (interference + sigma2);
}

}  // namespace smartcomp
