// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "smartcomp/model.hpp"
#include "smartcomp/sdp.hpp"

namespace smartcomp {

/// No candidate of the randomized rounding could be scaled to feasibility.
class RoundingFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kRankOneTol = 1e-6;

enum class RankOneStatus { RankOne, NotRankOne, RankDeficient };

const char* statusName(RankOneStatus s);

struct RankOneResult {
  RankOneStatus status = RankOneStatus::RankDeficient;
  CVec w;            // sqrt(lambda_1) v_1, largest-magnitude entry real >= 0
  double ratio = 0;  // lambda_2 / lambda_1, zero for order one
};

/// Principal scaled eigenvector of a PSD matrix. RankDeficient (w = 0) when
/// lambda_1 <= 1e-12; NotRankOne when the ratio exceeds tol, w still filled.
RankOneResult extractRankOne(const CMat& x, double tol = kRankOneTol);

/// min over ||delta|| <= eps of (h + delta)^H Y (h + delta) and the
/// S-procedure multiplier attaining it.
struct WorstCaseMargin {
  double value = 0;
  double tau = 0;
};

WorstCaseMargin worstCaseMargin(const CMat& y, const CVec& h, double eps);

struct RoundingOptions {
  int samples = 1000;
  std::uint64_t seed = 1;
  BeamformingMode mode = BeamformingMode::Robust;
};

struct RoundingResult {
  bool ok = false;
  std::vector<CVec> w;  // K
  double objective = 0; // sum_i sum_k tr(B_i w_k w_k^H)
  double scale = 0;     // common power factor applied to the winning candidate
  int candidate = -1;   // 0 is the principal-eigenvector candidate
  std::string detail;
};

/// Candidate k-th beamformers are CN(0, X_k) draws plus the principal
/// eigenvectors as candidate 0. Each candidate set is scaled by the smallest
/// common factor that makes every QoS constraint hold, certified by the
/// S-procedure matrix, and discarded if a transmit cap is then exceeded.
/// When every X_k is rank-one the extracted vectors are returned directly.
RoundingResult randomizedRound(std::span<const CMat> Xs, const ProblemInstance& inst, int slot,
                               const RoundingOptions& opt = {});

enum class ExtractionMethod { RankOne, Randomized };

struct ExtractionResult {
  std::vector<CVec> w;                       // index k*T+t
  std::vector<ExtractionMethod> method;      // per slot
  Mat rankOneRatio;                          // K x T
  bool feasibilityScaled = false;            // some slot went through rounding
  double maxPowerChange = 0;                 // max |transmit change| over rounded slots
};

/// Extracts every slot of the schedule; slots with a non-rank-one matrix are
/// rounded. The battery trajectory is kept and, on rounded slots, transmit
/// power and P are recomputed from the beamformers so the coupling holds.
/// Throws RoundingFailed naming the slot.
ExtractionResult extractBeamformers(Schedule& schedule, const ProblemInstance& inst,
                                    const RoundingOptions& opt = {}, double tol = kRankOneTol);

/// Worst-case QoS margin of user k over its error ball, divided by sigma^2,
/// for explicit beamformers. Values >= 1 mean the constraint holds.
double worstCaseSinrMargin(std::span<const CVec> w, int k, const ChannelEstimate& ch);

}  // namespace smartcomp
