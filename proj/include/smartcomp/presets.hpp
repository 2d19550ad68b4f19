// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "smartcomp/model.hpp"

namespace smartcomp {

/// Parameters of the synthetic cluster: per-BS tables for up to six BSs,
/// Rayleigh channel estimates drawn from the seed.
struct PresetOptions {
  int I = 2;
  int K = 10;
  int M = 2;
  int T = 8;
  double r = 1.0;        // beta = min(r, 1 - 1e-9) * alpha
  double epsilon = 0.05;
  double gamma = 0.1;
  double sigma2 = 1.0;
  double Pc = 10.0;
  double xi = 1.0;
  double upperFactor = 10.0;  // upper renewable bound = factor * lower bound
  double totalFactor = 0.9;   // horizon cap = factor * sum of upper bounds
  std::uint64_t seed = 1;
};

PresetOptions presetC1();
PresetOptions presetC2();

/// Purchase price per slot of the 8-slot day.
const std::vector<double>& tablePurchasePrices();

/// Lower renewable forecast of BS i (0-based, i < 6) over 8 slots.
const std::vector<double>& tableRenewableLower(int i);

/// Builds and validates the instance. Slots beyond 8 and BSs beyond 6 reuse
/// the tables cyclically.
ProblemInstance generateInstance(const PresetOptions& opt);

/// Replaces every channel estimate of the instance with fresh CN(0, 1)
/// entries from the seed.
void redrawChannels(ProblemInstance& inst, std::uint64_t seed);

}  // namespace smartcomp
