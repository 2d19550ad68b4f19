// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "smartcomp/eval.hpp"
#include "smartcomp/presets.hpp"

namespace smartcomp {

/// Everything one JSON config file describes. Schema in README.md.
struct RunConfig {
  std::string name;
  double r = -1;            // price ratio the config was generated with, -1 when unknown
  std::uint64_t seed = 1;   // channel seed the config was generated with
  ProblemInstance instance;
  CoordinatorOptions solver;
  EvalConfig eval;
  RoundingOptions rounding;
};

/// Throws ValidationError naming the offending key or invariant.
RunConfig parseConfig(const std::string& text);
RunConfig loadConfig(const std::string& path);

/// Pretty-printed JSON; doubles are written with round-trip precision.
std::string dumpConfig(const RunConfig& cfg);

/// Synthetic cluster from the presets with default solver and eval blocks.
RunConfig presetConfig(const PresetOptions& opt, const std::string& name);

}  // namespace smartcomp
