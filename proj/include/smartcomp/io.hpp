// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "smartcomp/model.hpp"

namespace smartcomp {

inline constexpr const char* kVersion = "smartcomp 0.1.0";

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Header "bs,slot,P,Pb,C,transmit"; BS and slot numbers start at 1.
void writeScheduleCsv(std::ostream& os, const Schedule& s);

/// Full schedule including lifted matrices and beamformers, exact doubles.
std::string scheduleToJson(const Schedule& s);
Schedule scheduleFromJson(const std::string& text);

/// Beamformers only: [{user, slot, w: [re, im, ...]}], 0-based indices.
std::string beamformersToJson(const Schedule& s, int T);

/// Record of one CLI run. Every written file is listed in outputs.
struct RunManifest {
  std::string command;
  std::string configPath;
  std::string configHash;  // FNV-1a 64 of the config file bytes
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::vector<std::string> outputs;

  std::string toJson() const;
};

/// Writes content to dir/name, creating dir, and appends the path to the manifest.
void writeArtifact(RunManifest& m, const std::string& dir, const std::string& name, const std::string& content);

std::string readFile(const std::string& path);

}  // namespace smartcomp
