// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

#include "smartcomp/common.hpp"

namespace smartcomp {

/// Controller -> BS i: the multipliers lambda_i. BS i -> controller: the
/// battery and cost decisions plus the two local objective values.
enum class MessageKind { Multipliers, Decisions };

struct Message {
  int iteration = 0;
  MessageKind kind = MessageKind::Multipliers;
  int bs = 0;  // sender of an uplink, receiver of a downlink
  std::vector<double> lambda;
  std::vector<double> Pb;
  std::vector<double> P;
  double lpObjective = 0;
  double costValue = 0;

  bool operator==(const Message&) const = default;
};

std::string serialize(const Message& m);
Message deserialize(const std::string& line);

/// Ordered record of every message, one JSON object per line when written.
struct MessageLog {
  std::vector<Message> entries;

  void writeJsonLines(std::ostream& os) const;
  static MessageLog readJsonLines(std::istream& is);
};

}  // namespace smartcomp
