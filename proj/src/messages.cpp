// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/messages.hpp"

#include <istream>
#include <ostream>

#include "json.hpp"

namespace smartcomp {

using nlohmann::json;

std::string serialize(const Message& m) {
  json j;
  j["iteration"] = m.iteration;
  j["kind"] = m.kind == MessageKind::Multipliers ? "multipliers" : "decisions";
  j["bs"] = m.bs;
  if (m.kind == MessageKind::Multipliers) {
    j["lambda"] = m.lambda;
  } else {
    j["Pb"] = m.Pb;
    j["P"] = m.P;
    j["lp_objective"] = m.lpObjective;
    j["cost_value"] = m.costValue;
  }
  return j.dump();
}

Message deserialize(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("message: ") + e.what());
  }
  Message m;
  m.iteration = j.at("iteration").get<int>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "multipliers")
    m.kind = MessageKind::Multipliers;
  else if (kind == "decisions")
    m.kind = MessageKind::Decisions;
  else
    throw ValidationError("message: unknown kind " + kind);
  m.bs = j.at("bs").get<int>();
  if (m.kind == MessageKind::Multipliers) {
    m.lambda = j.at("lambda").get<std::vector<double>>();
  } else {
    m.Pb = j.at("Pb").get<std::vector<double>>();
    m.P = j.at("P").get<std::vector<double>>();
    m.lpObjective = j.at("lp_objective").get<double>();
    m.costValue = j.at("cost_value").get<double>();
  }
  return m;
}

void MessageLog::writeJsonLines(std::ostream& os) const {
  for (const auto& m : entries) os << serialize(m) << '\n';
}

MessageLog MessageLog::readJsonLines(std::istream& is) {
  MessageLog log;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) log.entries.push_back(deserialize(line));
  return log;
}

}  // namespace smartcomp
