// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace smartcomp {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void writeScheduleCsv(std::ostream& os, const Schedule& s) {
  os << "bs,slot,P,Pb,C,transmit\n";
  os.precision(17);
  for (int i = 0; i < s.P.rows(); ++i)
    for (int t = 0; t < s.P.cols(); ++t)
      os << i + 1 << ',' << t + 1 << ',' << s.P(i, t) << ',' << s.Pb(i, t) << ',' << s.C(i, t) << ','
         << s.transmit(i, t) << '\n';
}

namespace {

json matJson(const Mat& m) {
  json rows = json::array();
  for (int a = 0; a < m.rows(); ++a) rows.push_back(std::vector<double>(m.row(a).begin(), m.row(a).end()));
  return rows;
}

Mat matFrom(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ValidationError("schedule: missing key '" + key + "'");
  auto rows = j.at(key).get<std::vector<std::vector<double>>>();
  Mat m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    if (rows[a].size() != static_cast<std::size_t>(m.cols())) throw ValidationError("schedule: ragged " + key);
    for (std::size_t b = 0; b < rows[a].size(); ++b) m(a, b) = rows[a][b];
  }
  return m;
}

std::vector<double> interleave(const CVec& v) {
  std::vector<double> out;
  for (int a = 0; a < v.size(); ++a) {
    out.push_back(v(a).real());
    out.push_back(v(a).imag());
  }
  return out;
}

CVec deinterleave(const std::vector<double>& v) {
  if (v.size() % 2) throw ValidationError("schedule: complex array has odd length");
  CVec out(v.size() / 2);
  for (std::size_t a = 0; a < v.size() / 2; ++a) out(a) = Complex(v[2 * a], v[2 * a + 1]);
  return out;
}

}  // namespace

std::string scheduleToJson(const Schedule& s) {
  json j;
  j["P"] = matJson(s.P);
  j["Pb"] = matJson(s.Pb);
  j["C"] = matJson(s.C);
  j["transmit"] = matJson(s.transmit);
  j["tau"] = matJson(s.tau);
  json xs = json::array();
  for (const auto& x : s.X) {
    json rows = json::array();
    for (int a = 0; a < x.rows(); ++a) rows.push_back(interleave(x.row(a).transpose()));
    xs.push_back(rows);
  }
  j["X"] = xs;
  json ws = json::array();
  for (const auto& w : s.w) ws.push_back(interleave(w));
  j["w"] = ws;
  return j.dump();
}

Schedule scheduleFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("schedule: not valid JSON: ") + e.what());
  }
  Schedule s;
  try {
    s.P = matFrom(j, "P");
    s.Pb = matFrom(j, "Pb");
    s.C = matFrom(j, "C");
    s.transmit = matFrom(j, "transmit");
    s.tau = matFrom(j, "tau");
    for (const auto& x : j.at("X")) {
      auto rows = x.get<std::vector<std::vector<double>>>();
      CMat m(rows.size(), rows.size());
      for (std::size_t a = 0; a < rows.size(); ++a) m.row(a) = deinterleave(rows[a]).transpose();
      s.X.push_back(m);
    }
    for (const auto& w : j.at("w")) s.w.push_back(deinterleave(w.get<std::vector<double>>()));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("schedule: ") + e.what());
  }
  return s;
}

std::string beamformersToJson(const Schedule& s, int T) {
  json out = json::array();
  for (std::size_t n = 0; n < s.w.size(); ++n)
    out.push_back({{"user", static_cast<int>(n) / T}, {"slot", static_cast<int>(n) % T}, {"w", interleave(s.w[n])}});
  return out.dump(1);
}

std::string RunManifest::toJson() const {
  json j{{"command", command}, {"config", configPath}, {"config_hash", configHash},
         {"seed", seed},       {"version", version},   {"outputs", outputs}};
  return j.dump(2);
}

void writeArtifact(RunManifest& m, const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << content;
  m.outputs.push_back(path);
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace smartcomp
