#include "manhattan/db_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace manhattan {

namespace {

using nlohmann::json;

void append_real(std::string& s, double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  s += buf;
}

void append_complex(std::string& s, cdouble z) {
  s += '[';
  append_real(s, z.real());
  s += ',';
  append_real(s, z.imag());
  s += ']';
}

void append_path(std::string& s, const std::vector<cdouble>& path) {
  s += '[';
  for (size_t i = 0; i < path.size(); ++i) {
    if (i) s += ',';
    append_complex(s, path[i]);
  }
  s += ']';
}

void append_evidence(std::string& s, const HyperbolicityEvidence& ev) {
  s += "{\"attracting_cycle_period\":" + std::to_string(ev.attracting_cycle_period);
  s += ",\"escapes\":";
  s += ev.escapes ? "true" : "false";
  s += ",\"critical_orbit_iterations_used\":" + std::to_string(ev.critical_orbit_iterations_used);
  s += ",\"min_expansion_rate\":";
  if (std::isfinite(ev.min_expansion_rate))
    append_real(s, ev.min_expansion_rate);
  else
    s += "null";
  s += ",\"verdict\":\"";
  s += to_string(ev.verdict);
  s += "\"}";
}

cdouble read_complex(const json& j) {
  if (!j.is_array() || j.size() != 2) throw UsageError("complex values must be [re, im] pairs");
  return cdouble{j[0].get<double>(), j[1].get<double>()};
}

std::vector<cdouble> read_path(const json& j) {
  std::vector<cdouble> out;
  for (const auto& w : j) out.push_back(read_complex(w));
  return out;
}

HyperbolicityEvidence read_evidence(const json& j) {
  HyperbolicityEvidence ev;
  ev.attracting_cycle_period = j.at("attracting_cycle_period").get<int>();
  ev.escapes = j.at("escapes").get<bool>();
  ev.critical_orbit_iterations_used = j.at("critical_orbit_iterations_used").get<int>();
  const auto& r = j.at("min_expansion_rate");
  ev.min_expansion_rate =
      r.is_null() ? std::numeric_limits<double>::quiet_NaN() : r.get<double>();
  ev.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  return ev;
}

}  // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void save_database(const OrbitDatabase& db, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot open " + path + " for writing");

  std::string line;
  line.reserve(512);
  line += "{\"format_version\":" + std::to_string(db.format_version);
  line += ",\"d\":" + std::to_string(db.d);
  line += ",\"c1\":";
  append_complex(line, db.c1);
  line += ",\"c2\":";
  append_complex(line, db.c2);
  line += ",\"path1\":";
  append_path(line, db.path1);
  line += ",\"path2\":";
  append_path(line, db.path2);
  line += ",\"max_period\":" + std::to_string(db.max_period);
  line += ",\"newton_tol\":";
  append_real(line, db.newton_tol);
  line += ",\"point_merge_tol\":";
  append_real(line, db.point_merge_tol);
  line += ",\"evidence1\":";
  append_evidence(line, db.evidence1);
  line += ",\"evidence2\":";
  append_evidence(line, db.evidence2);
  line += ",\"orbit_count\":" + std::to_string(db.orbits.size());
  line += ",\"excluded_count\":" + std::to_string(db.excluded.size());
  line += "}\n";
  out << line;

  for (const MarkedOrbit& o : db.orbits) {
    line.clear();
    line += "{\"primitive_period\":" + std::to_string(o.primitive_period);
    line += ",\"marking\":{\"period\":" + std::to_string(o.marking.period) +
            ",\"seed_index\":" + std::to_string(o.marking.seed_index) + "}";
    line += ",\"z1\":";
    append_complex(line, o.z1);
    line += ",\"z2\":";
    append_complex(line, o.z2);
    line += ",\"lambda1\":";
    append_real(line, o.lambda1);
    line += ",\"lambda2\":";
    append_real(line, o.lambda2);
    line += ",\"residual1\":";
    append_real(line, o.residual1);
    line += ",\"residual2\":";
    append_real(line, o.residual2);
    line += "}\n";
    out << line;
  }
  for (const ExcludedMarking& e : db.excluded) {
    line.clear();
    line += "{\"excluded\":true,\"primitive_period\":" + std::to_string(e.primitive_period);
    line += ",\"marking\":{\"period\":" + std::to_string(e.marking.period) +
            ",\"seed_index\":" + std::to_string(e.marking.seed_index) + "}";
    line += ",\"z1\":";
    append_complex(line, e.z1);
    line += ",\"z2\":";
    append_complex(line, e.z2);
    line += ",\"lambda1\":";
    append_real(line, e.lambda1);
    line += ",\"lambda2\":";
    append_real(line, e.lambda2);
    line += "}\n";
    out << line;
  }
  out.flush();
  if (!out) throw UsageError("write to " + path + " failed");
}

OrbitDatabase load_database(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw UsageError(path + ": empty database file");

  json h;
  try {
    h = json::parse(header_line);
  } catch (const json::exception& e) {
    throw UsageError(path + ": bad header: " + e.what());
  }
  OrbitDatabase db;
  try {
    db.format_version = h.at("format_version").get<int>();
    if (db.format_version != 1)
      throw UsageError(path + ": unsupported format_version " +
                       std::to_string(db.format_version));
    db.d = h.at("d").get<int>();
    db.c1 = read_complex(h.at("c1"));
    db.c2 = read_complex(h.at("c2"));
    db.path1 = read_path(h.at("path1"));
    db.path2 = read_path(h.at("path2"));
    db.max_period = h.at("max_period").get<int>();
    db.newton_tol = h.at("newton_tol").get<double>();
    db.point_merge_tol = h.at("point_merge_tol").get<double>();
    db.evidence1 = read_evidence(h.at("evidence1"));
    db.evidence2 = read_evidence(h.at("evidence2"));
  } catch (const json::exception& e) {
    throw UsageError(path + ": bad header: " + e.what());
  }
  const auto orbit_count = h.at("orbit_count").get<std::int64_t>();
  const auto excluded_count = h.at("excluded_count").get<std::int64_t>();

  std::string line;
  std::int64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
    }
    try {
      Marking m{j.at("marking").at("period").get<int>(),
                j.at("marking").at("seed_index").get<std::int64_t>()};
      if (j.contains("excluded")) {
        ExcludedMarking e;
        e.primitive_period = j.at("primitive_period").get<int>();
        e.marking = m;
        e.z1 = read_complex(j.at("z1"));
        e.z2 = read_complex(j.at("z2"));
        e.lambda1 = j.at("lambda1").get<double>();
        e.lambda2 = j.at("lambda2").get<double>();
        db.excluded.push_back(e);
      } else {
        MarkedOrbit o;
        o.primitive_period = j.at("primitive_period").get<int>();
        o.marking = m;
        o.z1 = read_complex(j.at("z1"));
        o.z2 = read_complex(j.at("z2"));
        o.lambda1 = j.at("lambda1").get<double>();
        o.lambda2 = j.at("lambda2").get<double>();
        o.residual1 = j.at("residual1").get<double>();
        o.residual2 = j.at("residual2").get<double>();
        db.orbits.push_back(o);
      }
    } catch (const json::exception& e) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
    }
  }
  if (static_cast<std::int64_t>(db.orbits.size()) != orbit_count ||
      static_cast<std::int64_t>(db.excluded.size()) != excluded_count)
    throw UsageError(path + ": record counts do not match the header");
  return db;
}

}  // namespace manhattan
