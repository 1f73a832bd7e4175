#pragma once

// JSON and CSV output. JSON goes through nlohmann::ordered_json for structure
// but is printed by our own writer so that every double carries exactly 17
// significant digits, making output byte-stable across runs.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "biharm/ode.hpp"
#include "biharm/orbits.hpp"
#include "biharm/variational.hpp"
#include "biharm/weighted_identities.hpp"

namespace biharm {

using Json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void write_json(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string pad_close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write_json(os, it.value(), indent, depth + 1);
      }
      os << nl << pad_close << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[' << nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad;
        write_json(os, v, indent, depth + 1);
      }
      os << nl << pad_close << ']';
      return;
    }
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

}  // namespace detail

inline std::string to_json_string(const Json& j, int indent = 2) {
  std::ostringstream os;
  detail::write_json(os, j, indent, 0);
  os << '\n';
  return os.str();
}

/// Comma separated, header row first, LF line endings.
inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(tr.states.size());
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& s = tr.states[i];
    rows.push_back({format_double(s.t), format_double(s.y[0]), format_double(s.y[1]),
                    format_double(s.y[2]), format_double(s.y[3]),
                    format_double(tr.energies[i])});
  }
  write_csv(os, {"t", "v", "v1", "v2", "v3", "E"}, rows);
}

inline Json trajectory_summary(const Trajectory& tr, const ExtremaResult& ex) {
  Json j;
  j["t_begin"] = tr.t_begin();
  j["t_end"] = tr.t_end();
  j["accepted_steps"] = tr.step_stats.accepted;
  j["rejected_steps"] = tr.step_stats.rejected;
  Json evs = Json::array();
  for (const auto& e : ex.events) {
    evs.push_back({{"t", e.t}, {"kind", to_string(e.kind)}, {"v", e.v}});
  }
  j["events"] = evs;
  j["warnings"] = ex.warnings;
  return j;
}

inline Json to_json(const PeriodicOrbit& o) {
  return {{"a", o.a},
          {"b", o.b},
          {"period", o.period},
          {"max_value", o.max_value},
          {"energy", o.energy},
          {"residual_sup", o.residual_sup},
          {"iterations", o.iterations},
          {"warm_started", o.warm_started},
          {"outside_proven_regime", o.outside_proven_regime}};
}

inline Json to_json(const HomoclinicProfile& h) {
  return {{"peak", h.peak},
          {"v2_at_peak", h.v2_at_peak},
          {"decay_rate", h.decay_rate},
          {"horizon", h.horizon},
          {"shoot_time", h.shoot_time},
          {"samples", h.samples.states.size()}};
}

inline Json to_json(const SingularityVerdict& v) {
  return {{"verdict", to_string(v.verdict)},
          {"rate_gap", v.rate_gap},
          {"lambda4", v.lambda4},
          {"threshold", v.threshold},
          {"singular_hypothesis", v.singular_hypothesis}};
}

inline Json to_json(const BestConstantResult& b) {
  Json j = {{"phi", b.phi}, {"S_rad", b.S_rad}, {"source", to_string(b.source)}};
  if (b.source == ConstantSource::Numerical) {
    j["L"] = b.L;
    j["h"] = b.h;
    j["iterations"] = b.iterations;
  }
  return j;
}

inline Json to_json(const IdentityReport& r) {
  Json j = {{"identity", to_string(r.id)},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"rel_err", r.rel_err}};
  if (r.id == IdentityId::Hardy) {
    j["ratio"] = r.ratio;
    j["constant"] = r.constant;
  }
  if (!r.parts.empty()) j["parts"] = r.parts;
  j["passed"] = r.passed;
  return j;
}

}  // namespace biharm
