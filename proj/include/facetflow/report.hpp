#pragma once

// JSON and CSV forms of inequality and diagnostics reports.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "facetflow/diagnostics.hpp"
#include "facetflow/inequality.hpp"

namespace facetflow {

namespace detail {

// JSON has no infinities; keep them readable instead of collapsing to null
inline nlohmann::json number(double v) {
  if (std::isfinite(v)) {
    return v;
  }
  if (std::isnan(v)) {
    return "nan";
  }
  return v > 0 ? "inf" : "-inf";
}

inline nlohmann::json number_map(const std::map<std::string, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) {
    j[k] = number(v);
  }
  return j;
}

} // namespace detail

inline nlohmann::json to_json(const InequalityResult& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["samples"] = r.samples;
  j["worst_margin"] = detail::number(r.worst_margin);
  j["pass"] = r.pass;
  if (!r.note.empty()) {
    j["note"] = r.note;
  }
  return j;
}

inline nlohmann::json to_json(const InequalityReport& rep) {
  nlohmann::json j;
  j["pass"] = rep.pass;
  j["results"] = nlohmann::json::array();
  for (const auto& r : rep.results) {
    j["results"].push_back(to_json(r));
  }
  return j;
}

inline nlohmann::json to_json(const DiagnosticsReport& rep) {
  nlohmann::json j;
  j["check"] = rep.check;
  j["run_ids"] = rep.run_ids;
  j["params"] = detail::number_map(rep.params);
  j["margins"] = detail::number_map(rep.margins);
  j["fitted"] = detail::number_map(rep.fitted);
  j["pass"] = rep.pass;
  j["status"] = rep.status;
  if (!rep.detail.empty()) {
    j["detail"] = rep.detail;
  }
  if (!rep.series.empty()) {
    nlohmann::json s = nlohmann::json::array();
    for (double v : rep.series) {
      s.push_back(detail::number(v));
    }
    j["series"] = s;
  }
  if (!rep.matrix.empty()) {
    nlohmann::json m = nlohmann::json::array();
    for (const auto& row : rep.matrix) {
      nlohmann::json r = nlohmann::json::array();
      for (double v : row) {
        r.push_back(detail::number(v));
      }
      m.push_back(r);
    }
    j["matrix"] = m;
  }
  return j;
}

inline nlohmann::json to_json(const std::vector<DiagnosticsReport>& reps) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reps) {
    j.push_back(to_json(r));
  }
  return j;
}

/// One row per check: check,run_ids,status,pass,C,alpha,margins.
/// run_ids are ';'-joined, margins are ';'-joined key=value pairs.
inline std::string report_csv(const std::vector<DiagnosticsReport>& reps) {
  std::ostringstream os;
  os << "check,run_ids,status,pass,C,alpha,margins\n";
  for (const auto& r : reps) {
    std::string ids;
    for (std::size_t i = 0; i < r.run_ids.size(); ++i) {
      ids += (i ? ";" : "") + r.run_ids[i];
    }
    auto fitted = [&](const char* key) {
      auto it = r.fitted.find(key);
      return it == r.fitted.end() ? std::string() : detail::fmt17(it->second);
    };
    std::string margins;
    for (const auto& [k, v] : r.margins) {
      margins += (margins.empty() ? "" : ";") + k + "=" + detail::fmt17(v);
    }
    os << r.check << ',' << ids << ',' << r.status << ',' << (r.pass ? 1 : 0) << ',' << fitted("C") << ','
       << fitted("alpha") << ',' << margins << '\n';
  }
  return os.str();
}

} // namespace facetflow
