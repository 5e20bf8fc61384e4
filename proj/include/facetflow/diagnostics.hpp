#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace facetflow {

namespace detail {

// shortest text that reads back to the same double
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

/// Outcome of one lab check. `status` is "pass", "fail" or "inconclusive".
struct DiagnosticsReport {
  std::string check;
  std::vector<std::string> run_ids;
  std::map<std::string, double> params;
  std::map<std::string, double> margins;
  std::map<std::string, double> fitted;
  std::vector<double> series;
  std::vector<std::vector<double>> matrix;
  bool pass = false;
  std::string status = "fail";
  std::string detail;

  void set_pass(bool ok, const std::string& failure_status = "fail") {
    pass = ok;
    status = ok ? "pass" : failure_status;
  }
};

} // namespace facetflow
