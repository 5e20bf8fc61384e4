#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace facetflow {

/// Worst margin of one sampled inequality; margins are RHS - LHS, so a
/// negative margin is a violation.
struct InequalityResult {
  InequalityResult() = default;
  explicit InequalityResult(std::string id) : name(std::move(id)) {}

  std::string name;
  std::size_t samples = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  bool pass = true;
  std::string note;
};

struct InequalityReport {
  std::vector<InequalityResult> results;
  bool pass = true;

  const InequalityResult* find(const std::string& name) const {
    for (const auto& r : results) {
      if (r.name == name) {
        return &r;
      }
    }
    return nullptr;
  }

  void add(InequalityResult r) {
    pass = pass && r.pass;
    results.push_back(std::move(r));
  }
};

} // namespace facetflow
