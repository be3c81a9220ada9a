#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "equiflow/common.hpp"

namespace equiflow::harness {

// One asserted identity: `failures` out of `count` cases exceeded `tolerance`; `measured` is
// the worst observed deviation.
struct CheckResult {
  std::string name;
  bool passed = true;
  double measured = 0.0;
  double tolerance = 0.0;
  int count = 0;
  int failures = 0;
  std::string detail;
};

struct ElementValue {
  std::string label;
  Complex value{0.0, 0.0};
};

struct RunReport {
  std::string kind;
  std::string body;  // deterministic JSON document (no timing)
  std::vector<ElementValue> results;
  std::vector<CheckResult> checks;
  std::string csv;   // optional spectrum / plot data
  double wall_seconds = 0.0;

  bool passed() const;
  // The body with the wall time appended when requested.
  std::string to_json(bool include_time = true, int indent = 2) const;
};

// Parses and executes a UTF-8 JSON scenario. Configuration problems throw Error(ConfigInvalid).
RunReport run_config_text(const std::string& text);
RunReport run_config_file(const std::string& path);

struct SuiteInfo {
  std::string name;
  int criterion = 0;
  std::string description;
};

const std::vector<SuiteInfo>& suites();
std::vector<std::string> scenario_kinds();

constexpr std::uint64_t kDefaultSeed = 20240601;

// Runs a registered verification suite. Throws Error(UnknownSuite) for unknown names.
RunReport verify(const std::string& suite, std::uint64_t seed = kDefaultSeed);

// Worker count: EQUIFLOW_THREADS when set to a positive integer, else hardware concurrency.
int thread_count();

// Evaluates fn(0..n-1) on up to thread_count() workers; results are returned in index order.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace equiflow::harness
