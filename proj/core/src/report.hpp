#pragma once

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "equiflow/harness.hpp"

namespace equiflow::harness::detail {

using nlohmann::json;

// Tracks the worst deviation of one asserted identity over many cases.
class Check {
 public:
  Check(std::string name, double tolerance) : name_(std::move(name)), tol_(tolerance) {}

  void add(double deviation) {
    ++count_;
    if (!(deviation <= tol_)) ++failures_;
    if (!(deviation <= worst_)) worst_ = deviation;
  }
  void fail(const std::string& why) {
    ++count_;
    ++failures_;
    worst_ = std::numeric_limits<double>::infinity();
    if (detail_.empty()) detail_ = why;
  }
  void note(const std::string& detail) { detail_ = detail; }

  CheckResult result() const {
    CheckResult r;
    r.name = name_;
    r.tolerance = tol_;
    r.measured = worst_;
    r.count = count_;
    r.failures = failures_;
    r.passed = failures_ == 0 && count_ > 0;
    r.detail = detail_;
    return r;
  }

 private:
  std::string name_;
  double tol_;
  double worst_ = 0.0;
  int count_ = 0;
  int failures_ = 0;
  std::string detail_;
};

json complex_json(Complex z);
json check_json(const CheckResult& c);

RunReport finish_report(const std::string& kind, const json& config, const std::vector<ElementValue>& results,
                        const std::vector<CheckResult>& checks, const json& diagnostics);

RunReport run_suite(const std::string& name, std::uint64_t seed);
const std::vector<SuiteInfo>& suite_infos();

}  // namespace equiflow::harness::detail
