#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "equiflow/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kComputationFailure = 1;
constexpr int kConfigError = 2;

int exit_code_for(const equiflow::Error& e) {
  switch (e.code()) {
    case equiflow::ErrorCode::ConfigInvalid:
    case equiflow::ErrorCode::UnknownSuite:
      return kConfigError;
    default:
      return kComputationFailure;
  }
}

bool write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equiflow: equivariant spectral flow, Maslov and eta invariants"};
  app.require_subcommand(1);

  std::string config_path, csv_path;
  auto* run = app.add_subcommand("run", "Execute a JSON scenario and print the report");
  run->add_option("config", config_path, "Scenario config file")->required();
  run->add_option("--csv", csv_path, "Write spectrum CSV data (if the scenario produced any) to this file");

  std::string suite, out_dir;
  std::uint64_t seed = equiflow::harness::kDefaultSeed;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", suite, "Suite name (see `equiflow list`)")->required();
  verify->add_option("--seed", seed, "Random seed");
  verify->add_option("--out", out_dir, "Directory for the JSON report");

  auto* list = app.add_subcommand("list", "List verification suites and scenario kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (list->parsed()) {
      std::cout << "suites:\n";
      for (const auto& s : equiflow::harness::suites()) {
        std::cout << "  " << s.name << "  [" << s.criterion << "] " << s.description << "\n";
      }
      std::cout << "scenario kinds:\n";
      for (const auto& k : equiflow::harness::scenario_kinds()) std::cout << "  " << k << "\n";
      return kOk;
    }

    if (run->parsed()) {
      const auto report = equiflow::harness::run_config_file(config_path);
      std::cout << report.to_json() << "\n";
      if (!csv_path.empty() && !write_file(csv_path, report.csv)) {
        std::cerr << "error: cannot write " << csv_path << "\n";
        return kComputationFailure;
      }
      return report.passed() ? kOk : kComputationFailure;
    }

    const auto report = equiflow::harness::verify(suite, seed);
    const std::string text = report.to_json();
    std::cout << text << "\n";
    if (!out_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      if (!write_file(std::filesystem::path(out_dir) / (suite + ".json"), text + "\n")) {
        std::cerr << "error: cannot write to " << out_dir << "\n";
        return kComputationFailure;
      }
    }
    for (const auto& c : report.checks) {
      std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << (c.count - c.failures) << "/" << c.count
                << ", worst " << c.measured << ", tol " << c.tolerance << ")\n";
    }
    return report.passed() ? kOk : kComputationFailure;
  } catch (const equiflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kComputationFailure;
  }
}
