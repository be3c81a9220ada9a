#include "equiflow/harness.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "equiflow/generators.hpp"
#include "test_util.hpp"

using namespace equiflow;
using namespace equiflow::testing;
using harness::run_config_text;

namespace {

ErrorCode code_of(const std::string& config) {
  try {
    run_config_text(config);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "config was accepted: " << config;
  return ErrorCode::ComputationFailed;
}

std::string message_of(const std::string& config) {
  try {
    run_config_text(config);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

Complex result(const harness::RunReport& r, const std::string& label) {
  for (const auto& e : r.results) {
    if (e.label == label) return e.value;
  }
  ADD_FAILURE() << "no result " << label;
  return {};
}

#ifndef EQUIFLOW_CLI_PATH
#define EQUIFLOW_CLI_PATH ""
#endif

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EQUIFLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Generators, StreamsAreReproducibleAndIndependent) {
  gen::Stream a(99, 3), b(99, 3), c(99, 4);
  for (int i = 0; i < 10; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
  }
}

TEST(Generators, EquivariantSamplesCommuteWithTheAction) {
  gen::Stream rng(98, 0);
  const auto action = gen::random_cyclic_action(5, 4, rng);
  const CMatrix g = action.generator();
  EXPECT_LE((g * g * g * g - CMatrix::Identity(5, 5)).norm(), 1e-12);
  EXPECT_LE(commutator_norm(g, gen::random_equivariant_hermitian(action, rng)), 1e-12);
  EXPECT_LE(commutator_norm(g, gen::random_equivariant_unitary(action, rng)), 1e-12);
}

TEST(Harness, DiagCrossingScenario) {
  const auto r = run_config_text(R"({"kind": "sf", "generator": {"name": "diag_crossing", "params": {"order": 3}}})");
  EXPECT_CNEAR(result(r, "g^1"), Complex(-0.5, 0.8660254037844386), 1e-12);
  EXPECT_TRUE(r.passed());
}

TEST(Harness, MaslovScalarExample) {
  const auto r = run_config_text(
      R"({"kind": "maslov", "generator": {"name": "scalar_example", "params": {"order": 5}}, "group": {"powers": [1]}})");
  EXPECT_CNEAR(result(r, "g^1"), -omega(5), 1e-12);
}

TEST(Harness, ReportsAreDeterministic) {
  const std::string config =
      R"({"kind": "sf", "seed": 5, "generator": {"name": "random_path", "params": {"dim": 4, "order": 3}},
          "group": {"powers": [0, 1, 2]}})";
  const auto a = run_config_text(config);
  const auto b = run_config_text(config);
  EXPECT_EQ(a.body, b.body);
  const auto c = run_config_text(
      R"({"kind": "sf", "seed": 6, "generator": {"name": "random_path", "params": {"dim": 4, "order": 3}},
          "group": {"powers": [0, 1, 2]}})");
  EXPECT_NE(a.body, c.body);
}

TEST(Harness, VerifyIsDeterministicAcrossThreadCounts) {
  ::setenv("EQUIFLOW_THREADS", "1", 1);
  const auto a = harness::verify("winding_props", 11);
  ::setenv("EQUIFLOW_THREADS", "3", 1);
  const auto b = harness::verify("winding_props", 11);
  ::unsetenv("EQUIFLOW_THREADS");
  EXPECT_EQ(a.body, b.body);
  EXPECT_TRUE(a.passed());
}

TEST(Harness, ThreadCountHonoursEnvironment) {
  ::setenv("EQUIFLOW_THREADS", "2", 1);
  EXPECT_EQ(harness::thread_count(), 2);
  ::setenv("EQUIFLOW_THREADS", "zero", 1);
  EXPECT_GE(harness::thread_count(), 1);
  ::unsetenv("EQUIFLOW_THREADS");
}

TEST(Harness, MalformedJsonReportsLine) {
  const std::string bad = "{\n  \"kind\": \"sf\",\n  \"generator\": {\n    \"name\": \"diag_crossing\",,\n  }\n}\n";
  EXPECT_EQ(code_of(bad), ErrorCode::ConfigInvalid);
  EXPECT_NE(message_of(bad).find("line 4"), std::string::npos) << message_of(bad);
}

TEST(Harness, UnknownFieldsAreRejected) {
  EXPECT_EQ(code_of(R"({"kind": "sf", "generator": {"name": "diag_crossing"}, "colour": 1})"), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of(R"({"kind": "sf", "generator": {"name": "diag_crossing", "params": {"ordre": 3}}})"),
            ErrorCode::ConfigInvalid);
  EXPECT_NE(message_of(R"({"kind": "sf", "generator": {"name": "diag_crossing", "params": {"ordre": 3}}})")
                .find("/generator/params/ordre"),
            std::string::npos);
  EXPECT_EQ(code_of(R"({"kind": "nonsense"})"), ErrorCode::ConfigInvalid);
}

TEST(Harness, RandomGeneratorsNeedASeed) {
  EXPECT_EQ(code_of(R"({"kind": "sf", "generator": {"name": "random_path"}})"), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of(R"({"kind": "maslov", "generator": {"name": "random_pair"}})"), ErrorCode::ConfigInvalid);
}

TEST(Harness, BadMatricesAreConfigErrors) {
  EXPECT_EQ(code_of(R"({"kind": "eta", "generator": {"name": "explicit", "params": {"d": [[1, 2], [0, 1]]}}})"),
            ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of(R"({"kind": "eta", "generator": {"name": "explicit", "params": {"d": [[1, 2], [0]]}}})"),
            ErrorCode::ConfigInvalid);
}

TEST(Harness, KernelInZetaDeterminantIsAComputationFailure) {
  EXPECT_EQ(code_of(R"({"kind": "zeta_det", "generator": {"name": "explicit", "params": {"d": [[0, 0], [0, 2]]}}})"),
            ErrorCode::ComputationFailed);
}

TEST(Harness, UnknownSuite) {
  EXPECT_THROW(harness::verify("no_such_suite"), Error);
  EXPECT_EQ(code_of(R"({"kind": "verify", "suite": "no_such_suite"})"), ErrorCode::ConfigInvalid);
}

TEST(Harness, TolerancesAreValidated) {
  EXPECT_EQ(code_of(R"({"kind": "sf", "generator": {"name": "diag_crossing"}, "tolerances": {"zero_tol": -1}})"),
            ErrorCode::ConfigInvalid);
  const auto r = run_config_text(
      R"({"kind": "sf", "generator": {"name": "diag_crossing"}, "tolerances": {"zero_tol": 1e-10}})");
  EXPECT_TRUE(r.passed());
}

TEST(Harness, SuitesAreRegisteredForEveryCriterion) {
  const auto& s = harness::suites();
  ASSERT_EQ(s.size(), 14u);
  for (int i = 0; i < 14; ++i) EXPECT_EQ(s[i].criterion, i + 1);
}

TEST(Cli, ExampleConfigsRunCleanly) {
  if (std::string(EQUIFLOW_CLI_PATH).empty()) GTEST_SKIP() << "command-line tool not built";
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(EQUIFLOW_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    EXPECT_EQ(run_cli("run " + entry.path().string()), 0) << entry.path();
  }
  EXPECT_GT(seen, 5);
}

TEST(Cli, ExitCodes) {
  if (std::string(EQUIFLOW_CLI_PATH).empty()) GTEST_SKIP() << "command-line tool not built";
  const auto dir = std::filesystem::temp_directory_path() / "equiflow_cli_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "bad.json") << "{ \"kind\": \"sf\", \n";
    std::ofstream(dir / "kernel.json")
        << R"({"kind": "zeta_det", "generator": {"name": "explicit", "params": {"d": [[0]]}}})";
  }
  EXPECT_EQ(run_cli("run " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("run " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("run " + (dir / "kernel.json").string()), 1);
  EXPECT_EQ(run_cli("verify no_such_suite"), 2);
  EXPECT_EQ(run_cli("list"), 0);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("verify bott_loop --seed 3 --out " + (dir / "out").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "bott_loop.json"));
  EXPECT_EQ(run_cli("run " + std::string(EQUIFLOW_CONFIG_DIR) + "/circle_eta.json --csv " + (dir / "s.csv").string()), 0);
  EXPECT_GT(std::filesystem::file_size(dir / "s.csv"), 0u);
  std::filesystem::remove_all(dir);
}
