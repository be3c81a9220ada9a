#include "equiflow/specflow.hpp"

#include "equiflow/generators.hpp"
#include "test_util.hpp"

using namespace equiflow;
using namespace equiflow::testing;
using specflow::make_path;

namespace {

specflow::HermitianPath up_crossing(const CMatrix& h) {
  return make_path([](double t) { return diag({2 * t - 1, 1.0}); }, 2, h);
}

}  // namespace

TEST(SpectralFlow, SingleUpCrossingCarriesItsCharacter) {
  const Complex w = omega(3);
  const auto path = up_crossing(diag({w, 1.0}));
  EXPECT_CNEAR(specflow::spectral_flow(path).value, w, 1e-12);
  const auto oracle = specflow::crossing_oracle(path);
  EXPECT_CNEAR(oracle.value, w, 1e-12);
  ASSERT_EQ(oracle.crossings.size(), 1u);
  EXPECT_NEAR(oracle.crossings[0].time, 0.5, 1e-9);
  EXPECT_EQ(oracle.crossings[0].direction, +1);
}

TEST(SpectralFlow, ConstantInvertiblePathIsZero) {
  const CMatrix d = diag({-2.0, 0.5, 3.0});
  const auto path = make_path([d](double) { return d; }, 3);
  const auto part = specflow::good_partition(path);
  EXPECT_EQ(part.size(), 1);
  EXPECT_CNEAR(specflow::spectral_flow(path).value, 0.0, 0.0);
}

TEST(SpectralFlow, PartitionAvoidsTheSpectrum) {
  const auto path = up_crossing(CMatrix::Identity(2, 2));
  const auto part = specflow::good_partition(path);
  for (const auto& c : part.intervals) EXPECT_GT(c.margin(), 0.0);
  EXPECT_CNEAR(specflow::spectral_flow(path, part.refined()).value, 1.0, 1e-12);
}

TEST(SpectralFlow, ConcatenationOfOppositeCrossings) {
  // The w line moves up in the first half; the w^2 line moves down in the second.
  const Complex w = omega(3);
  const CMatrix h = diag({w, w * w});
  const auto loop = specflow::concatenate(make_path([](double t) { return diag({2 * t - 1, 1.0}); }, 2, h),
                                          make_path([](double t) { return diag({1.0, 1 - 2 * t}); }, 2, h));
  EXPECT_CNEAR(specflow::spectral_flow(loop).value, w - w * w, 1e-12);
  EXPECT_CNEAR(specflow::crossing_oracle(loop).value, w - w * w, 1e-12);
}

TEST(SpectralFlow, ReversalNegates) {
  const auto path = up_crossing(diag({omega(5, 2), 1.0}));
  EXPECT_CNEAR(specflow::spectral_flow(specflow::reverse(path)).value, -omega(5, 2), 1e-12);
}

TEST(SpectralFlow, UpAndDownOfTheSameLineCancel) {
  const auto path = make_path([](double t) { return diag({0.5 - std::sin(kPi * t), 2.0}); }, 2, diag({omega(4), 1.0}));
  EXPECT_CNEAR(specflow::crossing_oracle(path).value, 0.0, 1e-12);
  EXPECT_CNEAR(specflow::spectral_flow(path).value, 0.0, 1e-12);
}

TEST(SpectralFlow, DegenerateClusterCrossingWeighsTheTrace) {
  const Complex c1 = omega(5, 1), c2 = omega(5, 3);
  const auto path = make_path([](double t) { return CMatrix((2 * t - 1) * CMatrix::Identity(2, 2)); }, 2, diag({c1, c2}));
  EXPECT_CNEAR(specflow::crossing_oracle(path).value, c1 + c2, 1e-12);
  EXPECT_CNEAR(specflow::spectral_flow(path).value, c1 + c2, 1e-12);
}

TEST(SpectralFlow, EndpointKernelsFollowTheHalfOpenConvention) {
  // Starting in the kernel and moving up counts; ending in the kernel from below does not.
  const auto start = make_path([](double t) { return scalar(t); }, 1);
  const auto finish = make_path([](double t) { return scalar(t - 1.0); }, 1);
  EXPECT_CNEAR(specflow::spectral_flow(start).value + specflow::spectral_flow(finish).value,
               specflow::spectral_flow(make_path([](double t) { return scalar(2 * t - 1); }, 1)).value, 1e-12);
}

TEST(SpectralFlow, TrivialActionIsInteger) {
  gen::Stream rng(21, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto action = gen::trivial_action(4);
    const auto path = make_path(gen::random_hermitian_path(action, rng), 4);
    const Complex v = specflow::spectral_flow(path).value;
    EXPECT_NEAR(v.real(), std::round(v.real()), 1e-12);
    EXPECT_NEAR(v.imag(), 0.0, 1e-12);
  }
}

TEST(SpectralFlow, RejectsNonCommutingSymmetry) {
  CMatrix h(2, 2);
  h << 0.0, 1.0, 1.0, 0.0;
  EXPECT_THROW(specflow::spectral_flow(up_crossing(h)), Error);
}

TEST(BottLoop, RankOneExamples) {
  const auto trivial = specflow::bott_loop({1.0}, {1.0}, 1);
  EXPECT_CNEAR(specflow::spectral_flow(trivial.hermitian).value, 1.0, 1e-12);
  const Complex w = omega(3);
  const auto loop = specflow::bott_loop({1.0}, {w, 1.0}, 1);
  EXPECT_CNEAR(specflow::spectral_flow(loop.hermitian).value, w, 1e-12);
  EXPECT_CNEAR(loop.expected, w, 1e-15);
}

TEST(BottLoop, NoPerturbationHasNoFlow) {
  const auto loop = specflow::bott_loop({1.0}, {omega(3)}, 0);
  EXPECT_CNEAR(specflow::spectral_flow(loop.hermitian).value, 0.0, 1e-12);
}
