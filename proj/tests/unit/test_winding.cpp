#include "equiflow/winding.hpp"

#include "equiflow/generators.hpp"
#include "test_util.hpp"

using namespace equiflow;
using namespace equiflow::testing;
using winding::make_unitary_path;

namespace {

winding::UnitaryPath circle(double turns, const CMatrix& actor = CMatrix()) {
  return make_unitary_path([turns](double t) { return scalar(std::polar(1.0, kTwoPi * turns * t)); }, 1, actor);
}

}  // namespace

TEST(Winding, ScalarLoopCountsOneCrossingWithItsCharacter) {
  const Complex chi = omega(5, 2);
  const auto w = winding::winding_number(circle(1.0, scalar(chi)));
  EXPECT_CNEAR(w.value, chi, 1e-12);
  ASSERT_EQ(w.crossings.size(), 1u);
  EXPECT_EQ(w.crossings[0].direction, +1);
  EXPECT_NEAR(w.crossings[0].time, 0.5 + w.offset / kTwoPi, 1e-8);
}

TEST(Winding, ConstantPathIsZero) {
  gen::Stream rng(31, 0);
  EXPECT_CNEAR(winding::winding_number(winding::constant(gen::random_unitary(3, rng))).value, 0.0, 0.0);
}

TEST(Winding, ReversalNegates) {
  const Complex chi = omega(3);
  EXPECT_CNEAR(winding::winding_number(winding::reverse(circle(1.0, scalar(chi)))).value, -chi, 1e-12);
}

TEST(Winding, EndpointAtMinusOneIsPushedBelowTheLine) {
  // e^{i pi t} reaches -1 only at t = 1; the positive offset keeps it short of the counting line.
  EXPECT_CNEAR(winding::winding_number(circle(0.5)).value, 0.0, 0.0);
  EXPECT_CNEAR(winding::winding_number(circle(3.0)).value, 3.0, 1e-12);
}

TEST(Winding, FredholmDeterminant) {
  const Complex chi = omega(7, 3);
  EXPECT_CNEAR(winding::fredholm_det_path(circle(1.0, scalar(chi))), std::exp(kTwoPi * kI * chi), 1e-8);
  gen::Stream rng(32, 0);
  EXPECT_CNEAR(winding::fredholm_det_path(winding::constant(gen::random_unitary(2, rng))), 1.0, 1e-12);
}

TEST(Winding, FredholmDeterminantIsMultiplicative) {
  gen::Stream rng(33, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto action = gen::random_cyclic_action(3, 3, rng);
    const auto f = make_unitary_path(gen::random_unitary_path(action, rng), 3, action.generator());
    const auto g = make_unitary_path(gen::random_unitary_path(action, rng), 3, action.generator());
    const Complex dfg = winding::fredholm_det_path(winding::product(f, g));
    const Complex df = winding::fredholm_det_path(f);
    const Complex dg = winding::fredholm_det_path(g);
    EXPECT_LE(std::abs(dfg - df * dg) / std::abs(df * dg), 1e-6);
  }
}

TEST(Winding, TraceLogFormulaAgrees) {
  gen::Stream rng(34, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto action = gen::random_cyclic_action(4, 5, rng);
    const auto f = make_unitary_path(gen::random_unitary_path(action, rng), 4, action.generator());
    EXPECT_CNEAR(winding::trace_log_winding(f), winding::winding_number(f).value, 1e-6);
  }
}

TEST(Winding, AdditiveUnderConcatenation) {
  gen::Stream rng(35, 0);
  const auto action = gen::random_cyclic_action(3, 4, rng);
  const MatrixPath s = gen::random_unitary_path(action, rng);
  const auto f = make_unitary_path([s](double t) { return s(0.5 * t); }, 3, action.generator());
  const auto g = make_unitary_path([s](double t) { return s(0.5 + 0.5 * t); }, 3, action.generator());
  const auto whole = make_unitary_path(s, 3, action.generator());
  EXPECT_CNEAR(winding::winding_number(winding::concatenate(f, g)).value, winding::winding_number(whole).value, 1e-9);
  EXPECT_CNEAR(winding::winding_number(f).value + winding::winding_number(g).value,
               winding::winding_number(whole).value, 1e-9);
}

TEST(Winding, RejectsActorThatDoesNotCommute) {
  CMatrix a(2, 2);
  a << 0.0, 1.0, 1.0, 0.0;
  const auto f = make_unitary_path([](double t) { return diag({std::polar(1.0, kTwoPi * t), 1.0}); }, 2, a);
  EXPECT_THROW(winding::winding_number(f), Error);
}

TEST(CanonicalPath, Examples) {
  const Complex chi = omega(5);
  // U = I: nothing is pinned at -1 and the decorated path is exp(t log a).
  const auto id = winding::canonical_path(CMatrix::Identity(1, 1), scalar(chi));
  EXPECT_CNEAR(id.decorated(1.0)(0, 0), chi, 1e-12);
  EXPECT_CNEAR(id.decorated(0.5)(0, 0), omega(10), 1e-12);
  // U = -1: the whole space is pinned and the decorated path is constant -chi.
  const auto minus = winding::canonical_path(scalar(-1.0), scalar(chi));
  for (double t : {0.0, 0.3, 1.0}) EXPECT_CNEAR(minus.decorated(t)(0, 0), -chi, 1e-12);
  // Block case diag(-1, i).
  const auto mixed = winding::canonical_path(diag({-1.0, kI}), diag({chi, 1.0}));
  const double t = 0.4;
  const CMatrix expected = diag({-chi, std::polar(1.0, t * kPi / 2)});
  EXPECT_LE((mixed.decorated(t) - expected).norm(), 1e-12);
  EXPECT_LE((mixed.path(1.0) - diag({-1.0, kI})).norm(), 1e-12);
}

TEST(DoubleIndex, Examples) {
  gen::Stream rng(36, 0);
  const CMatrix v = gen::random_unitary(2, rng);
  EXPECT_CNEAR(winding::double_index(CMatrix::Identity(2, 2), v, CMatrix::Identity(2, 2)), 0.0, 1e-12);
  const Complex u0 = std::polar(1.0, 2.2);
  EXPECT_CNEAR(winding::double_index(scalar(u0), scalar(std::conj(u0)), scalar(1.0)), 0.0, 1e-12);
  // Only the product's complement phase t (pi/2 + 2) passes pi.
  EXPECT_CNEAR(winding::double_index(diag({-1.0, kI}), diag({-1.0, std::polar(1.0, 2.0)}), CMatrix::Identity(2, 2)),
               -1.0, 1e-12);
}

TEST(DoubleIndex, IncompatibleSplittingIsRejected) {
  try {
    winding::double_index(diag({-1.0, kI}), diag({kI, kI}), CMatrix::Identity(2, 2));
    FAIL() << "expected IncompatibleSplitting";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompatibleSplitting);
  }
}

TEST(RelativeDoubleIndex, Examples) {
  gen::Stream rng(37, 0);
  EXPECT_CNEAR(winding::relative_double_index(winding::constant(gen::random_unitary(2, rng)),
                                              winding::constant(gen::random_unitary(2, rng))),
               0.0, 1e-12);
  // w(f) = w(g) = 0 while w(fg) = w(e^{2 pi i t}) = 1.
  EXPECT_CNEAR(winding::relative_double_index(circle(0.5), circle(0.5)), -1.0, 1e-12);
}

TEST(RelativeDoubleIndex, CanonicalPathsReproduceTheDoubleIndex) {
  const CMatrix u = diag({-1.0, kI, std::polar(1.0, -2.5)});
  const CMatrix v = diag({-1.0, std::polar(1.0, 2.0), std::polar(1.0, 1.7)});
  const CMatrix a = diag({omega(3), 1.0, omega(3, 2)});
  const auto cu = winding::canonical_path(u, a);
  const auto cv = winding::canonical_path(v, a);
  const auto f = make_unitary_path([cu](double t) { return cu.path(t); }, 3, a);
  const auto g = make_unitary_path([cv](double t) { return cv.path(t); }, 3, a);
  EXPECT_CNEAR(winding::relative_double_index(f, g), winding::double_index(u, v, a), 1e-12);
}
