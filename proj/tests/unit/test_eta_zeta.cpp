#include "equiflow/eta_zeta.hpp"

#include "equiflow/generators.hpp"
#include "equiflow/specflow.hpp"
#include "test_util.hpp"

using namespace equiflow;
using namespace equiflow::testing;
using eta_zeta::make_operator;

TEST(Eta, DirectSumOfSigns) {
  const Complex c1 = omega(5, 1), c2 = omega(5, 2), c3 = omega(5, 4);
  EXPECT_CNEAR(eta_zeta::eta(make_operator(diag({1.0, -2.0, 3.0}), diag({c1, c2, c3}))), c1 - c2 + c3, 1e-14);
  EXPECT_CNEAR(eta_zeta::eta(make_operator(diag({-1.5, 1.5, -0.2, 0.2}))), 0.0, 1e-14);
  const Complex chi = omega(3);
  EXPECT_CNEAR(eta_zeta::eta(make_operator(scalar(4.0), scalar(chi)), 0.5), chi / 2.0, 1e-14);
}

TEST(Eta, ReducedEtaCountsTheKernelAsPositive) {
  const Complex chi = omega(3);
  EXPECT_CNEAR(eta_zeta::reduced_eta(make_operator(diag({0.0, 5.0}), diag({chi, 1.0}))), (1.0 + chi) / 2.0, 1e-14);
  const auto inv = make_operator(diag({-1.0, 2.0, 3.0}));
  EXPECT_CNEAR(eta_zeta::reduced_eta(inv), eta_zeta::eta(inv) / 2.0, 1e-14);
}

TEST(Eta, ReducedEtaJumpsByTheCrossingWeight) {
  const Complex chi = omega(4);
  const CMatrix h = diag({chi, 1.0});
  const double d = 1e-3;
  const Complex jump = eta_zeta::reduced_eta(make_operator(diag({d, 5.0}), h)) -
                       eta_zeta::reduced_eta(make_operator(diag({-d, 5.0}), h));
  EXPECT_CNEAR(jump, chi, 1e-14);
}

TEST(Eta, TruncatedEta) {
  const auto one = make_operator(scalar(1.0));
  EXPECT_NEAR(eta_zeta::truncated_eta(one, 1.0).real(), 0.1572992071, 1e-10);
  EXPECT_CNEAR(eta_zeta::truncated_eta(one, 1e3), 0.0, 1e-300);
  const auto op = make_operator(diag({1.0, -2.0, 0.5}));
  EXPECT_CNEAR(eta_zeta::truncated_eta(op, 1e-14), eta_zeta::eta(op), 1e-6);
  EXPECT_CNEAR(eta_zeta::truncated_eta_quadrature(op, 0.7), eta_zeta::truncated_eta(op, 0.7), 1e-9);
}

TEST(Eta, EtaForm) {
  const auto op = make_operator(CMatrix::Zero(3, 3));
  EXPECT_CNEAR(eta_zeta::eta_form(op, CMatrix::Zero(3, 3), 1.0), 0.0, 0.0);
  EXPECT_CNEAR(eta_zeta::eta_form(op, CMatrix::Identity(3, 3), kPi), 3.0, 1e-14);
}

TEST(Eta, GradientOfTruncatedEta) {
  gen::Stream rng(51, 0);
  const auto action = gen::random_cyclic_action(4, 3, rng);
  const auto path = specflow::make_path(gen::random_hermitian_path(action, rng), 4, action.generator());
  const double eps = 0.8, t = 0.37, d = 1e-3;
  auto at = [&](double s) { return eta_zeta::truncated_eta(make_operator(path.sampler(s), path.h), eps); };
  const Complex fd = (-at(t + 2 * d) + 8.0 * at(t + d) - 8.0 * at(t - d) + at(t - 2 * d)) / (12.0 * d);
  const Complex an = eta_zeta::truncated_eta_derivative(path, t, eps);
  EXPECT_LE(std::abs(fd - an) / std::abs(an), 1e-5);
}

TEST(Getzler, Examples) {
  const CMatrix d = diag({-1.0, 2.0});
  EXPECT_CNEAR(eta_zeta::getzler_spectral_flow(specflow::make_path([d](double) { return d; }, 2)).value, 0.0, 1e-12);
  const Complex w = omega(3);
  const auto up = specflow::make_path([](double t) { return diag({2 * t - 1, 1.0}); }, 2, diag({w, 1.0}));
  EXPECT_CNEAR(eta_zeta::getzler_spectral_flow(up).value, w, 1e-6);
}

TEST(Getzler, AgreesWithSpectralFlowOnRandomPaths) {
  for (int i = 0; i < 50; ++i) {
    gen::Stream rng(52, i);
    const int n = rng.integer(2, 6);
    const auto action = gen::random_cyclic_action(n, rng.integer(1, 6), rng);
    const auto path = specflow::make_path(gen::random_hermitian_path(action, rng), n, action.generator());
    EXPECT_CNEAR(eta_zeta::getzler_spectral_flow(path).value, specflow::spectral_flow(path).value, 1e-6);
  }
}

TEST(HeatTrace, Examples) {
  EXPECT_CNEAR(eta_zeta::heat_trace(make_operator(diag({1.0, 2.0})), 1.0), std::exp(-1.0) + std::exp(-2.0), 1e-15);
  EXPECT_CNEAR(eta_zeta::heat_trace(make_operator(diag({1.0, 2.0, -3.0})), 1e-12), 3.0, 1e-9);
  const Complex chi = omega(5);
  const double t = 0.3;
  EXPECT_CNEAR(eta_zeta::heat_trace(make_operator(scalar(3.0), scalar(chi)), t), chi * std::exp(-3.0 * t), 1e-15);
}

TEST(Zeta, Examples) {
  const auto d = make_operator(diag({2.0, 3.0}));
  EXPECT_CNEAR(eta_zeta::zeta_prime0(d), -std::log(6.0), 1e-14);
  const Complex chi = omega(3);
  EXPECT_CNEAR(eta_zeta::zeta(make_operator(scalar(4.0), scalar(chi)), 0.5), chi / 2.0, 1e-14);
}

TEST(Zeta, MellinMatchesDirectSum) {
  gen::Stream rng(53, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix x = gen::random_hermitian(4, rng);
    const auto op = make_operator(x * x + 0.3 * CMatrix::Identity(4, 4));
    const Complex direct = eta_zeta::zeta(op, 2.0);
    EXPECT_LE(std::abs(eta_zeta::zeta_mellin(op, 2.0) - direct) / std::abs(direct), 1e-6);
  }
}

TEST(Zeta, KernelAndSignRequirements) {
  EXPECT_THROW(eta_zeta::zeta_prime0(make_operator(diag({-1.0, 2.0}))), Error);
  EXPECT_THROW(eta_zeta::zeta_determinant(make_operator(diag({0.0, 2.0}))), Error);
}

TEST(ZetaDeterminant, Examples) {
  EXPECT_CNEAR(eta_zeta::zeta_determinant(make_operator(diag({2.0, 3.0}))), 6.0, 1e-13);
  EXPECT_CNEAR(eta_zeta::zeta_determinant(make_operator(diag({2.0, -3.0}))), -6.0, 1e-13);
  const Complex chi = omega(5, 2);
  for (double lambda : {2.5, -0.7}) {
    const Complex expected =
        std::exp(Complex(0.0, kPi / 2) * (chi - chi * (lambda > 0 ? 1.0 : -1.0))) * std::pow(std::abs(lambda), chi);
    EXPECT_CNEAR(eta_zeta::zeta_determinant(make_operator(scalar(lambda), scalar(chi))), expected, 1e-13);
  }
}

TEST(ZetaDeterminant, EqualsDeterminantForTrivialAction) {
  gen::Stream rng(54, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix d = gen::random_hermitian(5, rng, 3.0);
    const Complex det = d.determinant();
    EXPECT_LE(std::abs(eta_zeta::zeta_determinant(make_operator(d)) - det) / std::abs(det), 1e-10);
  }
}

TEST(LogDefect, Examples) {
  const CMatrix d = diag({-1.0, 2.0});
  EXPECT_CNEAR(eta_zeta::eta_log_defect(d, d, CMatrix::Identity(2, 2)).defect, 0.0, 1e-12);
  EXPECT_CNEAR(eta_zeta::eta_log_defect(diag({1.0, -2.0}), diag({1.5, -0.5}), CMatrix::Identity(2, 2)).defect, 0.0,
               1e-8);
  const Complex chi = omega(5);
  const auto r = eta_zeta::eta_log_defect(diag({-0.1, 5.0}), diag({0.1, 5.0}), diag({chi, 1.0}));
  EXPECT_CNEAR(r.defect, chi, 1e-8);
}

TEST(LogDefect, UnscaledFormulaMissesTheLattice) {
  // Without rescaling, erf(0.1) is far from +-1 and the defect is not a character sum.
  const Complex chi = omega(5);
  const auto r = eta_zeta::eta_log_defect(diag({-0.1, 5.0}), diag({0.1, 5.0}), diag({chi, 1.0}), 1.0);
  EXPECT_GT(std::abs(r.defect - chi), 1e-2);
}

TEST(LogDefect, LatticeFitRecoversMultiplicities) {
  const CMatrix h = diag({omega(3), omega(3), 1.0, omega(3, 2)});
  const auto fit = eta_zeta::lattice_fit([](const CMatrix& g) { return 2.0 * g(0, 0) - g(2, 2); }, h);
  EXPECT_LE(fit.residual, 1e-9);
}

TEST(Isotypic, ProjectorsSumToIdentity) {
  gen::Stream rng(55, 0);
  const auto action = gen::random_cyclic_action(5, 4, rng);
  const auto iso = eta_zeta::isotypic_decomposition(action.generator());
  CMatrix sum = CMatrix::Zero(5, 5);
  for (const auto& p : iso.projectors) sum += p;
  EXPECT_LE((sum - CMatrix::Identity(5, 5)).norm(), 1e-12);
}
