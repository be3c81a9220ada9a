#include "equiflow/dirac_models.hpp"

#include <sstream>

#include "equiflow/generators.hpp"
#include "equiflow/maslov.hpp"
#include "test_util.hpp"

using namespace equiflow;
using namespace equiflow::testing;

namespace {

dirac::EtaOptions abel(double cutoff = 50.0) {
  dirac::EtaOptions o;
  o.mode = dirac::Regularization::Abel;
  o.cutoff = cutoff;
  return o;
}

}  // namespace

TEST(CircleModel, SpectrumIsShiftedIntegers) {
  const auto model = dirac::make_circle_model(scalar(0.25), CMatrix(), 3);
  const auto lines = dirac::circle_spectrum(model, {{0, 0}, {0, 1}}, 5.0);
  ASSERT_EQ(lines.size(), 10u);  // -4.75 ... 4.25
  for (const auto& l : lines) {
    const double k = l.lambda - 0.25;
    EXPECT_NEAR(k, std::round(k), 1e-14);
    EXPECT_CNEAR(l.weights[0], 1.0, 1e-14);
    const int kk = static_cast<int>(std::lround(k));
    EXPECT_CNEAR(l.weights[1], omega(3, ((kk % 3) + 3) % 3), 1e-12);
  }
}

TEST(CircleModel, TwoChannelsInterleave) {
  const Complex chi = omega(5);
  const auto model = dirac::make_circle_model(diag({0.2, 0.7}), diag({chi, 1.0}));
  const auto lines = dirac::circle_spectrum(model, {{1, 0}}, 1.0);
  ASSERT_EQ(lines.size(), 4u);  // -0.8, -0.3, 0.2, 0.7
  const double lambdas[] = {-0.8, -0.3, 0.2, 0.7};
  const Complex weights[] = {chi, 1.0, chi, 1.0};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(lines[i].lambda, lambdas[i], 1e-14);
    EXPECT_CNEAR(lines[i].weights[0], weights[i], 1e-14);
  }
}

TEST(CircleModel, EtaClosedForms) {
  const auto model = dirac::make_circle_model(scalar(0.25), CMatrix(), 3);
  const auto eta = dirac::circle_eta(model, {{0, 0}, {0, 1}});
  EXPECT_CNEAR(eta[0].eta, 0.5, 1e-3);
  const auto acc = dirac::circle_eta(model, {{0, 0}, {0, 1}}, abel());
  EXPECT_CNEAR(acc[0].eta, 0.5, 1e-6);
  EXPECT_CNEAR(acc[1].eta, Complex(1.0, 1.0 / std::sqrt(3.0)), 1e-6);
  const auto sym = dirac::circle_eta(dirac::make_circle_model(scalar(0.5)), {{0, 0}});
  EXPECT_CNEAR(sym[0].eta, 0.0, 1e-9);
}

TEST(CircleModel, RotationCharacterIsBetaIndependent) {
  for (double beta : {0.1, 0.4, 0.85}) {
    const auto model = dirac::make_circle_model(scalar(beta), CMatrix(), 3);
    EXPECT_CNEAR(dirac::circle_eta(model, {{0, 1}}, abel())[0].eta, Complex(1.0, 1.0 / std::sqrt(3.0)), 1e-5);
  }
}

TEST(CircleModel, ErrorEstimateShrinksWithCutoff) {
  const auto model = dirac::make_circle_model(scalar(0.3));
  dirac::EtaOptions o;
  o.cutoff = 10.0;
  const double e1 = dirac::circle_eta(model, {{0, 0}}, o)[0].error_estimate;
  o.cutoff = 40.0;
  const double e2 = dirac::circle_eta(model, {{0, 0}}, o)[0].error_estimate;
  EXPECT_LT(e2, e1);
}

TEST(CircleModel, KernelIsRejectedUnlessAllowed) {
  const auto model = dirac::make_circle_model(scalar(0.0));
  EXPECT_THROW(dirac::circle_eta(model, {{0, 0}}), Error);
  dirac::EtaOptions o;
  o.allow_kernel = true;
  const auto v = dirac::circle_eta(model, {{0, 0}}, o);
  EXPECT_CNEAR(v[0].kernel, 1.0, 1e-14);
  EXPECT_CNEAR(v[0].reduced, 0.5, 1e-6);
}

TEST(IntervalModel, TransferMatrix) {
  const double length = 1.7;
  const auto model = dirac::make_interval_model(length, CMatrix::Zero(2, 2));
  EXPECT_LE((dirac::interval_transfer(model, kTwoPi / length) - CMatrix::Identity(2, 2)).norm(), 1e-13);
  gen::Stream rng(61, 0);
  const auto m2 = dirac::make_interval_model(length, gen::random_hermitian(3, rng));
  const CMatrix t = dirac::interval_transfer(m2, 0.37);
  EXPECT_LE((t * t.adjoint() - CMatrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(IntervalModel, ThetaFamilyRoots) {
  const double theta = 0.9;
  const auto lines = dirac::interval_spectrum(dirac::theta_model(), dirac::theta_projection(theta),
                                              {CMatrix::Identity(1, 1)}, -20.0, 20.0);
  ASSERT_FALSE(lines.empty());
  for (const auto& l : lines) {
    const double k = (l.lambda - theta) / kTwoPi;
    EXPECT_NEAR(k, std::round(k), 1e-9);
    EXPECT_CNEAR(l.weights[0], 1.0, 1e-9);
    EXPECT_LE(std::abs(dirac::secular_value(dirac::theta_model(), dirac::theta_projection(theta).p, l.lambda)), 1e-8);
  }
  EXPECT_EQ(lines.size(), 7u);  // theta + 2 pi k for k = -3 .. 3
}

TEST(IntervalModel, SymmetricSpectrumAtPi) {
  const auto lines = dirac::interval_spectrum(dirac::theta_model(), dirac::theta_projection(kPi),
                                              {CMatrix::Identity(1, 1)}, -10.0, 10.0);
  ASSERT_EQ(lines.size(), 4u);  // -3 pi, -pi, pi, 3 pi
  for (std::size_t i = 0; i < lines.size(); ++i) EXPECT_NEAR(lines[i].lambda, -lines[lines.size() - 1 - i].lambda, 1e-9);
}

TEST(IntervalModel, DecoupledChannelsAreUnionOfProgressions) {
  const Complex chi = omega(3);
  const double a = 0.5, b = 2.0;
  // T = -diag(e^{ia}, e^{ib}) gives boundary unitary diag(e^{ia}, e^{ib}) for V = 0, L = 1.
  const auto model = dirac::make_interval_model(1.0, CMatrix::Zero(2, 2), diag({chi, 1.0}));
  const auto p = symplectic::make_projection_from_unitary(-diag({std::polar(1.0, a), std::polar(1.0, b)}));
  const auto ops = dirac::interval_weight_operators(model, {{1, 0}});
  const auto lines = dirac::interval_spectrum(model, p, ops, -7.0, 7.0);
  int count_a = 0, count_b = 0;
  for (const auto& l : lines) {
    const double ka = (l.lambda - a) / kTwoPi, kb = (l.lambda - b) / kTwoPi;
    if (std::abs(ka - std::round(ka)) < 1e-9) {
      ++count_a;
      EXPECT_CNEAR(l.weights[0], chi, 1e-9);
    } else {
      EXPECT_NEAR(kb, std::round(kb), 1e-9);
      ++count_b;
      EXPECT_CNEAR(l.weights[0], 1.0, 1e-9);
    }
  }
  EXPECT_EQ(count_a, 3);  // 0.5 - 2 pi, 0.5, 0.5 + 2 pi
  EXPECT_EQ(count_b, 2);  // 2 - 2 pi, 2
}

TEST(IntervalModel, NonLagrangianConditionHasComplexRoots) {
  // Range of P spanned by (1, 2)/sqrt(5): psi(L) = -2 psi(0) forces |e^{i lambda}| = 2.
  CMatrix p(2, 2);
  p << 1.0, 2.0, 2.0, 4.0;
  p /= 5.0;
  EXPECT_FALSE(symplectic::is_lagrangian(p, 1e-10));
  const auto roots = dirac::complex_root_scan(dirac::theta_model(), p, -4.0, 4.0, 1.0);
  ASSERT_FALSE(roots.empty());
  for (Complex r : roots) EXPECT_NEAR(std::abs(r.imag()), std::log(2.0), 1e-8);
}

TEST(IntervalModel, Calderon) {
  const auto zero = dirac::interval_calderon(dirac::make_interval_model(1.0, CMatrix::Zero(1, 1)));
  CMatrix half(2, 2);
  half << 0.5, 0.5, 0.5, 0.5;
  EXPECT_LE((zero.projection.p - half).norm(), 1e-14);
  const double beta = 0.3, length = 2.0;
  const auto c = dirac::interval_calderon(dirac::make_interval_model(length, scalar(beta)));
  EXPECT_CNEAR(c.k(0, 0), std::polar(1.0, -beta * length), 1e-14);
  gen::Stream rng(62, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto model = dirac::make_interval_model(rng.uniform(0.5, 3.0), gen::random_hermitian(3, rng, 2.0));
    EXPECT_LE(symplectic::lagrangian_defect(dirac::interval_calderon(model).projection.p), 1e-12);
  }
}

TEST(IntervalModel, EtaOfThetaFamily) {
  const auto id = std::vector<CMatrix>{CMatrix::Identity(1, 1)};
  EXPECT_CNEAR(dirac::interval_eta(dirac::theta_model(), dirac::theta_projection(kPi), id)[0].eta, 0.0, 1e-9);
  EXPECT_CNEAR(dirac::interval_eta(dirac::theta_model(), dirac::theta_projection(kPi / 2), id)[0].eta, 0.5, 1e-3);
}

TEST(IntervalModel, EtaIsAdditiveOverChannels) {
  const Complex chi = omega(5);
  const double a = 0.5, b = 2.0;
  const auto model = dirac::make_interval_model(1.0, CMatrix::Zero(2, 2), diag({chi, 1.0}));
  const auto p = symplectic::make_projection_from_unitary(-diag({std::polar(1.0, a), std::polar(1.0, b)}));
  const auto ops = dirac::interval_weight_operators(model, {{1, 0}});
  // Each channel is a progression theta + 2 pi k with eta = 1 - theta / pi.
  const Complex expected = chi * (1.0 - a / kPi) + (1.0 - b / kPi);
  EXPECT_CNEAR(dirac::interval_eta(model, p, ops)[0].eta, expected, 1e-9);
  // Abel summation at the default cutoff carries a truncation error of a few 1e-6.
  EXPECT_CNEAR(dirac::interval_eta(model, p, ops, abel())[0].eta, expected, 1e-5);
}

TEST(SwIdentity, Examples) {
  const auto p = dirac::theta_projection(kPi / 2);
  const auto q = dirac::theta_projection(kPi);
  EXPECT_LE(dirac::sw_identity_check(dirac::theta_model(), p, p).defect, 1e-9);
  const auto r = dirac::sw_identity_check(dirac::theta_model(), p, q);
  EXPECT_LE(r.defect, 1e-3);
  EXPECT_NEAR(std::abs(r.lhs), 1.0, 1e-9);
  EXPECT_NEAR(std::abs(r.rhs), 1.0, 1e-12);
}

TEST(SwIdentity, RandomTwoChannelPair) {
  gen::Stream rng(63, 0);
  const auto action = gen::random_cyclic_action(2, 3, rng);
  const auto model = dirac::make_interval_model(1.3, gen::random_equivariant_hermitian(action, rng), action.generator());
  const auto p = symplectic::make_projection_from_unitary(gen::random_equivariant_unitary(action, rng));
  const auto q = symplectic::make_projection_from_unitary(gen::random_equivariant_unitary(action, rng));
  const auto r = dirac::sw_identity_check(model, p, q);
  EXPECT_LE(r.defect, 1e-3);
  EXPECT_LE(r.isotypic_defect, 1e-3);
}

TEST(Splitting, CalderonBaseline) {
  dirac::SplitScenario sc;
  sc.v = scalar(0.25);
  sc.u = CMatrix::Identity(1, 1);
  sc.p = dirac::interval_calderon(dirac::make_interval_model(kPi, sc.v)).projection;
  const auto rep = dirac::splitting_experiment(sc, {{0, 0}});
  EXPECT_LE(std::abs(rep.terms[0].residual), 5e-3);
  EXPECT_CNEAR(rep.terms[0].tau, 0.0, 1e-12);
}

TEST(Splitting, SymmetricBaseline) {
  dirac::SplitScenario sc;
  sc.v = scalar(0.5);
  sc.u = CMatrix::Identity(1, 1);
  sc.p = dirac::theta_projection(kPi);
  dirac::EtaOptions o;
  o.allow_kernel = true;
  const auto rep = dirac::splitting_experiment(sc, {{0, 0}}, o);
  const auto& t = rep.terms[0];
  EXPECT_LE(std::abs(t.residual), 5e-3);
  // V = 1/2 on the circle of length 2 pi gives the symmetric spectrum Z + 1/2. Each half
  // line of length pi with theta = pi has one progression, eta = -1/2 and +1/2, so the
  // reduced invariants are -1/4 and +1/4.
  EXPECT_CNEAR(t.eta_circle, 0.0, 5e-3);
  EXPECT_CNEAR(t.eta_plus, -0.25, 5e-3);
  EXPECT_CNEAR(t.eta_minus, 0.25, 5e-3);
  EXPECT_CNEAR(t.tau, 0.0, 1e-9);
}

TEST(Splitting, RotatingBoundaryConditionKeepsResidualSmall) {
  for (int k = 0; k < 8; ++k) {
    dirac::SplitScenario sc;
    sc.v = scalar(0.2);
    sc.u = CMatrix::Identity(1, 1);
    sc.p = symplectic::make_projection_from_unitary(scalar(std::polar(1.0, 0.3 + kTwoPi * k / 8)));
    const auto rep = dirac::splitting_experiment(sc, {{0, 0}});
    EXPECT_LE(std::abs(rep.terms[0].residual), 5e-3) << "k = " << k;
  }
}

TEST(DiracChain, RotatingBoundaryConditionAgreesAcrossModules) {
  const auto model = dirac::make_interval_model(1.0, CMatrix::Zero(1, 1), scalar(omega(5)));
  const auto rep = dirac::dirac_chain(model, -CMatrix::Identity(1, 1), {{0, 0}, {1, 0}});
  for (int j = 0; j < 2; ++j) {
    const Complex expected = j == 0 ? Complex(1.0) : omega(5);
    EXPECT_CNEAR(rep.spectral_flow[j], expected, 1e-6);
    EXPECT_CNEAR(rep.maslov_grid[j], expected, 1e-6);
    EXPECT_CNEAR(rep.maslov_winding[j], expected, 1e-6);
    EXPECT_CNEAR(rep.winding[j], expected, 1e-6);
    EXPECT_CNEAR(rep.winding_reversed[j], -expected, 1e-6);
  }
}

TEST(DiracModels, SpectrumCsv) {
  const auto model = dirac::make_circle_model(scalar(0.25), CMatrix(), 2);
  std::ostringstream out;
  dirac::write_spectrum_csv(out, dirac::circle_spectrum(model, {{0, 0}, {0, 1}}, 1.0));
  const std::string csv = out.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,re_weight_g0,im_weight_g0,re_weight_g1,im_weight_g1");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Regularization, ErrorEstimateShrinksUnderCutoffDoubling) {
  const auto id = std::vector<CMatrix>{CMatrix::Identity(1, 1)};
  const auto circle = dirac::make_circle_model(scalar(0.25));
  for (auto mode : {dirac::Regularization::Average, dirac::Regularization::Abel}) {
    for (double cutoff : {16.0, 32.0, 64.0}) {
      dirac::EtaOptions lo, hi;
      lo.mode = hi.mode = mode;
      lo.cutoff = cutoff;
      hi.cutoff = 2.0 * cutoff;
      const double c0 = dirac::circle_eta(circle, {{0, 0}}, lo)[0].error_estimate;
      const double c1 = dirac::circle_eta(circle, {{0, 0}}, hi)[0].error_estimate;
      const double i0 = dirac::interval_eta(dirac::theta_model(), dirac::theta_projection(kPi / 2), id, lo)[0].error_estimate;
      const double i1 = dirac::interval_eta(dirac::theta_model(), dirac::theta_projection(kPi / 2), id, hi)[0].error_estimate;
      // Below the round-off floor the ratio carries no information.
      if (c0 > 1e-11) EXPECT_LE(c1, 0.6 * c0);
      if (i0 > 1e-11) EXPECT_LE(i1, 0.6 * i0);
    }
  }
}
