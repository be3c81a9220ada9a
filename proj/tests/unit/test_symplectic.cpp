#include "equiflow/symplectic.hpp"

#include "equiflow/generators.hpp"
#include "test_util.hpp"

using namespace equiflow;
using namespace equiflow::testing;
using symplectic::make_projection_from_unitary;

namespace {

CMatrix blocks(const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d) {
  const int n = static_cast<int>(a.rows());
  CMatrix m(2 * n, 2 * n);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST(Symplectic, ProjectionOfIdentityAndMinusIdentity) {
  const CMatrix i2 = CMatrix::Identity(2, 2);
  EXPECT_LE((make_projection_from_unitary(i2).p - 0.5 * blocks(i2, i2, i2, i2)).norm(), 1e-15);
  EXPECT_LE((make_projection_from_unitary(-i2).p - 0.5 * blocks(i2, -i2, -i2, i2)).norm(), 1e-15);
}

TEST(Symplectic, RandomProjectionsAreLagrangian) {
  gen::Stream rng(11, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5;
    const auto p = make_projection_from_unitary(gen::random_unitary(n, rng));
    const CMatrix g = symplectic::gamma_matrix(n);
    EXPECT_LE((g * p.p * g.adjoint() - (CMatrix::Identity(2 * n, 2 * n) - p.p)).norm(), 1e-12);
    EXPECT_LE(symplectic::lagrangian_defect(p.p), 1e-12);
  }
}

TEST(Symplectic, UnitaryRoundTrip) {
  const CMatrix i2 = CMatrix::Identity(2, 2);
  EXPECT_LE((symplectic::unitary_of_projection(0.5 * blocks(i2, i2, i2, i2)) - i2).norm(), 1e-15);
  gen::Stream rng(12, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix t = gen::random_unitary(1 + trial % 4, rng);
    EXPECT_LE((symplectic::unitary_of_projection(make_projection_from_unitary(t).p) - t).norm(), 1e-12);
  }
}

TEST(Symplectic, NonLagrangianProjectionRejected) {
  // gamma is diagonal, so it fixes the coordinate projection diag(1, 1, 0, 0) instead of mapping it to I - P.
  const CMatrix p = diag({1.0, 1.0, 0.0, 0.0});
  EXPECT_FALSE(symplectic::is_lagrangian(p, 1e-10));
  try {
    symplectic::unitary_of_projection(p);
    FAIL() << "expected NotLagrangian";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotLagrangian);
  }
}

TEST(Symplectic, Isometry) {
  gen::Stream rng(13, 0);
  const CMatrix w = gen::random_unitary(2, rng);
  const auto trivial = symplectic::make_isometry(CMatrix::Identity(2, 2), w);
  EXPECT_LE((trivial.h - CMatrix::Identity(4, 4)).norm(), 1e-12);
  const Complex c = omega(3);
  const auto scalar_h = symplectic::make_isometry(c * CMatrix::Identity(2, 2), w);
  EXPECT_LE((scalar_h.h - c * CMatrix::Identity(4, 4)).norm(), 1e-12);
}

TEST(Symplectic, IsometryCommutesWhenWEqualsT) {
  gen::Stream rng(14, 0);
  const auto action = gen::random_cyclic_action(3, 4, rng);
  const CMatrix t = gen::random_equivariant_unitary(action, rng);
  const auto h = symplectic::make_isometry(action.generator(), t);
  EXPECT_TRUE(symplectic::commutes_with(h, make_projection_from_unitary(t).p));
}

TEST(Symplectic, PairReportExamples) {
  const CMatrix i1 = CMatrix::Identity(1, 1);
  const auto id = symplectic::diagonal_isometry(i1);
  const auto r0 = symplectic::pair_report(make_projection_from_unitary(i1), make_projection_from_unitary(i1), id);
  EXPECT_TRUE(r0.invertible);
  EXPECT_EQ(r0.intersection_dim, 0);

  const CMatrix i3 = CMatrix::Identity(3, 3);
  const auto r1 = symplectic::pair_report(make_projection_from_unitary(i3), make_projection_from_unitary(-i3),
                                          symplectic::diagonal_isometry(i3));
  EXPECT_FALSE(r1.invertible);
  EXPECT_EQ(r1.intersection_dim, 3);
  EXPECT_CNEAR(r1.intersection_trace, 3.0, 1e-12);

  const Complex chi = omega(5);
  const auto r2 = symplectic::pair_report(make_projection_from_unitary(CMatrix::Identity(2, 2)),
                                          make_projection_from_unitary(diag({-1.0, std::polar(1.0, kPi / 3)})),
                                          symplectic::diagonal_isometry(diag({chi, 1.0})));
  EXPECT_EQ(r2.intersection_dim, 1);
  EXPECT_CNEAR(r2.intersection_trace, chi, 1e-12);
}

TEST(Symplectic, PairReportAgreesWithCompressedMap) {
  gen::Stream rng(15, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    const CMatrix t = gen::random_unitary(n, rng);
    CMatrix s = gen::random_unitary(n, rng);
    if (trial % 4 == 0) {
      // Force a common line: S = T diag(-1, ...).
      CMatrix d = CMatrix::Identity(n, n);
      d(0, 0) = -1.0;
      s = t * d;
    }
    const auto p = make_projection_from_unitary(t);
    const auto q = make_projection_from_unitary(s);
    const auto r = symplectic::pair_report(p, q, symplectic::diagonal_isometry(CMatrix::Identity(n, n)));
    EXPECT_EQ(r.invertible, symplectic::compressed_pair_gap(p, q) > 1e-9);
  }
}

TEST(Symplectic, ApsProjection) {
  // Invertible A: the positive spectral projection is Lagrangian.
  CMatrix a(2, 2);
  a << 0.0, 1.0, 1.0, 0.0;
  const auto ba = symplectic::make_boundary_operator(a);
  const auto p = symplectic::aps_projection(ba, CMatrix(2, 0));
  CMatrix expected(2, 2);
  expected << 0.5, 0.5, 0.5, 0.5;
  EXPECT_LE((p.p - expected).norm(), 1e-12);

  // A = 0: the projection is the one onto L.
  const auto b0 = symplectic::make_boundary_operator(CMatrix::Zero(2, 2));
  CMatrix l(2, 1);
  l << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  EXPECT_LE((symplectic::aps_projection(b0, l).p - l * l.adjoint()).norm(), 1e-12);
}

TEST(Symplectic, CanonicalDeterminant) {
  const CMatrix i2 = CMatrix::Identity(2, 2);
  gen::Stream rng(16, 0);
  const CMatrix k = gen::random_unitary(2, rng);
  const auto pk = make_projection_from_unitary(k);
  EXPECT_CNEAR(symplectic::canonical_determinant(pk, pk, symplectic::diagonal_isometry(i2)), 1.0, 1e-12);
  const double theta = 0.7;
  const Complex det = symplectic::canonical_determinant(make_projection_from_unitary(scalar(1.0)),
                                                        make_projection_from_unitary(scalar(std::polar(1.0, theta))),
                                                        symplectic::diagonal_isometry(scalar(1.0)));
  EXPECT_CNEAR(det, (1.0 + std::polar(1.0, theta)) / 2.0, 1e-14);
}

TEST(Symplectic, CanonicalDeterminantIsEigenvalueProduct) {
  gen::Stream rng(17, 0);
  const auto action = gen::random_cyclic_action(2, 3, rng);
  const CMatrix a = action.generator();
  const CMatrix t = gen::random_equivariant_unitary(action, rng);
  const CMatrix k = gen::random_equivariant_unitary(action, rng);
  const Eigen::ComplexEigenSolver<CMatrix> es(a * (CMatrix::Identity(2, 2) + t.adjoint() * k) / 2.0);
  Complex prod = 1.0;
  for (int i = 0; i < 2; ++i) prod *= es.eigenvalues()(i);
  EXPECT_CNEAR(symplectic::canonical_determinant(make_projection_from_unitary(t), make_projection_from_unitary(k),
                                                 symplectic::diagonal_isometry(a)),
               prod, 1e-12);
}

TEST(Symplectic, FlipOrientation) {
  EXPECT_LE((symplectic::flip_orientation(make_projection_from_unitary(CMatrix::Identity(2, 2))).t +
             CMatrix::Identity(2, 2))
                .norm(),
            1e-14);
  const double theta = 1.1;
  EXPECT_CNEAR(symplectic::flip_orientation(make_projection_from_unitary(scalar(std::polar(1.0, theta)))).t(0, 0),
               -std::polar(1.0, -theta), 1e-14);
  gen::Stream rng(18, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = make_projection_from_unitary(gen::random_unitary(3, rng));
    const auto twice = symplectic::flip_orientation(symplectic::flip_orientation(p));
    EXPECT_LE((twice.p - p.p).norm(), 1e-12);
  }
}
