#include "equiflow/symplectic.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/SVD>

#include "equiflow/spectra.hpp"

namespace equiflow::symplectic {

CMatrix gamma_matrix(int n) {
  CMatrix g = CMatrix::Zero(2 * n, 2 * n);
  g.topLeftCorner(n, n) = kI * CMatrix::Identity(n, n);
  g.bottomRightCorner(n, n) = -kI * CMatrix::Identity(n, n);
  return g;
}

CMatrix SymplecticSpace::gamma() const { return gamma_matrix(n); }

CMatrix null_space(const CMatrix& m, double threshold) {
  if (m.cols() == 0) return CMatrix(m.cols(), 0);
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const RVector s = svd.singularValues();
  const Eigen::Index ncols = m.cols();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++rank;
  }
  return svd.matrixV().rightCols(ncols - rank);
}

double lagrangian_defect(const CMatrix& p) {
  const Eigen::Index dim = p.rows();
  if (dim % 2 != 0 || p.cols() != dim) return std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(dim / 2);
  const CMatrix g = gamma_matrix(n);
  const CMatrix id = CMatrix::Identity(dim, dim);
  const double idem = (p * p - p).norm();
  const double herm = (p.adjoint() - p).norm();
  const double lag = (g * p * g.adjoint() - (id - p)).norm();
  return std::max({idem, herm, lag});
}

bool is_lagrangian(const CMatrix& p, double tol) { return lagrangian_defect(p) <= tol; }

LagrangianProjection make_projection_from_unitary(const CMatrix& t, const TolerancePolicy& tol) {
  require_square(t, "associated unitary");
  if (!is_unitary(t, 100.0 * tol.eig_tol)) {
    throw Error(ErrorCode::NotUnitary, "associated operator T must be unitary");
  }
  const Eigen::Index n = t.rows();
  LagrangianProjection out;
  out.t = t;
  out.p.resize(2 * n, 2 * n);
  out.p.topLeftCorner(n, n) = 0.5 * CMatrix::Identity(n, n);
  out.p.topRightCorner(n, n) = 0.5 * t.adjoint();
  out.p.bottomLeftCorner(n, n) = 0.5 * t;
  out.p.bottomRightCorner(n, n) = 0.5 * CMatrix::Identity(n, n);
  return out;
}

CMatrix unitary_of_projection(const CMatrix& p, const TolerancePolicy& /*tol*/) {
  if (!is_lagrangian(p, 1e-10)) {
    throw Error(ErrorCode::NotLagrangian, "projection fails P^2=P, P*=P or gamma P gamma* = I - P");
  }
  const Eigen::Index n = p.rows() / 2;
  return 2.0 * p.bottomLeftCorner(n, n);
}

LagrangianProjection projection_from_matrix(const CMatrix& p, const TolerancePolicy& tol) {
  return make_projection_from_unitary(unitary_of_projection(p, tol), tol);
}

EquivariantIsometry make_isometry(const CMatrix& a, const CMatrix& w, const TolerancePolicy& tol) {
  require_square(a, "isometry block a");
  require_same_dim(a, w, "isometry blocks");
  if (!is_unitary(a, 100.0 * tol.eig_tol) || !is_unitary(w, 100.0 * tol.eig_tol)) {
    throw Error(ErrorCode::NotUnitary, "isometry blocks must be unitary");
  }
  const Eigen::Index n = a.rows();
  EquivariantIsometry out;
  out.a = a;
  out.w = w;
  out.h = CMatrix::Zero(2 * n, 2 * n);
  out.h.topLeftCorner(n, n) = a;
  out.h.bottomRightCorner(n, n) = w * a * w.adjoint();
  return out;
}

EquivariantIsometry diagonal_isometry(const CMatrix& a, const TolerancePolicy& tol) {
  return make_isometry(a, CMatrix::Identity(a.rows(), a.cols()), tol);
}

bool commutes_with(const EquivariantIsometry& h, const CMatrix& p, const TolerancePolicy& tol) {
  return commutator_norm(h.h, p) <= tol.commute_tol;
}

PairReport pair_report(const LagrangianProjection& p, const LagrangianProjection& q, const EquivariantIsometry& h,
                       const TolerancePolicy& tol) {
  require_same_dim(p.t, q.t, "pair_report");
  require_same_dim(p.t, h.a, "pair_report actor");
  if (!commutes_with(h, p.p, tol) || !commutes_with(h, q.p, tol)) {
    throw Error(ErrorCode::NotEquivariant, "projections do not commute with h");
  }
  const Eigen::Index n = p.t.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix tss = p.t.adjoint() * q.t;
  PairReport out;
  // ker(I + T*S) carries ker P ∩ im Q via x -> (x, S x) = (x, -T x).
  const CMatrix kernel = null_space(id + tss, tol.zero_tol);
  out.intersection_dim = static_cast<int>(kernel.cols());
  out.intersection_trace = spectra::weighted_trace(h.a, kernel, tol);
  // Invertibility test of the pair: -1 must not lie in spec((a - I) + a T*S).
  const CMatrix probe = (h.a - id) + h.a * tss;
  const CMatrix shifted = probe + id;
  Eigen::JacobiSVD<CMatrix> svd(shifted);
  out.invertible = svd.singularValues().minCoeff() > tol.zero_tol;
  CMatrix witness(2 * n, kernel.cols());
  witness.topRows(n) = kernel;
  witness.bottomRows(n) = q.t * kernel;
  out.witness_basis = witness / std::sqrt(2.0);
  return out;
}

double compressed_pair_gap(const LagrangianProjection& p, const LagrangianProjection& q) {
  const Eigen::Index n = p.t.rows();
  CMatrix bp(2 * n, n), bq(2 * n, n);
  bp.topRows(n) = CMatrix::Identity(n, n);
  bp.bottomRows(n) = p.t;
  bq.topRows(n) = CMatrix::Identity(n, n);
  bq.bottomRows(n) = q.t;
  bp /= std::sqrt(2.0);
  bq /= std::sqrt(2.0);
  Eigen::JacobiSVD<CMatrix> svd(bp.adjoint() * p.p * q.p * bq);
  return svd.singularValues().minCoeff();
}

BoundaryOperator make_boundary_operator(const CMatrix& a, const TolerancePolicy& tol) {
  require_square(a, "boundary operator");
  if (a.rows() % 2 != 0) throw Error(ErrorCode::DimensionMismatch, "boundary operator must act on C^{2n}");
  const int n = static_cast<int>(a.rows() / 2);
  const CMatrix g = gamma_matrix(n);
  if ((g * a + a * g).norm() > 1e-10 * std::max(1.0, a.norm())) {
    throw Error(ErrorCode::NotEquivariant, "boundary operator must anticommute with gamma");
  }
  const spectra::EigenSystem es = spectra::eig_hermitian(a, tol);
  std::vector<int> ker, pos;
  for (int i = 0; i < es.dim(); ++i) {
    if (std::abs(es.values(i)) <= tol.zero_tol) {
      ker.push_back(i);
    } else if (es.values(i) > 0) {
      pos.push_back(i);
    }
  }
  BoundaryOperator out;
  out.a = a;
  out.kernel_basis.resize(a.rows(), ker.size());
  for (std::size_t k = 0; k < ker.size(); ++k) out.kernel_basis.col(k) = es.vectors.col(ker[k]);
  out.positive_basis.resize(a.rows(), pos.size());
  for (std::size_t k = 0; k < pos.size(); ++k) out.positive_basis.col(k) = es.vectors.col(pos[k]);
  return out;
}

LagrangianProjection aps_projection(const BoundaryOperator& a, const CMatrix& l, const TolerancePolicy& tol) {
  const Eigen::Index dim = a.a.rows();
  const int n = static_cast<int>(dim / 2);
  const CMatrix g = gamma_matrix(n);
  const CMatrix pk = a.kernel_basis * a.kernel_basis.adjoint();
  CMatrix pl = CMatrix::Zero(dim, dim);
  if (l.cols() > 0) {
    if (l.rows() != dim) throw Error(ErrorCode::DimensionMismatch, "kernel Lagrangian has wrong ambient dimension");
    pl = l * l.adjoint();
  }
  // L must sit inside ker A with gamma(L) equal to the orthogonal complement of L in ker A.
  const double inside = (pk * pl - pl).norm();
  const double comp = (g * pl * g.adjoint() - (pk - pl)).norm();
  if (inside > 1e-10 || comp > 1e-10) {
    throw Error(ErrorCode::KernelLagrangianInvalid, "gamma(L) must equal the complement of L in ker A");
  }
  const CMatrix pp = a.positive_basis * a.positive_basis.adjoint();
  return projection_from_matrix(pp + pl, tol);
}

Complex canonical_determinant(const LagrangianProjection& p, const LagrangianProjection& p_m,
                              const EquivariantIsometry& h, const TolerancePolicy& tol) {
  if (!commutes_with(h, p.p, tol) || !commutes_with(h, p_m.p, tol)) {
    throw Error(ErrorCode::NotEquivariant, "canonical determinant needs h-invariant projections");
  }
  const Eigen::Index n = p.t.rows();
  const CMatrix m = h.a * (CMatrix::Identity(n, n) + p.t.adjoint() * p_m.t) * 0.5;
  return m.determinant();
}

LagrangianProjection flip_orientation(const LagrangianProjection& p, const TolerancePolicy& tol) {
  if (!is_lagrangian(p.p, 1e-10)) throw Error(ErrorCode::NotLagrangian, "flip_orientation needs a Lagrangian");
  return make_projection_from_unitary(-p.t.adjoint(), tol);
}

}  // namespace equiflow::symplectic
