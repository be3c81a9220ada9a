#pragma once

#include "equiflow/common.hpp"

namespace equiflow::symplectic {

// C^{2n} with gamma = diag(i I_n, -i I_n); E_i is the first block, E_{-i} the second.
struct SymplecticSpace {
  int n = 0;
  explicit SymplecticSpace(int half_dim) : n(half_dim) {}
  CMatrix gamma() const;
};

// h = diag(a, W a W*): the general unitary commuting with gamma.
struct EquivariantIsometry {
  CMatrix a;
  CMatrix w;
  CMatrix h;
  int n() const { return static_cast<int>(a.rows()); }
};

// P = 1/2 [[I, T*], [T, I]]; im P = graph(T), ker P = graph(-T).
struct LagrangianProjection {
  CMatrix t;
  CMatrix p;
  int n() const { return static_cast<int>(t.rows()); }
};

struct PairReport {
  bool invertible = true;
  bool fredholm = true;  // always true for finite matrices
  int intersection_dim = 0;
  Complex intersection_trace{0.0, 0.0};
  CMatrix witness_basis;  // orthonormal basis of ker P ∩ im Q inside C^{2n}
};

struct BoundaryOperator {
  CMatrix a;              // 2n x 2n Hermitian, anticommutes with gamma
  CMatrix kernel_basis;   // orthonormal basis of ker A
  CMatrix positive_basis; // orthonormal basis of the positive spectral subspace
};

CMatrix gamma_matrix(int n);

LagrangianProjection make_projection_from_unitary(const CMatrix& t, const TolerancePolicy& tol = {});
CMatrix unitary_of_projection(const CMatrix& p, const TolerancePolicy& tol = {});
LagrangianProjection projection_from_matrix(const CMatrix& p, const TolerancePolicy& tol = {});

// Residual of the Lagrangian test: max(||P^2 - P||, ||P* - P||, ||gamma P gamma* - (I - P)||).
double lagrangian_defect(const CMatrix& p);
bool is_lagrangian(const CMatrix& p, double tol);

EquivariantIsometry make_isometry(const CMatrix& a, const CMatrix& w, const TolerancePolicy& tol = {});
// h acting trivially on the boundary-splitting: diag(a, a) (W = I).
EquivariantIsometry diagonal_isometry(const CMatrix& a, const TolerancePolicy& tol = {});
bool commutes_with(const EquivariantIsometry& h, const CMatrix& p, const TolerancePolicy& tol = {});

PairReport pair_report(const LagrangianProjection& p, const LagrangianProjection& q, const EquivariantIsometry& h,
                       const TolerancePolicy& tol = {});

// Smallest singular value of the compression P Q : im Q -> im P.
double compressed_pair_gap(const LagrangianProjection& p, const LagrangianProjection& q);

BoundaryOperator make_boundary_operator(const CMatrix& a, const TolerancePolicy& tol = {});
// P = P^+ + P_L for a Lagrangian L inside ker A (columns of l orthonormal; may be empty).
LagrangianProjection aps_projection(const BoundaryOperator& a, const CMatrix& l, const TolerancePolicy& tol = {});

// det(a (I + T^{-1} K) / 2).
Complex canonical_determinant(const LagrangianProjection& p, const LagrangianProjection& p_m,
                              const EquivariantIsometry& h, const TolerancePolicy& tol = {});

// The same subspace seen with the opposite symplectic form: associated unitary -T*.
LagrangianProjection flip_orientation(const LagrangianProjection& p, const TolerancePolicy& tol = {});

// Orthonormal basis of the numerical null space (singular values <= threshold).
CMatrix null_space(const CMatrix& m, double threshold);

}  // namespace equiflow::symplectic
