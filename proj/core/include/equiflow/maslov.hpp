#pragma once

#include <vector>

#include "equiflow/common.hpp"
#include "equiflow/symplectic.hpp"
#include "equiflow/winding.hpp"

namespace equiflow::maslov {

// A path of Lagrangian projections, stored through their associated unitaries t -> T(t).
struct LagrangianPath {
  int n = 0;
  MatrixPath unitary;
  CMatrix actor;  // the block a of h = diag(a, W a W*)

  CMatrix projection(double t) const;
};

LagrangianPath make_lagrangian_path(MatrixPath unitary, int n, CMatrix actor = CMatrix());
LagrangianPath constant_path(const CMatrix& t, const CMatrix& actor = CMatrix());

enum class Mode { Winding, Grid };

struct GridFlowResult {
  Complex value{0.0, 0.0};
  std::vector<double> nodes;
  std::vector<double> levels;  // arc (pi, pi + level] used on each interval
  std::vector<Complex> contributions;
};

// Phillips-type count for a unitary path: character-weighted net number of eigenphases
// entering the arc just above pi. Agrees with winding_number, without branch tracking.
GridFlowResult unitary_grid_flow(const winding::UnitaryPath& f, const TolerancePolicy& tol = {});

// The path t -> T1(t)* T2(t).
winding::UnitaryPath relative_unitary(const LagrangianPath& l1, const LagrangianPath& l2);

Complex maslov_index(const LagrangianPath& l1, const LagrangianPath& l2, Mode mode = Mode::Winding,
                     const winding::WindingOptions& options = {}, const TolerancePolicy& tol = {});

// w(T*S) + w(S*R) - w(T*R).
Complex triple_index_path(const LagrangianPath& t, const LagrangianPath& s, const LagrangianPath& r,
                          const winding::WindingOptions& options = {}, const TolerancePolicy& tol = {});

// tau_h(T*S, S*R) through canonical contraction paths.
Complex triple_index_static(const symplectic::LagrangianProjection& p, const symplectic::LagrangianProjection& q,
                            const symplectic::LagrangianProjection& n, const symplectic::EquivariantIsometry& h,
                            const winding::WindingOptions& options = {}, const TolerancePolicy& tol = {});

// dim ker(I + T*K): nonzero exactly on the Maslov cycle of P_M.
int maslov_cycle_dim(const symplectic::LagrangianProjection& p, const symplectic::LagrangianProjection& p_m,
                     const TolerancePolicy& tol = {});
bool in_maslov_cycle(const symplectic::LagrangianProjection& p, const symplectic::LagrangianProjection& p_m,
                     const TolerancePolicy& tol = {});

}  // namespace equiflow::maslov
