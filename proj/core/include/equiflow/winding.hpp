#pragma once

#include <optional>
#include <vector>

#include "equiflow/common.hpp"
#include "equiflow/spectra.hpp"

namespace equiflow::winding {

struct UnitaryPath {
  int dim = 0;
  MatrixPath sampler;
  CMatrix actor;  // a; identity when trivial
};

UnitaryPath make_unitary_path(MatrixPath sampler, int dim, CMatrix actor = CMatrix());

struct PhaseCrossing {
  double time = 0.0;
  int direction = 0;  // +1 when an eigenphase passes the line pi + theta counter-clockwise
  int cluster_dim = 1;
  Complex weight{0.0, 0.0};
};

struct WindingOptions {
  double epsilon = 1e-3;    // offsets are chosen in [0, epsilon)
  int initial_samples = 33;
};

struct WindingResult {
  Complex value{0.0, 0.0};
  double offset = 0.0;  // theta: crossings are counted through the line pi + theta
  std::vector<PhaseCrossing> crossings;
  int samples = 0;
};

WindingResult winding_number(const UnitaryPath& f, const WindingOptions& options = {},
                             const TolerancePolicy& tol = {});

// int_0^1 Tr(a f(t)^{-1} f'(t)) dt with derivatives from Richardson-extrapolated stencils.
Complex log_derivative_integral(const UnitaryPath& f, const TolerancePolicy& tol = {},
                                spectra::QuadratureInfo* info = nullptr);

// exp of the integral above: the equivariant Fredholm determinant of the path.
Complex fredholm_det_path(const UnitaryPath& f, const TolerancePolicy& tol = {},
                          spectra::QuadratureInfo* info = nullptr);

// (1/2 pi i) [ int Tr(a f^{-1} f') - Tr(a Log f(1)) + Tr(a Log f(0)) ] with principal logs.
Complex trace_log_winding(const UnitaryPath& f, const TolerancePolicy& tol = {});

// Contraction of U to -I_{H0} + I on the complement, H0 = ker(U + I).
struct CanonicalContraction {
  CMatrix u;
  CMatrix actor;
  CMatrix h0_basis;          // orthonormal basis of H0
  CMatrix complement_basis;  // orthonormal basis of H0^perp
  CMatrix u_tilde;           // U restricted to the complement
  CMatrix log_u_tilde;       // principal log of u_tilde
  std::optional<CMatrix> log_a_u_tilde;  // principal log of a u_tilde (absent on a branch cut)

  // f(t) = -I on H0, exp(t log U~) on the complement.
  CMatrix path(double t) const;
  // f_a(t) = -a on H0, exp(t log(a U~)) on the complement.
  CMatrix decorated(double t) const;
  CMatrix h0_projector() const { return h0_basis * h0_basis.adjoint(); }
  int dim() const { return static_cast<int>(u.rows()); }

  // Eigen-data of log_u_tilde lifted to the full space, used to evaluate path(t) cheaply.
  CMatrix lifted_vectors;
  RVector log_phases;
};

CanonicalContraction canonical_path(const CMatrix& u, const CMatrix& actor, const TolerancePolicy& tol = {});

Complex double_index(const CMatrix& u, const CMatrix& v, const CMatrix& actor, const WindingOptions& options = {},
                     const TolerancePolicy& tol = {});

Complex relative_double_index(const UnitaryPath& f, const UnitaryPath& g, const WindingOptions& options = {},
                              const TolerancePolicy& tol = {});

UnitaryPath product(const UnitaryPath& f, const UnitaryPath& g);
UnitaryPath inverse(const UnitaryPath& f);
UnitaryPath reverse(const UnitaryPath& f);
UnitaryPath concatenate(const UnitaryPath& f, const UnitaryPath& g);
UnitaryPath constant(const CMatrix& u, const CMatrix& actor = CMatrix());

}  // namespace equiflow::winding
