#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "equiflow/common.hpp"
#include "equiflow/symplectic.hpp"

namespace equiflow::dirac {

// h = u^{u_power} composed with rotation by 2 pi rotation_power / N (circle only).
struct GroupElement {
  int u_power = 1;
  int rotation_power = 0;
};

// One eigenvalue (or eigenvalue cluster) with its character weight for each requested element.
struct SpectralLine {
  double lambda = 0.0;
  int multiplicity = 1;
  std::vector<Complex> weights;
};

// D = -i d/dx + V on the circle of length 2 pi, m channels.
struct CircleDiracModel {
  CMatrix v;              // m x m Hermitian
  CMatrix u;              // internal symmetry, [u, V] = 0
  int rotation_order = 1; // N; rotations by multiples of 2 pi / N

  int channels() const { return static_cast<int>(v.rows()); }
};

CircleDiracModel make_circle_model(const CMatrix& v, const CMatrix& u = CMatrix(), int rotation_order = 1,
                                   const TolerancePolicy& tol = {});

// All eigenvalues k + v_j with |lambda| <= window.
std::vector<SpectralLine> circle_spectrum(const CircleDiracModel& model, const std::vector<GroupElement>& elements,
                                          double window, const TolerancePolicy& tol = {});

enum class Regularization { Average, Abel };

struct EtaOptions {
  double cutoff = 200.0;  // Lambda
  Regularization mode = Regularization::Average;
  bool allow_kernel = false;
};

struct EtaValue {
  Complex eta{0.0, 0.0};
  Complex kernel{0.0, 0.0};   // Tr(h | ker D)
  Complex reduced{0.0, 0.0};  // (eta + kernel) / 2
  double error_estimate = 0.0;
};

// Regularized signed character sum over a spectrum supplied window by window.
// Average: smooth cutoff rho(|lambda| / Lambda) with rho = 1 on [0,1], 0 beyond 2.
// Abel: weights e^{-|lambda| / Lambda}, Richardson-extrapolated over Lambda, Lambda/2, Lambda/4.
using SpectrumProvider = std::function<std::vector<SpectralLine>(double window)>;
std::vector<EtaValue> regularized_eta(const SpectrumProvider& provider, int element_count, const EtaOptions& options,
                                      const TolerancePolicy& tol = {});

std::vector<EtaValue> circle_eta(const CircleDiracModel& model, const std::vector<GroupElement>& elements,
                                 const EtaOptions& options = {}, const TolerancePolicy& tol = {});

// D = -i d/dx + V on [0, L]; boundary values ordered (psi(0), psi(L)), gamma = diag(iI, -iI).
struct IntervalDiracModel {
  double length = 1.0;
  CMatrix v;
  CMatrix u;

  int channels() const { return static_cast<int>(v.rows()); }
};

IntervalDiracModel make_interval_model(double length, const CMatrix& v, const CMatrix& u = CMatrix(),
                                       const TolerancePolicy& tol = {});

// M(lambda) = exp(i L (lambda - V)); unitary for real lambda.
CMatrix interval_transfer(const IntervalDiracModel& model, Complex lambda);

// det(B* J(lambda)), B an orthonormal basis of ran P and J(lambda) v = (v, M(lambda) v).
Complex secular_value(const IntervalDiracModel& model, const CMatrix& p, Complex lambda);

// Newton scan of secular_value over Re in [lo, hi], |Im| <= strip; returns distinct roots.
std::vector<Complex> complex_root_scan(const IntervalDiracModel& model, const CMatrix& p, double lo, double hi,
                                       double strip = 1.0);

// Weight operators (acting on the channels) for the requested elements; rotations are rejected.
std::vector<CMatrix> interval_weight_operators(const IntervalDiracModel& model,
                                               const std::vector<GroupElement>& elements);

// Real eigenvalues of D_P in [lo, hi] with weights Tr(X | null space) for each weight operator.
std::vector<SpectralLine> interval_spectrum(const IntervalDiracModel& model, const symplectic::LagrangianProjection& p,
                                            const std::vector<CMatrix>& weight_ops, double lo, double hi,
                                            const TolerancePolicy& tol = {});

// U_P = -e^{iLV} T: the eigenvalues of D_P are the lambda with e^{iL lambda} in spec(U_P).
CMatrix interval_boundary_unitary(const IntervalDiracModel& model, const symplectic::LagrangianProjection& p);

struct Calderon {
  symplectic::LagrangianProjection projection;  // P_M onto {(v, M(0) v)}
  CMatrix k;                                   // K = M(0) = e^{-iLV}
};
Calderon interval_calderon(const IntervalDiracModel& model, const TolerancePolicy& tol = {});

std::vector<EtaValue> interval_eta(const IntervalDiracModel& model, const symplectic::LagrangianProjection& p,
                                   const std::vector<CMatrix>& weight_ops, const EtaOptions& options = {},
                                   const TolerancePolicy& tol = {});

// m = 1, L = 1, V = 0 with T = -e^{i theta}: spectrum {theta + 2 pi k}.
IntervalDiracModel theta_model();
symplectic::LagrangianProjection theta_projection(double theta);

// Boundary operator A = [[0, I], [I, 0]] and its APS projection (ker A = 0).
CMatrix default_boundary_operator(int m);
symplectic::LagrangianProjection interval_aps_projection(int m, const TolerancePolicy& tol = {});

struct SwReport {
  Complex lhs{0.0, 0.0};       // exp(2 pi i (reduced eta(D_P) - reduced eta(D_Q))), trivial action
  Complex rhs{0.0, 0.0};       // det(T* S)
  double defect = 0.0;         // |lhs - rhs|
  double isotypic_defect = 0.0;  // the same identity on each eigenspace of u, maximal defect
  Complex equivariant_lhs{0.0, 0.0};  // exp(2 pi i (reduced eta_h(D_P) - reduced eta_h(D_Q))) for h = u
  Complex equivariant_rhs{0.0, 0.0};  // det(u T* S)
  double error_estimate = 0.0;
};

SwReport sw_identity_check(const IntervalDiracModel& model, const symplectic::LagrangianProjection& p,
                           const symplectic::LagrangianProjection& q, const EtaOptions& options = {},
                           const TolerancePolicy& tol = {});

// Circle of length 2 pi cut at 0 and pi; M+ = [0, pi], M- = [pi, 2 pi].
struct SplitScenario {
  CMatrix v;
  CMatrix u;
  symplectic::LagrangianProjection p;  // on the shared boundary space (psi(0), psi(pi))
};

struct SplitTerms {
  Complex eta_circle{0.0, 0.0};
  Complex eta_plus{0.0, 0.0};
  Complex eta_minus{0.0, 0.0};
  Complex tau{0.0, 0.0};
  Complex residual{0.0, 0.0};
  double error_estimate = 0.0;
};

struct SplitReport {
  std::vector<SplitTerms> terms;  // one per group element
  symplectic::LagrangianProjection calderon_plus;
  symplectic::LagrangianProjection calderon_minus;        // shared frame
  symplectic::LagrangianProjection minus_own_frame;       // boundary condition of M- in its own frame
};

SplitReport splitting_experiment(const SplitScenario& scenario, const std::vector<GroupElement>& elements,
                                 const EtaOptions& options = {}, const TolerancePolicy& tol = {});

// Family T(t) = e^{i theta(t)} T_base with theta(t) = 2 pi t on an interval model.
struct ChainReport {
  std::vector<Complex> spectral_flow;
  std::vector<Complex> maslov_grid;
  std::vector<Complex> maslov_winding;
  std::vector<Complex> winding;          // w_h(K* T(t))
  std::vector<Complex> winding_reversed; // w_h(T(t)* K)
};

ChainReport dirac_chain(const IntervalDiracModel& model, const CMatrix& t_base, const std::vector<GroupElement>& elements,
                        int branch_window = 2, const TolerancePolicy& tol = {});

// CSV with columns lambda, re_weight_g0, im_weight_g0, ...
void write_spectrum_csv(std::ostream& out, const std::vector<SpectralLine>& lines);

CMatrix matrix_power(const CMatrix& u, int p);

}  // namespace equiflow::dirac
