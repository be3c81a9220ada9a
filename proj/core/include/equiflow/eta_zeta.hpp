#pragma once

#include <vector>

#include "equiflow/common.hpp"
#include "equiflow/spectra.hpp"
#include "equiflow/specflow.hpp"

namespace equiflow::eta_zeta {

// A Hermitian operator with a commuting symmetry, diagonalized once.
struct SpectralOperator {
  CMatrix d;
  CMatrix h;
  spectra::EigenSystem es;
  // Character weight Tr(h | cluster) per eigenvalue cluster, with the cluster's mean eigenvalue.
  std::vector<double> cluster_values;
  std::vector<Complex> cluster_weights;

  int dim() const { return static_cast<int>(d.rows()); }
  Complex kernel_trace(double zero_tol) const;
};

SpectralOperator make_operator(const CMatrix& d, const CMatrix& h = CMatrix(), const TolerancePolicy& tol = {});

// sum_{lambda != 0} Tr(h|lambda) sgn(lambda) |lambda|^{-s}
Complex eta(const SpectralOperator& op, Complex s = 0.0, const TolerancePolicy& tol = {});
Complex reduced_eta(const SpectralOperator& op, const TolerancePolicy& tol = {});

// Closed form sum Tr(h|lambda) sgn(lambda) erfc(sqrt(eps) |lambda|).
Complex truncated_eta(const SpectralOperator& op, double eps, const TolerancePolicy& tol = {});
// The same quantity from its Mellin integral (1/Gamma(1/2)) int_eps^inf t^{-1/2} Tr(h D e^{-t D^2}) dt.
Complex truncated_eta_quadrature(const SpectralOperator& op, double eps, const TolerancePolicy& tol = {},
                                 spectra::QuadratureInfo* info = nullptr);
// (1/Gamma((s+1)/2)) int_0^inf t^{(s-1)/2} Tr(h D e^{-t D^2}) dt, for real s > -1.
Complex eta_mellin(const SpectralOperator& op, double s, const TolerancePolicy& tol = {},
                   spectra::QuadratureInfo* info = nullptr);

// sqrt(eps/pi) Tr(h X e^{-eps D^2})
Complex eta_form(const SpectralOperator& op, const CMatrix& x, double eps, const TolerancePolicy& tol = {});

// d/dt of the truncated eta along a path, evaluated in closed form: -2 alpha_eps(D'(t)).
Complex truncated_eta_derivative(const specflow::HermitianPath& path, double t, double eps,
                                 const TolerancePolicy& tol = {});

struct GetzlerResult {
  Complex value{0.0, 0.0};
  Complex endpoint_difference{0.0, 0.0};  // eta_eps(D(1)) - eta_eps(D(0)), kernel counted as positive
  Complex integral{0.0, 0.0};             // int_0^1 d/dt eta_eps(D(t)) dt
  spectra::QuadratureInfo quadrature;
};

GetzlerResult getzler_spectral_flow(const specflow::HermitianPath& path, double eps = 1.0,
                                    const TolerancePolicy& tol = {});

// sum Tr(h|lambda) e^{-lambda t}; optionally restricted to the positive spectrum.
Complex heat_trace(const SpectralOperator& op, double t, bool positive_only = false);

// sum over the positive spectrum of Tr(h|lambda) lambda^{-s}.
Complex zeta(const SpectralOperator& op, Complex s, const TolerancePolicy& tol = {});
// -sum Tr(h|lambda) log(lambda); requires a positive definite operator.
Complex zeta_prime0(const SpectralOperator& op, const TolerancePolicy& tol = {});
// (1/Gamma(s)) int_0^inf t^{s-1} heat_trace_+(t) dt for real s > 0.
Complex zeta_mellin(const SpectralOperator& op, double s, const TolerancePolicy& tol = {},
                    spectra::QuadratureInfo* info = nullptr);

// exp((i pi / 2)(zeta(D^2, 0) - eta(D)) - zeta'(D^2, 0) / 2)
Complex zeta_determinant(const SpectralOperator& op, const TolerancePolicy& tol = {});
// prod_lambda lambda^{Tr(h|lambda)} with log(-x) = log x + i pi.
Complex zeta_determinant_product(const SpectralOperator& op, const TolerancePolicy& tol = {});

struct LogDefect {
  Complex lhs{0.0, 0.0};     // reduced eta(D1) - reduced eta(D0)
  Complex rhs{0.0, 0.0};     // (1/2 pi i) Tr(h log(T* K))
  Complex defect{0.0, 0.0};  // lhs - rhs
  double scale = 1.0;        // kappa used inside the error function
};

// T = exp(i pi erf(kappa D1)), K = exp(i pi erf(kappa D0)). kappa <= 0 selects the saturating
// default kappa = max(1, 6 / min |lambda|); kappa = 1 gives the unscaled formula.
LogDefect eta_log_defect(const CMatrix& d0, const CMatrix& d1, const CMatrix& h, double scale = 0.0,
                         const TolerancePolicy& tol = {});

struct LatticeFit {
  std::vector<Complex> characters;  // distinct eigenvalues of h
  std::vector<double> multiplicities;
  std::vector<long> integers;
  double residual = 0.0;  // max distance of the fitted multiplicities from the integers
};

// Writes value(h^p), p = 0..r, as sum_c n_c c^p over the distinct eigenvalues c of h and
// measures how far the least-squares n_c are from integers.
LatticeFit lattice_fit(const std::function<Complex(const CMatrix&)>& value, const CMatrix& h,
                       const TolerancePolicy& tol = {});

// Distinct eigenvalues of a unitary (clustered at cluster_tol) with spectral projectors.
struct Isotypic {
  std::vector<Complex> characters;
  std::vector<CMatrix> projectors;
};
Isotypic isotypic_decomposition(const CMatrix& h, const TolerancePolicy& tol = {});

}  // namespace equiflow::eta_zeta
