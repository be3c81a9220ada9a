#include "equiflow/eta_zeta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace equiflow::eta_zeta {

namespace {

double sgn_plus(double x, double zero_tol) { return x >= -zero_tol ? 1.0 : -1.0; }

// Closed-form truncated eta summand with sgn(0) = +1: sgn(x) erfc(sqrt(eps) |x|).
double truncated_term(double x, double eps, double zero_tol) {
  return sgn_plus(x, zero_tol) * std::erfc(std::sqrt(eps) * std::abs(x));
}

CMatrix phase_function(const CMatrix& d, double kappa, const TolerancePolicy& tol) {
  const auto es = spectra::eig_hermitian(d, tol);
  CVector diag(es.dim());
  for (int i = 0; i < es.dim(); ++i) diag(i) = std::exp(kI * kPi * std::erf(kappa * es.values(i)));
  return es.vectors * diag.asDiagonal() * es.vectors.adjoint();
}

}  // namespace

Complex SpectralOperator::kernel_trace(double zero_tol) const {
  Complex k(0.0, 0.0);
  for (std::size_t c = 0; c < cluster_values.size(); ++c) {
    if (std::abs(cluster_values[c]) <= zero_tol) k += cluster_weights[c];
  }
  return k;
}

SpectralOperator make_operator(const CMatrix& d, const CMatrix& h, const TolerancePolicy& tol) {
  require_square(d, "operator");
  SpectralOperator op;
  op.d = d;
  op.h = h.size() == 0 ? CMatrix::Identity(d.rows(), d.cols()) : h;
  require_same_dim(op.d, op.h, "symmetry");
  if (commutator_norm(op.h, op.d) > tol.commute_tol * std::max(1.0, op.d.norm())) {
    throw Error(ErrorCode::NotEquivariant, "symmetry does not commute with the operator");
  }
  op.es = spectra::eig_hermitian(d, tol);
  for (const auto& [b, e] : op.es.clusters) {
    op.cluster_values.push_back(op.es.values.segment(b, e - b).mean());
    op.cluster_weights.push_back(spectra::weighted_trace(op.h, op.es.vectors.middleCols(b, e - b), tol));
  }
  return op;
}

Complex eta(const SpectralOperator& op, Complex s, const TolerancePolicy& tol) {
  Complex sum(0.0, 0.0);
  for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
    const double lam = op.cluster_values[c];
    if (std::abs(lam) <= tol.zero_tol) continue;
    const double sign = lam > 0 ? 1.0 : -1.0;
    sum += op.cluster_weights[c] * sign * std::exp(-s * std::log(std::abs(lam)));
  }
  return sum;
}

Complex reduced_eta(const SpectralOperator& op, const TolerancePolicy& tol) {
  return 0.5 * (eta(op, 0.0, tol) + op.kernel_trace(tol.zero_tol));
}

Complex truncated_eta(const SpectralOperator& op, double eps, const TolerancePolicy& tol) {
  if (!(eps > 0.0)) throw Error(ErrorCode::ConfigInvalid, "truncation parameter must be positive");
  Complex sum(0.0, 0.0);
  for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
    const double lam = op.cluster_values[c];
    if (std::abs(lam) <= tol.zero_tol) continue;
    sum += op.cluster_weights[c] * truncated_term(lam, eps, tol.zero_tol);
  }
  return sum;
}

namespace {

// Tr(h D e^{-t D^2}) as an eigen-sum.
Complex odd_heat_trace(const SpectralOperator& op, double t) {
  Complex sum(0.0, 0.0);
  for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
    const double lam = op.cluster_values[c];
    sum += op.cluster_weights[c] * lam * std::exp(-t * lam * lam);
  }
  return sum;
}

}  // namespace

Complex truncated_eta_quadrature(const SpectralOperator& op, double eps, const TolerancePolicy& tol,
                                 spectra::QuadratureInfo* info) {
  if (!(eps > 0.0)) throw Error(ErrorCode::ConfigInvalid, "truncation parameter must be positive");
  auto f = [&](double t) -> Complex { return odd_heat_trace(op, t) / std::sqrt(t); };
  return spectra::integrate_to_infinity(f, eps, tol, info) / std::sqrt(kPi);
}

Complex eta_mellin(const SpectralOperator& op, double s, const TolerancePolicy& tol, spectra::QuadratureInfo* info) {
  if (!(s > -1.0)) throw Error(ErrorCode::ConfigInvalid, "Mellin form of eta needs s > -1");
  // t = u^2 removes the algebraic endpoint behaviour: int 2 u^s Tr(h D e^{-u^2 D^2}) du.
  auto f = [&](double u) -> Complex { return 2.0 * std::pow(u, s) * odd_heat_trace(op, u * u); };
  return spectra::integrate_to_infinity(f, 0.0, tol, info) / std::tgamma(0.5 * (s + 1.0));
}

Complex eta_form(const SpectralOperator& op, const CMatrix& x, double eps, const TolerancePolicy& tol) {
  require_same_dim(op.d, x, "eta form argument");
  (void)tol;
  const auto& es = op.es;
  RVector g(es.dim());
  for (int i = 0; i < es.dim(); ++i) g(i) = std::exp(-eps * es.values(i) * es.values(i));
  const CMatrix heat = es.vectors * g.cast<Complex>().asDiagonal() * es.vectors.adjoint();
  return std::sqrt(eps / kPi) * (op.h * x * heat).trace();
}

Complex truncated_eta_derivative(const specflow::HermitianPath& path, double t, double eps,
                                 const TolerancePolicy& tol) {
  const SpectralOperator op = make_operator(path.sampler(t), path.h, tol);
  const CMatrix dot = spectra::path_derivative(path.sampler, t, 1e-3);
  return -2.0 * eta_form(op, dot, eps, tol);
}

GetzlerResult getzler_spectral_flow(const specflow::HermitianPath& path, double eps, const TolerancePolicy& tol) {
  if (!(eps > 0.0)) throw Error(ErrorCode::ConfigInvalid, "truncation parameter must be positive");
  auto endpoint = [&](double t) {
    const SpectralOperator op = make_operator(path.sampler(t), path.h, tol);
    Complex sum(0.0, 0.0);
    for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
      sum += op.cluster_weights[c] * truncated_term(op.cluster_values[c], eps, tol.zero_tol);
    }
    return sum;
  };
  GetzlerResult r;
  r.endpoint_difference = endpoint(1.0) - endpoint(0.0);
  auto integrand = [&](double t) { return truncated_eta_derivative(path, t, eps, tol); };
  r.integral = spectra::integrate(integrand, 0.0, 1.0, tol, &r.quadrature);
  r.value = 0.5 * (r.endpoint_difference - r.integral);
  return r;
}

Complex heat_trace(const SpectralOperator& op, double t, bool positive_only) {
  Complex sum(0.0, 0.0);
  for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
    const double lam = op.cluster_values[c];
    if (positive_only && lam <= 0.0) continue;
    sum += op.cluster_weights[c] * std::exp(-lam * t);
  }
  return sum;
}

namespace {

void require_no_kernel(const SpectralOperator& op, const TolerancePolicy& tol) {
  for (double lam : op.cluster_values) {
    if (std::abs(lam) <= tol.zero_tol) throw Error(ErrorCode::KernelPresent, "operator has a kernel");
  }
}

}  // namespace

Complex zeta(const SpectralOperator& op, Complex s, const TolerancePolicy& tol) {
  require_no_kernel(op, tol);
  Complex sum(0.0, 0.0);
  for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
    const double lam = op.cluster_values[c];
    if (lam > 0.0) sum += op.cluster_weights[c] * std::exp(-s * std::log(lam));
  }
  return sum;
}

Complex zeta_prime0(const SpectralOperator& op, const TolerancePolicy& tol) {
  require_no_kernel(op, tol);
  Complex sum(0.0, 0.0);
  for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
    const double lam = op.cluster_values[c];
    if (lam < 0.0) throw Error(ErrorCode::NotPositive, "zeta'(0) needs a positive operator");
    sum -= op.cluster_weights[c] * std::log(lam);
  }
  return sum;
}

Complex zeta_mellin(const SpectralOperator& op, double s, const TolerancePolicy& tol, spectra::QuadratureInfo* info) {
  if (!(s > 0.0)) throw Error(ErrorCode::ConfigInvalid, "Mellin form of zeta needs s > 0");
  require_no_kernel(op, tol);
  // t = u^2: int 2 u^{2s-1} K_+(u^2) du.
  auto f = [&](double u) -> Complex { return 2.0 * std::pow(u, 2.0 * s - 1.0) * heat_trace(op, u * u, true); };
  return spectra::integrate_to_infinity(f, 0.0, tol, info) / std::tgamma(s);
}

Complex zeta_determinant(const SpectralOperator& op, const TolerancePolicy& tol) {
  require_no_kernel(op, tol);
  // D^2 has the eigenvectors of D with eigenvalues lambda^2 > 0, so zeta(D^2, 0) = Tr(h).
  Complex zeta_sq0(0.0, 0.0), zeta_sq_prime(0.0, 0.0);
  for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
    const double lam = op.cluster_values[c];
    zeta_sq0 += op.cluster_weights[c];
    zeta_sq_prime -= op.cluster_weights[c] * std::log(lam * lam);
  }
  const Complex eta0 = eta(op, 0.0, tol);
  return std::exp(0.5 * kI * kPi * (zeta_sq0 - eta0) - 0.5 * zeta_sq_prime);
}

Complex zeta_determinant_product(const SpectralOperator& op, const TolerancePolicy& tol) {
  require_no_kernel(op, tol);
  Complex prod(1.0, 0.0);
  for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
    const Complex log_lambda = std::log(Complex(op.cluster_values[c], 0.0));
    prod *= std::exp(op.cluster_weights[c] * log_lambda);
  }
  return prod;
}

LogDefect eta_log_defect(const CMatrix& d0, const CMatrix& d1, const CMatrix& h, double scale,
                         const TolerancePolicy& tol) {
  const SpectralOperator op0 = make_operator(d0, h, tol);
  const SpectralOperator op1 = make_operator(d1, h, tol);
  require_no_kernel(op0, tol);
  require_no_kernel(op1, tol);
  LogDefect r;
  if (scale > 0.0) {
    r.scale = scale;
  } else {
    double min_abs = std::numeric_limits<double>::infinity();
    for (double lam : op0.cluster_values) min_abs = std::min(min_abs, std::abs(lam));
    for (double lam : op1.cluster_values) min_abs = std::min(min_abs, std::abs(lam));
    r.scale = std::max(1.0, 6.0 / min_abs);
  }
  const CMatrix t = phase_function(d1, r.scale, tol);
  const CMatrix k = phase_function(d0, r.scale, tol);
  const CMatrix log_tk = spectra::principal_log_unitary(t.adjoint() * k, 0.0, tol);
  r.lhs = reduced_eta(op1, tol) - reduced_eta(op0, tol);
  r.rhs = (op0.h * log_tk).trace() / (2.0 * kPi * kI);
  r.defect = r.lhs - r.rhs;
  return r;
}

Isotypic isotypic_decomposition(const CMatrix& h, const TolerancePolicy& tol) {
  const auto es = spectra::eig_unitary(h, tol);
  Isotypic iso;
  for (const auto& [b, e] : es.clusters) {
    const CMatrix block = es.vectors.middleCols(b, e - b);
    iso.characters.push_back(std::polar(1.0, es.values(b)));
    iso.projectors.push_back(block * block.adjoint());
  }
  return iso;
}

LatticeFit lattice_fit(const std::function<Complex(const CMatrix&)>& value, const CMatrix& h,
                       const TolerancePolicy& tol) {
  const Isotypic iso = isotypic_decomposition(h, tol);
  const int r = static_cast<int>(iso.characters.size());
  CMatrix vander(r + 1, r);
  CVector rhs(r + 1);
  CMatrix power = CMatrix::Identity(h.rows(), h.cols());
  for (int p = 0; p <= r; ++p) {
    for (int c = 0; c < r; ++c) vander(p, c) = std::pow(iso.characters[c], p);
    rhs(p) = value(power);
    power = power * h;
  }
  const CVector n = vander.colPivHouseholderQr().solve(rhs);
  LatticeFit fit;
  fit.characters = iso.characters;
  for (int c = 0; c < r; ++c) {
    const long k = std::lround(n(c).real());
    fit.multiplicities.push_back(n(c).real());
    fit.integers.push_back(k);
    fit.residual = std::max(fit.residual, std::abs(n(c) - Complex(double(k), 0.0)));
  }
  return fit;
}

}  // namespace equiflow::eta_zeta
