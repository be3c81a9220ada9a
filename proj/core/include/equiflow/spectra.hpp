#pragma once

#include <utility>
#include <vector>

#include "equiflow/common.hpp"

namespace equiflow::spectra {

// Eigen-decomposition with deterministic ordering and phase fixing.
// Hermitian case: real eigenvalues ascending. Unitary case: phases in (-pi, pi], ascending.
struct EigenSystem {
  RVector values;
  CMatrix vectors;                           // orthonormal columns
  std::vector<std::pair<int, int>> clusters; // half-open index ranges [begin, end)

  int dim() const { return static_cast<int>(values.size()); }
  // Index of the cluster containing eigen-index i.
  int cluster_of(int i) const;
};

EigenSystem eig_hermitian(const CMatrix& m, const TolerancePolicy& tol = {});
EigenSystem eig_unitary(const CMatrix& u, const TolerancePolicy& tol = {});

// Orthogonal projector onto the span of the selected eigenvector columns.
CMatrix projector(const CMatrix& vectors, const std::vector<int>& columns);

// Tr(h restricted to span(basis)); basis columns orthonormal, span h-invariant.
Complex weighted_trace(const CMatrix& h, const CMatrix& basis, const TolerancePolicy& tol = {});

// Tr(h * pi) for an orthogonal projector pi onto an h-invariant subspace.
Complex projector_trace(const CMatrix& h, const CMatrix& pi);

// Skew-Hermitian logarithm of a unitary with the branch cut rotated by offset:
// eigenphases of -i*log lie in (-pi + offset, pi + offset].
CMatrix principal_log_unitary(const CMatrix& u, double offset = 0.0, const TolerancePolicy& tol = {});

// exp of a skew-Hermitian matrix (via the Hermitian eigensystem of -i*x).
CMatrix exp_skew(const CMatrix& x, const TolerancePolicy& tol = {});

// Applies a real function to a Hermitian matrix through its eigensystem.
CMatrix hermitian_function(const CMatrix& d, const std::function<double(double)>& f,
                           const TolerancePolicy& tol = {});

CMatrix matrix_erf(const CMatrix& d, const TolerancePolicy& tol = {});

struct QuadratureInfo {
  double error_estimate = 0.0;
  int evaluations = 0;
  int max_depth_reached = 0;
};

// Adaptive composite Gauss-Legendre quadrature with a fixed, depth-first evaluation order.
Complex integrate(const std::function<Complex(double)>& f, double a, double b,
                  const TolerancePolicy& tol = {}, QuadratureInfo* info = nullptr);

// Integral over [a, infinity) via the map t = a + x / (1 - x).
Complex integrate_to_infinity(const std::function<Complex(double)>& f, double a,
                              const TolerancePolicy& tol = {}, QuadratureInfo* info = nullptr);

// Derivative of a matrix path by a fourth-order stencil restricted to [lo, hi].
CMatrix path_derivative(const MatrixPath& path, double t, double step, double lo = 0.0, double hi = 1.0);

enum class SpectrumKind { Hermitian, Unitary };

// Continuous eigenvalue (or lifted eigenphase) branches of a matrix path.
struct BranchSet {
  SpectrumKind kind = SpectrumKind::Hermitian;
  std::vector<double> times;
  // values[k](b): branch b at sample k. For unitary paths these are continuous lifts
  // starting in (-pi, pi] at the first sample.
  std::vector<RVector> values;
  // vectors[k].col(b): representative eigenvector of branch b at sample k.
  std::vector<CMatrix> vectors;
  // cluster_size[k][b]: size of the eigenvalue cluster containing branch b at sample k.
  std::vector<std::vector<int>> cluster_size;
  // Sample times at which a degenerate cluster was carried through as a block.
  std::vector<double> cluster_events;

  int branch_count() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
  int sample_count() const { return static_cast<int>(times.size()); }
};

struct TrackingOptions {
  int initial_samples = 33;      // K
  double t0 = 0.0;
  double t1 = 1.0;
  double max_phase_step = 0.5;   // unitary: largest eigenphase move allowed between samples
};

BranchSet track_branches(const MatrixPath& path, SpectrumKind kind, const TrackingOptions& options = {},
                         const TolerancePolicy& tol = {});

// Convenience overload matching the (path, kind, K) form.
BranchSet track_branches(const MatrixPath& path, SpectrumKind kind, int initial_samples,
                         const TolerancePolicy& tol = {});

// Wraps an angle into (-pi, pi].
double wrap_phase(double phi);

}  // namespace equiflow::spectra
