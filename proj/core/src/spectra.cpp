#include "equiflow/spectra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace equiflow {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::NotInvariant: return "NotInvariant";
    case ErrorCode::BranchCut: return "BranchCut";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::TrackingAmbiguous: return "TrackingAmbiguous";
    case ErrorCode::NotLagrangian: return "NotLagrangian";
    case ErrorCode::NotEquivariant: return "NotEquivariant";
    case ErrorCode::NotCommuting: return "NotCommuting";
    case ErrorCode::KernelLagrangianInvalid: return "KernelLagrangianInvalid";
    case ErrorCode::PartitionFailure: return "PartitionFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OffsetExhausted: return "OffsetExhausted";
    case ErrorCode::IncompatibleSplitting: return "IncompatibleSplitting";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::KernelPresent: return "KernelPresent";
    case ErrorCode::RootFindingFailure: return "RootFindingFailure";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ComputationFailed: return "ComputationFailed";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
  }
  return "Unknown";
}

void TolerancePolicy::validate() const {
  if (!(eig_tol > 0 && cluster_tol > 0 && zero_tol > 0 && quad_rel_tol > 0 && commute_tol > 0)) {
    throw Error(ErrorCode::ConfigInvalid, "all tolerances must be strictly positive");
  }
  if (cluster_tol < eig_tol) {
    throw Error(ErrorCode::ConfigInvalid, "cluster_tol must be >= eig_tol");
  }
  if (max_quad_depth < 1 || max_track_depth < 1 || max_partition_depth < 1) {
    throw Error(ErrorCode::ConfigInvalid, "depth caps must be positive");
  }
}

double commutator_norm(const CMatrix& a, const CMatrix& b) { return (a * b - b * a).norm(); }

bool is_hermitian(const CMatrix& m, double tol) {
  return (m - m.adjoint()).norm() <= tol * std::max(1.0, m.norm());
}

bool is_unitary(const CMatrix& u, double tol) {
  const auto n = u.rows();
  return (u.adjoint() * u - CMatrix::Identity(n, n)).norm() <= tol * std::max<double>(1.0, double(n));
}

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must be square");
  }
}

void require_same_dim(const CMatrix& a, const CMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": dimensions differ");
  }
}

}  // namespace equiflow

namespace equiflow::spectra {

namespace {

// Makes the first component of non-negligible modulus real and positive.
void fix_phase(CMatrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double mag = std::abs(vectors(r, c));
      if (mag > 1e-8) {
        vectors.col(c) *= std::conj(vectors(r, c)) / mag;
        vectors(r, c) = Complex(std::abs(vectors(r, c)), 0.0);
        break;
      }
    }
  }
}

std::vector<std::pair<int, int>> cluster_ranges(const RVector& values, double gap) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(values.size());
  int begin = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || values(i) - values(i - 1) > gap) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

}  // namespace

int EigenSystem::cluster_of(int i) const {
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (i >= clusters[c].first && i < clusters[c].second) return static_cast<int>(c);
  }
  return -1;
}

double wrap_phase(double phi) {
  double r = std::remainder(phi, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

EigenSystem eig_hermitian(const CMatrix& m, const TolerancePolicy& tol) {
  require_square(m, "eig_hermitian input");
  if (!is_hermitian(m, tol.eig_tol)) {
    throw Error(ErrorCode::NotHermitian, "matrix deviates from its adjoint beyond eig_tol");
  }
  EigenSystem es;
  if (m.rows() == 0) return es;
  const CMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "Hermitian eigensolver failed");
  }
  es.values = solver.eigenvalues();
  es.vectors = solver.eigenvectors();
  fix_phase(es.vectors);
  es.clusters = cluster_ranges(es.values, tol.cluster_tol);
  return es;
}

EigenSystem eig_unitary(const CMatrix& u, const TolerancePolicy& tol) {
  require_square(u, "eig_unitary input");
  if (!is_unitary(u, 100.0 * tol.eig_tol)) {
    throw Error(ErrorCode::NotUnitary, "matrix is not unitary within tolerance");
  }
  EigenSystem es;
  const Eigen::Index n = u.rows();
  if (n == 0) return es;
  // A unitary matrix is normal, so its complex Schur form is diagonal and the Schur
  // vectors are an orthonormal eigenbasis even for repeated eigenvalues.
  Eigen::ComplexSchur<CMatrix> schur(u);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "Schur decomposition failed");
  }
  const CMatrix& t = schur.matrixT();
  const CMatrix& q = schur.matrixU();
  std::vector<double> phases(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lam = t(i, i);
    phases[i] = (std::abs(lam + 1.0) <= tol.zero_tol) ? kPi : std::arg(lam);
    if (phases[i] <= -kPi) phases[i] = kPi;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return phases[a] < phases[b]; });
  es.values.resize(n);
  es.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    es.values(k) = phases[order[k]];
    es.vectors.col(k) = q.col(order[k]);
  }
  fix_phase(es.vectors);
  es.clusters = cluster_ranges(es.values, tol.cluster_tol);
  return es;
}

CMatrix projector(const CMatrix& vectors, const std::vector<int>& columns) {
  const Eigen::Index n = vectors.rows();
  CMatrix pi = CMatrix::Zero(n, n);
  for (int c : columns) pi += vectors.col(c) * vectors.col(c).adjoint();
  return pi;
}

Complex weighted_trace(const CMatrix& h, const CMatrix& basis, const TolerancePolicy& tol) {
  require_square(h, "weighted_trace actor");
  if (basis.rows() != h.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "basis and actor dimensions differ");
  }
  if (basis.cols() == 0) return Complex(0.0, 0.0);
  const CMatrix hb = h * basis;
  const CMatrix leak = hb - basis * (basis.adjoint() * hb);
  if (leak.norm() > tol.commute_tol * std::max(1.0, h.norm())) {
    throw Error(ErrorCode::NotInvariant, "subspace is not invariant under the actor");
  }
  return (basis.adjoint() * hb).trace();
}

Complex projector_trace(const CMatrix& h, const CMatrix& pi) {
  return h.cwiseProduct(pi.transpose()).sum();
}

CMatrix principal_log_unitary(const CMatrix& u, double offset, const TolerancePolicy& tol) {
  const EigenSystem es = eig_unitary(u, tol);
  const Eigen::Index n = es.values.size();
  CVector logs(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double phi = es.values(k);
    const Complex rotated = std::exp(kI * (phi - offset));
    if (std::abs(rotated + 1.0) <= tol.zero_tol) {
      throw Error(ErrorCode::BranchCut, "eigenvalue on the branch cut of the logarithm");
    }
    logs(k) = kI * (wrap_phase(phi - offset) + offset);
  }
  return es.vectors * logs.asDiagonal() * es.vectors.adjoint();
}

CMatrix exp_skew(const CMatrix& x, const TolerancePolicy& tol) {
  const CMatrix h = -kI * x;
  const EigenSystem es = eig_hermitian(0.5 * (h + h.adjoint()), tol);
  CVector e(es.values.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) e(k) = std::exp(kI * es.values(k));
  return es.vectors * e.asDiagonal() * es.vectors.adjoint();
}

CMatrix hermitian_function(const CMatrix& d, const std::function<double(double)>& f,
                           const TolerancePolicy& tol) {
  const EigenSystem es = eig_hermitian(d, tol);
  RVector fv(es.values.size());
  for (Eigen::Index k = 0; k < fv.size(); ++k) fv(k) = f(es.values(k));
  return es.vectors * fv.cast<Complex>().asDiagonal() * es.vectors.adjoint();
}

CMatrix matrix_erf(const CMatrix& d, const TolerancePolicy& tol) {
  return hermitian_function(d, [](double x) { return std::erf(x); }, tol);
}

namespace {

constexpr int kGaussOrder = 10;

struct GaussRule {
  std::array<double, kGaussOrder> nodes{};
  std::array<double, kGaussOrder> weights{};
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
GaussRule make_gauss_rule() {
  GaussRule rule;
  const int n = kGaussOrder;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule& gauss_rule() {
  static const GaussRule rule = make_gauss_rule();
  return rule;
}

struct PanelValue {
  Complex integral;
  double abs_integral;
};

PanelValue panel(const std::function<Complex(double)>& f, double a, double b, int& evals) {
  const GaussRule& g = gauss_rule();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  Complex sum(0.0, 0.0);
  double abs_sum = 0.0;
  for (int i = 0; i < kGaussOrder; ++i) {
    const Complex v = f(mid + half * g.nodes[i]);
    sum += g.weights[i] * v;
    abs_sum += g.weights[i] * std::abs(v);
  }
  evals += kGaussOrder;
  return {half * sum, half * abs_sum};
}

struct AdaptiveState {
  const std::function<Complex(double)>& f;
  double total_width;
  double abs_tol;
  int max_depth;
  int evals = 0;
  int deepest = 0;
  double error = 0.0;
};

Complex adapt(AdaptiveState& st, double a, double b, const PanelValue& whole, int depth) {
  const double m = 0.5 * (a + b);
  const PanelValue left = panel(st.f, a, m, st.evals);
  const PanelValue right = panel(st.f, m, b, st.evals);
  const Complex halves = left.integral + right.integral;
  const double diff = std::abs(halves - whole.integral);
  const double local_tol = std::max(st.abs_tol * (b - a) / st.total_width,
                                    64.0 * std::numeric_limits<double>::epsilon() *
                                        (left.abs_integral + right.abs_integral));
  st.deepest = std::max(st.deepest, depth);
  if (diff <= local_tol) {
    st.error += diff;
    return halves;
  }
  if (depth >= st.max_depth) {
    throw Error(ErrorCode::NoConvergence, "adaptive quadrature exceeded its depth cap");
  }
  return adapt(st, a, m, left, depth + 1) + adapt(st, m, b, right, depth + 1);
}

}  // namespace

Complex integrate(const std::function<Complex(double)>& f, double a, double b, const TolerancePolicy& tol,
                  QuadratureInfo* info) {
  if (b == a) return Complex(0.0, 0.0);
  int evals = 0;
  const PanelValue coarse = panel(f, a, b, evals);
  const double scale = std::max(std::abs(coarse.integral), coarse.abs_integral);
  AdaptiveState st{f, b - a, tol.quad_rel_tol * scale, tol.max_quad_depth};
  st.evals = evals;
  const Complex value = adapt(st, a, b, coarse, 1);
  if (info != nullptr) {
    info->error_estimate = st.error;
    info->evaluations = st.evals;
    info->max_depth_reached = st.deepest;
  }
  return value;
}

Complex integrate_to_infinity(const std::function<Complex(double)>& f, double a, const TolerancePolicy& tol,
                              QuadratureInfo* info) {
  auto mapped = [&](double x) -> Complex {
    const double one_minus = 1.0 - x;
    const double t = a + x / one_minus;
    return f(t) / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, tol, info);
}

CMatrix path_derivative(const MatrixPath& path, double t, double step, double lo, double hi) {
  const double h = step;
  if (t - 2 * h >= lo && t + 2 * h <= hi) {
    return (-path(t + 2 * h) + 8.0 * path(t + h) - 8.0 * path(t - h) + path(t - 2 * h)) / (12.0 * h);
  }
  const double s = (t + 4 * h <= hi) ? h : -h;
  return (-25.0 * path(t) + 48.0 * path(t + s) - 36.0 * path(t + 2 * s) + 16.0 * path(t + 3 * s) -
          3.0 * path(t + 4 * s)) /
         (12.0 * s);
}

}  // namespace equiflow::spectra
