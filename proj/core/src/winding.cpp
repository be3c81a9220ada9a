#include "equiflow/winding.hpp"

#include <algorithm>
#include <cmath>

namespace equiflow::winding {

UnitaryPath make_unitary_path(MatrixPath sampler, int dim, CMatrix actor) {
  UnitaryPath p;
  p.dim = dim;
  p.sampler = std::move(sampler);
  p.actor = (actor.size() == 0) ? CMatrix::Identity(dim, dim) : std::move(actor);
  if (p.actor.rows() != dim || p.actor.cols() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "actor and path dimensions differ");
  }
  return p;
}

namespace {

MatrixPath checked_sampler(const UnitaryPath& f, const TolerancePolicy& tol) {
  auto sampler = f.sampler;
  CMatrix actor = f.actor;
  const int dim = f.dim;
  const double ctol = tol.commute_tol;
  return [sampler, actor, dim, ctol](double t) -> CMatrix {
    CMatrix m = sampler(t);
    if (m.rows() != dim || m.cols() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "unitary path sample has unexpected dimension");
    }
    if (commutator_norm(actor, m) > ctol) {
      throw Error(ErrorCode::NotEquivariant, "actor does not commute with the unitary path");
    }
    return m;
  };
}

double floor_index(double phase, double line) { return std::floor((phase - line) / kTwoPi); }

}  // namespace

WindingResult winding_number(const UnitaryPath& f, const WindingOptions& options, const TolerancePolicy& tol) {
  spectra::TrackingOptions topt;
  topt.initial_samples = options.initial_samples;
  const spectra::BranchSet bs =
      spectra::track_branches(checked_sampler(f, tol), spectra::SpectrumKind::Unitary, topt, tol);
  WindingResult out;
  out.samples = bs.sample_count();
  const int nb = bs.branch_count();
  const int last = bs.sample_count() - 1;

  // Offset: half the smallest endpoint distance to pi among phases not sitting at pi.
  double min_dist = std::numeric_limits<double>::infinity();
  for (int k : {0, last}) {
    for (int b = 0; b < nb; ++b) {
      const double d = std::abs(spectra::wrap_phase(bs.values[k](b) - kPi));
      if (d > tol.zero_tol) min_dist = std::min(min_dist, d);
    }
  }
  const double theta = std::min(0.5 * options.epsilon, 0.5 * min_dist);
  if (!(theta > 2.0 * tol.zero_tol)) {
    throw Error(ErrorCode::OffsetExhausted, "no admissible endpoint offset below epsilon");
  }
  out.offset = theta;
  const double line = kPi + theta;

  for (int b = 0; b < nb; ++b) {
    for (int k = 1; k <= last; ++k) {
      const double before = floor_index(bs.values[k - 1](b), line);
      const double after = floor_index(bs.values[k](b), line);
      const int count = static_cast<int>(after - before);
      if (count == 0) continue;
      const int kw = bs.cluster_size[k][b] == 1 ? k : k - 1;
      const CVector v = bs.vectors[kw].col(b);
      PhaseCrossing c;
      c.direction = count > 0 ? 1 : -1;
      c.weight = double(std::abs(count)) * v.dot(f.actor * v);
      c.cluster_dim = std::max(bs.cluster_size[k][b], bs.cluster_size[k - 1][b]);
      // Linear interpolation of the lifted phase locates the crossing inside the step.
      const double p0 = bs.values[k - 1](b), p1 = bs.values[k](b);
      const double target = line + kTwoPi * (count > 0 ? after : before);
      const double s = (p1 != p0) ? std::clamp((target - p0) / (p1 - p0), 0.0, 1.0) : 0.5;
      c.time = bs.times[k - 1] + s * (bs.times[k] - bs.times[k - 1]);
      out.crossings.push_back(c);
    }
  }
  std::stable_sort(out.crossings.begin(), out.crossings.end(),
                   [](const PhaseCrossing& a, const PhaseCrossing& b) { return a.time < b.time; });
  for (const PhaseCrossing& c : out.crossings) out.value += double(c.direction) * c.weight;
  return out;
}

namespace {

CMatrix derivative(const MatrixPath& path, double t) {
  const double h = 2e-3;
  const CMatrix coarse = spectra::path_derivative(path, t, h);
  const CMatrix fine = spectra::path_derivative(path, t, 0.5 * h);
  return (16.0 * fine - coarse) / 15.0;
}

}  // namespace

Complex log_derivative_integral(const UnitaryPath& f, const TolerancePolicy& tol, spectra::QuadratureInfo* info) {
  const MatrixPath sampler = checked_sampler(f, tol);
  auto integrand = [&](double t) -> Complex {
    const CMatrix ft = sampler(t);
    const CMatrix df = derivative(sampler, t);
    return (f.actor * ft.adjoint() * df).trace();
  };
  return spectra::integrate(integrand, 0.0, 1.0, tol, info);
}

Complex fredholm_det_path(const UnitaryPath& f, const TolerancePolicy& tol, spectra::QuadratureInfo* info) {
  return std::exp(log_derivative_integral(f, tol, info));
}

Complex trace_log_winding(const UnitaryPath& f, const TolerancePolicy& tol) {
  const Complex integral = log_derivative_integral(f, tol);
  const CMatrix log0 = spectra::principal_log_unitary(f.sampler(0.0), 0.0, tol);
  const CMatrix log1 = spectra::principal_log_unitary(f.sampler(1.0), 0.0, tol);
  const Complex num = integral - (f.actor * log1).trace() + (f.actor * log0).trace();
  return num / (kTwoPi * kI);
}

CMatrix CanonicalContraction::path(double t) const {
  const Eigen::Index n = u.rows();
  CMatrix out = -h0_projector();
  if (lifted_vectors.cols() > 0) {
    CVector d(log_phases.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = std::exp(kI * (t * log_phases(k)));
    out += lifted_vectors * d.asDiagonal() * lifted_vectors.adjoint();
  }
  (void)n;
  return out;
}

CMatrix CanonicalContraction::decorated(double t) const {
  if (!log_a_u_tilde) {
    throw Error(ErrorCode::BranchCut, "a U~ has -1 in its spectrum; decorated path undefined");
  }
  CMatrix out = -(h0_basis * (h0_basis.adjoint() * actor * h0_basis) * h0_basis.adjoint());
  if (complement_basis.cols() > 0) {
    out += complement_basis * spectra::exp_skew(t * (*log_a_u_tilde)) * complement_basis.adjoint();
  }
  return out;
}

CanonicalContraction canonical_path(const CMatrix& u, const CMatrix& actor_in, const TolerancePolicy& tol) {
  require_square(u, "canonical_path input");
  const Eigen::Index n = u.rows();
  const CMatrix actor = actor_in.size() == 0 ? CMatrix::Identity(n, n) : actor_in;
  require_same_dim(u, actor, "canonical_path actor");
  if (commutator_norm(actor, u) > tol.commute_tol) {
    throw Error(ErrorCode::NotCommuting, "actor does not commute with U");
  }
  const spectra::EigenSystem es = spectra::eig_unitary(u, tol);
  std::vector<int> h0, rest;
  for (int i = 0; i < es.dim(); ++i) (es.values(i) == kPi ? h0 : rest).push_back(i);
  CanonicalContraction c;
  c.u = u;
  c.actor = actor;
  c.h0_basis.resize(n, h0.size());
  for (std::size_t k = 0; k < h0.size(); ++k) c.h0_basis.col(k) = es.vectors.col(h0[k]);
  c.complement_basis.resize(n, rest.size());
  for (std::size_t k = 0; k < rest.size(); ++k) c.complement_basis.col(k) = es.vectors.col(rest[k]);
  c.u_tilde = c.complement_basis.adjoint() * u * c.complement_basis;
  if (!rest.empty()) {
    c.log_u_tilde = spectra::principal_log_unitary(c.u_tilde, 0.0, tol);
    RVector phases(rest.size());
    for (std::size_t k = 0; k < rest.size(); ++k) phases(k) = es.values(rest[k]);
    // The complement basis diagonalises U~, so log U~ is diagonal in it.
    c.lifted_vectors = c.complement_basis;
    c.log_phases = phases;
    const CMatrix a_tilde = c.complement_basis.adjoint() * actor * c.complement_basis;
    try {
      c.log_a_u_tilde = spectra::principal_log_unitary(a_tilde * c.u_tilde, 0.0, tol);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BranchCut) throw;
    }
  } else {
    c.log_u_tilde = CMatrix(0, 0);
    c.log_a_u_tilde = CMatrix(0, 0);
    c.lifted_vectors = CMatrix(n, 0);
  }
  return c;
}

Complex double_index(const CMatrix& u, const CMatrix& v, const CMatrix& actor_in, const WindingOptions& options,
                     const TolerancePolicy& tol) {
  require_same_dim(u, v, "double_index");
  const Eigen::Index n = u.rows();
  const CMatrix actor = actor_in.size() == 0 ? CMatrix::Identity(n, n) : actor_in;
  const CanonicalContraction cu = canonical_path(u, actor, tol);
  const CanonicalContraction cv = canonical_path(v, actor, tol);
  if ((v * cu.h0_basis + cu.h0_basis).norm() > 10.0 * tol.zero_tol) {
    throw Error(ErrorCode::IncompatibleSplitting, "V does not act as -I on ker(U + I)");
  }
  const CMatrix p0 = cu.h0_projector();
  const UnitaryPath f = make_unitary_path([cu](double t) { return cu.path(t); }, int(n), actor);
  const UnitaryPath g = make_unitary_path([cv](double t) { return cv.path(t); }, int(n), actor);
  const UnitaryPath q = make_unitary_path(
      [cu, cv, p0](double t) -> CMatrix { return cu.path(t) * cv.path(t) - 2.0 * p0; }, int(n), actor);
  return winding_number(f, options, tol).value + winding_number(g, options, tol).value -
         winding_number(q, options, tol).value;
}

UnitaryPath product(const UnitaryPath& f, const UnitaryPath& g) {
  if (f.dim != g.dim) throw Error(ErrorCode::DimensionMismatch, "product of paths of different dimension");
  auto fs = f.sampler;
  auto gs = g.sampler;
  return make_unitary_path([fs, gs](double t) -> CMatrix { return fs(t) * gs(t); }, f.dim, f.actor);
}

UnitaryPath inverse(const UnitaryPath& f) {
  auto fs = f.sampler;
  return make_unitary_path([fs](double t) -> CMatrix { return fs(t).adjoint(); }, f.dim, f.actor);
}

UnitaryPath reverse(const UnitaryPath& f) {
  auto fs = f.sampler;
  return make_unitary_path([fs](double t) { return fs(1.0 - t); }, f.dim, f.actor);
}

UnitaryPath concatenate(const UnitaryPath& f, const UnitaryPath& g) {
  if (f.dim != g.dim) throw Error(ErrorCode::DimensionMismatch, "concatenated paths differ in dimension");
  auto fs = f.sampler;
  auto gs = g.sampler;
  return make_unitary_path([fs, gs](double t) { return t <= 0.5 ? fs(2.0 * t) : gs(2.0 * t - 1.0); }, f.dim,
                           f.actor);
}

UnitaryPath constant(const CMatrix& u, const CMatrix& actor) {
  return make_unitary_path([u](double) { return u; }, static_cast<int>(u.rows()), actor);
}

Complex relative_double_index(const UnitaryPath& f, const UnitaryPath& g, const WindingOptions& options,
                              const TolerancePolicy& tol) {
  return winding_number(f, options, tol).value + winding_number(g, options, tol).value -
         winding_number(product(f, g), options, tol).value;
}

}  // namespace equiflow::winding
