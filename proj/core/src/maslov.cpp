#include "equiflow/maslov.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "equiflow/spectra.hpp"

namespace equiflow::maslov {

CMatrix LagrangianPath::projection(double t) const {
  return symplectic::make_projection_from_unitary(unitary(t)).p;
}

LagrangianPath make_lagrangian_path(MatrixPath unitary, int n, CMatrix actor) {
  LagrangianPath p;
  p.n = n;
  p.unitary = std::move(unitary);
  p.actor = actor.size() == 0 ? CMatrix::Identity(n, n) : std::move(actor);
  if (p.actor.rows() != n) throw Error(ErrorCode::DimensionMismatch, "actor dimension differs from path");
  return p;
}

LagrangianPath constant_path(const CMatrix& t, const CMatrix& actor) {
  return make_lagrangian_path([t](double) { return t; }, static_cast<int>(t.rows()), actor);
}

winding::UnitaryPath relative_unitary(const LagrangianPath& l1, const LagrangianPath& l2) {
  if (l1.n != l2.n) throw Error(ErrorCode::DimensionMismatch, "Lagrangian paths differ in dimension");
  auto a = l1.unitary;
  auto b = l2.unitary;
  return winding::make_unitary_path([a, b](double t) -> CMatrix { return a(t).adjoint() * b(t); }, l1.n, l1.actor);
}

namespace {

// Angle measured from pi: 0 means eigenvalue -1, positive means just above pi.
double angle_from_pi(double phase) { return spectra::wrap_phase(phase - kPi); }

class UnitaryPartitioner {
 public:
  UnitaryPartitioner(const winding::UnitaryPath& f, const TolerancePolicy& tol) : f_(f), tol_(tol) {}

  GridFlowResult run() {
    const int initial = 8;
    std::vector<double> seeds;
    for (int i = 0; i <= initial; ++i) {
      double t = double(i) / initial;
      if (i > 0 && i < initial) t = place(t, 1.0 / initial);
      seeds.push_back(t);
    }
    out_.nodes.push_back(0.0);
    for (std::size_t i = 1; i < seeds.size(); ++i) subdivide(seeds[i - 1], seeds[i], 0);
    for (std::size_t j = 0; j < out_.levels.size(); ++j) {
      const double a = out_.levels[j];
      const CMatrix pr = window(out_.nodes[j + 1], a);
      const CMatrix pl = window(out_.nodes[j], a);
      out_.contributions.push_back(spectra::projector_trace(f_.actor, pr - pl));
    }
    for (const Complex& c : out_.contributions) out_.value += c;
    return std::move(out_);
  }

 private:
  struct Entry {
    CMatrix m;
    spectra::EigenSystem es;
  };

  const Entry& entry(double t) {
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    Entry e;
    e.m = f_.sampler(t);
    if (commutator_norm(f_.actor, e.m) > tol_.commute_tol) {
      throw Error(ErrorCode::NotEquivariant, "actor does not commute with the unitary path");
    }
    e.es = spectra::eig_unitary(e.m, tol_);
    return cache_.emplace(t, std::move(e)).first->second;
  }

  double min_angle(double t) {
    const auto& es = entry(t).es;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.values.size(); ++i) best = std::min(best, std::abs(angle_from_pi(es.values(i))));
    return best;
  }

  double place(double t, double width) {
    double cand = t;
    for (int k = 1; k <= 8; ++k) {
      if (min_angle(cand) > tol_.zero_tol) return cand;
      const double shift = 10.0 * tol_.zero_tol * ((k + 1) / 2) * ((k % 2 == 1) ? 1.0 : -1.0);
      cand = t + std::clamp(shift, -0.25 * width, 0.25 * width);
    }
    return cand;
  }

  // Projector onto eigenvectors whose angle above pi lies in (lower, a].
  CMatrix window(double t, double a) {
    const auto& es = entry(t).es;
    const bool endpoint = (t == 0.0 || t == 1.0);
    const double lower = endpoint ? tol_.zero_tol : 0.0;
    const Eigen::Index n = es.values.size();
    CMatrix pi = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ang = angle_from_pi(es.values(i));
      if (ang > lower && ang <= a) pi += es.vectors.col(i) * es.vectors.col(i).adjoint();
    }
    return pi;
  }

  void subdivide(double l, double r, int depth) {
    double level = 0.0;
    if (certify(l, r, level)) {
      out_.levels.push_back(level);
      out_.nodes.push_back(r);
      return;
    }
    if (depth >= tol_.max_partition_depth) {
      throw Error(ErrorCode::PartitionFailure, "no certified phase level near t=" + std::to_string(0.5 * (l + r)));
    }
    const double m = place(0.5 * (l + r), r - l);
    subdivide(l, m, depth + 1);
    subdivide(m, r, depth + 1);
  }

  bool certify(double l, double r, double& level) {
    const double m = 0.5 * (l + r);
    const CMatrix& ul = entry(l).m;
    const CMatrix& um = entry(m).m;
    const CMatrix& ur = entry(r).m;
    // Eigenphases move at most (pi/2) * ||dU|| (Hoffman-Wielandt plus chord-to-arc).
    const double slope = std::max((um - ul).norm() / (m - l), (ur - um).norm() / (r - m));
    const double needed = 2.0 * 0.5 * kPi * slope * (r - l) + 1e-14;
    std::vector<double> angles;
    for (double t : {l, m, r}) {
      const auto& es = entry(t).es;
      for (Eigen::Index i = 0; i < es.values.size(); ++i) angles.push_back(angle_from_pi(es.values(i)));
    }
    std::vector<double> inside;
    for (double a : angles) {
      if (a > 0.0 && a < kPi) inside.push_back(a);
    }
    inside.push_back(0.0);
    inside.push_back(kPi);
    std::sort(inside.begin(), inside.end());
    double best = -1.0, best_level = 0.0;
    for (std::size_t i = 1; i < inside.size(); ++i) {
      const double cand = 0.5 * (inside[i - 1] + inside[i]);
      if (cand <= 0.0 || cand >= kPi) continue;
      double d = std::numeric_limits<double>::infinity();
      for (double a : angles) d = std::min(d, std::abs(spectra::wrap_phase(a - cand)));
      if (d > best) {
        best = d;
        best_level = cand;
      }
    }
    if (best > needed) {
      level = best_level;
      return true;
    }
    return false;
  }

  const winding::UnitaryPath& f_;
  TolerancePolicy tol_;
  std::map<double, Entry> cache_;
  GridFlowResult out_;
};

}  // namespace

GridFlowResult unitary_grid_flow(const winding::UnitaryPath& f, const TolerancePolicy& tol) {
  UnitaryPartitioner up(f, tol);
  return up.run();
}

Complex maslov_index(const LagrangianPath& l1, const LagrangianPath& l2, Mode mode,
                     const winding::WindingOptions& options, const TolerancePolicy& tol) {
  const winding::UnitaryPath rel = relative_unitary(l1, l2);
  if (mode == Mode::Grid) return unitary_grid_flow(rel, tol).value;
  return winding::winding_number(rel, options, tol).value;
}

Complex triple_index_path(const LagrangianPath& t, const LagrangianPath& s, const LagrangianPath& r,
                          const winding::WindingOptions& options, const TolerancePolicy& tol) {
  return winding::winding_number(relative_unitary(t, s), options, tol).value +
         winding::winding_number(relative_unitary(s, r), options, tol).value -
         winding::winding_number(relative_unitary(t, r), options, tol).value;
}

Complex triple_index_static(const symplectic::LagrangianProjection& p, const symplectic::LagrangianProjection& q,
                            const symplectic::LagrangianProjection& n, const symplectic::EquivariantIsometry& h,
                            const winding::WindingOptions& options, const TolerancePolicy& tol) {
  for (const auto* x : {&p, &q, &n}) {
    if (!symplectic::commutes_with(h, x->p, tol)) {
      throw Error(ErrorCode::NotEquivariant, "triple index needs h-invariant projections");
    }
  }
  const CMatrix u = p.t.adjoint() * q.t;
  const CMatrix v = q.t.adjoint() * n.t;
  return winding::double_index(u, v, h.a, options, tol);
}

int maslov_cycle_dim(const symplectic::LagrangianProjection& p, const symplectic::LagrangianProjection& p_m,
                     const TolerancePolicy& tol) {
  if (!symplectic::is_lagrangian(p.p, 1e-10) || !symplectic::is_lagrangian(p_m.p, 1e-10)) {
    throw Error(ErrorCode::NotLagrangian, "Maslov cycle test needs Lagrangian projections");
  }
  const Eigen::Index n = p.t.rows();
  return static_cast<int>(
      symplectic::null_space(CMatrix::Identity(n, n) + p.t.adjoint() * p_m.t, tol.zero_tol).cols());
}

bool in_maslov_cycle(const symplectic::LagrangianProjection& p, const symplectic::LagrangianProjection& p_m,
                     const TolerancePolicy& tol) {
  return maslov_cycle_dim(p, p_m, tol) > 0;
}

}  // namespace equiflow::maslov
