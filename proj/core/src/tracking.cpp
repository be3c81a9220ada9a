#include <algorithm>
#include <cmath>
#include <limits>

#include "equiflow/spectra.hpp"

namespace equiflow::spectra {

namespace {

// Minimum-cost perfect assignment (Hungarian algorithm, O(n^3)). cost is n x n row-major.
std::vector<int> hungarian(const std::vector<double>& cost, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

struct TrackState {
  RVector values;
  CMatrix vectors;
  std::vector<int> cluster_size;
  std::vector<int> cluster_id;  // branches sharing an id were degenerate at the last sample
};

class Tracker {
 public:
  Tracker(const MatrixPath& path, SpectrumKind kind, const TrackingOptions& opt, const TolerancePolicy& tol)
      : path_(path), kind_(kind), opt_(opt), tol_(tol) {
    out_.kind = kind;
  }

  BranchSet run() {
    if (opt_.initial_samples < 2) {
      throw Error(ErrorCode::TrackingAmbiguous, "track_branches needs at least two samples");
    }
    const int k = opt_.initial_samples;
    std::vector<double> grid(k);
    for (int i = 0; i < k; ++i) grid[i] = opt_.t0 + (opt_.t1 - opt_.t0) * double(i) / double(k - 1);
    grid.back() = opt_.t1;

    EigenSystem es0 = eval(grid[0]);
    TrackState st;
    st.values = es0.values;
    st.vectors = es0.vectors;
    st.cluster_size.resize(es0.dim());
    st.cluster_id.resize(es0.dim());
    for (int c = 0; c < static_cast<int>(es0.clusters.size()); ++c) {
      const auto [cb, ce] = es0.clusters[c];
      for (int i = cb; i < ce; ++i) {
        st.cluster_size[i] = ce - cb;
        st.cluster_id[i] = c;
      }
    }
    record(grid[0], st);
    for (int i = 1; i < k; ++i) {
      EigenSystem es = eval(grid[i]);
      advance(st, grid[i - 1], grid[i], es, 0);
    }
    return std::move(out_);
  }

 private:
  EigenSystem eval(double t) const {
    const CMatrix m = path_(t);
    return kind_ == SpectrumKind::Hermitian ? eig_hermitian(m, tol_) : eig_unitary(m, tol_);
  }

  void record(double t, const TrackState& st) {
    out_.times.push_back(t);
    out_.values.push_back(st.values);
    out_.vectors.push_back(st.vectors);
    out_.cluster_size.push_back(st.cluster_size);
  }

  void advance(TrackState& st, double ta, double tb, const EigenSystem& esb, int depth) {
    TrackState next;
    bool degenerate = false;
    if (match(st, esb, next, degenerate)) {
      st = std::move(next);
      if (degenerate) out_.cluster_events.push_back(tb);
      record(tb, st);
      return;
    }
    if (depth >= tol_.max_track_depth) {
      throw Error(ErrorCode::TrackingAmbiguous,
                  "eigenvector overlap invariant not achieved near t=" + std::to_string(tb));
    }
    const double tm = 0.5 * (ta + tb);
    const EigenSystem esm = eval(tm);
    advance(st, ta, tm, esm, depth + 1);
    advance(st, tm, tb, esb, depth + 1);
  }

  bool match(const TrackState& st, const EigenSystem& esb, TrackState& next, bool& degenerate) const {
    const int n = esb.dim();
    if (n != st.values.size()) {
      throw Error(ErrorCode::DimensionMismatch, "path changes dimension");
    }
    const CMatrix w = st.vectors.adjoint() * esb.vectors;
    // A branch that was part of a degenerate cluster has an arbitrary representative inside
    // that cluster, so it is matched by the weight of the new vector in the whole old cluster
    // subspace. This lets a cluster split without a spurious overlap failure.
    Eigen::MatrixXd weight = w.cwiseAbs2();
    for (int i = 0; i < n; ++i) {
      if (st.cluster_size[i] <= 1) continue;
      for (int j = 0; j < n; ++j) {
        double m = 0.0;
        for (int k = 0; k < n; ++k) {
          if (st.cluster_id[k] == st.cluster_id[i]) m += std::norm(w(k, j));
        }
        weight(i, j) = m;
      }
    }
    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) cost[i * n + j] = -weight(i, j);
    }
    const std::vector<int> assign = hungarian(cost, n);

    next.values.resize(n);
    next.vectors.resize(n, n);
    next.cluster_size.assign(n, 1);
    next.cluster_id.assign(n, 0);
    std::vector<std::vector<int>> members(esb.clusters.size());
    for (int i = 0; i < n; ++i) {
      const int j = assign[i];
      const int c = esb.cluster_of(j);
      const auto [cb, ce] = esb.clusters[c];
      double mass = 0.0;
      for (int jj = cb; jj < ce; ++jj) mass += weight(i, jj);
      if (mass < 0.5) return false;
      members[c].push_back(i);
      next.cluster_size[i] = ce - cb;
      next.cluster_id[i] = c;
      if (kind_ == SpectrumKind::Unitary) {
        const double step = wrap_phase(esb.values(j) - st.values(i));
        if (std::abs(step) > opt_.max_phase_step) return false;
        next.values(i) = st.values(i) + step;
      } else {
        next.values(i) = esb.values(j);
      }
    }
    degenerate = false;
    for (std::size_t c = 0; c < esb.clusters.size(); ++c) {
      const auto [cb, ce] = esb.clusters[c];
      const auto& idx = members[c];
      if (ce - cb == 1) {
        const int i = idx.front();
        CVector v = esb.vectors.col(cb);
        const Complex ov = st.vectors.col(i).dot(v);
        if (std::abs(ov) > 0.0) v *= std::conj(ov) / std::abs(ov);
        next.vectors.col(i) = v;
        continue;
      }
      // Degenerate cluster: carry the previous representatives into the cluster subspace
      // and re-orthonormalise symmetrically, so branch identity survives the block.
      degenerate = true;
      const CMatrix basis = esb.vectors.middleCols(cb, ce - cb);
      CMatrix old(n, idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) old.col(k) = st.vectors.col(idx[k]);
      const CMatrix x = basis * (basis.adjoint() * old);
      const CMatrix gram = x.adjoint() * x;
      Eigen::SelfAdjointEigenSolver<CMatrix> ge(0.5 * (gram + gram.adjoint()));
      if (ge.eigenvalues().minCoeff() < 1e-6) {
        // Representatives inherited from a larger degenerate cluster carry no identity of
        // their own; any orthonormal basis of the new cluster will do.
        const bool inherited = std::all_of(idx.begin(), idx.end(), [&](int i) { return st.cluster_size[i] > 1; });
        if (!inherited) return false;
        for (std::size_t k = 0; k < idx.size(); ++k) next.vectors.col(idx[k]) = basis.col(k);
        continue;
      }
      RVector inv_sqrt = ge.eigenvalues().cwiseSqrt().cwiseInverse();
      const CMatrix lowdin = x * (ge.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() *
                                  ge.eigenvectors().adjoint());
      for (std::size_t k = 0; k < idx.size(); ++k) next.vectors.col(idx[k]) = lowdin.col(k);
    }
    return true;
  }

  const MatrixPath& path_;
  SpectrumKind kind_;
  TrackingOptions opt_;
  TolerancePolicy tol_;
  BranchSet out_;
};

}  // namespace

BranchSet track_branches(const MatrixPath& path, SpectrumKind kind, const TrackingOptions& options,
                         const TolerancePolicy& tol) {
  Tracker tracker(path, kind, options, tol);
  return tracker.run();
}

BranchSet track_branches(const MatrixPath& path, SpectrumKind kind, int initial_samples,
                         const TolerancePolicy& tol) {
  TrackingOptions opt;
  opt.initial_samples = initial_samples;
  return track_branches(path, kind, opt, tol);
}

}  // namespace equiflow::spectra
