#include "equiflow/specflow.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "equiflow/spectra.hpp"

namespace equiflow::specflow {

using spectra::EigenSystem;

HermitianPath make_path(MatrixPath sampler, int dim, CMatrix h) {
  HermitianPath p;
  p.dim = dim;
  p.sampler = std::move(sampler);
  p.h = (h.size() == 0) ? CMatrix::Identity(dim, dim) : std::move(h);
  if (p.h.rows() != dim || p.h.cols() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "symmetry and path dimensions differ");
  }
  return p;
}

GridPartition GridPartition::refined() const {
  GridPartition out;
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    const double l = nodes[j], r = nodes[j + 1];
    const double m = 0.5 * (l + r);
    if (out.nodes.empty()) out.nodes.push_back(l);
    out.nodes.push_back(m);
    out.nodes.push_back(r);
    IntervalCertificate half = intervals[j];
    half.width *= 0.5;
    out.intervals.push_back(half);
    out.intervals.push_back(half);
  }
  return out;
}

namespace {

// Caches eigensystems (and matrices) of a path at the times it is evaluated.
class PathCache {
 public:
  PathCache(const HermitianPath& path, const TolerancePolicy& tol) : path_(path), tol_(tol) {}

  const CMatrix& matrix(double t) { return entry(t).m; }
  const EigenSystem& eigen(double t) { return entry(t).es; }

 private:
  struct Entry {
    CMatrix m;
    EigenSystem es;
  };

  const Entry& entry(double t) {
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    Entry e;
    e.m = path_.sampler(t);
    if (e.m.rows() != path_.dim || e.m.cols() != path_.dim) {
      throw Error(ErrorCode::DimensionMismatch, "path sample has unexpected dimension");
    }
    if (commutator_norm(path_.h, e.m) > tol_.commute_tol * std::max(1.0, e.m.norm())) {
      throw Error(ErrorCode::NotEquivariant, "symmetry does not commute with the path");
    }
    e.es = spectra::eig_hermitian(e.m, tol_);
    return cache_.emplace(t, std::move(e)).first->second;
  }

  const HermitianPath& path_;
  TolerancePolicy tol_;
  std::map<double, Entry> cache_;
};

double min_abs_eigenvalue(const EigenSystem& es) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.values.size(); ++i) best = std::min(best, std::abs(es.values(i)));
  return best;
}

class Partitioner {
 public:
  Partitioner(const HermitianPath& path, const TolerancePolicy& tol) : cache_(path, tol), tol_(tol) {}

  GridPartition build(int initial) {
    // A path whose spectrum stays clear of one level needs no subdivision at all.
    IntervalCertificate whole;
    if (certify(0.0, 1.0, whole)) {
      out_.nodes = {0.0, 1.0};
      out_.intervals.push_back(whole);
      return std::move(out_);
    }
    std::vector<double> seeds;
    for (int i = 0; i <= initial; ++i) {
      double t = double(i) / double(initial);
      if (i > 0 && i < initial) t = place_node(t, 1.0 / initial);
      seeds.push_back(t);
    }
    out_.nodes.push_back(seeds.front());
    for (std::size_t i = 1; i < seeds.size(); ++i) subdivide(seeds[i - 1], seeds[i], 0);
    return std::move(out_);
  }

 private:
  // Nudges an interior node off a kernel point of the path (by multiples of 10 * zero_tol).
  double place_node(double t, double width) {
    double cand = t;
    for (int k = 1; k <= 8; ++k) {
      if (min_abs_eigenvalue(cache_.eigen(cand)) > tol_.zero_tol) return cand;
      const double shift = 10.0 * tol_.zero_tol * ((k + 1) / 2) * ((k % 2 == 1) ? 1.0 : -1.0);
      cand = t + std::clamp(shift, -0.25 * width, 0.25 * width);
    }
    return cand;
  }

  void subdivide(double l, double r, int depth) {
    IntervalCertificate cert;
    if (certify(l, r, cert)) {
      out_.intervals.push_back(cert);
      out_.nodes.push_back(r);
      return;
    }
    if (depth >= tol_.max_partition_depth) {
      throw Error(ErrorCode::PartitionFailure,
                  "no certified spectral level near t=" + std::to_string(0.5 * (l + r)));
    }
    const double m = place_node(0.5 * (l + r), r - l);
    subdivide(l, m, depth + 1);
    subdivide(m, r, depth + 1);
  }

  bool certify(double l, double r, IntervalCertificate& cert) {
    const double m = 0.5 * (l + r);
    const double ts[3] = {l, m, r};
    const CMatrix& bl = cache_.matrix(l);
    const CMatrix& bm = cache_.matrix(m);
    const CMatrix& br = cache_.matrix(r);
    const double slope = std::max((bm - bl).norm() / (m - l), (br - bm).norm() / (r - m));
    const double lipschitz = 2.0 * slope + 1e-14;
    const double width = r - l;
    const double needed = lipschitz * width;

    std::vector<double> all, pos;
    for (double t : ts) {
      const EigenSystem& es = cache_.eigen(t);
      for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        all.push_back(es.values(i));
        if (es.values(i) > 0) pos.push_back(es.values(i));
      }
    }
    std::sort(pos.begin(), pos.end());
    auto distance = [&](double a) {
      double d = std::numeric_limits<double>::infinity();
      for (double v : all) d = std::min(d, std::abs(v - a));
      return d;
    };
    std::vector<double> candidates;
    double prev = 0.0;
    for (double v : pos) {
      if (v - prev > 0) candidates.push_back(0.5 * (prev + v));
      prev = v;
    }
    const double ceiling = pos.empty() ? 1.0 : pos[pos.size() / 2];
    const double top = pos.empty() ? 1.0 + needed : pos.back() + std::max(1.0, 2.0 * needed);
    candidates.push_back(top);

    auto pick = [&](bool restrict_to_ceiling, double& level, double& dist) {
      bool found = false;
      for (double a : candidates) {
        if (restrict_to_ceiling && a > ceiling) continue;
        const double d = distance(a);
        if (!found || d > dist) {
          found = true;
          level = a;
          dist = d;
        }
      }
      return found;
    };
    double level = 0.0, dist = 0.0;
    bool ok = pick(true, level, dist) && dist > needed;
    if (!ok) ok = pick(false, level, dist) && dist > needed;
    if (!ok) return false;
    cert.level = level;
    cert.distance = dist;
    cert.lipschitz = lipschitz;
    cert.width = width;
    return true;
  }

  PathCache cache_;
  TolerancePolicy tol_;
  GridPartition out_;
};

CMatrix window_projector(const EigenSystem& es, double lo, double hi) {
  const Eigen::Index n = es.values.size();
  CMatrix pi = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (es.values(i) >= lo && es.values(i) <= hi) pi += es.vectors.col(i) * es.vectors.col(i).adjoint();
  }
  return pi;
}

}  // namespace

GridPartition good_partition(const HermitianPath& path, const TolerancePolicy& tol, const PartitionOptions& options) {
  Partitioner p(path, tol);
  return p.build(std::max(1, options.initial_intervals));
}

FlowResult spectral_flow(const HermitianPath& path, const std::optional<GridPartition>& partition,
                         const TolerancePolicy& tol) {
  FlowResult out;
  out.partition = partition ? *partition : good_partition(path, tol);
  const GridPartition& gp = out.partition;
  PathCache cache(path, tol);
  const double t_first = gp.nodes.front();
  const double t_last = gp.nodes.back();
  auto lower = [&](double t) { return (t == t_first || t == t_last) ? -tol.zero_tol : 0.0; };
  for (int j = 0; j < gp.size(); ++j) {
    const double a = gp.intervals[j].level;
    const double tl = gp.nodes[j], tr = gp.nodes[j + 1];
    const CMatrix pr = window_projector(cache.eigen(tr), lower(tr), a);
    const CMatrix pl = window_projector(cache.eigen(tl), lower(tl), a);
    out.contributions.push_back(spectra::projector_trace(path.h, pr - pl));
  }
  for (const Complex& c : out.contributions) out.value += c;
  return out;
}

namespace {

int endpoint_sign(double lambda, double zero_tol) { return lambda >= -zero_tol ? 1 : -1; }

// Follows one eigenvalue branch between ta (sign sa) and tb by bisection on its sign.
double locate_zero(const HermitianPath& path, double ta, double tb, CVector ref, int sa, const TolerancePolicy& tol) {
  for (int iter = 0; iter < 64 && tb - ta > 1e-11; ++iter) {
    const double tm = 0.5 * (ta + tb);
    const EigenSystem es = spectra::eig_hermitian(path.sampler(tm), tol);
    int best = 0;
    double best_mass = -1.0;
    for (const auto& [cb, ce] : es.clusters) {
      double mass = 0.0;
      for (int j = cb; j < ce; ++j) mass += std::norm(ref.dot(es.vectors.col(j)));
      if (mass > best_mass) {
        best_mass = mass;
        best = cb;
      }
    }
    const int c = es.cluster_of(best);
    const auto [cb, ce] = es.clusters[c];
    const CMatrix basis = es.vectors.middleCols(cb, ce - cb);
    CVector next = basis * (basis.adjoint() * ref);
    if (next.norm() > 0) ref = next / next.norm();
    const int s = es.values(cb) >= 0.0 ? 1 : -1;
    if (s == sa) {
      ta = tm;
    } else {
      tb = tm;
    }
  }
  return 0.5 * (ta + tb);
}

}  // namespace

FlowResult crossing_oracle(const HermitianPath& path, int samples, const TolerancePolicy& tol) {
  const spectra::BranchSet bs = spectra::track_branches(path.sampler, spectra::SpectrumKind::Hermitian, samples, tol);
  FlowResult out;
  const int nb = bs.branch_count();
  const int ns = bs.sample_count();
  for (int b = 0; b < nb; ++b) {
    int s_prev = endpoint_sign(bs.values[0](b), tol.zero_tol);
    int k_prev = 0;
    for (int k = 1; k < ns; ++k) {
      const double lam = bs.values[k](b);
      int s;
      if (k == ns - 1) {
        s = endpoint_sign(lam, tol.zero_tol);
      } else if (std::abs(lam) <= tol.zero_tol) {
        continue;
      } else {
        s = lam > 0 ? 1 : -1;
      }
      if (s != s_prev) {
        const int kw = bs.cluster_size[k][b] == 1 ? k : k_prev;
        const CVector v = bs.vectors[kw].col(b);
        Crossing c;
        c.direction = s;
        c.weight = v.dot(path.h * v);
        c.cluster_dim = std::max(bs.cluster_size[k][b], bs.cluster_size[k_prev][b]);
        c.time = locate_zero(path, bs.times[k_prev], bs.times[k], bs.vectors[k_prev].col(b), s_prev, tol);
        out.crossings.push_back(c);
      }
      s_prev = s;
      k_prev = k;
    }
  }
  std::stable_sort(out.crossings.begin(), out.crossings.end(),
                   [](const Crossing& a, const Crossing& b) { return a.time < b.time; });
  for (const Crossing& c : out.crossings) {
    out.contributions.push_back(double(c.direction) * c.weight);
    out.value += double(c.direction) * c.weight;
  }
  return out;
}

HermitianPath concatenate(const HermitianPath& f, const HermitianPath& g) {
  if (f.dim != g.dim) throw Error(ErrorCode::DimensionMismatch, "concatenated paths differ in dimension");
  auto fs = f.sampler;
  auto gs = g.sampler;
  return make_path([fs, gs](double t) { return t <= 0.5 ? fs(2.0 * t) : gs(2.0 * t - 1.0); }, f.dim, f.h);
}

HermitianPath reverse(const HermitianPath& f) {
  auto fs = f.sampler;
  return make_path([fs](double t) { return fs(1.0 - t); }, f.dim, f.h);
}

BottLoop bott_loop(const std::vector<Complex>& plus_chars, const std::vector<Complex>& minus_chars, int k) {
  const int p = static_cast<int>(plus_chars.size());
  const int q = static_cast<int>(minus_chars.size());
  if (k < 0 || k > q) throw Error(ErrorCode::DimensionMismatch, "rank k exceeds the negative block");
  const int n = p + q;
  CMatrix h = CMatrix::Zero(n, n);
  for (int i = 0; i < p; ++i) h(i, i) = plus_chars[i];
  for (int i = 0; i < q; ++i) h(p + i, p + i) = minus_chars[i];
  RVector base(n), slope(n);
  for (int i = 0; i < n; ++i) {
    base(i) = i < p ? 1.0 : -1.0;
    slope(i) = (i >= p && i < p + k) ? 2.0 : 0.0;
  }
  BottLoop out;
  out.h = h;
  out.hermitian = make_path(
      [base, slope](double t) -> CMatrix { return (base + t * slope).cast<Complex>().asDiagonal(); }, n, h);
  out.unitary = [base, slope](double t) -> CMatrix {
    CVector d(base.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = -std::exp(kI * (kPi * (base(i) + t * slope(i))));
    return d.asDiagonal();
  };
  for (int i = 0; i < k; ++i) out.expected += minus_chars[i];
  return out;
}

}  // namespace equiflow::specflow
