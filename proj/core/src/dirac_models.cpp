#include "equiflow/dirac_models.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <Eigen/Eigenvalues>

#include "equiflow/maslov.hpp"
#include "equiflow/specflow.hpp"
#include "equiflow/spectra.hpp"
#include "equiflow/winding.hpp"

namespace equiflow::dirac {

CMatrix matrix_power(const CMatrix& u, int p) {
  const CMatrix base = p >= 0 ? u : CMatrix(u.adjoint());
  CMatrix out = CMatrix::Identity(u.rows(), u.cols());
  for (int i = 0; i < std::abs(p); ++i) out = out * base;
  return out;
}

namespace {

void validate_channels(const CMatrix& v, const CMatrix& u, const TolerancePolicy& tol) {
  require_square(v, "potential");
  require_same_dim(v, u, "internal symmetry");
  if (!is_hermitian(v, tol.eig_tol * std::max(1.0, v.norm()))) {
    throw Error(ErrorCode::NotHermitian, "potential V must be Hermitian");
  }
  if (!is_unitary(u, 1e-10)) throw Error(ErrorCode::NotUnitary, "internal symmetry u must be unitary");
  if (commutator_norm(u, v) > tol.commute_tol * std::max(1.0, v.norm())) {
    throw Error(ErrorCode::NotEquivariant, "internal symmetry must commute with V");
  }
}

// rho = 1 on [0,1], 0 on [2, inf), smooth in between.
double smooth_cutoff(double x) {
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  auto s = [](double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; };
  const double a = s(2.0 - x);
  const double b = s(x - 1.0);
  return a / (a + b);
}

}  // namespace

CircleDiracModel make_circle_model(const CMatrix& v, const CMatrix& u, int rotation_order, const TolerancePolicy& tol) {
  CircleDiracModel m;
  m.v = v;
  m.u = u.size() == 0 ? CMatrix::Identity(v.rows(), v.cols()) : u;
  m.rotation_order = rotation_order;
  validate_channels(m.v, m.u, tol);
  if (rotation_order < 1) throw Error(ErrorCode::ConfigInvalid, "rotation order must be >= 1");
  return m;
}

std::vector<SpectralLine> circle_spectrum(const CircleDiracModel& model, const std::vector<GroupElement>& elements,
                                          double window, const TolerancePolicy& tol) {
  const auto es = spectra::eig_hermitian(model.v, tol);
  std::vector<CMatrix> powers;
  for (const auto& g : elements) powers.push_back(matrix_power(model.u, g.u_power));
  std::vector<SpectralLine> lines;
  for (const auto& [b, e] : es.clusters) {
    const CMatrix basis = es.vectors.middleCols(b, e - b);
    const double vc = es.values.segment(b, e - b).mean();
    std::vector<Complex> base;
    for (const auto& pw : powers) base.push_back((basis.adjoint() * pw * basis).trace());
    const long k_lo = static_cast<long>(std::ceil(-window - vc));
    const long k_hi = static_cast<long>(std::floor(window - vc));
    for (long k = k_lo; k <= k_hi; ++k) {
      SpectralLine line;
      line.lambda = double(k) + vc;
      line.multiplicity = e - b;
      for (std::size_t j = 0; j < elements.size(); ++j) {
        const double angle = kTwoPi * double(k % model.rotation_order) * elements[j].rotation_power / model.rotation_order;
        line.weights.push_back(base[j] * std::polar(1.0, angle));
      }
      lines.push_back(std::move(line));
    }
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const SpectralLine& x, const SpectralLine& y) { return x.lambda < y.lambda; });
  return lines;
}

std::vector<EtaValue> regularized_eta(const SpectrumProvider& provider, int element_count, const EtaOptions& options,
                                      const TolerancePolicy& tol) {
  if (!(options.cutoff > 0.0)) throw Error(ErrorCode::ConfigInvalid, "eta cutoff must be positive");
  const double lam = options.cutoff;
  const bool abel = options.mode == Regularization::Abel;
  const std::vector<SpectralLine> lines = provider(abel ? 40.0 * lam : 2.0 * lam);

  std::vector<EtaValue> out(element_count);
  int kernel_dim = 0;
  for (const auto& line : lines) {
    if (std::abs(line.lambda) > tol.zero_tol) continue;
    kernel_dim += line.multiplicity;
    for (int j = 0; j < element_count; ++j) out[j].kernel += line.weights[j];
  }
  if (kernel_dim > 0 && !options.allow_kernel) {
    throw Error(ErrorCode::KernelPresent, "Dirac operator has a kernel of dimension " + std::to_string(kernel_dim));
  }

  // Signed sums with a weight function of |lambda|, in ascending spectral order.
  auto weighted = [&](int j, const std::function<double(double)>& w) {
    Complex sum(0.0, 0.0);
    for (const auto& line : lines) {
      if (std::abs(line.lambda) <= tol.zero_tol) continue;
      const double sign = line.lambda > 0 ? 1.0 : -1.0;
      sum += sign * w(std::abs(line.lambda)) * line.weights[j];
    }
    return sum;
  };
  auto smooth = [&](int j, double c) { return weighted(j, [c](double x) { return smooth_cutoff(x / c); }); };
  auto abel_sum = [&](int j, double c) { return weighted(j, [c](double x) { return std::exp(-x / c); }); };
  auto richardson = [&](int j, double c) {
    return (8.0 * abel_sum(j, c) - 6.0 * abel_sum(j, 0.5 * c) + abel_sum(j, 0.25 * c)) / 3.0;
  };

  for (int j = 0; j < element_count; ++j) {
    Complex full, half;
    if (abel) {
      full = richardson(j, lam);
      half = richardson(j, 0.5 * lam);
    } else {
      full = smooth(j, lam);
      half = smooth(j, 0.5 * lam);
    }
    out[j].eta = full;
    out[j].error_estimate = std::abs(full - half);
    out[j].reduced = 0.5 * (out[j].eta + out[j].kernel);
  }
  return out;
}

std::vector<EtaValue> circle_eta(const CircleDiracModel& model, const std::vector<GroupElement>& elements,
                                 const EtaOptions& options, const TolerancePolicy& tol) {
  auto provider = [&](double w) { return circle_spectrum(model, elements, w, tol); };
  return regularized_eta(provider, static_cast<int>(elements.size()), options, tol);
}

IntervalDiracModel make_interval_model(double length, const CMatrix& v, const CMatrix& u, const TolerancePolicy& tol) {
  if (!(length > 0.0)) throw Error(ErrorCode::ConfigInvalid, "interval length must be positive");
  IntervalDiracModel m;
  m.length = length;
  m.v = v;
  m.u = u.size() == 0 ? CMatrix::Identity(v.rows(), v.cols()) : u;
  validate_channels(m.v, m.u, tol);
  return m;
}

CMatrix interval_transfer(const IntervalDiracModel& model, Complex lambda) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (model.v + model.v.adjoint()));
  const Eigen::Index m = model.v.rows();
  CVector d(m);
  for (Eigen::Index i = 0; i < m; ++i) d(i) = std::exp(kI * model.length * (lambda - es.eigenvalues()(i)));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

Complex secular_value(const IntervalDiracModel& model, const CMatrix& p, Complex lambda) {
  const int m = model.channels();
  if (p.rows() != 2 * m || p.cols() != 2 * m) {
    throw Error(ErrorCode::DimensionMismatch, "boundary projection must act on C^{2m}");
  }
  Eigen::JacobiSVD<CMatrix> svd(p, Eigen::ComputeThinU);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()(i) > 0.5 ? 1 : 0;
  if (rank != m) throw Error(ErrorCode::DimensionMismatch, "boundary projection must have rank m");
  const CMatrix b = svd.matrixU().leftCols(rank);
  CMatrix j(2 * m, m);
  j.topRows(m) = CMatrix::Identity(m, m);
  j.bottomRows(m) = interval_transfer(model, lambda);
  return (b.adjoint() * j).determinant();
}

std::vector<Complex> complex_root_scan(const IntervalDiracModel& model, const CMatrix& p, double lo, double hi,
                                       double strip) {
  std::vector<Complex> roots;
  const double step = kPi / (4.0 * model.length);
  const double delta = 1e-7;
  for (double x = lo; x <= hi; x += step) {
    for (double y : {-0.5 * strip, 0.0, 0.5 * strip}) {
      Complex z(x, y);
      bool converged = false;
      for (int it = 0; it < 60; ++it) {
        const Complex f = secular_value(model, p, z);
        const Complex df = (secular_value(model, p, z + delta) - secular_value(model, p, z - delta)) / (2.0 * delta);
        if (std::abs(df) < 1e-300) break;
        const Complex dz = f / df;
        z -= dz;
        if (std::abs(z.imag()) > 4.0 * strip + 1.0) break;
        if (std::abs(dz) < 1e-13 * std::max(1.0, std::abs(z))) {
          converged = std::abs(secular_value(model, p, z)) < 1e-9;
          break;
        }
      }
      if (!converged || z.real() < lo || z.real() > hi || std::abs(z.imag()) > strip) continue;
      const bool seen = std::any_of(roots.begin(), roots.end(), [&](const Complex& r) { return std::abs(r - z) < 1e-6; });
      if (!seen) roots.push_back(z);
    }
  }
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) { return a.real() < b.real(); });
  return roots;
}

std::vector<CMatrix> interval_weight_operators(const IntervalDiracModel& model,
                                               const std::vector<GroupElement>& elements) {
  std::vector<CMatrix> ops;
  for (const auto& g : elements) {
    if (g.rotation_power != 0) {
      throw Error(ErrorCode::ConfigInvalid, "interval models support internal symmetries only");
    }
    ops.push_back(matrix_power(model.u, g.u_power));
  }
  return ops;
}

CMatrix interval_boundary_unitary(const IntervalDiracModel& model, const symplectic::LagrangianProjection& p) {
  return -interval_transfer(model, Complex(0.0, 0.0)).adjoint() * p.t;
}

std::vector<SpectralLine> interval_spectrum(const IntervalDiracModel& model, const symplectic::LagrangianProjection& p,
                                            const std::vector<CMatrix>& weight_ops, double lo, double hi,
                                            const TolerancePolicy& tol) {
  if (!(hi > lo)) throw Error(ErrorCode::ConfigInvalid, "empty spectral window");
  if (p.t.rows() != model.channels()) throw Error(ErrorCode::DimensionMismatch, "boundary unitary has wrong size");
  const CMatrix t_adj = p.t.adjoint();
  // Roots are the lambda at which -1 is an eigenvalue of W(lambda) = T* M(lambda).
  auto w_of = [&](double lambda) -> CMatrix { return t_adj * interval_transfer(model, lambda); };
  auto path = [&](double s) -> CMatrix { return w_of(lo + s * (hi - lo)); };

  spectra::TrackingOptions opts;
  const double step = kPi / (8.0 * model.length);
  opts.initial_samples = std::max(3, static_cast<int>(std::ceil((hi - lo) / step)) + 1);
  const spectra::BranchSet bs = spectra::track_branches(path, spectra::SpectrumKind::Unitary, opts, tol);

  // Phase of a given branch near a predicted value.
  // Raw eigenphases are used here: snapping values near -1 onto pi would leave a
  // plateau of width zero_tol around every root and bias the bisection.
  auto branch_phase = [&](double lambda, double predicted) {
    const CVector ev = Eigen::ComplexEigenSolver<CMatrix>(w_of(lambda), false).eigenvalues();
    double best = 0.0, dist = 1e300;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const double d = spectra::wrap_phase(std::arg(ev(i)) - predicted);
      if (std::abs(d) < dist) {
        dist = std::abs(d);
        best = predicted + d;
      }
    }
    return best;
  };

  std::vector<double> roots;
  for (int b = 0; b < bs.branch_count(); ++b) {
    for (int k = 0; k + 1 < bs.sample_count(); ++k) {
      const double pa = bs.values[k](b), pb = bs.values[k + 1](b);
      const long na = static_cast<long>(std::floor((pa - kPi) / kTwoPi));
      const long nb = static_cast<long>(std::floor((pb - kPi) / kTwoPi));
      if (na == nb) continue;
      const double la = lo + bs.times[k] * (hi - lo), lb = lo + bs.times[k + 1] * (hi - lo);
      const long first = std::min(na, nb) + 1, last = std::max(na, nb);
      for (long n = first; n <= last; ++n) {
        const double level = kPi + kTwoPi * double(n);
        const bool rising = pb > pa;
        double l = la, r = lb;
        for (int it = 0; it < 100 && r - l > 1e-14 * std::max(1.0, std::abs(l)); ++it) {
          const double mid = 0.5 * (l + r);
          const double frac = (mid - la) / (lb - la);
          const double ph = branch_phase(mid, pa + frac * (pb - pa));
          if ((ph >= level) == rising) {
            r = mid;
          } else {
            l = mid;
          }
        }
        roots.push_back(0.5 * (l + r));
      }
    }
  }
  std::sort(roots.begin(), roots.end());

  std::vector<SpectralLine> lines;
  const double merge_tol = std::max(1e-8, 10.0 * tol.cluster_tol);
  std::size_t i = 0;
  while (i < roots.size()) {
    std::size_t j = i + 1;
    while (j < roots.size() && roots[j] - roots[j - 1] <= merge_tol) ++j;
    const int mult = static_cast<int>(j - i);
    double lambda = 0.0;
    for (std::size_t q = i; q < j; ++q) lambda += roots[q];
    lambda /= mult;
    if (lambda >= lo && lambda <= hi) {
      const CMatrix a = CMatrix::Identity(model.channels(), model.channels()) + w_of(lambda);
      Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
      const Eigen::Index n = a.cols();
      if (mult > n || svd.singularValues()(n - mult) > 1e-6) {
        throw Error(ErrorCode::RootFindingFailure, "root at lambda=" + std::to_string(lambda) + " has no null space");
      }
      const CMatrix null = svd.matrixV().rightCols(mult);
      SpectralLine line;
      line.lambda = lambda;
      line.multiplicity = mult;
      for (const auto& x : weight_ops) line.weights.push_back((null.adjoint() * x * null).trace());
      lines.push_back(std::move(line));
    }
    i = j;
  }
  return lines;
}

Calderon interval_calderon(const IntervalDiracModel& model, const TolerancePolicy& tol) {
  Calderon c;
  c.k = interval_transfer(model, Complex(0.0, 0.0));
  c.projection = symplectic::make_projection_from_unitary(c.k, tol);
  return c;
}

std::vector<EtaValue> interval_eta(const IntervalDiracModel& model, const symplectic::LagrangianProjection& p,
                                   const std::vector<CMatrix>& weight_ops, const EtaOptions& options,
                                   const TolerancePolicy& tol) {
  auto provider = [&](double w) { return interval_spectrum(model, p, weight_ops, -w, w, tol); };
  return regularized_eta(provider, static_cast<int>(weight_ops.size()), options, tol);
}

IntervalDiracModel theta_model() { return make_interval_model(1.0, CMatrix::Zero(1, 1)); }

symplectic::LagrangianProjection theta_projection(double theta) {
  CMatrix t(1, 1);
  t(0, 0) = -std::polar(1.0, theta);
  return symplectic::make_projection_from_unitary(t);
}

CMatrix default_boundary_operator(int m) {
  CMatrix a = CMatrix::Zero(2 * m, 2 * m);
  a.topRightCorner(m, m) = CMatrix::Identity(m, m);
  a.bottomLeftCorner(m, m) = CMatrix::Identity(m, m);
  return a;
}

symplectic::LagrangianProjection interval_aps_projection(int m, const TolerancePolicy& tol) {
  const auto a = symplectic::make_boundary_operator(default_boundary_operator(m), tol);
  return symplectic::aps_projection(a, CMatrix(2 * m, 0), tol);
}

SwReport sw_identity_check(const IntervalDiracModel& model, const symplectic::LagrangianProjection& p,
                           const symplectic::LagrangianProjection& q, const EtaOptions& options,
                           const TolerancePolicy& tol) {
  const int m = model.channels();
  const auto iso_es = spectra::eig_unitary(model.u, tol);
  std::vector<CMatrix> ops{CMatrix::Identity(m, m), model.u};
  std::vector<CMatrix> bases;
  for (const auto& [b, e] : iso_es.clusters) {
    bases.push_back(iso_es.vectors.middleCols(b, e - b));
    ops.push_back(bases.back() * bases.back().adjoint());
  }
  const auto eta_p = interval_eta(model, p, ops, options, tol);
  const auto eta_q = interval_eta(model, q, ops, options, tol);
  const CMatrix ts = p.t.adjoint() * q.t;

  SwReport r;
  r.lhs = std::exp(kTwoPi * kI * (eta_p[0].reduced - eta_q[0].reduced));
  r.rhs = ts.determinant();
  r.defect = std::abs(r.lhs - r.rhs);
  r.equivariant_lhs = std::exp(kTwoPi * kI * (eta_p[1].reduced - eta_q[1].reduced));
  r.equivariant_rhs = (model.u * ts).determinant();
  for (std::size_t c = 0; c < bases.size(); ++c) {
    const Complex lhs = std::exp(kTwoPi * kI * (eta_p[c + 2].reduced - eta_q[c + 2].reduced));
    const Complex rhs = (bases[c].adjoint() * ts * bases[c]).determinant();
    r.isotypic_defect = std::max(r.isotypic_defect, std::abs(lhs - rhs));
  }
  for (std::size_t j = 0; j < ops.size(); ++j) {
    r.error_estimate = std::max(r.error_estimate, eta_p[j].error_estimate + eta_q[j].error_estimate);
  }
  return r;
}

SplitReport splitting_experiment(const SplitScenario& scenario, const std::vector<GroupElement>& elements,
                                 const EtaOptions& options, const TolerancePolicy& tol) {
  const CircleDiracModel circle = make_circle_model(scenario.v, scenario.u, 1, tol);
  const IntervalDiracModel half = make_interval_model(kPi, circle.v, circle.u, tol);
  const int m = half.channels();
  if (scenario.p.t.rows() != m) throw Error(ErrorCode::DimensionMismatch, "boundary projection has wrong size");
  const std::vector<CMatrix> ops = interval_weight_operators(half, elements);
  for (const auto& x : ops) {
    const auto h = symplectic::diagonal_isometry(x, tol);
    if (!symplectic::commutes_with(h, scenario.p.p, tol)) {
      throw Error(ErrorCode::NotEquivariant, "boundary projection is not invariant under the symmetry");
    }
  }

  SplitReport rep;
  // Both halves have length pi, so they share the Calderon unitary K = e^{-i pi V} in their own frames.
  const Calderon own = interval_calderon(half, tol);
  rep.calderon_plus = own.projection;
  // M- sees (psi(pi), psi(2 pi)) = swap of the shared (psi(0), psi(pi)): graph(K) becomes graph(K*).
  rep.calderon_minus = symplectic::make_projection_from_unitary(own.k.adjoint(), tol);
  // The condition (I - P) b = 0 in the shared frame reads psi(2 pi) = T* psi(pi) in the own frame of M-.
  rep.minus_own_frame = symplectic::flip_orientation(scenario.p, tol);

  const auto complement_minus = symplectic::projection_from_matrix(
      CMatrix::Identity(2 * m, 2 * m) - rep.calderon_minus.p, tol);
  const CMatrix u_tau = complement_minus.t.adjoint() * scenario.p.t;
  const CMatrix v_tau = scenario.p.t.adjoint() * rep.calderon_plus.t;

  const auto eta_circle = circle_eta(circle, elements, options, tol);
  const auto eta_plus = interval_eta(half, scenario.p, ops, options, tol);
  const auto eta_minus = interval_eta(half, rep.minus_own_frame, ops, options, tol);
  for (std::size_t j = 0; j < elements.size(); ++j) {
    SplitTerms s;
    s.eta_circle = eta_circle[j].reduced;
    s.eta_plus = eta_plus[j].reduced;
    s.eta_minus = eta_minus[j].reduced;
    s.tau = winding::double_index(u_tau, v_tau, ops[j], {}, tol);
    s.residual = s.eta_circle - s.eta_plus - s.eta_minus - s.tau;
    s.error_estimate = eta_circle[j].error_estimate + eta_plus[j].error_estimate + eta_minus[j].error_estimate;
    rep.terms.push_back(s);
  }
  return rep;
}

ChainReport dirac_chain(const IntervalDiracModel& model, const CMatrix& t_base, const std::vector<GroupElement>& elements,
                        int branch_window, const TolerancePolicy& tol) {
  const int m = model.channels();
  require_same_dim(model.v, t_base, "base boundary unitary");
  if (branch_window < 1) throw Error(ErrorCode::ConfigInvalid, "branch window must be >= 1");
  const std::vector<CMatrix> ops = interval_weight_operators(model, elements);
  const double len = model.length;

  // U_P(t) = e^{i theta(t)} U_0, so D_P(t) has eigenvalues (spec X_0 + theta(t) + 2 pi k) / L
  // for a fixed Hermitian logarithm X_0 of U_0.
  const auto base = symplectic::make_projection_from_unitary(t_base, tol);
  const CMatrix u0 = interval_boundary_unitary(model, base);
  const auto es = spectra::eig_unitary(u0, tol);
  const CMatrix x0 = es.vectors * es.values.cast<Complex>().asDiagonal() * es.vectors.adjoint();
  const int blocks = 2 * branch_window + 1;
  auto d_of = [x0, m, blocks, branch_window, len](double t) -> CMatrix {
    CMatrix d = CMatrix::Zero(m * blocks, m * blocks);
    for (int b = 0; b < blocks; ++b) {
      const double shift = kTwoPi * t + kTwoPi * double(b - branch_window);
      d.block(b * m, b * m, m, m) = (x0 + shift * CMatrix::Identity(m, m)) / len;
    }
    return d;
  };

  const CMatrix k = interval_transfer(model, Complex(0.0, 0.0));
  auto t_of = [t_base](double t) -> CMatrix { return std::polar(1.0, kTwoPi * t) * t_base; };

  ChainReport rep;
  for (const auto& a : ops) {
    CMatrix h = CMatrix::Zero(m * blocks, m * blocks);
    for (int b = 0; b < blocks; ++b) h.block(b * m, b * m, m, m) = a;
    const auto path = specflow::make_path(d_of, m * blocks, h);
    rep.spectral_flow.push_back(specflow::spectral_flow(path, std::nullopt, tol).value);

    const auto lm = maslov::constant_path(k, a);
    const auto lt = maslov::make_lagrangian_path(t_of, m, a);
    rep.maslov_grid.push_back(maslov::maslov_index(lm, lt, maslov::Mode::Grid, {}, tol));
    rep.maslov_winding.push_back(maslov::maslov_index(lm, lt, maslov::Mode::Winding, {}, tol));

    const auto fwd = winding::make_unitary_path([k, t_of](double t) -> CMatrix { return k.adjoint() * t_of(t); }, m, a);
    const auto bwd = winding::make_unitary_path([k, t_of](double t) -> CMatrix { return t_of(t).adjoint() * k; }, m, a);
    rep.winding.push_back(winding::winding_number(fwd, {}, tol).value);
    rep.winding_reversed.push_back(winding::winding_number(bwd, {}, tol).value);
  }
  return rep;
}

void write_spectrum_csv(std::ostream& out, const std::vector<SpectralLine>& lines) {
  const std::size_t g = lines.empty() ? 0 : lines.front().weights.size();
  out << "lambda";
  for (std::size_t j = 0; j < g; ++j) out << ",re_weight_g" << j << ",im_weight_g" << j;
  out << "\n";
  out.precision(17);
  for (const auto& line : lines) {
    out << line.lambda;
    for (const auto& w : line.weights) out << "," << w.real() << "," << w.imag();
    out << "\n";
  }
}

}  // namespace equiflow::dirac
