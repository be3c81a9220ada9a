#include <algorithm>
#include <cmath>
#include <map>

#include "equiflow/dirac_models.hpp"
#include "equiflow/eta_zeta.hpp"
#include "equiflow/generators.hpp"
#include "equiflow/maslov.hpp"
#include "equiflow/specflow.hpp"
#include "equiflow/symplectic.hpp"
#include "equiflow/winding.hpp"
#include "report.hpp"

namespace equiflow::harness::detail {

namespace {

using gen::CyclicAction;
using gen::Stream;

struct SuiteOutput {
  std::vector<CheckResult> checks;
  json diagnostics = json::object();
};

// Per-case deviations, collected in parallel and reduced in index order.
struct CaseOutcome {
  std::vector<double> deviations;
  std::string error;
};

void reduce(std::vector<Check>& checks, const std::vector<CaseOutcome>& outcomes) {
  for (const auto& o : outcomes) {
    if (!o.error.empty()) {
      for (auto& c : checks) c.fail(o.error);
      continue;
    }
    for (std::size_t k = 0; k < checks.size() && k < o.deviations.size(); ++k) checks[k].add(o.deviations[k]);
  }
}

std::vector<CaseOutcome> run_cases(int n, const std::function<std::vector<double>(int)>& body) {
  std::vector<CaseOutcome> out(n);
  parallel_for(n, [&](int i) {
    try {
      out[i].deviations = body(i);
    } catch (const std::exception& e) {
      out[i].error = "case " + std::to_string(i) + ": " + e.what();
    }
  });
  return out;
}

std::vector<CheckResult> results_of(const std::vector<Check>& checks) {
  std::vector<CheckResult> r;
  for (const auto& c : checks) r.push_back(c.result());
  return r;
}

Complex omega(int order, int power = 1) { return std::polar(1.0, kTwoPi * double(power % order) / order); }

double integer_distance(Complex z) { return std::abs(z - Complex(std::round(z.real()), 0.0)); }

// ---- shared corpus of equivariant Hermitian paths --------------------------------------

constexpr int kSfCorpus = 200;

specflow::HermitianPath sf_case(std::uint64_t seed, int i) {
  Stream rng(seed, static_cast<std::uint64_t>(i));
  const int n = rng.integer(2, 8);
  const int order = rng.integer(1, 6);
  const CyclicAction action = gen::random_cyclic_action(n, order, rng);
  return specflow::make_path(gen::random_hermitian_path(action, rng), n, action.generator());
}

SuiteOutput suite_sf_oracle(std::uint64_t seed) {
  std::vector<Check> checks{Check("grid sf = crossing oracle", 1e-8), Check("trivial action gives integers", 1e-9)};
  const auto outcomes = run_cases(kSfCorpus, [&](int i) {
    const auto path = sf_case(seed, i);
    const Complex grid = specflow::spectral_flow(path).value;
    const Complex oracle = specflow::crossing_oracle(path, 65).value;
    const auto plain = specflow::make_path(path.sampler, path.dim);
    return std::vector<double>{std::abs(grid - oracle), integer_distance(specflow::spectral_flow(plain).value)};
  });
  reduce(checks, outcomes);
  SuiteOutput out;
  out.checks = results_of(checks);
  out.diagnostics["paths"] = kSfCorpus;
  return out;
}

SuiteOutput suite_sf_refinement(std::uint64_t seed) {
  std::vector<Check> checks{Check("halving every interval leaves sf unchanged", 1e-9)};
  std::vector<int> sizes(kSfCorpus, 0);
  const auto outcomes = run_cases(kSfCorpus, [&](int i) {
    const auto path = sf_case(seed, i);
    const auto part = specflow::good_partition(path);
    sizes[i] = part.size();
    const Complex a = specflow::spectral_flow(path, part).value;
    const Complex b = specflow::spectral_flow(path, part.refined()).value;
    return std::vector<double>{std::abs(a - b)};
  });
  reduce(checks, outcomes);
  SuiteOutput out;
  out.checks = results_of(checks);
  out.diagnostics["max_partition_size"] = *std::max_element(sizes.begin(), sizes.end());
  return out;
}

SuiteOutput suite_bott_loop(std::uint64_t) {
  std::vector<Check> checks{Check("w_h(-exp(i pi B_k)) = sf_h(B_k)", 1e-8), Check("sf_h(B_k) = Tr(h|V_k)", 1e-8),
                            Check("rank-1 loop returns the generator character exactly", 0.0)};
  json cases = json::array();
  for (int order : {3, 5}) {
    const Complex w = omega(order);
    const std::vector<Complex> plus{omega(order, 1), omega(order, 2)};
    const std::vector<Complex> minus{w, omega(order, 2), omega(order, 3)};
    for (int k = 1; k <= 3; ++k) {
      try {
        const auto loop = specflow::bott_loop(plus, minus, k);
        const Complex sf = specflow::spectral_flow(loop.hermitian).value;
        const auto upath = winding::make_unitary_path(loop.unitary, loop.hermitian.dim, loop.h);
        const Complex wind = winding::winding_number(upath).value;
        checks[0].add(std::abs(sf - wind));
        checks[1].add(std::abs(sf - loop.expected));
        if (k == 1) checks[2].add(std::abs(sf - w));
        cases.push_back({{"order", order}, {"k", k}, {"sf", complex_json(sf)}, {"winding", complex_json(wind)}});
      } catch (const std::exception& e) {
        for (auto& c : checks) c.fail(e.what());
      }
    }
  }
  SuiteOutput out;
  out.checks = results_of(checks);
  out.diagnostics["cases"] = cases;
  return out;
}

SuiteOutput suite_winding_props(std::uint64_t seed) {
  std::vector<Check> checks{Check("reversal antisymmetry", 1e-9), Check("path additivity", 1e-9),
                            Check("constant path gives zero", 0.0), Check("trace-log formula", 1e-6),
                            Check("trivial action gives integers", 1e-9)};
  const auto outcomes = run_cases(100, [&](int i) {
    Stream rng(seed, 10000 + i);
    const int n = rng.integer(2, 6);
    const CyclicAction action = gen::random_cyclic_action(n, rng.integer(1, 6), rng);
    const auto f = winding::make_unitary_path(gen::random_unitary_path(action, rng), n, action.generator());
    const Complex w = winding::winding_number(f).value;
    const Complex wr = winding::winding_number(winding::reverse(f)).value;
    const auto first = winding::make_unitary_path([s = f.sampler](double t) { return s(0.5 * t); }, n, f.actor);
    const auto second = winding::make_unitary_path([s = f.sampler](double t) { return s(0.5 + 0.5 * t); }, n, f.actor);
    const Complex split = winding::winding_number(first).value + winding::winding_number(second).value;
    const Complex wc = winding::winding_number(winding::constant(f.sampler(0.0), f.actor)).value;
    const Complex tl = winding::trace_log_winding(f);
    const Complex wi = winding::winding_number(winding::make_unitary_path(f.sampler, n)).value;
    return std::vector<double>{std::abs(w + wr), std::abs(w - split), std::abs(wc), std::abs(w - tl),
                               integer_distance(wi)};
  });
  reduce(checks, outcomes);
  SuiteOutput out;
  out.checks = results_of(checks);
  out.diagnostics["paths"] = 100;
  return out;
}

SuiteOutput suite_det_multiplicative(std::uint64_t seed) {
  std::vector<Check> checks{Check("det_h(fg) = det_h(f) det_h(g) (relative)", 1e-6)};
  const auto outcomes = run_cases(50, [&](int i) {
    Stream rng(seed, 20000 + i);
    const int n = rng.integer(2, 6);
    const CyclicAction action = gen::random_cyclic_action(n, rng.integer(1, 6), rng);
    const auto f = winding::make_unitary_path(gen::random_unitary_path(action, rng), n, action.generator());
    const auto g = winding::make_unitary_path(gen::random_unitary_path(action, rng), n, action.generator());
    const Complex df = winding::fredholm_det_path(f);
    const Complex dg = winding::fredholm_det_path(g);
    const Complex dfg = winding::fredholm_det_path(winding::product(f, g));
    return std::vector<double>{std::abs(dfg - df * dg) / std::abs(df * dg)};
  });
  reduce(checks, outcomes);
  SuiteOutput out;
  out.checks = results_of(checks);
  return out;
}

// Equivariant loop exp(2 pi i t K) exp(i sin(2 pi t) H) U0 with K of integer spectrum.
MatrixPath random_unitary_loop(const CyclicAction& action, Stream& rng) {
  std::vector<CMatrix> blocks;
  for (int s : action.block_sizes()) {
    if (s == 0) {
      blocks.emplace_back(0, 0);
      continue;
    }
    const CMatrix q = gen::random_unitary(s, rng);
    RVector d(s);
    for (int j = 0; j < s; ++j) d(j) = rng.integer(-2, 2);
    blocks.push_back(q * d.cast<Complex>().asDiagonal() * q.adjoint());
  }
  const auto ek = spectra::eig_hermitian(action.assemble(blocks));
  const auto eh = spectra::eig_hermitian(gen::random_equivariant_hermitian(action, rng, 2.0));
  const CMatrix u0 = gen::random_equivariant_unitary(action, rng);
  return [ek, eh, u0](double t) -> CMatrix {
    auto expo = [](const spectra::EigenSystem& es, double s) {
      CVector d(es.dim());
      for (int i = 0; i < es.dim(); ++i) d(i) = std::polar(1.0, s * es.values(i));
      return CMatrix(es.vectors * d.asDiagonal() * es.vectors.adjoint());
    };
    return expo(ek, kTwoPi * t) * expo(eh, std::sin(kTwoPi * t)) * u0;
  };
}

SuiteOutput suite_maslov_winding(std::uint64_t seed) {
  std::vector<Check> checks{Check("Maslov grid mode = winding mode", 1e-8),
                            Check("w_h(T*S) = sum_chi chi w(a T*S | chi) on loops", 1e-8)};
  const auto outcomes = run_cases(100, [&](int i) {
    Stream rng(seed, 30000 + i);
    const int n = rng.integer(1, 6);
    const int order = rng.integer(1, 6);
    const CyclicAction action = gen::random_cyclic_action(n, order, rng);
    const bool loops = (i % 2) == 1;
    const MatrixPath ts = loops ? random_unitary_loop(action, rng) : gen::random_unitary_path(action, rng);
    const MatrixPath ss = loops ? random_unitary_loop(action, rng) : gen::random_unitary_path(action, rng);
    const CMatrix a = action.generator();
    const auto l1 = maslov::make_lagrangian_path(ts, n, a);
    const auto l2 = maslov::make_lagrangian_path(ss, n, a);
    const Complex grid = maslov::maslov_index(l1, l2, maslov::Mode::Grid);
    const Complex wind = maslov::maslov_index(l1, l2, maslov::Mode::Winding);
    double iso = 0.0;
    if (loops) {
      // Restrict a T*S to each charge sector; there a acts by the scalar chi.
      Complex sum(0.0, 0.0);
      int start = 0;
      const auto sizes = action.block_sizes();
      for (int c = 0; c < order; ++c) {
        if (sizes[c] == 0) continue;
        const CMatrix b = action.basis.middleCols(start, sizes[c]);
        start += sizes[c];
        const Complex chi = omega(order, c);
        auto restricted = [b, a, ts, ss](double t) -> CMatrix {
          return b.adjoint() * a * ts(t).adjoint() * ss(t) * b;
        };
        sum += chi * winding::winding_number(winding::make_unitary_path(restricted, sizes[c])).value;
      }
      iso = std::abs(wind - sum);
    }
    return std::vector<double>{std::abs(grid - wind), iso};
  });
  reduce(checks, outcomes);
  SuiteOutput out;
  out.checks = results_of(checks);
  out.diagnostics["pairs"] = 100;
  out.diagnostics["loop_pairs"] = 50;
  return out;
}

// Equivariant path E(t) whose value at t = 0 has an exact eigenvalue -1.
MatrixPath path_through_minus_one(const CyclicAction& action, Stream& rng) {
  std::vector<RVector> start, rate;
  bool placed = false;
  for (int s : action.block_sizes()) {
    RVector a(s), r(s);
    for (int j = 0; j < s; ++j) {
      a(j) = rng.uniform(-3.0, 3.0);
      r(j) = rng.uniform(-4.0, 4.0);
    }
    if (s > 0 && !placed) {
      a(0) = kPi;
      placed = true;
    }
    start.push_back(a);
    rate.push_back(r);
  }
  return [action, start, rate](double t) -> CMatrix {
    std::vector<CMatrix> blocks;
    for (std::size_t c = 0; c < start.size(); ++c) {
      CVector d(start[c].size());
      for (Eigen::Index j = 0; j < d.size(); ++j) d(j) = std::polar(1.0, start[c](j) + t * rate[c](j));
      blocks.push_back(d.asDiagonal());
    }
    return action.assemble(blocks);
  };
}

SuiteOutput suite_triple_symmetry(std::uint64_t seed) {
  std::vector<Check> checks{Check("triple index = Mas(L0,L1) + Mas(L1,L2) - Mas(L0,L2)", 1e-8),
                            Check("tau(Q,P,N) = -tau(P,Q,N) + tau(T*S, (T*S)^-1)", 1e-8),
                            Check("tau(P,N,Q) = -tau(P,Q,N) + tau(S*R, (S*R)^-1)", 1e-8),
                            Check("tau(N,Q,P) relation", 1e-8),
                            Check("corollary cases are exactly zero", 0.0)};
  std::vector<int> nontrivial(50, 0);
  const auto outcomes = run_cases(50, [&](int i) {
    Stream rng(seed, 40000 + i);
    const int n = rng.integer(1, 5);
    const CyclicAction action = gen::random_cyclic_action(n, rng.integer(1, 6), rng);
    const CMatrix a = action.generator();
    const MatrixPath tp = gen::random_unitary_path(action, rng);
    MatrixPath sp = gen::random_unitary_path(action, rng);
    const MatrixPath rp = gen::random_unitary_path(action, rng);
    if (i % 2 == 1) {
      // T*S starts with an exact -1 eigenvalue, which makes the relations non-trivial.
      const MatrixPath e = path_through_minus_one(action, rng);
      sp = [tp, e](double t) -> CMatrix { return tp(t) * e(t); };
    }
    const auto T = maslov::make_lagrangian_path(tp, n, a);
    const auto S = maslov::make_lagrangian_path(sp, n, a);
    const auto R = maslov::make_lagrangian_path(rp, n, a);
    auto rel = [&](const maslov::LagrangianPath& x, const maslov::LagrangianPath& y) {
      return winding::relative_double_index(maslov::relative_unitary(x, y), maslov::relative_unitary(y, x));
    };
    const Complex pqn = maslov::triple_index_path(T, S, R);
    const Complex mas = maslov::maslov_index(T, S, maslov::Mode::Grid) + maslov::maslov_index(S, R, maslov::Mode::Grid) -
                        maslov::maslov_index(T, R, maslov::Mode::Grid);
    if (std::abs(rel(T, S)) > 0.5 || std::abs(rel(S, R)) > 0.5) nontrivial[i] = 1;
    const Complex r1 = maslov::triple_index_path(S, T, R) + pqn - rel(T, S);
    const Complex r2 = maslov::triple_index_path(T, R, S) + pqn - rel(S, R);
    const Complex r3 = maslov::triple_index_path(R, S, T) + pqn - (rel(T, S) + rel(S, R) - rel(T, R));
    // Corollary special cases, for paths and for the static index at t = 0.
    const auto h = symplectic::diagonal_isometry(a);
    const auto p0 = symplectic::make_projection_from_unitary(tp(0.0));
    const auto q0 = symplectic::make_projection_from_unitary(sp(0.0));
    const auto n0 = symplectic::make_projection_from_unitary(rp(0.0));
    double zero = std::abs(maslov::triple_index_path(T, T, R)) + std::abs(maslov::triple_index_path(T, S, S)) +
                  std::abs(maslov::triple_index_path(T, T, T)) + std::abs(maslov::triple_index_static(p0, p0, n0, h)) +
                  std::abs(maslov::triple_index_static(p0, p0, p0, h));
    // The static index needs S*S = I to act as -I on ker(T*S + I), so (P, Q, Q) is only
    // defined when T*S has no eigenvalue -1.
    if (i % 2 == 0) zero += std::abs(maslov::triple_index_static(p0, q0, q0, h));
    return std::vector<double>{std::abs(pqn - mas), std::abs(r1), std::abs(r2), std::abs(r3), zero};
  });
  reduce(checks, outcomes);
  SuiteOutput out;
  out.checks = results_of(checks);
  out.diagnostics["triples"] = 50;
  // Triples where the correction terms of the relations are nonzero.
  out.diagnostics["nontrivial_relation_cases"] = std::count(nontrivial.begin(), nontrivial.end(), 1);
  return out;
}

CMatrix random_invertible(const CyclicAction& action, Stream& rng, double gap) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const CMatrix d = gen::random_equivariant_hermitian(action, rng, 3.0);
    const auto es = spectra::eig_hermitian(d);
    if (es.values.cwiseAbs().minCoeff() >= gap) return d;
  }
  throw Error(ErrorCode::ComputationFailed, "could not draw an invertible operator");
}

SuiteOutput suite_zeta_det(std::uint64_t seed) {
  std::vector<Check> checks{Check("zeta determinant = det(D) for h = I (relative)", 1e-10),
                            Check("formula route = eigenvalue-product route (relative)", 1e-10)};
  const auto outcomes = run_cases(100, [&](int i) {
    Stream rng(seed, 50000 + i);
    const int n = rng.integer(2, 8);
    if (i < 50) {
      const CMatrix d = random_invertible(gen::trivial_action(n), rng, 0.05);
      const auto op = eta_zeta::make_operator(d);
      const Complex det = d.determinant();
      return std::vector<double>{std::abs(eta_zeta::zeta_determinant(op) - det) / std::abs(det), 0.0};
    }
    const CyclicAction action = gen::random_cyclic_action(n, rng.integer(2, 6), rng);
    const auto op = eta_zeta::make_operator(random_invertible(action, rng, 0.05), action.generator());
    const Complex a = eta_zeta::zeta_determinant(op);
    const Complex b = eta_zeta::zeta_determinant_product(op);
    return std::vector<double>{0.0, std::abs(a - b) / std::abs(b)};
  });
  std::vector<CaseOutcome> first(outcomes.begin(), outcomes.begin() + 50);
  std::vector<CaseOutcome> second(outcomes.begin() + 50, outcomes.end());
  std::vector<Check> c0{checks[0]}, c1{checks[1]};
  reduce(c0, first);
  for (auto& o : second) {
    if (o.deviations.size() == 2) o.deviations = {o.deviations[1]};
  }
  reduce(c1, second);
  SuiteOutput out;
  out.checks = {c0[0].result(), c1[0].result()};
  return out;
}

SuiteOutput suite_getzler(std::uint64_t seed) {
  std::vector<Check> checks{Check("Getzler formula = spectral flow", 1e-6),
                            Check("d/dt truncated eta = -2 alpha_eps(D') (relative)", 1e-5)};
  const auto flows = run_cases(kSfCorpus, [&](int i) {
    const auto path = sf_case(seed, i);
    const Complex g = eta_zeta::getzler_spectral_flow(path, 1.0).value;
    const Complex s = specflow::spectral_flow(path).value;
    return std::vector<double>{std::abs(g - s)};
  });
  std::vector<Check> c0{checks[0]}, c1{checks[1]};
  reduce(c0, flows);
  const auto grads = run_cases(20, [&](int i) {
    Stream rng(seed, 60000 + i);
    const auto path = sf_case(seed, i);
    const double eps = rng.uniform(0.5, 2.0);
    // Keep the sample point away from zero crossings, where the truncated eta jumps.
    double t = 0.5;
    for (int attempt = 0; attempt < 50; ++attempt) {
      t = rng.uniform(0.05, 0.95);
      const auto es = spectra::eig_hermitian(path.sampler(t));
      if (es.values.cwiseAbs().minCoeff() > 0.05) break;
    }
    const double d = 1e-3;
    auto eta_at = [&](double s) {
      return eta_zeta::truncated_eta(eta_zeta::make_operator(path.sampler(s), path.h), eps);
    };
    const Complex fd = (-eta_at(t + 2 * d) + 8.0 * eta_at(t + d) - 8.0 * eta_at(t - d) + eta_at(t - 2 * d)) / (12.0 * d);
    const Complex an = eta_zeta::truncated_eta_derivative(path, t, eps);
    return std::vector<double>{std::abs(fd - an) / std::max(std::abs(an), 1e-12)};
  });
  reduce(c1, grads);
  SuiteOutput out;
  out.checks = {c0[0].result(), c1[0].result()};
  return out;
}

SuiteOutput suite_circle_eta(std::uint64_t) {
  std::vector<Check> checks{Check("circle beta = 0.25, trivial action -> 0.5", 1e-3),
                            Check("circle rotation character omega -> 1 + i/sqrt(3)", 1e-3),
                            Check("interval theta-model -> 1 - theta/pi", 1e-3)};
  json diag = json::object();
  try {
    CMatrix v(1, 1);
    v(0, 0) = 0.25;
    const auto model = dirac::make_circle_model(v, CMatrix(), 3);
    for (auto mode : {dirac::Regularization::Average, dirac::Regularization::Abel}) {
      dirac::EtaOptions opts;
      opts.mode = mode;
      opts.cutoff = mode == dirac::Regularization::Abel ? 50.0 : 200.0;
      const auto eta = dirac::circle_eta(model, {{0, 0}, {0, 1}}, opts);
      checks[0].add(std::abs(eta[0].eta - 0.5));
      checks[1].add(std::abs(eta[1].eta - Complex(1.0, 1.0 / std::sqrt(3.0))));
      const std::string key = mode == dirac::Regularization::Abel ? "abel" : "average";
      diag[key] = {{"trivial", complex_json(eta[0].eta)}, {"rotation", complex_json(eta[1].eta)}};
    }
    for (double theta : {0.5 * kPi, kPi, 1.5 * kPi}) {
      const auto eta = dirac::interval_eta(dirac::theta_model(), dirac::theta_projection(theta), {CMatrix::Identity(1, 1)});
      checks[2].add(std::abs(eta[0].eta - (1.0 - theta / kPi)));
    }
  } catch (const std::exception& e) {
    for (auto& c : checks) c.fail(e.what());
  }
  SuiteOutput out;
  out.checks = results_of(checks);
  out.diagnostics = diag;
  return out;
}

SuiteOutput suite_sw_identity(std::uint64_t seed) {
  std::vector<Check> checks{Check("m=1 closed-form pair", 1e-3), Check("seeded m=2 pairs", 1e-3),
                            Check("seeded m=2 pairs, per isotypic component", 1e-3)};
  try {
    const auto r = dirac::sw_identity_check(dirac::theta_model(), dirac::theta_projection(0.5 * kPi),
                                            dirac::theta_projection(kPi));
    checks[0].add(r.defect);
  } catch (const std::exception& e) {
    checks[0].fail(e.what());
  }
  const auto outcomes = run_cases(10, [&](int i) {
    Stream rng(seed, 70000 + i);
    const CyclicAction action = gen::random_cyclic_action(2, rng.integer(2, 6), rng);
    const auto model = dirac::make_interval_model(rng.uniform(0.5, 2.0), gen::random_equivariant_hermitian(action, rng, 2.0),
                                                  action.generator());
    const auto p = symplectic::make_projection_from_unitary(gen::random_equivariant_unitary(action, rng));
    const auto q = symplectic::make_projection_from_unitary(gen::random_equivariant_unitary(action, rng));
    const auto r = dirac::sw_identity_check(model, p, q);
    return std::vector<double>{r.defect, r.isotypic_defect};
  });
  std::vector<Check> rest{checks[1], checks[2]};
  reduce(rest, outcomes);
  SuiteOutput out;
  out.checks = {checks[0].result(), rest[0].result(), rest[1].result()};
  return out;
}

SuiteOutput suite_split(std::uint64_t seed) {
  std::vector<Check> checks{Check("baseline m=1, beta=0.25", 5e-3), Check("seeded scenarios", 5e-3)};
  json cases = json::array();
  try {
    CMatrix v(1, 1);
    v(0, 0) = 0.25;
    dirac::SplitScenario sc;
    sc.v = v;
    sc.u = CMatrix::Identity(1, 1);
    sc.p = dirac::interval_calderon(dirac::make_interval_model(kPi, v)).projection;
    const auto rep = dirac::splitting_experiment(sc, {{0, 0}});
    checks[0].add(std::abs(rep.terms[0].residual));
  } catch (const std::exception& e) {
    checks[0].fail(e.what());
  }
  std::vector<json> per_case(5);
  const auto outcomes = run_cases(5, [&](int i) {
    Stream rng(seed, 80000 + i);
    // The last two scenarios carry two channels with distinct nontrivial characters.
    const int m = i >= 3 ? 2 : rng.integer(1, 2);
    CyclicAction action = gen::random_cyclic_action(m, i >= 3 ? (i == 3 ? 3 : 5) : rng.integer(1, 4), rng);
    if (i >= 3) action.charges = {1, 2};
    dirac::SplitScenario sc;
    sc.v = gen::random_equivariant_hermitian(action, rng, 1.5);
    sc.u = action.generator();
    sc.p = symplectic::make_projection_from_unitary(gen::random_equivariant_unitary(action, rng));
    const auto rep = dirac::splitting_experiment(sc, {{0, 0}, {1, 0}});
    double worst = 0.0;
    json terms = json::array();
    for (const auto& t : rep.terms) {
      worst = std::max(worst, std::abs(t.residual));
      terms.push_back({{"eta_circle", complex_json(t.eta_circle)}, {"eta_plus", complex_json(t.eta_plus)},
                       {"eta_minus", complex_json(t.eta_minus)}, {"tau", complex_json(t.tau)},
                       {"residual", std::abs(t.residual)}});
    }
    per_case[i] = terms;
    return std::vector<double>{worst};
  });
  std::vector<Check> rest{checks[1]};
  reduce(rest, outcomes);
  for (auto& c : per_case) cases.push_back(c);
  SuiteOutput out;
  out.checks = {checks[0].result(), rest[0].result()};
  out.diagnostics["scenarios"] = cases;
  return out;
}

SuiteOutput suite_dirac_chain(std::uint64_t seed) {
  std::vector<Check> checks{Check("sf = Mas (grid)", 1e-6), Check("sf = Mas (winding)", 1e-6),
                            Check("sf = w_h(K* T(t))", 1e-6), Check("sf = Tr(h) for one full turn", 1e-6),
                            Check("w_h(T(t)* K) = -sf", 1e-6)};
  json cases = json::array();
  auto run = [&](const dirac::IntervalDiracModel& model, const CMatrix& t_base,
                 const std::vector<dirac::GroupElement>& elements) {
    const auto rep = dirac::dirac_chain(model, t_base, elements);
    for (std::size_t j = 0; j < elements.size(); ++j) {
      const Complex sf = rep.spectral_flow[j];
      checks[0].add(std::abs(sf - rep.maslov_grid[j]));
      checks[1].add(std::abs(sf - rep.maslov_winding[j]));
      checks[2].add(std::abs(sf - rep.winding[j]));
      checks[3].add(std::abs(sf - dirac::matrix_power(model.u, elements[j].u_power).trace()));
      checks[4].add(std::abs(sf + rep.winding_reversed[j]));
      cases.push_back({{"channels", model.channels()}, {"u_power", elements[j].u_power}, {"sf", complex_json(sf)}});
    }
  };
  try {
    CMatrix u(1, 1);
    u(0, 0) = omega(5);
    run(dirac::make_interval_model(1.0, CMatrix::Zero(1, 1), u), -CMatrix::Identity(1, 1), {{0, 0}, {1, 0}, {2, 0}});
    Stream rng(seed, 90000);
    CyclicAction action = gen::random_cyclic_action(2, 3, rng);
    action.charges = {0, 1};
    run(dirac::make_interval_model(1.5, gen::random_equivariant_hermitian(action, rng), action.generator()),
        gen::random_equivariant_unitary(action, rng), {{0, 0}, {1, 0}});
  } catch (const std::exception& e) {
    for (auto& c : checks) c.fail(e.what());
  }
  SuiteOutput out;
  out.checks = results_of(checks);
  out.diagnostics["cases"] = cases;
  return out;
}

double lagrangian_error(const symplectic::LagrangianProjection& p) {
  const double idem = (p.p * p.p - p.p).norm();
  const double herm = (p.p - p.p.adjoint()).norm();
  return std::max({symplectic::lagrangian_defect(p.p), idem, herm});
}

SuiteOutput suite_structural(std::uint64_t seed) {
  std::vector<Check> checks{Check("constructed projections are Lagrangian", 1e-12),
                            Check("eta Mellin transform at s = 1, 2 (relative)", 1e-6),
                            Check("zeta Mellin transform at s = 1, 2 (relative)", 1e-6),
                            Check("truncated eta quadrature = closed form (relative)", 1e-7),
                            Check("eta_log_defect lies in the character lattice", 1e-6)};
  const auto outcomes = run_cases(50, [&](int i) {
    Stream rng(seed, 100000 + i);
    const int n = rng.integer(1, 4);
    const CyclicAction action = gen::random_cyclic_action(n, rng.integer(1, 6), rng);
    // Projections produced by every construction in the library.
    double lag = 0.0;
    const auto p = symplectic::make_projection_from_unitary(gen::random_unitary(n, rng));
    lag = std::max(lag, lagrangian_error(p));
    lag = std::max(lag, lagrangian_error(symplectic::flip_orientation(p)));
    lag = std::max(lag, lagrangian_error(symplectic::projection_from_matrix(CMatrix::Identity(2 * n, 2 * n) - p.p)));
    const auto model = dirac::make_interval_model(rng.uniform(0.5, 3.0), gen::random_hermitian(n, rng, 2.0));
    lag = std::max(lag, lagrangian_error(dirac::interval_calderon(model).projection));
    lag = std::max(lag, lagrangian_error(dirac::interval_aps_projection(n)));
    lag = std::max(lag, lagrangian_error(dirac::theta_projection(rng.uniform(0.0, kTwoPi))));

    // Mellin checks; deviations are relative to the absolute eigen-sum.
    const int dim = rng.integer(2, 6);
    const auto act = gen::random_cyclic_action(dim, rng.integer(1, 6), rng);
    const auto op = eta_zeta::make_operator(random_invertible(act, rng, 0.2), act.generator());
    double eta_err = 0.0, zeta_err = 0.0;
    const CMatrix x = gen::random_equivariant_hermitian(act, rng);
    const auto pos = eta_zeta::make_operator(x * x + 0.2 * CMatrix::Identity(dim, dim), act.generator());
    for (double s : {1.0, 2.0}) {
      double scale = 0.0, zscale = 0.0;
      for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
        scale += std::abs(op.cluster_weights[c]) * std::pow(std::abs(op.cluster_values[c]), -s);
      }
      for (std::size_t c = 0; c < pos.cluster_values.size(); ++c) {
        zscale += std::abs(pos.cluster_weights[c]) * std::pow(pos.cluster_values[c], -s);
      }
      eta_err = std::max(eta_err, std::abs(eta_zeta::eta_mellin(op, s) - eta_zeta::eta(op, s)) / scale);
      zeta_err = std::max(zeta_err, std::abs(eta_zeta::zeta_mellin(pos, s) - eta_zeta::zeta(pos, s)) / zscale);
    }
    const double eps = rng.uniform(0.1, 2.0);
    double tscale = 0.0;
    for (std::size_t c = 0; c < op.cluster_values.size(); ++c) {
      tscale += std::abs(op.cluster_weights[c]) * std::erfc(std::sqrt(eps) * std::abs(op.cluster_values[c]));
    }
    const double trunc_err =
        std::abs(eta_zeta::truncated_eta_quadrature(op, eps) - eta_zeta::truncated_eta(op, eps)) / std::max(tscale, 1e-300);

    // The log defect must lie in the character lattice.
    const CMatrix d0 = random_invertible(act, rng, 0.05);
    const CMatrix d1 = random_invertible(act, rng, 0.05);
    const auto fit = eta_zeta::lattice_fit(
        [&](const CMatrix& h) { return eta_zeta::eta_log_defect(d0, d1, h).defect; }, act.generator());
    return std::vector<double>{lag, eta_err, zeta_err, trunc_err, fit.residual};
  });
  reduce(checks, outcomes);
  SuiteOutput out;
  out.checks = results_of(checks);
  return out;
}

struct SuiteEntry {
  SuiteInfo info;
  std::function<SuiteOutput(std::uint64_t)> run;
};

const std::vector<SuiteEntry>& registry() {
  static const std::vector<SuiteEntry> r{
      {{"sf_oracle", 1, "grid-partition spectral flow vs branch-tracking crossing oracle, 200 paths"}, suite_sf_oracle},
      {{"sf_refinement", 2, "spectral flow unchanged when every partition interval is halved"}, suite_sf_refinement},
      {{"bott_loop", 3, "winding of -exp(i pi B_k) equals sf of the Bott loop B_k"}, suite_bott_loop},
      {{"winding_props", 4, "reversal, additivity, constant paths and trace-log formula"}, suite_winding_props},
      {{"det_multiplicative", 5, "multiplicativity of the equivariant Fredholm determinant"}, suite_det_multiplicative},
      {{"maslov_winding", 6, "Maslov index grid mode vs winding mode"}, suite_maslov_winding},
      {{"triple_symmetry", 7, "triple index decomposition, symmetry relations, degenerate cases"}, suite_triple_symmetry},
      {{"zeta_det", 8, "zeta-regularized determinant vs det and eigenvalue product"}, suite_zeta_det},
      {{"getzler", 9, "Getzler's formula vs spectral flow; eta-form gradient check"}, suite_getzler},
      {{"circle_eta", 10, "closed-form eta invariants of circle and interval models"}, suite_circle_eta},
      {{"sw_identity", 11, "exponentiated eta identity exp(2 pi i (eta_P - eta_Q)) = det(T*S)"}, suite_sw_identity},
      {{"split", 12, "eta splitting formula on the circle cut into two intervals"}, suite_split},
      {{"dirac_chain", 13, "sf = Maslov = winding for a rotating interval boundary condition"}, suite_dirac_chain},
      {{"structural", 14, "Lagrangian invariants, Mellin checks, lattice-valued log defect"}, suite_structural},
  };
  return r;
}

}  // namespace

const std::vector<SuiteInfo>& suite_infos() {
  static const std::vector<SuiteInfo> infos = [] {
    std::vector<SuiteInfo> v;
    for (const auto& e : registry()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

RunReport run_suite(const std::string& name, std::uint64_t seed) {
  for (const auto& e : registry()) {
    if (e.info.name != name) continue;
    SuiteOutput out = e.run(seed);
    json config = {{"kind", "verify"}, {"suite", name}, {"seed", seed}};
    out.diagnostics["criterion"] = e.info.criterion;
    return finish_report("verify", config, {}, out.checks, out.diagnostics);
  }
  throw Error(ErrorCode::UnknownSuite, "unknown suite '" + name + "'");
}

}  // namespace equiflow::harness::detail
