#include "equiflow/generators.hpp"

#include <algorithm>
#include <cmath>

#include "equiflow/spectra.hpp"

namespace equiflow::gen {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t index) : engine_(splitmix64(splitmix64(seed) ^ index)) {}

double Stream::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

double Stream::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

int Stream::integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

Complex Stream::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex(re, im) / std::sqrt(2.0);
}

CMatrix random_unitary(int n, Stream& rng) {
  CMatrix z(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) z(i, j) = rng.complex_normal();
  }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phases so the distribution is Haar.
  for (int j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

CMatrix random_hermitian(int n, Stream& rng, double scale) {
  CMatrix z(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) z(i, j) = rng.complex_normal();
  }
  return scale * (z + z.adjoint()) / (2.0 * std::sqrt(double(std::max(n, 1))));
}

CMatrix CyclicAction::generator() const { return element(1); }

CMatrix CyclicAction::element(int power) const {
  const int n = dim();
  CVector d(n);
  for (int i = 0; i < n; ++i) {
    const long k = (static_cast<long>(charges[i]) * power) % order;
    d(i) = std::polar(1.0, kTwoPi * double(k) / order);
  }
  return basis * d.asDiagonal() * basis.adjoint();
}

std::vector<int> CyclicAction::block_sizes() const {
  std::vector<int> sizes(order, 0);
  for (int c : charges) ++sizes[c];
  return sizes;
}

CMatrix CyclicAction::assemble(const std::vector<CMatrix>& blocks) const {
  const int n = dim();
  CMatrix m = CMatrix::Zero(n, n);
  // Coordinates are grouped by charge in ascending order.
  std::vector<int> index_of_charge_start(order + 1, 0);
  const auto sizes = block_sizes();
  for (int c = 0; c < order; ++c) index_of_charge_start[c + 1] = index_of_charge_start[c] + sizes[c];
  for (int c = 0; c < order; ++c) {
    if (sizes[c] == 0) continue;
    if (blocks[c].rows() != sizes[c]) throw Error(ErrorCode::DimensionMismatch, "block size differs from charge count");
    m.block(index_of_charge_start[c], index_of_charge_start[c], sizes[c], sizes[c]) = blocks[c];
  }
  return basis * m * basis.adjoint();
}

CyclicAction random_cyclic_action(int n, int order, Stream& rng, bool rotate_basis) {
  CyclicAction a;
  a.order = std::max(order, 1);
  for (int i = 0; i < n; ++i) a.charges.push_back(rng.integer(0, a.order - 1));
  std::sort(a.charges.begin(), a.charges.end());
  a.basis = rotate_basis ? random_unitary(n, rng) : CMatrix::Identity(n, n);
  return a;
}

CyclicAction trivial_action(int n) {
  CyclicAction a;
  a.order = 1;
  a.charges.assign(n, 0);
  a.basis = CMatrix::Identity(n, n);
  return a;
}

CMatrix random_equivariant_hermitian(const CyclicAction& action, Stream& rng, double scale) {
  std::vector<CMatrix> blocks;
  for (int s : action.block_sizes()) blocks.push_back(random_hermitian(s, rng, scale));
  const CMatrix m = action.assemble(blocks);
  return 0.5 * (m + m.adjoint());
}

CMatrix random_equivariant_unitary(const CyclicAction& action, Stream& rng) {
  return spectra::exp_skew(kI * random_equivariant_hermitian(action, rng, kPi));
}

MatrixPath random_hermitian_path(const CyclicAction& action, Stream& rng, double scale) {
  const CMatrix h0 = random_equivariant_hermitian(action, rng, scale);
  const CMatrix h1 = random_equivariant_hermitian(action, rng, 2.0 * scale);
  const CMatrix h2 = random_equivariant_hermitian(action, rng, scale);
  return [h0, h1, h2](double t) -> CMatrix {
    const CMatrix m = h0 + t * h1 + (t * t) * h2;
    return 0.5 * (m + m.adjoint());
  };
}

MatrixPath random_unitary_path(const CyclicAction& action, Stream& rng, double sweep) {
  const CMatrix u0 = random_equivariant_unitary(action, rng);
  const CMatrix k1 = random_equivariant_hermitian(action, rng, sweep);
  const CMatrix k2 = random_equivariant_hermitian(action, rng, 0.5 * sweep);
  const auto e1 = spectra::eig_hermitian(k1);
  const auto e2 = spectra::eig_hermitian(k2);
  return [u0, e1, e2](double t) -> CMatrix {
    auto expo = [](const spectra::EigenSystem& es, double s) {
      CVector d(es.dim());
      for (int i = 0; i < es.dim(); ++i) d(i) = std::polar(1.0, s * es.values(i));
      return CMatrix(es.vectors * d.asDiagonal() * es.vectors.adjoint());
    };
    return u0 * expo(e1, t) * expo(e2, t * t);
  };
}

}  // namespace equiflow::gen
