#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "equiflow/common.hpp"

namespace equiflow::gen {

// Deterministic random stream: an mt19937_64 engine whose seed is a splitmix64 hash of
// (seed, index). Scenario i of a suite always draws from stream (seed, i), so results do not
// depend on evaluation order or thread count.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t index);

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal();
  int integer(int lo, int hi);  // inclusive
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

CMatrix random_unitary(int n, Stream& rng);
CMatrix random_hermitian(int n, Stream& rng, double scale = 1.0);

// Z_N acting on C^n by h = Q diag(omega^{c_i}) Q*, omega = e^{2 pi i / N}.
struct CyclicAction {
  int order = 1;
  std::vector<int> charges;
  CMatrix basis;  // Q

  int dim() const { return static_cast<int>(charges.size()); }
  CMatrix generator() const;
  CMatrix element(int power) const;
  // Q blockdiag(blocks by charge) Q*; blocks[c] acts on the coordinates with charge c.
  CMatrix assemble(const std::vector<CMatrix>& blocks) const;
  std::vector<int> block_sizes() const;
};

CyclicAction random_cyclic_action(int n, int order, Stream& rng, bool rotate_basis = true);
CyclicAction trivial_action(int n);

CMatrix random_equivariant_hermitian(const CyclicAction& action, Stream& rng, double scale = 1.0);
CMatrix random_equivariant_unitary(const CyclicAction& action, Stream& rng);

// B(t) = Q blockdiag(H0 + t H1 + t^2 H2) Q*: smooth equivariant Hermitian path.
MatrixPath random_hermitian_path(const CyclicAction& action, Stream& rng, double scale = 1.0);

// f(t) = U0 exp(i t K1) exp(i t^2 K2), all factors equivariant; eigenphases sweep several radians.
MatrixPath random_unitary_path(const CyclicAction& action, Stream& rng, double sweep = 3.0);

}  // namespace equiflow::gen
