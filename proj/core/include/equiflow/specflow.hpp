#pragma once

#include <optional>
#include <vector>

#include "equiflow/common.hpp"

namespace equiflow::specflow {

struct HermitianPath {
  int dim = 0;
  MatrixPath sampler;
  CMatrix h;  // symmetry; identity when trivial
};

HermitianPath make_path(MatrixPath sampler, int dim, CMatrix h = CMatrix());

struct IntervalCertificate {
  double level = 0.0;         // a_j
  double distance = 0.0;      // min distance of sampled spectra to a_j
  double lipschitz = 0.0;     // Lambda_j
  double width = 0.0;         // t_j - t_{j-1}
  double margin() const { return distance - lipschitz * width; }  // > 0 when certified
};

struct GridPartition {
  std::vector<double> nodes;                  // 0 = t_0 < ... < t_m = 1
  std::vector<IntervalCertificate> intervals; // one per [t_{j-1}, t_j]

  int size() const { return static_cast<int>(intervals.size()); }
  // Halves every interval, keeping each level (still certified on sub-intervals).
  GridPartition refined() const;
};

struct Crossing {
  double time = 0.0;
  int direction = 0;       // +1 upward through 0, -1 downward
  int cluster_dim = 1;
  Complex weight{0.0, 0.0};
};

struct FlowResult {
  Complex value{0.0, 0.0};
  std::vector<Complex> contributions;
  std::vector<Crossing> crossings;
  GridPartition partition;
};

struct PartitionOptions {
  int initial_intervals = 8;
};

GridPartition good_partition(const HermitianPath& path, const TolerancePolicy& tol = {},
                             const PartitionOptions& options = {});

FlowResult spectral_flow(const HermitianPath& path, const std::optional<GridPartition>& partition = std::nullopt,
                         const TolerancePolicy& tol = {});

FlowResult crossing_oracle(const HermitianPath& path, int samples = 65, const TolerancePolicy& tol = {});

// Concatenation f * g: f on [0, 1/2], g on [1/2, 1].
HermitianPath concatenate(const HermitianPath& f, const HermitianPath& g);
HermitianPath reverse(const HermitianPath& f);

struct BottLoop {
  HermitianPath hermitian;  // B_k(t) = P+ - P- + 2t P_k
  MatrixPath unitary;       // W(t) = -exp(i pi B_k(t))
  CMatrix h;                // diagonal action
  Complex expected{0.0, 0.0};  // Tr(h | V_k)
};

// Diagonal Bott loop on C^{p + q}: P+ onto the first p coordinates (characters plus_chars),
// P- onto the last q (characters minus_chars); P_k projects onto the first k coordinates of
// the negative block. Requires k <= q.
BottLoop bott_loop(const std::vector<Complex>& plus_chars, const std::vector<Complex>& minus_chars, int k);

}  // namespace equiflow::specflow
