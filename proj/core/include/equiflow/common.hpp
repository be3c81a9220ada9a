#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace equiflow {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// A reentrant sampler t -> matrix. Paths are parametrised over [0, 1].
using MatrixPath = std::function<CMatrix(double)>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
inline const Complex kI{0.0, 1.0};

enum class ErrorCode {
  NotHermitian,
  NotUnitary,
  NotInvariant,
  BranchCut,
  NoConvergence,
  TrackingAmbiguous,
  NotLagrangian,
  NotEquivariant,
  NotCommuting,
  KernelLagrangianInvalid,
  PartitionFailure,
  DimensionMismatch,
  OffsetExhausted,
  IncompatibleSplitting,
  NotPositive,
  KernelPresent,
  RootFindingFailure,
  ConfigInvalid,
  ComputationFailed,
  UnknownSuite,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Shared numerical thresholds. Every module takes one of these.
struct TolerancePolicy {
  double eig_tol = 1e-12;       // relative eigen-residual bound
  double cluster_tol = 1e-9;    // absolute gap for grouping eigenvalues
  double zero_tol = 1e-9;       // eigenvalue treated as 0 / phase treated as pi
  double quad_rel_tol = 1e-8;   // relative quadrature tolerance
  double commute_tol = 1e-10;   // allowed commutator norm in equivariance checks
  int max_quad_depth = 20;      // adaptive quadrature refinement cap
  int max_track_depth = 30;     // branch-tracking bisection cap
  int max_partition_depth = 30; // grid-partition bisection cap

  void validate() const;
};

// Frobenius norm of the commutator [a, b].
double commutator_norm(const CMatrix& a, const CMatrix& b);

bool is_hermitian(const CMatrix& m, double tol);
bool is_unitary(const CMatrix& u, double tol);
void require_square(const CMatrix& m, const char* what);
void require_same_dim(const CMatrix& a, const CMatrix& b, const char* what);

}  // namespace equiflow
