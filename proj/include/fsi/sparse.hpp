#pragma once

#include "fsi/fem.hpp"

#include <Eigen/SparseLU>

#include <functional>
#include <memory>

namespace fsi {

struct LinearSolveReport {
  double relative_residual = 0.0; // ||A x - b|| / ||b||, measured after the solve
  double pivot_growth = 0.0;      // max |U_ij| / max |A_ij|
  double elapsed_seconds = 0.0;
};

/// Raised when a pivot falls below tolerance; carries the (permuted) pivot index.
class SingularMatrixError : public NumericalError {
public:
  SingularMatrixError(Index pivot, const std::string& what)
      : NumericalError("sparse", what), pivot_(pivot) {}
  Index pivot() const noexcept { return pivot_; }

private:
  Index pivot_;
};

/// Sparse LU with partial pivoting. Factorize once, solve many times.
class SparseLu {
public:
  explicit SparseLu(const SparseMatrix& a);

  /// Solves A x = b and measures the residual. Throws NumericalError if the
  /// relative residual exceeds `tolerance`.
  VectorXd solve(const VectorXd& b, LinearSolveReport* report = nullptr,
                 double tolerance = 1e-10) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

  Index rows() const { return a_.rows(); }
  double pivot_growth() const { return pivot_growth_; }

private:
  SparseMatrix a_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
  double pivot_growth_ = 0.0;
  double factor_seconds_ = 0.0;
};

/// One-shot sparse solve with residual check (<= 1e-10 relative).
std::pair<VectorXd, LinearSolveReport> solve(const SparseMatrix& a, const VectorXd& b);

struct EigenPair {
  double value;
  VectorXd vector; // M-normalized
  int iterations;
  double residual; // ||S x - value M x|| / ||value M x||
};

class EigenIterationError : public NumericalError {
public:
  EigenIterationError(const std::string& what, VectorXd last)
      : NumericalError("sparse", what), last_iterate_(std::move(last)) {}
  const VectorXd& last_iterate() const { return last_iterate_; }

private:
  VectorXd last_iterate_;
};

inline constexpr int kEigenIterationCap = 500;
inline constexpr double kEigenTolerance = 1e-8;

/// Smallest eigenpair of S q = value M q (S symmetric positive
/// semidefinite and nonsingular, M symmetric positive definite) by block
/// inverse iteration with Rayleigh-Ritz on M-orthonormalized vectors.
/// `solve_s` applies S^{-1}; S itself is never needed since S (S^{-1} y) = y.
EigenPair smallest_gen_eig(const std::function<VectorXd(const VectorXd&)>& solve_s,
                           const SparseMatrix& m, int block_size = 6);
EigenPair smallest_gen_eig(const SparseMatrix& s, const SparseMatrix& m);

} // namespace fsi
