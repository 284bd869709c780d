#include "fsi/sparse.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <random>

namespace fsi {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double max_abs(const SparseMatrix& a) {
  double m = 0;
  for (Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

// Exposes the supernodal factors so the diagonal of U and the growth of
// its entries can be inspected.
class InspectableLu : public Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> {
public:
  struct Stats {
    double max_u = 0;
    double min_pivot = std::numeric_limits<double>::infinity();
    Index min_pivot_index = -1;
  };

  Stats stats() const {
    Stats s;
    for (Index j = 0; j < this->cols(); ++j) {
      for (SCMatrix::InnerIterator it(this->m_Lstore, j); it; ++it) {
        if (it.index() > j) continue; // strictly lower part belongs to L
        s.max_u = std::max(s.max_u, std::abs(it.value()));
        if (it.index() == j && std::abs(it.value()) < s.min_pivot) {
          s.min_pivot = std::abs(it.value());
          s.min_pivot_index = j;
        }
      }
      for (typename decltype(this->m_Ustore)::InnerIterator it(this->m_Ustore, j); it; ++it)
        s.max_u = std::max(s.max_u, std::abs(it.value()));
    }
    return s;
  }
};

} // namespace

SparseLu::SparseLu(const SparseMatrix& a) : a_(a) {
  require(a.rows() == a.cols(), "SparseLu: matrix must be square");
  const auto t0 = Clock::now();
  auto lu = std::make_unique<InspectableLu>();
  a_.makeCompressed();
  lu->analyzePattern(a_);
  lu->factorize(a_);
  if (lu->info() != Eigen::Success)
    throw SingularMatrixError(-1, "factorization failed: " + lu->lastErrorMessage());

  const double scale = max_abs(a_);
  const auto s = lu->stats();
  if (!(s.min_pivot > 1e-14 * scale))
    throw SingularMatrixError(s.min_pivot_index,
                              "pivot " + std::to_string(s.min_pivot_index) + " is singular to tolerance (|u_jj| = " +
                                  std::to_string(s.min_pivot) + ")");
  pivot_growth_ = scale > 0 ? s.max_u / scale : 0.0;
  factor_seconds_ = seconds_since(t0);
  lu_ = std::move(lu);
}

VectorXd SparseLu::solve(const VectorXd& b, LinearSolveReport* report, double tolerance) const {
  require(b.size() == a_.rows(), "SparseLu::solve: right-hand side has wrong size");
  const auto t0 = Clock::now();
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    if (report) *report = {0.0, pivot_growth_, seconds_since(t0)};
    return VectorXd::Zero(b.size());
  }
  VectorXd x = lu_->solve(b);
  VectorXd r = b - a_ * x;
  // One step of iterative refinement when it helps.
  if (r.norm() > 1e-14 * bnorm) {
    const VectorXd x2 = x + lu_->solve(r);
    const VectorXd r2 = b - a_ * x2;
    if (r2.norm() < r.norm()) {
      x = x2;
      r = r2;
    }
  }
  const double rel = r.norm() / bnorm;
  if (report) *report = {rel, pivot_growth_, seconds_since(t0) + factor_seconds_};
  if (!(rel <= tolerance))
    throw NumericalError("sparse", "relative residual " + std::to_string(rel) + " exceeds tolerance");
  return x;
}

Eigen::MatrixXd SparseLu::solve(const Eigen::MatrixXd& b) const {
  require(b.rows() == a_.rows(), "SparseLu::solve: right-hand side has wrong size");
  Eigen::MatrixXd x(b.rows(), b.cols());
  for (Index k = 0; k < b.cols(); ++k) x.col(k) = solve(VectorXd(b.col(k)));
  return x;
}

std::pair<VectorXd, LinearSolveReport> solve(const SparseMatrix& a, const VectorXd& b) {
  require(a.rows() == a.cols() && a.rows() == b.size(), "solve: dimension mismatch");
  SparseLu lu(a);
  LinearSolveReport report;
  VectorXd x = lu.solve(b, &report);
  return {std::move(x), report};
}

EigenPair smallest_gen_eig(const std::function<VectorXd(const VectorXd&)>& solve_s,
                           const SparseMatrix& m, int block_size) {
  const Index n = m.rows();
  require(m.cols() == n && n > 0, "smallest_gen_eig: M must be square and nonempty");
  const Index p = std::min<Index>(block_size, n);

  // Fixed seed: results are reproducible run to run.
  std::mt19937_64 rng(20240613);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) x(i, j) = dist(rng);
  x.col(0).setOnes();

  EigenPair best{0.0, VectorXd(), 0, std::numeric_limits<double>::infinity()};
  for (int it = 1; it <= kEigenIterationCap; ++it) {
    const Eigen::MatrixXd mx = m * x;
    Eigen::MatrixXd y(n, p);
    for (Index j = 0; j < p; ++j) y.col(j) = solve_s(VectorXd(mx.col(j)));
    // S y = M x, so the Ritz matrices need no product with S.
    Eigen::MatrixXd sr = y.transpose() * mx;
    sr = 0.5 * (sr + sr.transpose()).eval();
    Eigen::MatrixXd mr = y.transpose() * (m * y);
    mr = 0.5 * (mr + mr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(sr, mr);
    if (ritz.info() != Eigen::Success)
      throw EigenIterationError("Rayleigh-Ritz step failed", y.col(0));

    const Eigen::MatrixXd v = ritz.eigenvectors(); // M_r-orthonormal
    x = y * v;
    const Eigen::MatrixXd sx = mx * v; // S x
    const double theta = ritz.eigenvalues()(0);
    const VectorXd mx0 = m * x.col(0);
    const double res = (sx.col(0) - theta * mx0).norm() / (std::abs(theta) * mx0.norm());
    best = {theta, x.col(0), it, res};
    if (res <= kEigenTolerance) return best;
  }
  throw EigenIterationError("no convergence after " + std::to_string(kEigenIterationCap) +
                                " iterations (residual " + std::to_string(best.residual) + ")",
                            best.vector);
}

EigenPair smallest_gen_eig(const SparseMatrix& s, const SparseMatrix& m) {
  require(s.rows() == s.cols() && s.rows() == m.rows() && m.rows() == m.cols(),
          "smallest_gen_eig: dimension mismatch");
  const SparseLu lu(s);
  return smallest_gen_eig([&](const VectorXd& y) { return lu.solve(y, nullptr, 1e-8); }, m);
}

} // namespace fsi
