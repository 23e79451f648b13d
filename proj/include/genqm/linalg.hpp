#pragma once

// Small numerical kernels used by the eigensolvers and the time stepper.

#include <complex>
#include <cstddef>
#include <vector>

namespace genqm::linalg {

using complex = std::complex<double>;
using CVector = std::vector<complex>;
using RVector = std::vector<double>;

/// Row-major dense complex square matrix.
class DenseMatrix {
 public:
  explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n) {}

  std::size_t size() const { return n_; }
  complex& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const complex& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

 private:
  std::size_t n_;
  CVector data_;
};

/// Householder reduction to upper Hessenberg form, in place (similarity).
void reduce_to_hessenberg(DenseMatrix& a);

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR with
/// Wilkinson shifts and occasional exceptional shifts. Throws
/// ConvergenceFailure if a trailing eigenvalue does not deflate within the
/// iteration cap.
CVector hessenberg_eigenvalues(DenseMatrix h);

/// Hessenberg reduction followed by shifted QR.
CVector dense_eigenvalues(DenseMatrix a);

/// Number of eigenvalues below sigma of the real symmetric tridiagonal matrix
/// with diagonal d and off-diagonal e (Sturm sequence count).
std::size_t sturm_count(const RVector& d, const RVector& e, double sigma);

/// The `count` smallest eigenvalues, ascending, by Sturm bisection.
RVector lowest_eigenvalues(const RVector& d, const RVector& e, std::size_t count);

/// LU factorization with partial pivoting of a tridiagonal matrix.
/// Zero pivots are replaced by `pivot_floor`, which keeps inverse iteration
/// going at an exact eigenvalue.
class TridiagonalLU {
 public:
  TridiagonalLU(CVector sub, CVector diag, CVector sup, double pivot_floor = 0.0);

  /// Overwrites b with the solution of A x = b.
  void solve(CVector& b) const;

 private:
  CVector dl_, d_, du_, du2_;
  std::vector<bool> swapped_;
};

/// Thomas algorithm (no pivoting), factored once and reused.
class ThomasSolver {
 public:
  /// Throws SolverBreakdown naming the row of the first zero pivot.
  ThomasSolver(const CVector& sub, const CVector& diag, const CVector& sup);

  void solve(CVector& b) const;

 private:
  CVector sub_, inv_pivot_, upper_;
};

}  // namespace genqm::linalg
