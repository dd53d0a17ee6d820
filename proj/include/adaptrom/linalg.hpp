#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace adaptrom {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Rows `rows` and columns `cols` of A (index lists into A's dimensions).
SparseMatrix submatrix(const SparseMatrix& A, const std::vector<int>& rows,
                       const std::vector<int>& cols);
/// Selection matrix E with E(k, idx[k]) = 1, size idx.size() x n.
SparseMatrix selection(const std::vector<int>& idx, int n);

/// Saddle matrix [[A, B^T, 0], [B, 0, m], [0, m^T, 0]]; the last row and
/// column pin the pressure mean through a scalar multiplier.
SparseMatrix saddle_matrix(const SparseMatrix& A, const SparseMatrix& B, const Vector& mean);

Vector gather(const Vector& x, const std::vector<int>& idx);
void scatter(const Vector& values, const std::vector<int>& idx, Vector& x);

/// Sparse LU factorization (UMFPACK) of a general square matrix.
class SparseLu {
 public:
  SparseLu();
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;

  /// Throws ErrorKind::factorization when A is singular.
  void factorize(const SparseMatrix& A);
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& B) const;
  int rows() const { return rows_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int rows_ = 0;
};

/// Sparse Cholesky factorization of a symmetric positive definite matrix.
class SparseCholesky {
 public:
  SparseCholesky();
  ~SparseCholesky();
  SparseCholesky(SparseCholesky&&) noexcept;
  SparseCholesky& operator=(SparseCholesky&&) noexcept;

  void factorize(const SparseMatrix& A);
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& B) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace adaptrom
