#include "adaptrom/linalg.hpp"

#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/UmfPackSupport>

#include "adaptrom/error.hpp"

namespace adaptrom {

SparseMatrix selection(const std::vector<int>& idx, int n) {
  SparseMatrix E(static_cast<int>(idx.size()), n);
  std::vector<Triplet> t;
  t.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) t.emplace_back(static_cast<int>(k), idx[k], 1.0);
  E.setFromTriplets(t.begin(), t.end());
  return E;
}

SparseMatrix submatrix(const SparseMatrix& A, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  SparseMatrix R = selection(rows, static_cast<int>(A.rows()));
  SparseMatrix C = selection(cols, static_cast<int>(A.cols()));
  SparseMatrix out = R * A * C.transpose();
  out.makeCompressed();
  return out;
}

SparseMatrix saddle_matrix(const SparseMatrix& A, const SparseMatrix& B, const Vector& mean) {
  const int nv = static_cast<int>(A.rows());
  const int np = static_cast<int>(B.rows());
  ADAPTROM_REQUIRE(A.cols() == nv && B.cols() == nv && mean.size() == np,
                   ErrorKind::dimension_mismatch, "saddle blocks do not fit together");
  std::vector<Triplet> t;
  t.reserve(A.nonZeros() + 2 * B.nonZeros() + 2 * np);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
      t.emplace_back(nv + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), nv + it.row(), it.value());
    }
  }
  for (int k = 0; k < np; ++k) {
    t.emplace_back(nv + k, nv + np, mean[k]);
    t.emplace_back(nv + np, nv + k, mean[k]);
  }
  SparseMatrix K(nv + np + 1, nv + np + 1);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

Vector gather(const Vector& x, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = x[idx[k]];
  return out;
}

void scatter(const Vector& values, const std::vector<int>& idx, Vector& x) {
  for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = values[k];
}

struct SparseLu::Impl {
  SparseMatrix matrix;  // UmfPackLU keeps a reference to its input
  Eigen::UmfPackLU<SparseMatrix> lu;
};

SparseLu::SparseLu() : impl_(std::make_unique<Impl>()) {}
SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

void SparseLu::factorize(const SparseMatrix& A) {
  rows_ = static_cast<int>(A.rows());
  impl_->matrix = A;
  impl_->matrix.makeCompressed();
  // finite element saddle systems have a symmetric pattern
  impl_->lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
  impl_->lu.compute(impl_->matrix);
  // determinant under/overflow warnings are harmless for large systems
  const int code = impl_->lu.umfpackFactorizeReturncode();
  ADAPTROM_REQUIRE(code == UMFPACK_OK || code == UMFPACK_WARNING_determinant_underflow ||
                       code == UMFPACK_WARNING_determinant_overflow,
                   ErrorKind::factorization,
                   "sparse LU factorization failed (UMFPACK status " + std::to_string(code) + ")");
}

Vector SparseLu::solve(const Vector& b) const {
  Vector x = impl_->lu.solve(b);
  ADAPTROM_REQUIRE(x.allFinite(), ErrorKind::factorization, "sparse LU solve produced non-finite values");
  // guards against a broken BLAS underneath the factorization
  const double res = (impl_->matrix * x - b).norm();
  ADAPTROM_REQUIRE(res <= 1e-8 * (b.norm() + 1e-300) || res <= 1e-14,
                   ErrorKind::factorization,
                   "sparse LU solve is inaccurate (relative residual " +
                       std::to_string(res / b.norm()) + ")");
  return x;
}

Matrix SparseLu::solve(const Matrix& B) const {
  Matrix X(B.rows(), B.cols());
  for (int k = 0; k < B.cols(); ++k) X.col(k) = solve(Vector(B.col(k)));
  return X;
}

struct SparseCholesky::Impl {
  Eigen::SimplicialLLT<SparseMatrix> llt;
};

SparseCholesky::SparseCholesky() : impl_(std::make_unique<Impl>()) {}
SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

void SparseCholesky::factorize(const SparseMatrix& A) {
  impl_->llt.compute(A);
  ADAPTROM_REQUIRE(impl_->llt.info() == Eigen::Success, ErrorKind::factorization,
                   "sparse Cholesky factorization failed (matrix not SPD?)");
}

Vector SparseCholesky::solve(const Vector& b) const { return impl_->llt.solve(b); }

Matrix SparseCholesky::solve(const Matrix& B) const { return impl_->llt.solve(B); }

}  // namespace adaptrom
