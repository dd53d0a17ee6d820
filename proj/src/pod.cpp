#include "adaptrom/pod.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "adaptrom/error.hpp"

namespace adaptrom {

const char* to_string(InnerProduct ip) {
  return ip == InnerProduct::velocity_h1 ? "velocity_h1" : "pressure_l2";
}

InnerProduct parse_inner_product(const std::string& tag) {
  if (tag == "velocity_h1") return InnerProduct::velocity_h1;
  if (tag == "pressure_l2") return InnerProduct::pressure_l2;
  throw Error(ErrorKind::invalid_parameter, "unknown inner product '" + tag + "'");
}

namespace {

// descending eigenpairs of a symmetric matrix
void sorted_eigen(const Matrix& K, Vector& values, Matrix& vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(K);
  ADAPTROM_REQUIRE(es.info() == Eigen::Success, ErrorKind::factorization,
                   "Gramian eigendecomposition failed");
  values = es.eigenvalues().reverse();
  vectors = es.eigenvectors().rowwise().reverse();
}

}  // namespace

PodBasis compute_pod(const Matrix& U, const Vector& weights, int count, const SparseMatrix& X,
                     InnerProduct inner, std::uint64_t space_id) {
  const int n = static_cast<int>(U.cols());
  ADAPTROM_REQUIRE(weights.size() == n, ErrorKind::dimension_mismatch,
                   "one weight per snapshot required");
  ADAPTROM_REQUIRE(X.rows() == U.rows() && X.cols() == U.rows(), ErrorKind::dimension_mismatch,
                   "inner-product matrix does not match the snapshots");
  ADAPTROM_REQUIRE(count >= 0 && count <= n, ErrorKind::invalid_parameter,
                   "POD size must lie in [0, number of snapshots]");
  for (int j = 0; j < n; ++j)
    ADAPTROM_REQUIRE(weights[j] > 0, ErrorKind::invalid_parameter, "weights must be positive");

  PodBasis out;
  out.space_id = space_id;
  out.inner = inner;
  const Vector sw = weights.cwiseSqrt();
  const Matrix XU = X * U;
  Matrix K = U.transpose() * XU;
  K = sw.asDiagonal() * K * sw.asDiagonal();
  K = 0.5 * (K + K.transpose()).eval();

  Vector lambda;
  Matrix V;
  if (n > 0) sorted_eigen(K, lambda, V);
  out.spectrum = lambda.cwiseMax(0.0);

  int keep = 0;
  const double lead = n > 0 ? lambda[0] : 0.0;
  while (keep < count && lead > 0 && lambda[keep] > 1e-12 * lead) ++keep;
  out.rank_deficient = keep < count;

  out.eigenvalues = lambda.head(keep);
  out.xi = sw.asDiagonal() * V.leftCols(keep);
  for (int k = 0; k < keep; ++k) out.xi.col(k) /= std::sqrt(lambda[k]);
  out.modes = U * out.xi;

  // one symmetric (Loewdin) correction absorbs the round-off of the
  // snapshot method for modes with small eigenvalues
  if (keep > 0) {
    Matrix G = out.modes.transpose() * (X * out.modes);
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    const Matrix inv_sqrt =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        es.eigenvectors().transpose();
    out.modes = out.modes * inv_sqrt;
    out.xi = out.xi * inv_sqrt;
  }

  for (int k = 0; k < keep; ++k) {
    Eigen::Index at = 0;
    out.modes.col(k).cwiseAbs().maxCoeff(&at);
    if (out.modes(at, k) < 0) {
      out.modes.col(k) *= -1.0;
      out.xi.col(k) *= -1.0;
    }
  }
  return out;
}

double pod_projection_error(const Matrix& U, const Vector& weights, const Matrix& modes,
                            const SparseMatrix& X) {
  ADAPTROM_REQUIRE(weights.size() == U.cols() && modes.rows() == U.rows(),
                   ErrorKind::dimension_mismatch, "inconsistent snapshots, weights or modes");
  const Matrix XU = X * U;
  const Matrix coeff = modes.transpose() * XU;  // (u_j, phi_i)_X
  double total = 0;
  for (int j = 0; j < U.cols(); ++j) {
    const Vector r = U.col(j) - modes * coeff.col(j);
    total += weights[j] * r.dot(X * r);
  }
  return total;
}

PodBasis truncate(const PodBasis& b, int count) {
  ADAPTROM_REQUIRE(count >= 0 && count <= b.size(), ErrorKind::invalid_parameter,
                   "cannot truncate to more modes than available");
  PodBasis out = b;
  out.modes = b.modes.leftCols(count);
  out.eigenvalues = b.eigenvalues.head(count);
  out.xi = b.xi.leftCols(count);
  return out;
}

}  // namespace adaptrom
