#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "adaptrom/assembly.hpp"
#include "adaptrom/error.hpp"
#include "adaptrom/pod.hpp"
#include "support.hpp"

using namespace adaptrom;
using namespace testsupport;

namespace {

// mass matrix of the two-triangle unit square: 9 nodes, 18 velocity dofs
SparseMatrix small_inner_product() {
  std::vector<Point> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<int, 3>> roots{{2, 0, 1}, {0, 2, 3}};
  auto f = std::make_shared<Forest>(std::move(v), std::move(roots), InitDescriptor{"custom", 1});
  const auto space = build_space(Triangulation(f, {0, 1}));
  const FormSet forms = assemble_forms(*space);
  return forms.mass + forms.stiffness;
}

Matrix random_matrix(std::mt19937& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) m.col(j) = random_vector(rng, rows);
  return m;
}

Vector random_weights(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> d(0.1, 2.0);
  Vector w(n);
  for (int j = 0; j < n; ++j) w[j] = d(rng);
  return w;
}

// Oracle: with X = L L^T, the POD modes are L^{-T} times the left singular
// vectors of L^T U diag(sqrt(a)), and the eigenvalues are squared singular
// values.
struct SvdOracle {
  Vector lambda;
  Matrix modes;
  SvdOracle(const Matrix& U, const Vector& w, const SparseMatrix& X) {
    const Matrix Xd(X);
    Eigen::LLT<Matrix> llt(Xd);
    const Matrix L = llt.matrixL();
    const Matrix Y = L.transpose() * U * w.cwiseSqrt().asDiagonal();
    Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU);
    lambda = svd.singularValues().cwiseAbs2();
    modes = L.transpose().triangularView<Eigen::Upper>().solve(svd.matrixU());
  }
};

double max_orthonormality_defect(const Matrix& modes, const SparseMatrix& X) {
  const Matrix G = modes.transpose() * (X * modes);
  return (G - Matrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("single snapshot gives the normalized snapshot") {
  std::mt19937 rng(1);
  const SparseMatrix X = small_inner_product();
  const Matrix U = random_matrix(rng, 18, 1);
  const Vector w = Vector::Constant(1, 0.3);
  const PodBasis b = compute_pod(U, w, 1, X, InnerProduct::velocity_h1);
  REQUIRE(b.size() == 1);
  const double nrm2 = U.col(0).dot(X * U.col(0));
  CHECK(b.eigenvalues[0] == doctest::Approx(0.3 * nrm2).epsilon(1e-13));
  const Vector expected = U.col(0) / std::sqrt(nrm2);
  const double sign = b.modes.col(0).dot(expected) > 0 ? 1.0 : -1.0;
  CHECK((b.modes.col(0) - sign * expected).cwiseAbs().maxCoeff() < 1e-13);
  CHECK_FALSE(b.rank_deficient);
}

TEST_CASE("two orthogonal snapshots of equal weighted norm") {
  std::mt19937 rng(2);
  const SparseMatrix X = small_inner_product();
  Matrix U = random_matrix(rng, 18, 2);
  // X-orthogonalize and give both the same X-norm
  U.col(1) -= U.col(0).dot(X * U.col(1)) / U.col(0).dot(X * U.col(0)) * U.col(0);
  U.col(1) *= std::sqrt(U.col(0).dot(X * U.col(0)) / U.col(1).dot(X * U.col(1)));
  const PodBasis b = compute_pod(U, Vector::Constant(2, 0.5), 2, X, InnerProduct::velocity_h1);
  REQUIRE(b.size() == 2);
  CHECK(b.eigenvalues[0] == doctest::Approx(b.eigenvalues[1]).epsilon(1e-12));
  // both snapshots are reproduced exactly by the basis
  CHECK(pod_projection_error(U, Vector::Constant(2, 0.5), b.modes, X) < 1e-12 * b.eigenvalues.sum());
}

TEST_CASE("POD agrees with a dense SVD oracle") {
  std::mt19937 rng(3);
  const SparseMatrix X = small_inner_product();
  for (int n : {3, 10, 17}) {
    const Matrix U = random_matrix(rng, 18, n);
    const Vector w = random_weights(rng, n);
    const SvdOracle oracle(U, w, X);
    const PodBasis b = compute_pod(U, w, n, X, InnerProduct::velocity_h1);
    REQUIRE(b.size() == n);
    CHECK(max_orthonormality_defect(b.modes, X) < 1e-10);
    for (int k = 0; k < n; ++k) {
      CHECK(b.eigenvalues[k] == doctest::Approx(oracle.lambda[k]).epsilon(1e-10));
      // same mode up to sign
      const double s = b.modes.col(k).dot(X * oracle.modes.col(k));
      CHECK(std::abs(std::abs(s) - 1.0) < 1e-9);
    }
    CHECK((U * b.xi - b.modes).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("projection error equals the sum of truncated eigenvalues") {
  std::mt19937 rng(4);
  const SparseMatrix X = small_inner_product();
  const int n = 10;
  const Matrix U = random_matrix(rng, 18, n);
  const Vector w = random_weights(rng, n);
  const PodBasis full = compute_pod(U, w, n, X, InnerProduct::velocity_h1);
  const double total = full.spectrum.sum();
  double last = std::numeric_limits<double>::infinity();
  for (int R = 0; R <= n; ++R) {
    const PodBasis b = truncate(full, R);
    const double err = pod_projection_error(U, w, b.modes, X);
    const double tail = full.spectrum.tail(n - R).sum();
    CHECK(std::abs(err - tail) <= 1e-10 * std::max(tail, 1e-300) + 1e-10 * total * 1e-3);
    CHECK(err <= last + 1e-14 * total);
    last = err;
  }
  // R = 0: weighted sum of squared norms
  double norms = 0;
  for (int j = 0; j < n; ++j) norms += w[j] * U.col(j).dot(X * U.col(j));
  CHECK(pod_projection_error(U, w, Matrix(18, 0), X) == doctest::Approx(norms).epsilon(1e-14));
  CHECK(last <= 1e-10 * total);
}

TEST_CASE("modes lie in the snapshot span and follow the sign convention") {
  std::mt19937 rng(5);
  const SparseMatrix X = small_inner_product();
  const Matrix U = random_matrix(rng, 18, 6);
  const PodBasis b = compute_pod(U, Vector::Constant(6, 0.01), 4, X, InnerProduct::velocity_h1);
  // least-squares residual of each mode against the snapshot columns
  const auto qr = U.colPivHouseholderQr();
  for (int k = 0; k < b.size(); ++k) {
    const Vector c = qr.solve(b.modes.col(k));
    CHECK((U * c - b.modes.col(k)).norm() < 1e-10 * b.modes.col(k).norm());
    Eigen::Index at = 0;
    b.modes.col(k).cwiseAbs().maxCoeff(&at);
    CHECK(b.modes(at, k) > 0);
  }
  for (int k = 1; k < b.size(); ++k) CHECK(b.eigenvalues[k] <= b.eigenvalues[k - 1]);
}

TEST_CASE("uniform weight scaling leaves the modes unchanged") {
  std::mt19937 rng(6);
  const SparseMatrix X = small_inner_product();
  const Matrix U = random_matrix(rng, 18, 8);
  const Vector w = random_weights(rng, 8);
  const PodBasis a = compute_pod(U, w, 5, X, InnerProduct::velocity_h1);
  const PodBasis b = compute_pod(U, 7.5 * w, 5, X, InnerProduct::velocity_h1);
  CHECK((a.modes - b.modes).cwiseAbs().maxCoeff() < 1e-10);
  for (int k = 0; k < 5; ++k)
    CHECK(b.eigenvalues[k] == doctest::Approx(7.5 * a.eigenvalues[k]).epsilon(1e-12));
}

TEST_CASE("rank deficiency and invalid sizes") {
  std::mt19937 rng(7);
  const SparseMatrix X = small_inner_product();
  const PodBasis zero = compute_pod(Matrix::Zero(18, 4), Vector::Constant(4, 1.0), 3, X,
                                    InnerProduct::velocity_h1);
  CHECK(zero.size() == 0);
  CHECK(zero.rank_deficient);

  // five snapshots spanning a three-dimensional space
  const Matrix base = random_matrix(rng, 18, 3);
  Matrix U(18, 5);
  U << base, base.col(0) + base.col(1), base.col(2) - 2 * base.col(0);
  const PodBasis b = compute_pod(U, Vector::Constant(5, 1.0), 5, X, InnerProduct::velocity_h1);
  CHECK(b.size() == 3);
  CHECK(b.rank_deficient);
  CHECK(max_orthonormality_defect(b.modes, X) < 1e-10);

  CHECK_THROWS_AS(compute_pod(U, Vector::Constant(5, 1.0), 6, X, InnerProduct::velocity_h1), Error);
  CHECK_THROWS_AS(compute_pod(U, Vector::Constant(4, 1.0), 2, X, InnerProduct::velocity_h1), Error);
  CHECK_THROWS_AS(compute_pod(U, Vector::Constant(5, -1.0), 2, X, InnerProduct::velocity_h1), Error);
  CHECK(parse_inner_product(to_string(InnerProduct::pressure_l2)) == InnerProduct::pressure_l2);
  CHECK_THROWS_AS(parse_inner_product("energy"), Error);
}
