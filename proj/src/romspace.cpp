#include "adaptrom/romspace.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "adaptrom/error.hpp"

namespace adaptrom {

ReferencePair ReferencePair::build(const Triangulation& mesh) {
  ReferencePair r;
  r.space = build_space(mesh);
  r.forms = assemble_forms(*r.space);
  return r;
}

DivFreeProjector::DivFreeProjector(const TaylorHoodSpace& space, const FormSet& forms)
    : space_(space), forms_(forms) {
  const auto& interior = space.interior_velocity_dofs();
  n_int_ = static_cast<int>(interior.size());
  std::vector<int> all_p(space.pressure_dofs());
  for (int k = 0; k < space.pressure_dofs(); ++k) all_p[k] = k;
  const SparseMatrix S_ii = submatrix(forms.stiffness, interior, interior);
  const SparseMatrix B_i = submatrix(forms.divergence, all_p, interior);
  lu_.factorize(saddle_matrix(S_ii, B_i, forms.pressure_mean));
}

Vector DivFreeProjector::project(const Vector& u, const Vector& g) const {
  const int nv = space_.velocity_dofs();
  const int np = space_.pressure_dofs();
  ADAPTROM_REQUIRE(u.size() == nv && (g.size() == 0 || g.size() == nv), ErrorKind::dimension_mismatch,
                   "projection input has the wrong length");
  Vector rhs = Vector::Zero(n_int_ + np + 1);
  rhs.head(n_int_) = gather(forms_.stiffness * u, space_.interior_velocity_dofs());
  if (g.size() > 0) rhs.segment(n_int_, np) = -(forms_.divergence * g);
  const Vector x = lu_.solve(rhs);
  ++solves_;
  Vector v = Vector::Zero(nv);
  scatter(x.head(n_int_), space_.interior_velocity_dofs(), v);
  return v;
}

Matrix DivFreeProjector::project_columns(const Matrix& U) const {
  Matrix out(U.rows(), U.cols());
  for (int j = 0; j < U.cols(); ++j) out.col(j) = project(U.col(j));
  return out;
}

Vector ModifiedLiftings::raw_at(int j) const {
  ADAPTROM_REQUIRE(j >= 0 && j < size(), ErrorKind::invalid_parameter, "lifting index out of range");
  return separable ? Vector(factors[j] * raw_shape) : raw[j];
}

Vector ModifiedLiftings::correction_at(int j) const {
  ADAPTROM_REQUIRE(j >= 0 && j < size(), ErrorKind::invalid_parameter, "lifting index out of range");
  return separable ? Vector(factors[j] * correction_shape) : correction[j];
}

ModifiedLiftings modified_liftings_separable(const DivFreeProjector& projector, const Vector& shape,
                                             std::vector<double> factors) {
  ModifiedLiftings out;
  out.separable = true;
  out.factors = std::move(factors);
  out.raw_shape = shape;
  out.correction_shape = projector.project(Vector::Zero(shape.size()), shape);
  return out;
}

ModifiedLiftings modified_liftings(const DivFreeProjector& projector, std::vector<Vector> liftings) {
  ModifiedLiftings out;
  out.raw = std::move(liftings);
  out.correction.reserve(out.raw.size());
  for (const Vector& g : out.raw) out.correction.push_back(projector.project(Vector::Zero(g.size()), g));
  return out;
}

DivFreeBasis build_divfree_basis_project_then_reduce(const DivFreeProjector& projector,
                                                     const Matrix& snapshots, const Vector& weights,
                                                     int count) {
  const int before = projector.solves();
  const Matrix projected = projector.project_columns(snapshots);
  DivFreeBasis out;
  out.pod = compute_pod(projected, weights, count, projector.forms().stiffness, InnerProduct::velocity_h1,
                        projector.space().id());
  out.projection_solves = projector.solves() - before;
  return out;
}

namespace {

// X-orthonormal basis of span(A) by symmetric orthogonalization.
Matrix x_orthonormalize(const Matrix& A, const SparseMatrix& X) {
  Matrix G = A.transpose() * (X * A);
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  ADAPTROM_REQUIRE(es.eigenvalues().size() == 0 || es.eigenvalues().minCoeff() > 0,
                   ErrorKind::rank_deficient, "basis is linearly dependent");
  return A * es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

DivFreeBasis build_divfree_basis_reduce_then_project(const DivFreeProjector& projector,
                                                     const Matrix& snapshots, const Vector& weights,
                                                     const ModifiedLiftings& liftings, int count,
                                                     bool reorthonormalize) {
  const int n = static_cast<int>(snapshots.cols());
  ADAPTROM_REQUIRE(liftings.size() == n + 1, ErrorKind::dimension_mismatch,
                   "need liftings for steps 0..n");
  Matrix modified = snapshots;
  for (int j = 1; j <= n; ++j) modified.col(j - 1) -= liftings.correction_at(j);
  DivFreeBasis out;
  out.pod = compute_pod(modified, weights, count, projector.forms().stiffness, InnerProduct::velocity_h1,
                        projector.space().id());
  const int before = projector.solves();
  out.pod.modes = projector.project_columns(out.pod.modes);
  out.projection_solves = projector.solves() - before;
  if (reorthonormalize && out.pod.size() > 0)
    out.pod.modes = x_orthonormalize(out.pod.modes, projector.forms().stiffness);
  return out;
}

SupremizerSolver::SupremizerSolver(const TaylorHoodSpace& space, const FormSet& forms)
    : space_(space), forms_(forms) {
  const auto& interior = space.interior_velocity_dofs();
  chol_.factorize(submatrix(forms.stiffness, interior, interior));
}

Vector SupremizerSolver::apply(const Vector& q) const {
  ADAPTROM_REQUIRE(q.size() == space_.pressure_dofs(), ErrorKind::dimension_mismatch,
                   "pressure field has the wrong length");
  const Vector rhs = gather(forms_.divergence.transpose() * q, space_.interior_velocity_dofs());
  Vector t = Vector::Zero(space_.velocity_dofs());
  scatter(chol_.solve(rhs), space_.interior_velocity_dofs(), t);
  return t;
}

Matrix SupremizerSolver::apply(const Matrix& Q) const {
  Matrix out(space_.velocity_dofs(), Q.cols());
  for (int k = 0; k < Q.cols(); ++k) out.col(k) = apply(Vector(Q.col(k)));
  return out;
}

Matrix supremizers_from_snapshots(const SupremizerSolver& T, const Matrix& pressure_snapshots,
                                  const Matrix& xi) {
  ADAPTROM_REQUIRE(xi.rows() == pressure_snapshots.cols(), ErrorKind::dimension_mismatch,
                   "coefficient matrix does not match the pressure snapshots");
  return T.apply(pressure_snapshots) * xi;
}

double infsup_constant(const Matrix& V, const Matrix& P, const FormSet& forms) {
  ADAPTROM_REQUIRE(V.rows() == forms.stiffness.rows() && P.rows() == forms.pressure_mass.rows(),
                   ErrorKind::dimension_mismatch, "bases do not match the forms");
  if (P.cols() == 0) return std::numeric_limits<double>::infinity();
  Matrix Mp = P.transpose() * (forms.pressure_mass * P);
  Mp = 0.5 * (Mp + Mp.transpose()).eval();
  Matrix Sv = V.transpose() * (forms.stiffness * V);
  Sv = 0.5 * (Sv + Sv.transpose()).eval();
  const Vector mp_eig = Eigen::SelfAdjointEigenSolver<Matrix>(Mp, Eigen::EigenvaluesOnly).eigenvalues();
  if (V.cols() == 0 || mp_eig.minCoeff() <= 1e-12 * mp_eig.maxCoeff()) return 0.0;
  Eigen::LDLT<Matrix> sv_ldlt(Sv);
  if (sv_ldlt.info() != Eigen::Success || !sv_ldlt.isPositive() ||
      sv_ldlt.vectorD().minCoeff() <= 1e-14 * sv_ldlt.vectorD().cwiseAbs().maxCoeff())
    return 0.0;
  const Matrix Br = P.transpose() * (forms.divergence * V);
  Matrix A = Br * sv_ldlt.solve(Br.transpose());
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(A, Mp);
  ADAPTROM_REQUIRE(es.info() == Eigen::Success, ErrorKind::factorization, "inf-sup eigenproblem failed");
  return std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
}

InfSupEstimate reference_infsup(const TaylorHoodSpace& space, const FormSet& forms,
                                const SupremizerSolver& T, int max_iterations, double tol) {
  const int np = space.pressure_dofs();
  const SparseMatrix& M = forms.pressure_mass;
  SparseCholesky mchol;
  mchol.factorize(M);
  const Vector one = Vector::Ones(np);
  const double one_m = forms.pressure_mean.sum();  // 1^T M 1
  auto deflate = [&](Vector& v) { v -= (forms.pressure_mean.dot(v) / one_m) * one; };
  auto mnorm = [&](const Vector& v) { return std::sqrt(v.dot(M * v)); };

  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector v(np);
  for (int k = 0; k < np; ++k) v[k] = d(rng);
  deflate(v);
  v /= mnorm(v);

  const int kmax = std::min(max_iterations, np - 1);
  Matrix basis(np, kmax + 1);
  Matrix mbasis(np, kmax + 1);  // M * basis, for reorthogonalization
  basis.col(0) = v;
  mbasis.col(0) = M * v;
  std::vector<double> alpha, beta;
  InfSupEstimate out;
  for (int k = 0; k < kmax; ++k) {
    const Vector vk = basis.col(k);
    const Vector Av = forms.divergence * T.apply(vk);
    alpha.push_back(vk.dot(Av));
    Vector w = mchol.solve(Av);
    // full reorthogonalization against the Krylov basis and the constant
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(k + 1) * (mbasis.leftCols(k + 1).transpose() * w);
      deflate(w);
    }
    const double b = mnorm(w);

    const int m = k + 1;
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    Matrix Tk = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      Tk(i, i) = alpha[i];
      if (i + 1 < m) Tk(i, i + 1) = Tk(i + 1, i) = beta[i];
    }
    es.compute(Tk);
    const double theta = es.eigenvalues()[0];
    const double res = b * std::abs(es.eigenvectors()(m - 1, 0));
    out.beta = std::sqrt(std::max(0.0, theta));
    out.residual = res;
    out.iterations = m;
    if (res < tol * std::max(theta, 1e-300) || b < 1e-14) break;
    beta.push_back(b);
    basis.col(k + 1) = w / b;
    mbasis.col(k + 1) = M * basis.col(k + 1);
  }
  return out;
}

Vector principal_cosines(const Matrix& A, const Matrix& B, const SparseMatrix& X) {
  const Matrix QA = x_orthonormalize(A, X);
  const Matrix QB = x_orthonormalize(B, X);
  Eigen::JacobiSVD<Matrix> svd(QA.transpose() * (X * QB));
  return svd.singularValues().cwiseMin(1.0);
}

}  // namespace adaptrom
