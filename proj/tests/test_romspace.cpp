#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "adaptrom/nssolver.hpp"
#include "adaptrom/romspace.hpp"
#include "cavity_data.hpp"
#include "support.hpp"

using namespace adaptrom;
using namespace testsupport;

namespace {

Vector interior_random(std::mt19937& rng, const TaylorHoodSpace& s) {
  Vector v = random_vector(rng, s.velocity_dofs());
  for (int d : s.dirichlet_velocity_dofs()) v[d] = 0.0;
  return v;
}

double vnorm(const FormSet& f, const Vector& v) { return std::sqrt(v.dot(f.stiffness * v)); }

const SmallCavity& cavity() {
  static const SmallCavity c = small_cavity();
  return c;
}

// Dense oracle for the Taylor-Hood inf-sup constant: smallest generalized
// eigenvalue of the Schur complement on a basis of zero-mean pressures.
double dense_infsup(const TaylorHoodSpace& s, const FormSet& f) {
  const auto& in = s.interior_velocity_dofs();
  const Matrix S = Matrix(f.stiffness);
  const Matrix B = Matrix(f.divergence);
  Matrix Sii(in.size(), in.size()), Bi(B.rows(), in.size());
  for (std::size_t a = 0; a < in.size(); ++a) {
    Bi.col(a) = B.col(in[a]);
    for (std::size_t b = 0; b < in.size(); ++b) Sii(a, b) = S(in[a], in[b]);
  }
  const Matrix schur = Bi * Sii.llt().solve(Bi.transpose());
  const Matrix Mp(f.pressure_mass);
  Eigen::FullPivLU<Matrix> lu(f.pressure_mean.transpose());
  const Matrix Z = lu.kernel();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Z.transpose() * schur * Z, Z.transpose() * Mp * Z);
  return std::sqrt(es.eigenvalues().minCoeff());
}

}  // namespace

TEST_CASE("projection: idempotence, constraint and optimality") {
  std::mt19937 rng(1);
  const auto ref = ReferencePair::build(random_mesh(rng, 4, 2));
  const auto& s = *ref.space;
  const DivFreeProjector P(s, ref.forms);

  const Vector u = interior_random(rng, s);
  const Vector pu = P.project(u);
  CHECK(continuity_residual(s, ref.forms, pu) < 1e-10);
  for (int d : s.dirichlet_velocity_dofs()) CHECK(pu[d] == 0.0);
  CHECK((P.project(pu) - pu).cwiseAbs().maxCoeff() < 1e-10 * pu.cwiseAbs().maxCoeff());

  const double best = vnorm(ref.forms, pu - u);
  for (int k = 0; k < 10; ++k) {
    const Vector w = P.project(interior_random(rng, s));
    CHECK(best <= vnorm(ref.forms, w - u) * (1 + 1e-12));
  }

  // inhomogeneous constraint with the lid lifting
  const Vector g = boundary_interpolant(s, cavity_boundary().shape);
  const Vector v = P.project(u, g);
  CHECK(continuity_residual(s, ref.forms, v + g) < 1e-9);
  // linearity in (u, g)
  const Vector sum = P.project(Vector::Zero(u.size()), g) + P.project(u);
  CHECK((sum - v).cwiseAbs().maxCoeff() < 1e-10 * v.cwiseAbs().maxCoeff());
  CHECK(P.solves() == 15);
}

TEST_CASE("supremizer: zero, norm identity, Riesz property, linearity") {
  std::mt19937 rng(2);
  const auto ref = ReferencePair::build(random_mesh(rng, 4, 2));
  const auto& s = *ref.space;
  const SupremizerSolver T(s, ref.forms);
  CHECK(T.apply(Vector(Vector::Zero(s.pressure_dofs()))).cwiseAbs().maxCoeff() == 0.0);

  for (int trial = 0; trial < 5; ++trial) {
    const Vector q = random_vector(rng, s.pressure_dofs());
    const Vector t = T.apply(q);
    const double lhs = t.dot(ref.forms.stiffness * t);
    const double rhs = q.dot(ref.forms.divergence * t);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    for (int k = 0; k < 10; ++k) {
      const Vector w = interior_random(rng, s);
      const double r = t.dot(ref.forms.stiffness * w) - q.dot(ref.forms.divergence * w);
      CHECK(std::abs(r) < 1e-11 * std::max(1.0, std::abs(q.dot(ref.forms.divergence * w))));
    }
  }
  const Vector q1 = random_vector(rng, s.pressure_dofs());
  const Vector q2 = random_vector(rng, s.pressure_dofs());
  const Vector lin = T.apply(Vector(2.5 * q1 - 0.7 * q2)) - (2.5 * T.apply(q1) - 0.7 * T.apply(q2));
  CHECK(lin.cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("reference inf-sup by Lanczos matches the dense oracle") {
  std::mt19937 rng(3);
  const auto ref = ReferencePair::build(random_mesh(rng, 3, 2));
  const SupremizerSolver T(*ref.space, ref.forms);
  const InfSupEstimate est = reference_infsup(*ref.space, ref.forms, T);
  const double oracle = dense_infsup(*ref.space, ref.forms);
  MESSAGE("Taylor-Hood inf-sup " << est.beta << " (dense " << oracle << ", " << est.iterations
                                 << " Lanczos steps)");
  CHECK(est.beta == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(est.beta > 0.1);
}

TEST_CASE("reduced inf-sup: conventions and the supremizer bound") {
  std::mt19937 rng(4);
  const auto ref = ReferencePair::build(random_mesh(rng, 4, 2));
  const auto& s = *ref.space;
  const SupremizerSolver T(s, ref.forms);
  Matrix V(s.velocity_dofs(), 3);
  for (int k = 0; k < 3; ++k) V.col(k) = interior_random(rng, s);
  CHECK(std::isinf(infsup_constant(V, Matrix(s.pressure_dofs(), 0), ref.forms)));

  // zero-mean pressure modes
  Matrix Q(s.pressure_dofs(), 4);
  for (int k = 0; k < 4; ++k) {
    Vector q = random_vector(rng, s.pressure_dofs());
    q -= ref.forms.pressure_mean.dot(q) / ref.forms.pressure_mean.sum() * Vector::Ones(q.size());
    Q.col(k) = q;
  }
  Matrix Qdep = Q;
  Qdep.col(3) = Q.col(0) + Q.col(1);
  CHECK(infsup_constant(V, Qdep, ref.forms) == 0.0);

  const double beta_h = reference_infsup(s, ref.forms, T).beta;
  Matrix VS(s.velocity_dofs(), 7);
  VS << V, T.apply(Q);
  const double beta_r = infsup_constant(VS, Q, ref.forms);
  MESSAGE("beta_R " << beta_r << " >= beta_h " << beta_h);
  CHECK(beta_r >= beta_h - 1e-8);
  CHECK(infsup_constant(V, Q, ref.forms) < beta_r);
}

TEST_CASE("divergence-free bases on cavity snapshots") {
  const auto& c = cavity();
  const auto& s = *c.ref.space;
  const DivFreeProjector P(s, c.ref.forms);
  const int n = static_cast<int>(c.velocity.cols());
  const auto lifts = modified_liftings_separable(P, c.shape, c.factors);
  CHECK(P.solves() == 1);
  for (int j = 0; j <= n; ++j) CHECK(continuity_residual(s, c.ref.forms, lifts.modified_at(j)) < 1e-9);

  const DivFreeBasis one = build_divfree_basis_project_then_reduce(P, c.velocity, c.weights, n);
  CHECK(one.projection_solves == n);
  const DivFreeBasis two = build_divfree_basis_reduce_then_project(P, c.velocity, c.weights, lifts, 4);
  CHECK(two.projection_solves == two.pod.size());
  REQUIRE(one.pod.size() >= 4);
  for (const Matrix* m : {&one.pod.modes, &two.pod.modes})
    for (int k = 0; k < m->cols(); ++k) CHECK(continuity_residual(s, c.ref.forms, m->col(k)) < 1e-9);

  const Matrix G = one.pod.modes.transpose() * (c.ref.forms.stiffness * one.pod.modes);
  CHECK((G - Matrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-10);

  // the two reduced spaces differ
  const Vector cosines =
      principal_cosines(one.pod.modes.leftCols(4), two.pod.modes, c.ref.forms.stiffness);
  MESSAGE("smallest principal cosine " << cosines.minCoeff());
  CHECK(cosines.minCoeff() < 1.0 - 1e-12);

  const DivFreeBasis re =
      build_divfree_basis_reduce_then_project(P, c.velocity, c.weights, lifts, 4, true);
  const Matrix Gr = re.pod.modes.transpose() * (c.ref.forms.stiffness * re.pod.modes);
  CHECK((Gr - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(principal_cosines(re.pod.modes, two.pod.modes, c.ref.forms.stiffness).minCoeff() > 1 - 1e-10);

  // the general lifting path gives the same modified liftings with n + 1 solves
  std::vector<Vector> raw;
  for (int j = 0; j <= n; ++j) raw.push_back(lifts.raw_at(j));
  const int before = P.solves();
  const auto general = modified_liftings(P, raw);
  CHECK(P.solves() - before == n + 1);
  for (int j = 0; j <= n; ++j)
    CHECK((general.modified_at(j) - lifts.modified_at(j)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection is the identity on divergence-free snapshots") {
  std::mt19937 rng(5);
  const auto ref = ReferencePair::build(random_mesh(rng, 4, 1));
  const auto& s = *ref.space;
  const DivFreeProjector P(s, ref.forms);
  Matrix U(s.velocity_dofs(), 5);
  for (int j = 0; j < 5; ++j) U.col(j) = P.project(interior_random(rng, s));
  const Vector w = Vector::Constant(5, 0.01);
  const PodBasis plain = compute_pod(U, w, 5, ref.forms.stiffness, InnerProduct::velocity_h1);
  const DivFreeBasis one = build_divfree_basis_project_then_reduce(P, U, w, 5);
  CHECK((plain.modes - one.pod.modes).cwiseAbs().maxCoeff() < 1e-8);

  ModifiedLiftings none;
  none.separable = true;
  none.factors.assign(6, 0.0);
  none.raw_shape = none.correction_shape = Vector::Zero(s.velocity_dofs());
  const DivFreeBasis two = build_divfree_basis_reduce_then_project(P, U, w, none, 5);
  CHECK((plain.modes - two.pod.modes).cwiseAbs().maxCoeff() < 1e-8);

  const DivFreeBasis zero =
      build_divfree_basis_project_then_reduce(P, Matrix::Zero(s.velocity_dofs(), 5), w, 3);
  CHECK(zero.pod.size() == 0);
}

TEST_CASE("supremizers from pressure snapshots equal supremizers of the modes") {
  const auto& c = cavity();
  const auto& s = *c.ref.space;
  const SupremizerSolver T(s, c.ref.forms);
  const int n = static_cast<int>(c.pressure.cols());
  const PodBasis pp = compute_pod(c.pressure, c.weights, n, c.ref.forms.pressure_mass,
                                  InnerProduct::pressure_l2);
  const Matrix direct = T.apply(pp.modes);
  const Matrix from_snaps = supremizers_from_snapshots(T, c.pressure, pp.xi);
  CHECK((direct - from_snaps).cwiseAbs().maxCoeff() < 1e-10);

  // a single snapshot
  const PodBasis p1 = compute_pod(c.pressure.col(0), c.weights.head(1), 1, c.ref.forms.pressure_mass,
                                  InnerProduct::pressure_l2);
  const Matrix a = T.apply(p1.modes);
  const Matrix b = supremizers_from_snapshots(T, c.pressure.col(0), p1.xi);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(supremizers_from_snapshots(T, Matrix::Zero(s.pressure_dofs(), 3), Matrix::Ones(3, 2))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK_THROWS_AS(supremizers_from_snapshots(T, c.pressure, Matrix::Ones(n + 1, 2)), Error);

  // stabilized pair on the cavity data
  const PodBasis vel = compute_pod(c.velocity, c.weights, n, c.ref.forms.stiffness,
                                   InnerProduct::velocity_h1);
  Matrix V(s.velocity_dofs(), vel.size() + pp.size());
  V << vel.modes, from_snaps;
  const double beta_h = reference_infsup(s, c.ref.forms, T).beta;
  const double beta_r = infsup_constant(V, pp.modes, c.ref.forms);
  const double beta_u = infsup_constant(vel.modes, pp.modes, c.ref.forms);
  MESSAGE("cavity inf-sup: reference " << beta_h << ", stabilized " << beta_r << ", unstable " << beta_u);
  CHECK(beta_h > 0.1);
  CHECK(beta_r >= beta_h - 1e-8);
}
