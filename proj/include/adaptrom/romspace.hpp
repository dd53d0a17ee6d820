#pragma once

#include <atomic>
#include <vector>

#include "adaptrom/assembly.hpp"
#include "adaptrom/femspace.hpp"
#include "adaptrom/linalg.hpp"
#include "adaptrom/pod.hpp"

namespace adaptrom {

/// Taylor-Hood pair on a mesh that refines every snapshot mesh, with its
/// assembled forms. POD and all reduced constraints live here.
struct ReferencePair {
  SpacePtr space;
  FormSet forms;

  static ReferencePair build(const Triangulation& mesh);
};

/// Constrained V-projection onto weakly divergence-free fields:
///   minimize ||v - u||_V  subject to  b(v + g, q) = 0 for all q,
/// with v vanishing at the Dirichlet dofs. The saddle matrix is factorized
/// once; every call to project() counts as one solve.
class DivFreeProjector {
 public:
  DivFreeProjector(const TaylorHoodSpace& space, const FormSet& forms);

  /// u on the full velocity space (its Dirichlet values only enter the
  /// objective); g empty means g = 0. Returns v with zero Dirichlet values.
  Vector project(const Vector& u, const Vector& g = {}) const;
  /// project() applied column by column with g = 0.
  Matrix project_columns(const Matrix& U) const;

  int solves() const { return solves_.load(); }
  const TaylorHoodSpace& space() const { return space_; }
  const FormSet& forms() const { return forms_; }

 private:
  const TaylorHoodSpace& space_;
  const FormSet& forms_;
  SparseLu lu_;
  int n_int_ = 0;
  mutable std::atomic<int> solves_{0};
};

/// Liftings g^j on the reference space for j = 0..n together with the
/// corrections P_{g^j}(0), so that the modified lifting g^j + P_{g^j}(0) is
/// weakly divergence-free. Separable data stores one shape and one
/// correction scaled by s(t^j).
struct ModifiedLiftings {
  bool separable = false;
  std::vector<double> factors;  // s(t^j), separable only
  Vector raw_shape, correction_shape;
  std::vector<Vector> raw, correction;  // general case, one entry per j

  int size() const { return separable ? static_cast<int>(factors.size()) : static_cast<int>(raw.size()); }
  Vector raw_at(int j) const;
  Vector correction_at(int j) const;
  Vector modified_at(int j) const { return raw_at(j) + correction_at(j); }
};

/// One saddle solve for all steps.
ModifiedLiftings modified_liftings_separable(const DivFreeProjector& projector, const Vector& shape,
                                             std::vector<double> factors);
/// One saddle solve per step.
ModifiedLiftings modified_liftings(const DivFreeProjector& projector, std::vector<Vector> liftings);

struct DivFreeBasis {
  PodBasis pod;
  int projection_solves = 0;
};

/// Project every snapshot, then POD in the V inner product. The snapshot
/// P_{g^j}(u_j) - P_{g^j}(0) equals P_0(u_j) by linearity, so one solve per
/// snapshot suffices and the liftings do not enter.
DivFreeBasis build_divfree_basis_project_then_reduce(const DivFreeProjector& projector,
                                                     const Matrix& snapshots, const Vector& weights,
                                                     int count);

/// POD of u_j - P_{g^j}(0), then every mode is projected with g = 0. The
/// projected modes are kept as they are unless `reorthonormalize` is set.
DivFreeBasis build_divfree_basis_reduce_then_project(const DivFreeProjector& projector,
                                                     const Matrix& snapshots, const Vector& weights,
                                                     const ModifiedLiftings& liftings, int count,
                                                     bool reorthonormalize = false);

/// The map T with (Tq, w)_V = b(w, q) for all w in the reference velocity
/// space; an SPD solve on the interior dofs.
class SupremizerSolver {
 public:
  SupremizerSolver(const TaylorHoodSpace& space, const FormSet& forms);

  Vector apply(const Vector& q) const;
  Matrix apply(const Matrix& Q) const;

 private:
  const TaylorHoodSpace& space_;
  const FormSet& forms_;
  SparseCholesky chol_;
};

/// Supremizers of the pressure POD modes computed from the pressure
/// snapshots: sum_j T(p_j) xi_r^j.
Matrix supremizers_from_snapshots(const SupremizerSolver& T, const Matrix& pressure_snapshots,
                                  const Matrix& xi);

/// Discrete inf-sup constant of span(V) x span(P) in the V and Q norms:
/// beta^2 = min eig of (P^T B V)(V^T S V)^-1 (V^T B^T P) relative to P^T Mp P.
/// Returns +inf for an empty pressure basis and 0 when P^T Mp P or V^T S V is
/// singular.
double infsup_constant(const Matrix& velocity_basis, const Matrix& pressure_basis, const FormSet& forms);

struct InfSupEstimate {
  double beta = 0.0;
  double residual = 0.0;  // M_p-norm residual of the Ritz pair
  int iterations = 0;
};

/// Inf-sup constant of the full Taylor-Hood pair on zero-mean pressures by
/// Lanczos on Mp^-1 B S^-1 B^T.
InfSupEstimate reference_infsup(const TaylorHoodSpace& space, const FormSet& forms,
                                const SupremizerSolver& T, int max_iterations = 400,
                                double tol = 1e-10);

/// Cosines of the principal angles between span(A) and span(B) in the X
/// inner product, descending.
Vector principal_cosines(const Matrix& A, const Matrix& B, const SparseMatrix& X);

}  // namespace adaptrom
