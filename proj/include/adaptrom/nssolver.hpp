#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "adaptrom/assembly.hpp"
#include "adaptrom/femspace.hpp"
#include "adaptrom/linalg.hpp"

namespace adaptrom {

using TimeVectorFunction = std::function<Vec2(double t, Point x)>;

/// Dirichlet data y_D(t, x). When `time_factor` and `shape` are both set the
/// data is separable: y_D(t, x) = time_factor(t) * shape(x).
struct BoundaryData {
  std::string name;
  TimeVectorFunction value;
  std::function<double(double)> time_factor;
  VectorFunction shape;

  bool separable() const { return static_cast<bool>(time_factor) && static_cast<bool>(shape); }
  static BoundaryData homogeneous();
};

/// Lifting g on one space: y_D(t) at the Dirichlet nodes, zero at interior
/// nodes.
struct Lifting {
  Vector values;
  double time = 0.0;
  /// s(t) for separable data, NaN otherwise.
  double time_factor = std::numeric_limits<double>::quiet_NaN();
};

Lifting make_lifting(const TaylorHoodSpace& space, const BoundaryData& data, double t);

struct NewtonParams {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_iterations = 25;
};

/// One implicit Euler step on a fixed space, in homogenized form. With
/// yh = y + g:
///   (yh - yh_prev)/dt + (yh . grad) yh - Re^-1 lap yh + grad p = f,
///   div yh = 0, int p = 0.
/// The previous level enters through (y_prev, v), integrated exactly on the
/// overlay of both meshes, and (g_prev, v) with g_prev given on this space.
struct StepProblem {
  SpacePtr space;
  const FormSet* forms = nullptr;
  FeField y_prev;
  Vector g_prev;
  Vector g;
  Vector load;  // (f^j, phi_i); empty means f = 0
  double reynolds = 1.0;
  double dt = 1.0;
};

/// Residual and Jacobian of a step in the unknowns [y_interior; p; lambda].
class StepSystem {
 public:
  explicit StepSystem(const StepProblem& problem);

  int size() const { return n_int_ + n_p_ + 1; }
  int interior_size() const { return n_int_; }
  Vector residual(const Vector& state) const;
  SparseMatrix jacobian(const Vector& state) const;

  Vector pack(const Vector& y_full, const Vector& p) const;
  /// Homogeneous velocity on the full space (zero Dirichlet values).
  Vector velocity(const Vector& state) const;
  Vector pressure(const Vector& state) const;

 private:
  Vector lifted(const Vector& state) const;

  const StepProblem& pb_;
  int n_int_ = 0, n_p_ = 0;
  Vector history_;     // (yh_prev, v) on the full space
  Vector load_;
  SparseMatrix linear_;  // M/dt + S/Re on the full space
  SparseMatrix b_int_;   // B restricted to interior velocity columns
};

struct StepResult {
  FeField velocity;  // homogeneous part y
  FeField pressure;  // zero mean
  std::vector<double> residual_history;
  int iterations = 0;
};

/// Newton's method with sparse LU on the saddle Jacobian. `initial_guess`
/// is a homogeneous velocity on the step space (empty: zero).
StepResult solve_time_step(const StepProblem& problem, const Vector& initial_guess = {},
                           const NewtonParams& newton = {});

/// Continuity residual max_k |b(yh, q_k)| / ||q_k||_Q over pressure hats.
double continuity_residual(const TaylorHoodSpace& space, const FormSet& forms, const Vector& yh);

struct FomParams {
  int grid = 8;  // criss-cross cells per side of the initial mesh
  double reynolds = 100.0;
  int steps = 100;
  double t_end = 1.0;
  double eps = 0.01;
  double theta = 0.1;
  int max_refinements = 30;
  // 0: unlimited. Otherwise a refinement that would exceed this many
  // triangles is skipped and the step is accepted with tolerance_met = false.
  int max_cells = 0;
  BoundaryData boundary = BoundaryData::homogeneous();
  TimeVectorFunction forcing;     // empty: f = 0
  VectorFunction initial_velocity;  // empty: y_0 = 0
  NewtonParams newton;

  double dt() const { return t_end / steps; }
};

struct SnapshotStep {
  SpacePtr space;
  FeField velocity;  // homogeneous part y_h^j
  FeField pressure;
  Lifting lifting;
  double estimate = 0.0;
  int refinements = 0;
  int newton_iterations = 0;
  bool tolerance_met = true;
};

struct SnapshotSet {
  double reynolds = 0.0;
  double dt = 0.0;
  double t_end = 0.0;
  double eps = 0.0;
  double theta = 0.0;
  int grid = 0;
  std::string boundary;
  Triangulation init;
  FeField initial;  // y_h^0 = y_0 - g^0 on the initial mesh
  Lifting initial_lifting;
  std::vector<SnapshotStep> steps;
  double wall_seconds = 0.0;

  int size() const { return static_cast<int>(steps.size()); }
  double time(int j) const { return j * dt; }
};

using StepCallback = std::function<void(int j, const SnapshotStep&)>;

/// Adaptive time stepping: solve-estimate-mark-refine at every step, then
/// coarsen once for the next step.
SnapshotSet run_fom(const FomParams& params, const StepCallback& progress = {});

}  // namespace adaptrom
