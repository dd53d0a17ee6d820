#pragma once

#include <string>
#include <vector>

#include "adaptrom/linalg.hpp"
#include "adaptrom/nssolver.hpp"
#include "adaptrom/romspace.hpp"

namespace adaptrom {

enum class RomMethod { divfree1, divfree2, stabilized1, stabilized2, naive, unstable };

const char* to_string(RomMethod m);
RomMethod parse_rom_method(const std::string& tag);
/// True for the velocity-pressure models.
bool has_pressure(RomMethod m);
std::vector<RomMethod> all_methods();

/// Lifting g^j on the reference space for j = 0..n, either s_j * shape or
/// stored per step.
struct LiftingSeries {
  bool separable = false;
  std::vector<double> factors;
  Vector shape;
  std::vector<Vector> values;

  int size() const { return separable ? static_cast<int>(factors.size()) : static_cast<int>(values.size()); }
  Vector at(int j) const;
};

LiftingSeries modified_series(const ModifiedLiftings& l);
LiftingSeries raw_series(const ModifiedLiftings& l);

/// Galerkin projections onto span(Phi) (velocity) and span(Psi) (pressure).
///
///   tensor[(i*R + j)*R + k] = c(phi_j, phi_k, phi_i)
///   lift_jacobian[j](i,k)   = c(g^j, phi_k, phi_i) + c(phi_k, g^j, phi_i)
///   rhs[j](i)               = <f^j, phi_i> - c(g^j, g^j, phi_i) - a(g^j, phi_i)
///                              - ((g^j - g^{j-1}) / dt, phi_i)
///   coupling(k, i)          = b(phi_i, psi_k)
///   continuity_rhs[j](k)    = -b(g^j, psi_k)
/// Step-indexed blocks run over j = 0..n; entries at j = 0 hold no
/// time-difference term.
struct ReducedOperators {
  int rv = 0, rp = 0;
  double reynolds = 1.0;
  double dt = 1.0;
  Matrix mass, stiffness;
  std::vector<double> tensor;
  Matrix coupling;
  std::vector<Matrix> lift_jacobian;
  std::vector<Vector> rhs;
  std::vector<Vector> continuity_rhs;

  double c(int i, int j, int k) const { return tensor[(static_cast<std::size_t>(i) * rv + j) * rv + k]; }
  int steps() const { return static_cast<int>(rhs.size()) - 1; }

  /// Operators of the sub-basis formed by the velocity columns `velocity`
  /// and the first `pressure` pressure columns.
  ReducedOperators restrict(const std::vector<int>& velocity, int pressure) const;
};

struct OperatorInput {
  const TaylorHoodSpace* space = nullptr;
  const FormSet* forms = nullptr;
  Matrix velocity_basis;
  Matrix pressure_basis;  // zero columns for the velocity model
  LiftingSeries lifting;
  std::vector<Vector> loads;  // (f^j, phi) on the full space per step, empty means f = 0
  double reynolds = 1.0;
  double dt = 1.0;
  /// Assemble lifting blocks from three shape tensors scaled by s_j when
  /// the lifting is separable; otherwise every step is assembled directly.
  bool use_separability = true;
};

ReducedOperators build_reduced_operators(const OperatorInput& in);

struct RomTrajectory {
  RomMethod method = RomMethod::divfree1;
  std::vector<double> times;      // t^0..t^n
  std::vector<Vector> velocity;   // a^0..a^n
  std::vector<Vector> pressure;   // empty entry at j = 0; empty for velocity models
  std::vector<int> newton_iterations;
  double solve_seconds = 0.0;
};

/// Residual of one velocity step at coefficients a (previous a_prev).
Vector velocity_residual(const ReducedOperators& ops, int j, const Vector& a, const Vector& a_prev);
Matrix velocity_jacobian(const ReducedOperators& ops, int j, const Vector& a);

/// Implicit Euler with dense Newton on the reduced velocity equations.
RomTrajectory solve_velocity_rom(const ReducedOperators& ops, const Vector& a0,
                                 const NewtonParams& newton = {});

/// Implicit Euler with dense Newton on the reduced saddle system. A reduced
/// saddle matrix with reciprocal condition below `min_rcond` is a
/// factorization error.
RomTrajectory solve_velocity_pressure_rom(const ReducedOperators& ops, const Vector& a0,
                                          const NewtonParams& newton = {}, double min_rcond = 1e-14);

/// V-orthogonal projection coefficients of y0 onto span(Phi).
Vector reduced_initial_condition(const Vector& y0, const Matrix& basis, const SparseMatrix& stiffness);

}  // namespace adaptrom
