#include "adaptrom/rom.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "adaptrom/assembly.hpp"
#include "adaptrom/error.hpp"

namespace adaptrom {

namespace {

struct MethodName {
  RomMethod method;
  const char* name;
};

constexpr MethodName kMethods[] = {
    {RomMethod::divfree1, "divfree1"},       {RomMethod::divfree2, "divfree2"},
    {RomMethod::stabilized1, "stabilized1"}, {RomMethod::stabilized2, "stabilized2"},
    {RomMethod::naive, "naive"},             {RomMethod::unstable, "unstable"},
};

}  // namespace

const char* to_string(RomMethod m) {
  for (const auto& e : kMethods)
    if (e.method == m) return e.name;
  return "?";
}

RomMethod parse_rom_method(const std::string& tag) {
  for (const auto& e : kMethods)
    if (tag == e.name) return e.method;
  throw Error(ErrorKind::unknown_method, "unknown reduced model '" + tag + "'");
}

bool has_pressure(RomMethod m) {
  return m == RomMethod::stabilized1 || m == RomMethod::stabilized2 || m == RomMethod::unstable;
}

std::vector<RomMethod> all_methods() {
  std::vector<RomMethod> out;
  for (const auto& e : kMethods) out.push_back(e.method);
  return out;
}

Vector LiftingSeries::at(int j) const {
  ADAPTROM_REQUIRE(j >= 0 && j < size(), ErrorKind::invalid_parameter, "lifting index out of range");
  return separable ? Vector(factors[j] * shape) : values[j];
}

LiftingSeries modified_series(const ModifiedLiftings& l) {
  LiftingSeries s;
  s.separable = l.separable;
  if (l.separable) {
    s.factors = l.factors;
    s.shape = l.raw_shape + l.correction_shape;
  } else {
    for (int j = 0; j < l.size(); ++j) s.values.push_back(l.modified_at(j));
  }
  return s;
}

LiftingSeries raw_series(const ModifiedLiftings& l) {
  LiftingSeries s;
  s.separable = l.separable;
  if (l.separable) {
    s.factors = l.factors;
    s.shape = l.raw_shape;
  } else {
    s.values = l.raw;
  }
  return s;
}

ReducedOperators ReducedOperators::restrict(const std::vector<int>& vel, int pressure) const {
  ADAPTROM_REQUIRE(pressure >= 0 && pressure <= rp, ErrorKind::invalid_parameter,
                   "pressure sub-basis larger than the basis");
  for (int i : vel)
    ADAPTROM_REQUIRE(i >= 0 && i < rv, ErrorKind::invalid_parameter, "velocity index out of range");
  const int r = static_cast<int>(vel.size());
  ReducedOperators out;
  out.rv = r;
  out.rp = pressure;
  out.reynolds = reynolds;
  out.dt = dt;
  out.mass = mass(vel, vel);
  out.stiffness = stiffness(vel, vel);
  out.tensor.resize(static_cast<std::size_t>(r) * r * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) out.tensor[(static_cast<std::size_t>(i) * r + j) * r + k] = c(vel[i], vel[j], vel[k]);
  out.coupling = coupling.topRows(pressure)(Eigen::all, vel);
  for (const auto& m : lift_jacobian) out.lift_jacobian.push_back(m(vel, vel));
  for (const auto& v : rhs) out.rhs.push_back(v(vel));
  for (const auto& v : continuity_rhs) out.continuity_rhs.push_back(v.head(pressure));
  return out;
}

ReducedOperators build_reduced_operators(const OperatorInput& in) {
  ADAPTROM_REQUIRE(in.space && in.forms, ErrorKind::invalid_parameter, "space and forms required");
  const auto& space = *in.space;
  const auto& forms = *in.forms;
  const Matrix& Phi = in.velocity_basis;
  const Matrix& Psi = in.pressure_basis;
  ADAPTROM_REQUIRE(Phi.rows() == space.velocity_dofs(), ErrorKind::dimension_mismatch,
                   "velocity basis does not live on the space");
  ADAPTROM_REQUIRE(Psi.cols() == 0 || Psi.rows() == space.pressure_dofs(), ErrorKind::dimension_mismatch,
                   "pressure basis does not live on the space");
  const int n1 = in.lifting.size();
  ADAPTROM_REQUIRE(n1 >= 1, ErrorKind::invalid_parameter, "lifting series is empty");
  ADAPTROM_REQUIRE(in.loads.empty() || static_cast<int>(in.loads.size()) == n1,
                   ErrorKind::dimension_mismatch, "one load vector per step required");

  ReducedOperators ops;
  ops.rv = static_cast<int>(Phi.cols());
  ops.rp = static_cast<int>(Psi.cols());
  ops.reynolds = in.reynolds;
  ops.dt = in.dt;
  const int R = ops.rv;
  ops.mass = Phi.transpose() * (forms.mass * Phi);
  ops.stiffness = Phi.transpose() * (forms.stiffness * Phi);
  ops.coupling = ops.rp > 0 ? Matrix(Psi.transpose() * (forms.divergence * Phi)) : Matrix(0, R);

  ops.tensor.assign(static_cast<std::size_t>(R) * R * R, 0.0);
  for (int j = 0; j < R; ++j) {
    const ConvectionPair cp = convection_matrix(space, Phi.col(j));
    const Matrix block = Phi.transpose() * (cp.advect * Phi);  // (i, k) = c(phi_j, phi_k, phi_i)
    for (int i = 0; i < R; ++i)
      for (int k = 0; k < R; ++k) ops.tensor[(static_cast<std::size_t>(i) * R + j) * R + k] = block(i, k);
  }

  auto load = [&](int j) -> Vector {
    return in.loads.empty() ? Vector(Vector::Zero(R)) : Vector(Phi.transpose() * in.loads[j]);
  };

  if (in.lifting.separable && in.use_separability) {
    const Vector& G = in.lifting.shape;
    const ConvectionPair cp = convection_matrix(space, G);
    const Matrix jac = Phi.transpose() * ((cp.advect + cp.react) * Phi);
    const Vector conv = Phi.transpose() * convection_vector(space, G, G);
    const Vector diff = Phi.transpose() * (forms.stiffness * G) / in.reynolds;
    const Vector mass_g = Phi.transpose() * (forms.mass * G);
    const Vector cont = ops.rp > 0 ? Vector(-(Psi.transpose() * (forms.divergence * G))) : Vector(0);
    for (int j = 0; j < n1; ++j) {
      const double s = in.lifting.factors[j];
      ops.lift_jacobian.push_back(s * jac);
      Vector r = load(j) - s * s * conv - s * diff;
      if (j > 0) r -= (s - in.lifting.factors[j - 1]) / in.dt * mass_g;
      ops.rhs.push_back(std::move(r));
      ops.continuity_rhs.push_back(s * cont);
    }
  } else {
    Vector g_prev;
    for (int j = 0; j < n1; ++j) {
      const Vector g = in.lifting.at(j);
      const ConvectionPair cp = convection_matrix(space, g);
      ops.lift_jacobian.push_back(Phi.transpose() * ((cp.advect + cp.react) * Phi));
      Vector r = load(j) - Phi.transpose() * convection_vector(space, g, g) -
                 Phi.transpose() * (forms.stiffness * g) / in.reynolds;
      if (j > 0) r -= Phi.transpose() * (forms.mass * (g - g_prev)) / in.dt;
      ops.rhs.push_back(std::move(r));
      ops.continuity_rhs.push_back(ops.rp > 0 ? Vector(-(Psi.transpose() * (forms.divergence * g)))
                                              : Vector(0));
      g_prev = g;
    }
  }
  return ops;
}

namespace {

// column-major view of the slice i: Ci(k, j) = C_ijk
Eigen::Map<const Matrix> slice(const ReducedOperators& ops, int i) {
  const int R = ops.rv;
  return Eigen::Map<const Matrix>(ops.tensor.data() + static_cast<std::size_t>(i) * R * R, R, R);
}

// (T(a) a)_i = sum_jk C_ijk a_j a_k
Vector convection(const ReducedOperators& ops, const Vector& a) {
  Vector out(ops.rv);
  Vector tmp(ops.rv);
  for (int i = 0; i < ops.rv; ++i) {
    tmp.noalias() = slice(ops, i) * a;
    out[i] = tmp.dot(a);
  }
  return out;
}

// T(a)(i,k) = sum_j C_ijk a_j plus U(a)(i,j) = sum_k C_ijk a_k
Matrix convection_jacobian(const ReducedOperators& ops, const Vector& a) {
  const int R = ops.rv;
  Matrix J(R, R);
  Vector t(R), u(R);
  for (int i = 0; i < R; ++i) {
    const auto Ci = slice(ops, i);
    t.noalias() = Ci * a;
    u.noalias() = Ci.transpose() * a;
    J.row(i) = (t + u).transpose();
  }
  return J;
}

void check_step(const ReducedOperators& ops, int j) {
  ADAPTROM_REQUIRE(j >= 1 && j <= ops.steps(), ErrorKind::invalid_parameter, "step index out of range");
}

}  // namespace

Vector velocity_residual(const ReducedOperators& ops, int j, const Vector& a, const Vector& a_prev) {
  check_step(ops, j);
  return ops.mass * (a - a_prev) / ops.dt + convection(ops, a) + ops.lift_jacobian[j] * a +
         ops.stiffness * a / ops.reynolds - ops.rhs[j];
}

Matrix velocity_jacobian(const ReducedOperators& ops, int j, const Vector& a) {
  check_step(ops, j);
  return ops.mass / ops.dt + convection_jacobian(ops, a) + ops.lift_jacobian[j] + ops.stiffness / ops.reynolds;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

RomTrajectory start_trajectory(const ReducedOperators& ops, const Vector& a0) {
  ADAPTROM_REQUIRE(a0.size() == ops.rv, ErrorKind::dimension_mismatch,
                   "initial coefficients do not match the basis");
  RomTrajectory tr;
  for (int j = 0; j <= ops.steps(); ++j) tr.times.push_back(j * ops.dt);
  tr.velocity.push_back(a0);
  tr.newton_iterations.push_back(0);
  return tr;
}

}  // namespace

RomTrajectory solve_velocity_rom(const ReducedOperators& ops, const Vector& a0, const NewtonParams& newton) {
  RomTrajectory tr = start_trajectory(ops, a0);
  const auto t0 = Clock::now();
  Vector a = a0;
  for (int j = 1; j <= ops.steps(); ++j) {
    const Vector a_prev = a;
    Vector r = velocity_residual(ops, j, a, a_prev);
    const double r0 = r.norm();
    std::vector<double> history{r0};
    int it = 0;
    while (r.norm() > std::max(newton.abs_tol, newton.rel_tol * r0)) {
      if (it == newton.max_iterations || !std::isfinite(r.norm()))
        throw NonConvergenceError("reduced Newton did not converge at step " + std::to_string(j), history);
      a -= velocity_jacobian(ops, j, a).partialPivLu().solve(r);
      r = velocity_residual(ops, j, a, a_prev);
      history.push_back(r.norm());
      ++it;
    }
    tr.velocity.push_back(a);
    tr.newton_iterations.push_back(it);
  }
  tr.solve_seconds = seconds_since(t0);
  return tr;
}

RomTrajectory solve_velocity_pressure_rom(const ReducedOperators& ops, const Vector& a0,
                                          const NewtonParams& newton, double min_rcond) {
  RomTrajectory tr = start_trajectory(ops, a0);
  tr.pressure.push_back(Vector());
  const int R = ops.rv, P = ops.rp;
  const auto t0 = Clock::now();
  Vector a = a0;
  Vector p = Vector::Zero(P);
  for (int j = 1; j <= ops.steps(); ++j) {
    const Vector a_prev = a;
    auto residual = [&](const Vector& av, const Vector& pv) {
      Vector r(R + P);
      r.head(R) = velocity_residual(ops, j, av, a_prev) + ops.coupling.transpose() * pv;
      r.tail(P) = ops.coupling * av - ops.continuity_rhs[j];
      return r;
    };
    Vector r = residual(a, p);
    const double r0 = r.norm();
    std::vector<double> history{r0};
    int it = 0;
    while (r.norm() > std::max(newton.abs_tol, newton.rel_tol * r0)) {
      if (it == newton.max_iterations || !std::isfinite(r.norm()))
        throw NonConvergenceError("reduced Newton did not converge at step " + std::to_string(j), history);
      Matrix K = Matrix::Zero(R + P, R + P);
      K.topLeftCorner(R, R) = velocity_jacobian(ops, j, a);
      K.topRightCorner(R, P) = ops.coupling.transpose();
      K.bottomLeftCorner(P, R) = ops.coupling;
      const Eigen::PartialPivLU<Matrix> lu(K);
      ADAPTROM_REQUIRE(lu.rcond() >= min_rcond, ErrorKind::factorization,
                       "reduced saddle matrix is singular (rcond " + std::to_string(lu.rcond()) + ")");
      const Vector dx = lu.solve(r);
      a -= dx.head(R);
      p -= dx.tail(P);
      r = residual(a, p);
      history.push_back(r.norm());
      ++it;
    }
    tr.velocity.push_back(a);
    tr.pressure.push_back(p);
    tr.newton_iterations.push_back(it);
  }
  tr.solve_seconds = seconds_since(t0);
  return tr;
}

Vector reduced_initial_condition(const Vector& y0, const Matrix& basis, const SparseMatrix& stiffness) {
  ADAPTROM_REQUIRE(y0.size() == basis.rows(), ErrorKind::dimension_mismatch,
                   "initial field does not match the basis");
  if (basis.cols() == 0) return Vector(0);
  const Matrix G = basis.transpose() * (stiffness * basis);
  return G.ldlt().solve(basis.transpose() * (stiffness * y0));
}

}  // namespace adaptrom
