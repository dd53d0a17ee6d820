#include "adaptrom/nssolver.hpp"

#include <cmath>

namespace adaptrom {

BoundaryData BoundaryData::homogeneous() {
  BoundaryData d;
  d.name = "homogeneous";
  d.value = [](double, Point) { return Vec2{0.0, 0.0}; };
  d.time_factor = [](double) { return 0.0; };
  d.shape = [](Point) { return Vec2{0.0, 0.0}; };
  return d;
}

Lifting make_lifting(const TaylorHoodSpace& space, const BoundaryData& data, double t) {
  Lifting l;
  l.time = t;
  if (data.separable()) {
    l.time_factor = data.time_factor(t);
    const double s = l.time_factor;
    l.values = boundary_interpolant(space, [&](Point x) {
      const Vec2 v = data.shape(x);
      return Vec2{s * v[0], s * v[1]};
    });
  } else {
    l.values = boundary_interpolant(space, [&](Point x) { return data.value(t, x); });
  }
  return l;
}

StepSystem::StepSystem(const StepProblem& pb) : pb_(pb) {
  const auto& s = *pb.space;
  ADAPTROM_REQUIRE(pb.forms != nullptr, ErrorKind::invalid_parameter, "step problem without forms");
  ADAPTROM_REQUIRE(pb.reynolds > 0 && pb.dt > 0, ErrorKind::invalid_parameter,
                   "Reynolds number and time step must be positive");
  ADAPTROM_REQUIRE(pb.g.size() == s.velocity_dofs() && pb.g_prev.size() == s.velocity_dofs(),
                   ErrorKind::dimension_mismatch, "lifting does not match the step space");
  n_int_ = static_cast<int>(s.interior_velocity_dofs().size());
  n_p_ = s.pressure_dofs();
  const auto& f = *pb.forms;
  history_ = cross_mass(pb.y_prev, s) + f.mass * pb.g_prev;
  load_ = pb.load.size() ? pb.load : Vector::Zero(s.velocity_dofs());
  linear_ = (1.0 / pb.dt) * f.mass + (1.0 / pb.reynolds) * f.stiffness;
  std::vector<int> prows(n_p_);
  for (int k = 0; k < n_p_; ++k) prows[k] = k;
  b_int_ = submatrix(f.divergence, prows, s.interior_velocity_dofs());
}

Vector StepSystem::velocity(const Vector& state) const {
  Vector y = Vector::Zero(pb_.space->velocity_dofs());
  scatter(state.head(n_int_), pb_.space->interior_velocity_dofs(), y);
  return y;
}

Vector StepSystem::pressure(const Vector& state) const { return state.segment(n_int_, n_p_); }

Vector StepSystem::lifted(const Vector& state) const { return velocity(state) + pb_.g; }

Vector StepSystem::pack(const Vector& y_full, const Vector& p) const {
  Vector x = Vector::Zero(size());
  x.head(n_int_) = gather(y_full, pb_.space->interior_velocity_dofs());
  if (p.size()) x.segment(n_int_, n_p_) = p;
  return x;
}

Vector StepSystem::residual(const Vector& state) const {
  const auto& s = *pb_.space;
  const auto& f = *pb_.forms;
  const Vector yh = lifted(state);
  const Vector p = pressure(state);
  const double lambda = state[n_int_ + n_p_];
  const Vector mom = linear_ * yh - history_ / pb_.dt + convection_vector(s, yh, yh) +
                     f.divergence.transpose() * p - load_;
  Vector r(size());
  r.head(n_int_) = gather(mom, s.interior_velocity_dofs());
  r.segment(n_int_, n_p_) = f.divergence * yh + lambda * f.pressure_mean;
  r[n_int_ + n_p_] = f.pressure_mean.dot(p);
  return r;
}

SparseMatrix StepSystem::jacobian(const Vector& state) const {
  const auto& s = *pb_.space;
  const auto conv = convection_matrix(s, lifted(state));
  const SparseMatrix J = linear_ + conv.advect + conv.react;
  const auto& in = s.interior_velocity_dofs();
  return saddle_matrix(submatrix(J, in, in), b_int_, pb_.forms->pressure_mean);
}

StepResult solve_time_step(const StepProblem& pb, const Vector& initial_guess,
                           const NewtonParams& newton) {
  StepSystem sys(pb);
  const auto& s = *pb.space;
  Vector x = sys.pack(initial_guess.size() ? initial_guess : Vector::Zero(s.velocity_dofs()), {});
  StepResult out;
  Vector r = sys.residual(x);
  double r0 = r.norm();
  out.residual_history.push_back(r0);
  const double target = std::max(newton.rel_tol * r0, newton.abs_tol);
  int it = 0;
  while (r.norm() > target) {
    if (it == newton.max_iterations)
      throw NonConvergenceError("Newton did not converge in " + std::to_string(it) + " iterations",
                                out.residual_history);
    SparseLu lu;
    lu.factorize(sys.jacobian(x));
    const Vector dx = lu.solve(r);
    x -= dx;
    r = sys.residual(x);
    ++it;
    out.residual_history.push_back(r.norm());
    ADAPTROM_REQUIRE(std::isfinite(r.norm()), ErrorKind::non_convergence,
                     "Newton iterate is not finite");
    // the update is at round-off level: nothing left to gain
    if (dx.norm() <= 1e-14 * x.norm()) break;
  }
  out.iterations = it;
  Vector p = sys.pressure(x);
  const double area = pb.forms->pressure_mean.sum();
  p.array() -= pb.forms->pressure_mean.dot(p) / area;
  out.velocity = FeField::velocity(pb.space, sys.velocity(x));
  out.pressure = FeField::pressure(pb.space, std::move(p), true);
  return out;
}

double continuity_residual(const TaylorHoodSpace& space, const FormSet& forms, const Vector& yh) {
  ADAPTROM_REQUIRE(yh.size() == space.velocity_dofs(), ErrorKind::dimension_mismatch,
                   "velocity has the wrong length");
  const Vector b = forms.divergence * yh;
  const Vector diag = forms.pressure_mass.diagonal();
  double worst = 0;
  for (int k = 0; k < b.size(); ++k) worst = std::max(worst, std::abs(b[k]) / std::sqrt(diag[k]));
  return worst;
}

}  // namespace adaptrom
