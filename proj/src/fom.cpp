#include <chrono>

#include "adaptrom/adapt.hpp"
#include "adaptrom/nssolver.hpp"

namespace adaptrom {

SnapshotSet run_fom(const FomParams& params, const StepCallback& progress) {
  ADAPTROM_REQUIRE(params.steps >= 1 && params.t_end > 0, ErrorKind::invalid_parameter,
                   "need at least one time step and a positive final time");
  ADAPTROM_REQUIRE(params.eps > 0, ErrorKind::invalid_parameter, "tolerance must be positive");
  const auto clock_start = std::chrono::steady_clock::now();

  SnapshotSet out;
  out.reynolds = params.reynolds;
  out.dt = params.dt();
  out.t_end = params.t_end;
  out.eps = params.eps;
  out.theta = params.theta;
  out.grid = params.grid;
  out.boundary = params.boundary.name;
  out.init = criss_cross_init(params.grid);

  auto init_space = build_space(out.init);
  Vector y0 = params.initial_velocity ? interpolate_velocity(*init_space, params.initial_velocity)
                                      : Vector::Zero(init_space->velocity_dofs());
  for (int d : init_space->dirichlet_velocity_dofs()) y0[d] = 0.0;
  out.initial = FeField::velocity(init_space, std::move(y0));
  out.initial_lifting = make_lifting(*init_space, params.boundary, 0.0);

  Triangulation start = out.init;
  FeField prev = out.initial;
  for (int j = 1; j <= params.steps; ++j) {
    auto r = adaptive_step(j, start, out.init, prev, params);
    prev = r.step.velocity;
    start = std::move(r.next_start);
    out.steps.push_back(std::move(r.step));
    if (progress) progress(j, out.steps.back());
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return out;
}

}  // namespace adaptrom
