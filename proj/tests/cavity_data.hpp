#pragma once

// A short adaptive cavity run interpolated onto the overlay of its meshes,
// shared by the reduced-space and reduced-model tests.

#include <vector>

#include "adaptrom/bench.hpp"
#include "adaptrom/romspace.hpp"

namespace testsupport {

struct SmallCavity {
  adaptrom::SnapshotSet fom;
  adaptrom::ReferencePair ref;
  adaptrom::Matrix velocity;  // homogeneous snapshots on the reference space, j = 1..n
  adaptrom::Matrix pressure;
  adaptrom::Vector weights;
  adaptrom::Vector shape;  // lifting shape on the reference space
  std::vector<double> factors;  // s(t^j), j = 0..n
};

inline SmallCavity small_cavity(int steps = 6, int max_cells = 700) {
  using namespace adaptrom;
  SmallCavity c;
  FomParams p;
  p.grid = 4;
  p.steps = steps;
  p.t_end = 0.01 * steps;
  p.max_cells = max_cells;
  p.boundary = cavity_boundary();
  c.fom = run_fom(p);
  std::vector<Triangulation> meshes;
  for (const auto& st : c.fom.steps) meshes.push_back(st.space->mesh());
  c.ref = ReferencePair::build(overlay_all(meshes));
  const auto& s = *c.ref.space;
  c.velocity.resize(s.velocity_dofs(), steps);
  c.pressure.resize(s.pressure_dofs(), steps);
  for (int j = 0; j < steps; ++j) {
    c.velocity.col(j) = lagrange_interp(c.fom.steps[j].velocity, c.ref.space).coeffs;
    c.pressure.col(j) = lagrange_interp(c.fom.steps[j].pressure, c.ref.space).coeffs;
  }
  c.weights = Vector::Constant(steps, c.fom.dt);
  c.shape = boundary_interpolant(s, p.boundary.shape);
  for (int j = 0; j <= steps; ++j) c.factors.push_back(p.boundary.time_factor(c.fom.time(j)));
  return c;
}

}  // namespace testsupport
