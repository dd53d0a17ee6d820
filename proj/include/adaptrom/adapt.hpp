#pragma once

#include <iosfwd>
#include <vector>

#include "adaptrom/nssolver.hpp"

namespace adaptrom {

/// Per-triangle indicators, aligned with the mesh's sorted leaf ids.
struct EstimatorResult {
  std::vector<int> triangles;
  std::vector<double> eta;
  double total = 0.0;
  // squared contributions per triangle
  std::vector<double> element_sq, divergence_sq, jump_sq;
};

/// Residual estimator for one time step, evaluated on the lifted velocity
/// yh = y + g:
///   eta_T^2 = |T| ||f - (yh - yh_prev)/dt - (yh . grad) yh + Re^-1 lap yh - grad p||_T^2
///           + ||div yh||_T^2
///           + 1/2 sum_{interior E of T} h_E ||[Re^-1 grad yh . n_E]||_E^2.
/// The pressure is continuous, so its normal jump vanishes. The time term is
/// integrated on the overlay of the previous and current meshes.
EstimatorResult estimate(const StepProblem& problem, const StepResult& solution,
                         const VectorFunction& forcing = {});

/// Smallest set of triangles whose indicators sum to at least
/// (1 - theta) * total; largest first, ties by ascending triangle id.
MarkSet mark_doerfler(const EstimatorResult& eta, double theta);

struct AdaptiveStepResult {
  SnapshotStep step;
  Triangulation mesh;
  Triangulation next_start;
  std::vector<double> totals;  // estimator total of every solve
};

/// Solve-estimate-mark-refine for time level j on top of `start`.
AdaptiveStepResult adaptive_step(int j, const Triangulation& start, const Triangulation& init,
                                 const FeField& y_prev, const FomParams& params);

/// Writes "triangle,eta,generation" rows.
void write_estimator_csv(std::ostream& out, const EstimatorResult& eta, const Triangulation& mesh);

}  // namespace adaptrom
