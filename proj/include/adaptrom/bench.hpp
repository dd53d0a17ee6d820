#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adaptrom/nssolver.hpp"
#include "adaptrom/pod.hpp"
#include "adaptrom/rom.hpp"
#include "adaptrom/romspace.hpp"

namespace adaptrom {

/// Smooth startup factor: 1 - (1 - cos((0.1 - t) pi / 0.1))^2 / 4 on
/// [0, 0.1), then 1.
double lid_time_factor(double t);
/// Tangential lid profile on the top edge; zero on the other sides.
double lid_profile(Point x);
/// x-component of the lid velocity y_D(t, x) = lid_time_factor(t) * lid_profile(x).
double lid_velocity(double t, Point x);
/// Separable Dirichlet data of the regularized cavity.
BoundaryData cavity_boundary();
/// Boundary data recorded under `name` in a snapshot archive.
BoundaryData boundary_by_name(const std::string& name);

struct CavityConfig {
  double reynolds = 100.0;
  int steps = 100;
  double t_end = 1.0;
  double eps = 0.01;
  double theta = 0.1;
  int grid = 8;
  int rv = 30;
  int rp = 0;  // 0: same as rv
  RomMethod method = RomMethod::divfree2;
  int max_cells = 0;  // FOM triangle budget, 0 = unlimited
  std::string snapshots;  // archive directory; loaded when present
  std::string out;

  /// Throws invalid_parameter unless Re > 0, 0 < theta < 1, n >= 1, Rv >= 1.
  void validate() const;
  FomParams fom_params() const;
  int pressure_size() const { return rp > 0 ? rp : rv; }
};

/// Snapshots interpolated onto the overlay of all step meshes.
struct OfflineData {
  std::shared_ptr<const SnapshotSet> fom;
  ReferencePair ref;
  Matrix velocity;  // homogeneous y_h^j, j = 1..n
  Matrix pressure;
  Vector initial;   // homogeneous y_h^0
  Vector weights;   // dt for j = 1..n
  BoundaryData boundary;
  Vector shape;                     // separable data: G with g^j = s_j G
  std::vector<double> factors;      // s(t^j), j = 0..n
  std::vector<Vector> liftings;     // non-separable data: g^j, j = 0..n
  double seconds = 0.0;             // overlay, space, forms and interpolation

  bool separable() const { return liftings.empty(); }
  int steps() const { return static_cast<int>(velocity.cols()); }
  double dt() const { return fom->dt; }
  /// g^j on the reference space.
  Vector lifting(int j) const;

  static OfflineData build(std::shared_ptr<const SnapshotSet> fom, const BoundaryData& boundary);
};

/// A reduced model of one method at its largest size. The operators of a
/// smaller model are restrictions of `ops`.
struct RomModel {
  RomMethod method = RomMethod::divfree1;
  int rv = 0, rp = 0;      // largest sizes
  Matrix velocity_basis;   // rv columns, or 2 rv for supremizer-enriched models
  Matrix pressure_basis;
  /// Homogeneous reduced field: velocity_basis a^j + s_j offset (separable)
  /// or + offsets[j]; the offset is the lifting used minus g^j.
  Vector offset;
  std::vector<Vector> offsets;
  ReducedOperators ops;

  /// Column and pressure selection of the model with rv' velocity modes.
  std::vector<int> velocity_columns(int r) const;
  int pressure_columns(int r) const { return has_pressure(method) ? std::min(r, rp) : 0; }
  ReducedOperators restricted(int r) const;
  Vector offset_at(int j, const std::vector<double>& factors) const;
};

/// Stage timings in seconds, named like the rows of the timing table.
/// Stages a method does not use are absent.
using StageTimes = std::map<std::string, double>;

/// Builds the models of all methods from one offline data set, sharing
/// projections, POD bases and supremizers between methods.
class ModelFactory {
 public:
  explicit ModelFactory(const OfflineData& data);
  ~ModelFactory();

  /// Model with `rv` velocity modes and, for the velocity-pressure
  /// methods, `rp` pressure modes and supremizers (0: rp = rv). `times`
  /// receives the offline stage costs of this method, shared ingredients
  /// included.
  RomModel build(RomMethod method, int rv, int rp = 0, StageTimes* times = nullptr);

 private:
  struct Cache;
  const OfflineData& data_;
  std::unique_ptr<Cache> cache_;
};

/// (sum_j dt ||y_h^j - y_R^j||_V^2)^(1/2) / (sum_j dt ||y_h^j||_V^2)^(1/2)
/// with y_R^j = basis a^j + offset^j, all homogeneous parts on the
/// reference space. Throws when the snapshots vanish.
double relative_velocity_error(const Matrix& snapshots, const Vector& weights, const Matrix& basis,
                               const std::vector<Vector>& coefficients, const std::vector<Vector>& offsets,
                               const SparseMatrix& stiffness);

/// Error evaluation for every sub-model of one RomModel through Gram
/// matrices of the largest basis.
class ErrorEvaluator {
 public:
  ErrorEvaluator(const OfflineData& data, const RomModel& model);

  /// Relative error of a trajectory of the sub-model with r velocity modes.
  double rom_error(int r, const RomTrajectory& tr) const;
  /// Relative error of the best approximation of y_h^j - offset^j in the
  /// span of the sub-model's velocity basis.
  double projection_error(int r) const;

 private:
  std::vector<int> cols(int r) const { return model_.velocity_columns(r); }
  double squared_error(const std::vector<int>& idx, int j, const Vector& a) const;

  const RomModel& model_;
  Vector weights_;
  Matrix gram_;         // Phi^T S Phi
  Matrix basis_snap_;   // Phi^T S W_j, one column per j = 1..n
  Matrix basis_off_;    // Phi^T S D_j
  Vector snap_norm_;    // ||W_j||^2
  Vector snap_off_;     // (W_j, D_j)
  Vector off_norm_;     // ||D_j||^2
  double denominator_ = 0.0;
};

/// Reduced initial condition of a model from the offline data.
Vector initial_coefficients(const OfflineData& data, const RomModel& model, int r);

/// Solves the sub-model with r velocity modes. A reduced Newton failure or
/// a singular reduced saddle matrix propagates as an Error.
RomTrajectory solve_model(const OfflineData& data, const RomModel& model, int r,
                          const NewtonParams& newton = {});

struct SweepRow {
  int r = 0;
  RomMethod method = RomMethod::divfree1;
  double rel_err = 0.0;          // +inf when the reduced solve failed
  double projection_err = 0.0;
  std::string failure;           // error text of a failed solve
};

struct SweepOptions {
  std::vector<RomMethod> methods = all_methods();
  std::vector<int> sizes;  // velocity sizes R
  int threads = 1;         // concurrent solves per method
};

/// Every method at every size; models are built once at the largest size.
std::vector<SweepRow> run_sweep(const OfflineData& data, const SweepOptions& options);

struct PipelineResult {
  CavityConfig config;
  std::shared_ptr<const SnapshotSet> fom;
  RomTrajectory trajectory;
  double rel_err = 0.0;
  double projection_err = 0.0;
  StageTimes times;
};

/// Snapshots (run or loaded), reference space, bases, reduced solve, error
/// and stage timings for one method and size. Errors are rethrown with the
/// failing stage in the message.
PipelineResult run_pipeline(const CavityConfig& config);

/// Snapshots of a config: loaded from config.snapshots when that holds an
/// archive, else computed (and saved there when the path is set).
std::shared_ptr<const SnapshotSet> obtain_snapshots(const CavityConfig& config, bool* loaded = nullptr);

/// Row names of the timing table in order.
const std::vector<std::string>& timing_stages();

/// CSV with header "R,method,rel_err".
void write_sweep_csv(const std::filesystem::path& file, const std::vector<SweepRow>& rows);
/// CSV with header "R,method,proj_err".
void write_projection_csv(const std::filesystem::path& file, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& file);
/// CSV with header "stage,method,seconds"; absent stages are written as "-".
void write_timing_csv(const std::filesystem::path& file, const std::map<RomMethod, StageTimes>& times);
std::map<RomMethod, StageTimes> read_timing_csv(const std::filesystem::path& file);

}  // namespace adaptrom
