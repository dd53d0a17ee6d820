#include "adaptrom/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>

#include "adaptrom/error.hpp"
#include "adaptrom/io.hpp"

namespace adaptrom {

namespace {

double ramp(double s) {
  const double c = 1.0 - std::cos(s * std::numbers::pi / 0.1);
  return 1.0 - 0.25 * c * c;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn and returns its wall time.
template <class F>
double timed(F&& fn) {
  const auto start = Clock::now();
  fn();
  return seconds_since(start);
}

}  // namespace

double lid_time_factor(double t) { return t < 0.1 ? ramp(0.1 - t) : 1.0; }

double lid_profile(Point x) {
  if (x.y != 1.0) return 0.0;
  if (x.x <= 0.1) return ramp(0.1 - x.x);
  if (x.x < 0.9) return 1.0;
  return ramp(x.x - 0.9);
}

double lid_velocity(double t, Point x) { return lid_time_factor(t) * lid_profile(x); }

BoundaryData cavity_boundary() {
  BoundaryData d;
  d.name = "cavity_lid";
  d.value = [](double t, Point x) { return Vec2{lid_velocity(t, x), 0.0}; };
  d.time_factor = lid_time_factor;
  d.shape = [](Point x) { return Vec2{lid_profile(x), 0.0}; };
  return d;
}

BoundaryData boundary_by_name(const std::string& name) {
  if (name == "cavity_lid") return cavity_boundary();
  if (name == "homogeneous") return BoundaryData::homogeneous();
  throw Error(ErrorKind::invalid_parameter, "unknown boundary data '" + name + "'");
}

// ---------------------------------------------------------------- config

void CavityConfig::validate() const {
  ADAPTROM_REQUIRE(reynolds > 0, ErrorKind::invalid_parameter, "Reynolds number must be positive");
  ADAPTROM_REQUIRE(theta > 0 && theta < 1, ErrorKind::invalid_parameter, "theta must lie in (0, 1)");
  ADAPTROM_REQUIRE(steps >= 1, ErrorKind::invalid_parameter, "need at least one time step");
  ADAPTROM_REQUIRE(rv >= 1, ErrorKind::invalid_parameter, "need at least one velocity mode");
  ADAPTROM_REQUIRE(rp >= 0, ErrorKind::invalid_parameter, "pressure size must not be negative");
  ADAPTROM_REQUIRE(t_end > 0 && eps > 0 && grid >= 1 && max_cells >= 0, ErrorKind::invalid_parameter,
                   "final time, tolerance and grid must be positive");
}

FomParams CavityConfig::fom_params() const {
  FomParams p;
  p.grid = grid;
  p.reynolds = reynolds;
  p.steps = steps;
  p.t_end = t_end;
  p.eps = eps;
  p.theta = theta;
  p.max_cells = max_cells;
  p.boundary = cavity_boundary();
  return p;
}

// ---------------------------------------------------------------- offline data

Vector OfflineData::lifting(int j) const { return separable() ? Vector(factors[j] * shape) : liftings[j]; }

OfflineData OfflineData::build(std::shared_ptr<const SnapshotSet> fom, const BoundaryData& boundary) {
  ADAPTROM_REQUIRE(fom && fom->size() >= 1, ErrorKind::invalid_parameter, "no snapshots");
  const auto start = Clock::now();
  OfflineData d;
  d.fom = fom;
  d.boundary = boundary;
  std::vector<Triangulation> meshes;
  for (const auto& st : fom->steps) meshes.push_back(st.space->mesh());
  d.ref = ReferencePair::build(overlay_all(meshes));
  const auto& s = *d.ref.space;
  const int n = fom->size();
  d.velocity.resize(s.velocity_dofs(), n);
  d.pressure.resize(s.pressure_dofs(), n);
  for (int j = 0; j < n; ++j) {
    d.velocity.col(j) = lagrange_interp(fom->steps[j].velocity, d.ref.space).coeffs;
    d.pressure.col(j) = lagrange_interp(fom->steps[j].pressure, d.ref.space).coeffs;
  }
  d.initial = lagrange_interp(fom->initial, d.ref.space).coeffs;
  d.weights = Vector::Constant(n, fom->dt);
  if (boundary.separable()) {
    d.shape = boundary_interpolant(s, boundary.shape);
    for (int j = 0; j <= n; ++j) d.factors.push_back(boundary.time_factor(fom->time(j)));
  } else {
    for (int j = 0; j <= n; ++j) {
      const double t = fom->time(j);
      d.liftings.push_back(boundary_interpolant(s, [&](Point x) { return boundary.value(t, x); }));
    }
  }
  d.seconds = seconds_since(start);
  return d;
}

// ---------------------------------------------------------------- models

namespace {

bool is_stabilized(RomMethod m) { return m == RomMethod::stabilized1 || m == RomMethod::stabilized2; }

}  // namespace

std::vector<int> RomModel::velocity_columns(int r) const {
  ADAPTROM_REQUIRE(r >= 1 && r <= rv, ErrorKind::invalid_parameter, "model size out of range");
  std::vector<int> idx;
  for (int i = 0; i < r; ++i) idx.push_back(i);
  if (is_stabilized(method))
    for (int i = 0; i < pressure_columns(r); ++i) idx.push_back(rv + i);
  return idx;
}

ReducedOperators RomModel::restricted(int r) const {
  if (r == rv) return ops;
  return ops.restrict(velocity_columns(r), pressure_columns(r));
}

Vector RomModel::offset_at(int j, const std::vector<double>& factors) const {
  if (!offsets.empty()) return offsets[j];
  return factors[j] * offset;
}


namespace {

// A value computed once together with the wall time it took.
template <class T>
struct Timed {
  T value;
  double seconds = 0.0;
};

}  // namespace

struct ModelFactory::Cache {
  std::unique_ptr<DivFreeProjector> projector;
  double projector_seconds = 0;
  std::optional<Timed<ModifiedLiftings>> lifts;
  std::optional<Timed<Matrix>> projected;  // P_0(W_j)
  std::unique_ptr<SupremizerSolver> supremizer;
  double supremizer_seconds = 0;
  // POD bases by kind and size
  std::map<std::pair<int, int>, Timed<PodBasis>> pods;
  std::map<std::pair<int, int>, Timed<Matrix>> supremizers;
};

ModelFactory::ModelFactory(const OfflineData& data) : data_(data), cache_(std::make_unique<Cache>()) {}
ModelFactory::~ModelFactory() = default;

RomModel ModelFactory::build(RomMethod method, int rv, int rp, StageTimes* times) {
  const int n = data_.steps();
  if (rp <= 0) rp = rv;
  ADAPTROM_REQUIRE(rv >= 1 && rv <= n && rp <= n, ErrorKind::invalid_parameter,
                   "basis sizes must lie between 1 and the number of snapshots");
  Cache& c = *cache_;
  const auto& s = *data_.ref.space;
  const auto& forms = data_.ref.forms;
  StageTimes local;
  auto charge = [&](const char* stage, double t) { local[stage] += t; };

  auto projector = [&]() -> const DivFreeProjector& {
    if (!c.projector)
      c.projector_seconds = timed([&] { c.projector = std::make_unique<DivFreeProjector>(s, forms); });
    charge("div-free projection", c.projector_seconds);
    return *c.projector;
  };
  auto lifts = [&]() -> const ModifiedLiftings& {
    const DivFreeProjector& P = projector();
    if (!c.lifts) {
      Timed<ModifiedLiftings> l;
      l.seconds = timed([&] {
        l.value = data_.separable() ? modified_liftings_separable(P, data_.shape, data_.factors)
                                    : modified_liftings(P, data_.liftings);
      });
      c.lifts = std::move(l);
    }
    charge("div-free projection", c.lifts->seconds);
    return c.lifts->value;
  };
  enum PodKind { plain_velocity, shifted_velocity, projected_velocity, pressure };
  auto pod = [&](PodKind kind, int count) -> const PodBasis& {
    const auto key = std::make_pair(static_cast<int>(kind), count);
    auto it = c.pods.find(key);
    if (it == c.pods.end()) {
      Timed<PodBasis> b;
      Matrix shifted;
      const Matrix* U = &data_.velocity;
      if (kind == shifted_velocity) {
        const ModifiedLiftings& l = lifts();
        shifted = data_.velocity;
        for (int j = 1; j <= n; ++j) shifted.col(j - 1) -= l.correction_at(j);
        U = &shifted;
      } else if (kind == projected_velocity) {
        U = &c.projected->value;
      } else if (kind == pressure) {
        U = &data_.pressure;
      }
      b.seconds = timed([&] {
        b.value = kind == pressure
                      ? compute_pod(*U, data_.weights, count, forms.pressure_mass, InnerProduct::pressure_l2, s.id())
                      : compute_pod(*U, data_.weights, count, forms.stiffness, InnerProduct::velocity_h1, s.id());
      });
      ADAPTROM_REQUIRE(b.value.size() == count, ErrorKind::rank_deficient,
                       "snapshots span fewer than " + std::to_string(count) + " POD modes");
      it = c.pods.emplace(key, std::move(b)).first;
    }
    charge(kind == pressure ? "pressure POD" : "velocity POD", it->second.seconds);
    return it->second.value;
  };
  auto supremizer = [&]() -> const SupremizerSolver& {
    if (!c.supremizer)
      c.supremizer_seconds = timed([&] { c.supremizer = std::make_unique<SupremizerSolver>(s, forms); });
    charge("supremizers", c.supremizer_seconds);
    return *c.supremizer;
  };

  RomModel m;
  m.method = method;
  m.rv = rv;
  m.rp = has_pressure(method) ? rp : 0;
  OperatorInput in;
  in.space = &s;
  in.forms = &forms;
  in.reynolds = data_.fom->reynolds;
  in.dt = data_.dt();

  const bool divergence_free_lifting =
      method == RomMethod::divfree1 || method == RomMethod::divfree2 || method == RomMethod::naive;
  if (divergence_free_lifting) {
    const ModifiedLiftings& l = lifts();
    in.lifting = modified_series(l);
    if (l.separable) {
      m.offset = l.correction_shape;
    } else {
      for (int j = 0; j <= n; ++j) m.offsets.push_back(l.correction_at(j));
    }
  } else {
    if (data_.separable()) {
      in.lifting.separable = true;
      in.lifting.shape = data_.shape;
      in.lifting.factors = data_.factors;
    } else {
      in.lifting.values = data_.liftings;
    }
    m.offset = Vector::Zero(s.velocity_dofs());
  }

  switch (method) {
    case RomMethod::divfree1: {
      const DivFreeProjector& P = projector();
      if (!c.projected) {
        Timed<Matrix> w;
        w.seconds = timed([&] { w.value = P.project_columns(data_.velocity); });
        c.projected = std::move(w);
      }
      charge("div-free projection", c.projected->seconds);
      m.velocity_basis = pod(projected_velocity, rv).modes;
      break;
    }
    case RomMethod::divfree2: {
      const PodBasis& b = pod(shifted_velocity, rv);
      const DivFreeProjector& P = projector();
      // the projected modes are not cached: their cost belongs to this method
      charge("div-free projection", timed([&] { m.velocity_basis = P.project_columns(b.modes); }));
      break;
    }
    case RomMethod::naive:
      m.velocity_basis = pod(shifted_velocity, rv).modes;
      break;
    case RomMethod::unstable:
      m.velocity_basis = pod(plain_velocity, rv).modes;
      m.pressure_basis = pod(pressure, rp).modes;
      break;
    case RomMethod::stabilized1:
    case RomMethod::stabilized2: {
      const Matrix& phi = pod(plain_velocity, rv).modes;
      const PodBasis& psi = pod(pressure, rp);
      const SupremizerSolver& T = supremizer();
      const auto key = std::make_pair(static_cast<int>(method), rp);
      auto it = c.supremizers.find(key);
      if (it == c.supremizers.end()) {
        Timed<Matrix> sup;
        sup.seconds = timed([&] {
          sup.value = method == RomMethod::stabilized1 ? T.apply(psi.modes)
                                                       : supremizers_from_snapshots(T, data_.pressure, psi.xi);
        });
        it = c.supremizers.emplace(key, std::move(sup)).first;
      }
      charge("supremizers", it->second.seconds);
      m.velocity_basis.resize(phi.rows(), rv + rp);
      m.velocity_basis << phi, it->second.value;
      m.pressure_basis = psi.modes;
      break;
    }
  }

  in.velocity_basis = m.velocity_basis;
  in.pressure_basis = m.pressure_basis;
  charge("ROM setup", timed([&] { m.ops = build_reduced_operators(in); }));
  if (times) *times = std::move(local);
  return m;
}

// ---------------------------------------------------------------- errors

double relative_velocity_error(const Matrix& W, const Vector& weights, const Matrix& basis,
                               const std::vector<Vector>& coefficients, const std::vector<Vector>& offsets,
                               const SparseMatrix& S) {
  const int n = static_cast<int>(W.cols());
  ADAPTROM_REQUIRE(weights.size() == n && static_cast<int>(coefficients.size()) == n + 1 &&
                       (offsets.empty() || static_cast<int>(offsets.size()) == n + 1),
                   ErrorKind::dimension_mismatch, "one coefficient vector per time level required");
  double num = 0.0, den = 0.0;
  for (int j = 1; j <= n; ++j) {
    Vector e = W.col(j - 1) - basis * coefficients[j];
    if (!offsets.empty()) e -= offsets[j];
    num += weights[j - 1] * e.dot(S * e);
    den += weights[j - 1] * W.col(j - 1).dot(S * W.col(j - 1));
  }
  ADAPTROM_REQUIRE(den > 0, ErrorKind::invalid_parameter, "reference velocities vanish");
  return std::sqrt(num / den);
}

ErrorEvaluator::ErrorEvaluator(const OfflineData& data, const RomModel& model)
    : model_(model), weights_(data.weights) {
  const SparseMatrix& S = data.ref.forms.stiffness;
  const Matrix& phi = model.velocity_basis;
  const Matrix& W = data.velocity;
  const int n = data.steps();
  const Matrix S_phi = S * phi;
  gram_ = phi.transpose() * S_phi;
  basis_snap_ = S_phi.transpose() * W;
  basis_off_.resize(phi.cols(), n);
  snap_norm_.resize(n);
  snap_off_.resize(n);
  off_norm_.resize(n);
  for (int j = 1; j <= n; ++j) {
    const Vector d = model.offset_at(j, data.factors);
    const Vector Sd = S * d;
    const Vector SW = S * W.col(j - 1);
    basis_off_.col(j - 1) = phi.transpose() * Sd;
    snap_norm_[j - 1] = W.col(j - 1).dot(SW);
    snap_off_[j - 1] = W.col(j - 1).dot(Sd);
    off_norm_[j - 1] = d.dot(Sd);
    denominator_ += weights_[j - 1] * snap_norm_[j - 1];
  }
  ADAPTROM_REQUIRE(denominator_ > 0, ErrorKind::invalid_parameter, "reference velocities vanish");
}

double ErrorEvaluator::squared_error(const std::vector<int>& idx, int j, const Vector& a) const {
  const Vector b = basis_snap_.col(j - 1)(idx);
  const Vector c = basis_off_.col(j - 1)(idx);
  const double e = snap_norm_[j - 1] - 2 * snap_off_[j - 1] + off_norm_[j - 1] - 2 * a.dot(b - c) +
                   a.dot(gram_(idx, idx) * a);
  return std::max(e, 0.0);
}

double ErrorEvaluator::rom_error(int r, const RomTrajectory& tr) const {
  const auto idx = cols(r);
  const int n = static_cast<int>(weights_.size());
  ADAPTROM_REQUIRE(static_cast<int>(tr.velocity.size()) == n + 1, ErrorKind::dimension_mismatch,
                   "trajectory length does not match the snapshots");
  double num = 0.0;
  for (int j = 1; j <= n; ++j) {
    ADAPTROM_REQUIRE(tr.velocity[j].size() == static_cast<int>(idx.size()), ErrorKind::dimension_mismatch,
                     "trajectory size does not match the model");
    num += weights_[j - 1] * squared_error(idx, j, tr.velocity[j]);
  }
  return std::sqrt(num / denominator_);
}

double ErrorEvaluator::projection_error(int r) const {
  const auto idx = cols(r);
  const Eigen::LDLT<Matrix> G(gram_(idx, idx));
  double num = 0.0;
  for (int j = 1; j <= static_cast<int>(weights_.size()); ++j) {
    const Vector rhs = basis_snap_.col(j - 1)(idx) - basis_off_.col(j - 1)(idx);
    num += weights_[j - 1] * squared_error(idx, j, G.solve(rhs));
  }
  return std::sqrt(num / denominator_);
}

// ---------------------------------------------------------------- solves

Vector initial_coefficients(const OfflineData& data, const RomModel& model, int r) {
  const auto idx = model.velocity_columns(r);
  const Vector y0 = data.initial - model.offset_at(0, data.factors);
  return reduced_initial_condition(y0, model.velocity_basis(Eigen::all, idx), data.ref.forms.stiffness);
}

RomTrajectory solve_model(const OfflineData& data, const RomModel& model, int r, const NewtonParams& newton) {
  const ReducedOperators ops = model.restricted(r);
  const Vector a0 = initial_coefficients(data, model, r);
  RomTrajectory tr = has_pressure(model.method) ? solve_velocity_pressure_rom(ops, a0, newton)
                                                : solve_velocity_rom(ops, a0, newton);
  tr.method = model.method;
  return tr;
}

std::vector<SweepRow> run_sweep(const OfflineData& data, const SweepOptions& options) {
  ADAPTROM_REQUIRE(!options.sizes.empty() && !options.methods.empty(), ErrorKind::invalid_parameter,
                   "sweep needs methods and sizes");
  const int r_max = *std::max_element(options.sizes.begin(), options.sizes.end());
  ModelFactory factory(data);
  std::vector<SweepRow> rows;
  for (RomMethod method : options.methods) {
    const RomModel model = factory.build(method, r_max);
    const ErrorEvaluator eval(data, model);
    auto run_one = [&](int r) {
      SweepRow row;
      row.r = r;
      row.method = method;
      row.projection_err = eval.projection_error(r);
      try {
        row.rel_err = eval.rom_error(r, solve_model(data, model, r));
      } catch (const Error& e) {
        row.rel_err = std::numeric_limits<double>::infinity();
        row.failure = e.what();
      }
      return row;
    };
    if (options.threads <= 1) {
      for (int r : options.sizes) rows.push_back(run_one(r));
      continue;
    }
    // the reduced operators are read-only here; solves are independent
    std::vector<std::future<SweepRow>> pending;
    std::size_t next = 0;
    std::vector<SweepRow> done(options.sizes.size());
    while (next < options.sizes.size()) {
      pending.clear();
      const std::size_t first = next;
      for (int t = 0; t < options.threads && next < options.sizes.size(); ++t, ++next)
        pending.push_back(std::async(std::launch::async, run_one, options.sizes[next]));
      for (std::size_t k = 0; k < pending.size(); ++k) done[first + k] = pending[k].get();
    }
    rows.insert(rows.end(), done.begin(), done.end());
  }
  return rows;
}

// ---------------------------------------------------------------- pipeline

std::shared_ptr<const SnapshotSet> obtain_snapshots(const CavityConfig& config, bool* loaded) {
  config.validate();
  const fs::path dir = config.snapshots;
  if (!config.snapshots.empty() && fs::exists(dir / "manifest.json")) {
    auto set = std::make_shared<SnapshotSet>(load_snapshots(dir));
    ADAPTROM_REQUIRE(set->reynolds == config.reynolds && set->size() == config.steps &&
                         set->t_end == config.t_end && set->eps == config.eps && set->theta == config.theta &&
                         set->grid == config.grid,
                     ErrorKind::invalid_parameter,
                     "snapshot archive " + dir.string() + " was computed with other parameters");
    if (loaded) *loaded = true;
    return set;
  }
  auto set = std::make_shared<SnapshotSet>(run_fom(config.fom_params()));
  if (!config.snapshots.empty()) save_snapshots(*set, dir);
  if (loaded) *loaded = false;
  return set;
}

namespace {

template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const CavityConfig& config) {
  stage("config", [&] { config.validate(); });
  PipelineResult out;
  out.config = config;
  out.fom = stage("FE solution", [&] { return obtain_snapshots(config); });
  out.times["FE solution"] = out.fom->wall_seconds;
  const OfflineData data =
      stage("reference FE space", [&] { return OfflineData::build(out.fom, boundary_by_name(out.fom->boundary)); });
  out.times["reference FE space"] = data.seconds;
  ModelFactory factory(data);
  StageTimes build_times;
  const RomModel model = stage("ROM setup", [&] { return factory.build(config.method, config.rv, config.rp, &build_times); });
  for (const auto& [k, v] : build_times) out.times[k] = v;
  out.trajectory = stage("ROM solution", [&] { return solve_model(data, model, config.rv); });
  out.times["ROM solution"] = out.trajectory.solve_seconds;
  const ErrorEvaluator eval(data, model);
  out.rel_err = eval.rom_error(config.rv, out.trajectory);
  out.projection_err = eval.projection_error(config.rv);
  return out;
}

const std::vector<std::string>& timing_stages() {
  static const std::vector<std::string> stages{"FE solution",         "reference FE space", "velocity POD",
                                               "pressure POD",        "div-free projection", "supremizers",
                                               "ROM setup",           "ROM solution"};
  return stages;
}

// ---------------------------------------------------------------- CSV

namespace {

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, const fs::path& file) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  ADAPTROM_REQUIRE(!s.empty() && end == s.c_str() + s.size(), ErrorKind::io,
                   "bad number '" + s + "' in " + file.string());
  return x;
}

std::ofstream open_csv(const fs::path& file, const char* header) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::trunc);
  ADAPTROM_REQUIRE(out.good(), ErrorKind::io, "cannot write " + file.string());
  out << header << '\n';
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& file, const char* header) {
  std::ifstream in(file);
  ADAPTROM_REQUIRE(in.good(), ErrorKind::io, "cannot read " + file.string());
  std::string line;
  ADAPTROM_REQUIRE(std::getline(in, line) && line == header, ErrorKind::io,
                   "missing header '" + std::string(header) + "' in " + file.string());
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split(line));
    ADAPTROM_REQUIRE(rows.back().size() == 3, ErrorKind::io, "expected three columns in " + file.string());
  }
  return rows;
}

void write_rows(const fs::path& file, const char* header, const std::vector<SweepRow>& rows, bool projection) {
  auto out = open_csv(file, header);
  for (const auto& r : rows)
    out << r.r << ',' << to_string(r.method) << ',' << format_double(projection ? r.projection_err : r.rel_err)
        << '\n';
  ADAPTROM_REQUIRE(out.good(), ErrorKind::io, "write failed for " + file.string());
}

}  // namespace

void write_sweep_csv(const fs::path& file, const std::vector<SweepRow>& rows) {
  write_rows(file, "R,method,rel_err", rows, false);
}

void write_projection_csv(const fs::path& file, const std::vector<SweepRow>& rows) {
  write_rows(file, "R,method,proj_err", rows, true);
}

std::vector<SweepRow> read_sweep_csv(const fs::path& file) {
  std::vector<SweepRow> out;
  for (const auto& cells : read_csv(file, "R,method,rel_err")) {
    SweepRow row;
    row.r = static_cast<int>(parse_double(cells[0], file));
    row.method = parse_rom_method(cells[1]);
    row.rel_err = parse_double(cells[2], file);
    out.push_back(row);
  }
  return out;
}

void write_timing_csv(const fs::path& file, const std::map<RomMethod, StageTimes>& times) {
  auto out = open_csv(file, "stage,method,seconds");
  for (const auto& stage_name : timing_stages()) {
    for (const auto& [method, t] : times) {
      const auto it = t.find(stage_name);
      out << stage_name << ',' << to_string(method) << ',' << (it == t.end() ? "-" : format_double(it->second))
          << '\n';
    }
  }
  ADAPTROM_REQUIRE(out.good(), ErrorKind::io, "write failed for " + file.string());
}

std::map<RomMethod, StageTimes> read_timing_csv(const fs::path& file) {
  std::map<RomMethod, StageTimes> out;
  for (const auto& cells : read_csv(file, "stage,method,seconds")) {
    auto& t = out[parse_rom_method(cells[1])];
    if (cells[2] != "-") t[cells[0]] = parse_double(cells[2], file);
  }
  return out;
}

}  // namespace adaptrom
