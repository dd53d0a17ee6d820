#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "adaptrom/bench.hpp"
#include "adaptrom/error.hpp"
#include "adaptrom/io.hpp"

using namespace adaptrom;
using json = nlohmann::json;

namespace {

struct Options {
  CavityConfig config;
  std::string method = "divfree2";
  std::string rom;
  int threads = 1;
  bool quiet = false;
};

void add_run_flags(CLI::App* app, Options& o) {
  app->add_option("--re", o.config.reynolds, "Reynolds number")->capture_default_str();
  app->add_option("--nt", o.config.steps, "number of time steps")->capture_default_str();
  app->add_option("--t-end", o.config.t_end, "final time")->capture_default_str();
  app->add_option("--eps", o.config.eps, "estimator tolerance")->capture_default_str();
  app->add_option("--theta", o.config.theta, "Doerfler marking parameter")->capture_default_str();
  app->add_option("--grid", o.config.grid, "criss-cross cells per side of the initial mesh")->capture_default_str();
  app->add_option("--max-cells", o.config.max_cells, "triangle budget per step, 0 = unlimited")
      ->capture_default_str();
}

void add_rom_flags(CLI::App* app, Options& o) {
  app->add_option("--rv", o.config.rv, "velocity basis size")->capture_default_str();
  app->add_option("--rp", o.config.rp, "pressure basis size (0: same as rv)")->capture_default_str();
  app->add_option("--method", o.method, "divfree1, divfree2, stabilized1, stabilized2, naive, unstable")
      ->capture_default_str();
}

std::shared_ptr<const SnapshotSet> load_required(const Options& o) {
  if (o.config.snapshots.empty()) throw Error(ErrorKind::invalid_parameter, "--snapshots is required");
  return std::make_shared<SnapshotSet>(load_snapshots(o.config.snapshots));
}

OfflineData offline(const std::shared_ptr<const SnapshotSet>& fom, bool quiet) {
  OfflineData d = OfflineData::build(fom, boundary_by_name(fom->boundary));
  if (!quiet)
    std::printf("reference space: %zu triangles, %d velocity dofs, %d pressure dofs (%.2f s)\n",
                d.ref.space->mesh().size(), d.ref.space->velocity_dofs(), d.ref.space->pressure_dofs(), d.seconds);
  return d;
}

int cmd_fom(Options& o) {
  o.config.validate();
  if (o.config.snapshots.empty()) throw Error(ErrorKind::invalid_parameter, "--snapshots is required");
  const auto cb = [&](int j, const SnapshotStep& st) {
    if (!o.quiet)
      std::printf("step %3d  triangles %6zu  estimate %.4e  refinements %2d  newton %d%s\n", j,
                  st.space->mesh().size(), st.estimate, st.refinements, st.newton_iterations,
                  st.tolerance_met ? "" : "  (budget)");
    std::fflush(stdout);
  };
  const SnapshotSet set = run_fom(o.config.fom_params(), cb);
  save_snapshots(set, o.config.snapshots);
  int met = 0;
  for (const auto& st : set.steps) met += st.tolerance_met;
  std::printf("FE solution: %.2f s, tolerance met at %d of %d steps\n", set.wall_seconds, met, set.size());
  return 0;
}

int cmd_pod(Options& o) {
  const auto fom = load_required(o);
  const OfflineData d = offline(fom, o.quiet);
  const fs::path out = o.config.out.empty() ? fs::path("pod") : fs::path(o.config.out);
  const auto& f = d.ref.forms;
  const PodBasis v = compute_pod(d.velocity, d.weights, o.config.rv, f.stiffness, InnerProduct::velocity_h1,
                                 d.ref.space->id());
  const PodBasis p = compute_pod(d.pressure, d.weights, o.config.pressure_size(), f.pressure_mass,
                                 InnerProduct::pressure_l2, d.ref.space->id());
  save_pod(v, out / "velocity");
  save_pod(p, out / "pressure");
  std::printf("velocity POD: %d modes, lambda_1 = %.4e, lambda_R = %.4e\n", v.size(), v.eigenvalues[0],
              v.eigenvalues[v.size() - 1]);
  std::printf("pressure POD: %d modes, lambda_1 = %.4e, lambda_R = %.4e\n", p.size(), p.eigenvalues[0],
              p.eigenvalues[p.size() - 1]);
  return 0;
}

int cmd_build_rom(Options& o) {
  o.config.validate();
  const auto fom = load_required(o);
  const OfflineData d = offline(fom, o.quiet);
  const RomMethod method = parse_rom_method(o.method);
  ModelFactory factory(d);
  StageTimes times;
  const RomModel m = factory.build(method, o.config.rv, o.config.rp, &times);
  const fs::path out = o.config.out.empty() ? fs::path("rom") : fs::path(o.config.out);
  save_operators(m.ops, out / "operators");
  write_matrix(out / "velocity_basis.bin", m.velocity_basis);
  write_matrix(out / "pressure_basis.bin", m.pressure_basis);
  Matrix offsets(m.velocity_basis.rows(), m.offsets.size());
  for (std::size_t j = 0; j < m.offsets.size(); ++j) offsets.col(j) = m.offsets[j];
  write_vector(out / "offset.bin", m.offset);
  write_matrix(out / "offsets.bin", offsets);
  write_vector(out / "initial.bin", initial_coefficients(d, m, m.rv));
  json manifest = {{"format", "adaptrom-model"}, {"method", to_string(method)}, {"rv", m.rv}, {"rp", m.rp}};
  for (const auto& [k, v] : times) manifest["seconds"][k] = v;
  std::ofstream(out / "model.json") << manifest.dump(2) << '\n';
  for (const auto& [k, v] : times) std::printf("%-20s %.3f s\n", k.c_str(), v);
  return 0;
}

RomModel load_model(const fs::path& dir) {
  std::ifstream in(dir / "model.json");
  if (!in) throw Error(ErrorKind::io, "no model in " + dir.string());
  const json m = json::parse(in);
  RomModel model;
  model.method = parse_rom_method(m["method"]);
  model.rv = m["rv"];
  model.rp = m["rp"];
  model.ops = load_operators(dir / "operators");
  model.velocity_basis = read_matrix(dir / "velocity_basis.bin");
  model.pressure_basis = read_matrix(dir / "pressure_basis.bin");
  model.offset = read_vector(dir / "offset.bin");
  const Matrix offsets = read_matrix(dir / "offsets.bin");
  for (int j = 0; j < offsets.cols(); ++j) model.offsets.push_back(offsets.col(j));
  return model;
}

int cmd_solve_rom(Options& o) {
  if (o.rom.empty()) throw Error(ErrorKind::invalid_parameter, "--rom is required");
  const RomModel m = load_model(o.rom);
  const Vector a0 = read_vector(fs::path(o.rom) / "initial.bin");
  const RomTrajectory tr = has_pressure(m.method) ? solve_velocity_pressure_rom(m.ops, a0)
                                                  : solve_velocity_rom(m.ops, a0);
  RomTrajectory tagged = tr;
  tagged.method = m.method;
  const fs::path out = o.config.out.empty() ? fs::path(o.rom) / "trajectory" : fs::path(o.config.out);
  save_trajectory(tagged, out);
  std::printf("ROM solution: %.4f s, %zu steps\n", tr.solve_seconds, tr.newton_iterations.size());
  return 0;
}

int cmd_eval(Options& o) {
  if (o.rom.empty()) throw Error(ErrorKind::invalid_parameter, "--rom is required");
  const auto fom = load_required(o);
  const OfflineData d = offline(fom, o.quiet);
  const RomModel m = load_model(o.rom);
  const fs::path trdir = o.config.out.empty() ? fs::path(o.rom) / "trajectory" : fs::path(o.config.out);
  const RomTrajectory tr = load_trajectory(trdir);
  const ErrorEvaluator eval(d, m);
  std::printf("method %s  R %d  rel_err %.6e  projection %.6e\n", to_string(m.method), m.rv,
              eval.rom_error(m.rv, tr), eval.projection_error(m.rv));
  return 0;
}

int cmd_sweep(Options& o) {
  const auto fom = load_required(o);
  const OfflineData d = offline(fom, o.quiet);
  SweepOptions so;
  for (int r = 1; r <= o.config.rv; ++r) so.sizes.push_back(r);
  so.threads = o.threads;
  if (o.method != "all") so.methods = {parse_rom_method(o.method)};
  const auto rows = run_sweep(d, so);
  const fs::path out = o.config.out.empty() ? fs::path("sweep") : fs::path(o.config.out);
  write_sweep_csv(out / "convergence.csv", rows);
  write_projection_csv(out / "projection.csv", rows);

  // timing table at the largest size, one fresh factory per method
  std::map<RomMethod, StageTimes> table;
  for (RomMethod method : so.methods) {
    ModelFactory factory(d);
    StageTimes t;
    const RomModel m = factory.build(method, o.config.rv, o.config.rp, &t);
    t["FE solution"] = fom->wall_seconds;
    t["reference FE space"] = d.seconds;
    try {
      t["ROM solution"] = solve_model(d, m, o.config.rv).solve_seconds;
    } catch (const Error&) {
    }
    table[method] = t;
  }
  write_timing_csv(out / "timing.csv", table);
  for (const auto& r : rows)
    std::printf("%2d %-12s %.4e  (projection %.4e)%s\n", r.r, to_string(r.method), r.rel_err, r.projection_err,
                r.failure.empty() ? "" : "  failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive finite element snapshots and POD-Galerkin reduced models for the cavity flow"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("--quiet", o.quiet, "less output");

  auto* fom = app.add_subcommand("fom", "run the adaptive FOM and save a snapshot archive");
  add_run_flags(fom, o);
  fom->add_option("--snapshots", o.config.snapshots, "snapshot archive directory")->required();

  auto* pod = app.add_subcommand("pod", "velocity and pressure POD of a snapshot archive");
  add_rom_flags(pod, o);
  pod->add_option("--snapshots", o.config.snapshots)->required();
  pod->add_option("--out", o.config.out, "output directory");

  auto* build = app.add_subcommand("build-rom", "build the reduced operators of one method");
  add_rom_flags(build, o);
  build->add_option("--snapshots", o.config.snapshots)->required();
  build->add_option("--out", o.config.out, "model directory");

  auto* solve = app.add_subcommand("solve-rom", "solve a built reduced model");
  solve->add_option("--rom", o.rom, "model directory")->required();
  solve->add_option("--out", o.config.out, "trajectory directory (default: <rom>/trajectory)");

  auto* eval = app.add_subcommand("eval", "relative velocity error of a solved reduced model");
  eval->add_option("--snapshots", o.config.snapshots)->required();
  eval->add_option("--rom", o.rom, "model directory")->required();
  eval->add_option("--out", o.config.out, "trajectory directory (default: <rom>/trajectory)");

  auto* sweep = app.add_subcommand("sweep", "errors of all methods for R = 1..rv, plus timings at rv");
  add_rom_flags(sweep, o);
  sweep->get_option("--method")->default_str("all");
  o.method = "all";
  sweep->add_option("--snapshots", o.config.snapshots)->required();
  sweep->add_option("--out", o.config.out, "output directory for the CSV tables");
  sweep->add_option("--threads", o.threads, "concurrent reduced solves")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (!sweep->parsed() && o.method == "all") o.method = "divfree2";
  try {
    if (fom->parsed()) return cmd_fom(o);
    if (pod->parsed()) return cmd_pod(o);
    if (build->parsed()) return cmd_build_rom(o);
    if (solve->parsed()) return cmd_solve_rom(o);
    if (eval->parsed()) return cmd_eval(o);
    if (sweep->parsed()) return cmd_sweep(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
