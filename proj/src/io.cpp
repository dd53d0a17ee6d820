#include "adaptrom/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "adaptrom/error.hpp"

namespace adaptrom {

static_assert(std::endian::native == std::endian::little, "archives assume a little-endian host");

using json = nlohmann::json;

namespace {

constexpr char kMagic[4] = {'A', 'D', 'R', 'F'};
constexpr std::uint32_t kFloat64 = 1, kInt32 = 2;

void write_raw(const fs::path& file, std::uint32_t code, std::uint64_t rows, std::uint64_t cols,
               const void* data, std::size_t bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  ADAPTROM_REQUIRE(out.good(), ErrorKind::io, "cannot write " + file.string());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&code), sizeof code);
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  if (bytes > 0) out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  ADAPTROM_REQUIRE(out.good(), ErrorKind::io, "write failed for " + file.string());
}

struct RawHeader {
  std::uint32_t code = 0;
  std::uint64_t rows = 0, cols = 0;
};

std::ifstream open_raw(const fs::path& file, RawHeader& h, std::uint32_t expect) {
  std::ifstream in(file, std::ios::binary);
  ADAPTROM_REQUIRE(in.good(), ErrorKind::io, "cannot read " + file.string());
  char magic[4];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&h.code), sizeof h.code);
  in.read(reinterpret_cast<char*>(&h.rows), sizeof h.rows);
  in.read(reinterpret_cast<char*>(&h.cols), sizeof h.cols);
  ADAPTROM_REQUIRE(in.good() && std::equal(magic, magic + 4, kMagic), ErrorKind::io,
                   "not an array file: " + file.string());
  ADAPTROM_REQUIRE(h.code == expect, ErrorKind::io, "unexpected element type in " + file.string());
  return in;
}

void read_payload(std::ifstream& in, void* data, std::size_t bytes, const fs::path& file) {
  if (bytes > 0) in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  ADAPTROM_REQUIRE(in.good(), ErrorKind::io, "truncated array file " + file.string());
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  ADAPTROM_REQUIRE(in.good(), ErrorKind::io, "cannot read " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, "malformed " + file.string() + ": " + e.what());
  }
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream out(file, std::ios::trunc);
  ADAPTROM_REQUIRE(out.good(), ErrorKind::io, "cannot write " + file.string());
  out << j.dump(2) << '\n';
}

std::string numbered(const char* stem, int j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d.bin", stem, j);
  return buf;
}

// NaN is not representable in JSON
json number_or_null(double x) { return std::isnan(x) ? json(nullptr) : json(x); }
double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  ADAPTROM_REQUIRE(!ec, ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

void write_matrix(const fs::path& file, const Matrix& m) {
  write_raw(file, kFloat64, m.rows(), m.cols(), m.data(), sizeof(double) * m.size());
}

Matrix read_matrix(const fs::path& file) {
  RawHeader h;
  auto in = open_raw(file, h, kFloat64);
  Matrix m(h.rows, h.cols);
  read_payload(in, m.data(), sizeof(double) * m.size(), file);
  return m;
}

void write_vector(const fs::path& file, const Vector& v) {
  write_raw(file, kFloat64, v.size(), 1, v.data(), sizeof(double) * v.size());
}

Vector read_vector(const fs::path& file) {
  RawHeader h;
  auto in = open_raw(file, h, kFloat64);
  ADAPTROM_REQUIRE(h.cols == 1, ErrorKind::io, "expected a vector in " + file.string());
  Vector v(h.rows);
  read_payload(in, v.data(), sizeof(double) * v.size(), file);
  return v;
}

void write_ints(const fs::path& file, const std::vector<int>& v) {
  std::vector<std::int32_t> data(v.begin(), v.end());
  write_raw(file, kInt32, v.size(), 1, data.data(), sizeof(std::int32_t) * data.size());
}

std::vector<int> read_ints(const fs::path& file) {
  RawHeader h;
  auto in = open_raw(file, h, kInt32);
  std::vector<std::int32_t> data(h.rows * h.cols);
  read_payload(in, data.data(), sizeof(std::int32_t) * data.size(), file);
  return {data.begin(), data.end()};
}

// ---------------------------------------------------------------- snapshots

void save_snapshots(const SnapshotSet& set, const fs::path& dir) {
  prepare_dir(dir);
  const Forest& forest = set.init.forest();
  Matrix verts(2, forest.vertex_count());
  for (int v = 0; v < forest.vertex_count(); ++v) verts.col(v) << forest.vertex(v).x, forest.vertex(v).y;
  write_matrix(dir / "forest_vertices.bin", verts);
  std::vector<int> tris;
  tris.reserve(4 * forest.triangle_count());
  for (int t = 0; t < forest.triangle_count(); ++t) {
    const auto& tr = forest.triangle(t);
    tris.insert(tris.end(), {tr.v[0], tr.v[1], tr.v[2], tr.parent});
  }
  write_ints(dir / "forest_triangles.bin", tris);

  auto leaves = [](const Triangulation& m) { return std::vector<int>(m.triangles().begin(), m.triangles().end()); };
  write_ints(dir / numbered("mesh", 0), leaves(set.init));
  write_vector(dir / numbered("vel", 0), set.initial.coeffs);
  write_vector(dir / numbered("lift", 0), set.initial_lifting.values);

  json steps = json::array();
  for (int j = 1; j <= set.size(); ++j) {
    const SnapshotStep& st = set.steps[j - 1];
    ADAPTROM_REQUIRE(st.space->mesh().forest_ptr() == set.init.forest_ptr(), ErrorKind::invalid_hierarchy,
                     "snapshot meshes must share the initial forest");
    write_ints(dir / numbered("mesh", j), leaves(st.space->mesh()));
    write_vector(dir / numbered("vel", j), st.velocity.coeffs);
    write_vector(dir / numbered("prs", j), st.pressure.coeffs);
    write_vector(dir / numbered("lift", j), st.lifting.values);
    steps.push_back({{"j", j},
                     {"mesh", numbered("mesh", j)},
                     {"velocity", numbered("vel", j)},
                     {"pressure", numbered("prs", j)},
                     {"lifting", numbered("lift", j)},
                     {"lifting_time", st.lifting.time},
                     {"lifting_factor", number_or_null(st.lifting.time_factor)},
                     {"triangles", st.space->mesh().size()},
                     {"estimate", st.estimate},
                     {"refinements", st.refinements},
                     {"newton_iterations", st.newton_iterations},
                     {"tolerance_met", st.tolerance_met}});
  }
  const json manifest = {{"format", "adaptrom-snapshots"},
                         {"version", 1},
                         {"n", set.size()},
                         {"dt", set.dt},
                         {"t_end", set.t_end},
                         {"reynolds", set.reynolds},
                         {"eps", set.eps},
                         {"theta", set.theta},
                         {"grid", set.grid},
                         {"boundary", set.boundary},
                         {"init", {{"kind", forest.init().kind}, {"cells_per_side", forest.init().cells_per_side}}},
                         {"initial_lifting_time", set.initial_lifting.time},
                         {"initial_lifting_factor", number_or_null(set.initial_lifting.time_factor)},
                         {"wall_seconds", set.wall_seconds},
                         {"steps", steps}};
  write_json(dir / "manifest.json", manifest);
}

SnapshotSet load_snapshots(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  ADAPTROM_REQUIRE(m.value("format", "") == "adaptrom-snapshots", ErrorKind::io,
                   "not a snapshot archive: " + dir.string());
  const Matrix verts = read_matrix(dir / "forest_vertices.bin");
  const std::vector<int> tris = read_ints(dir / "forest_triangles.bin");
  ADAPTROM_REQUIRE(verts.rows() == 2 && tris.size() % 4 == 0, ErrorKind::io, "malformed forest records");

  std::vector<Point> points(verts.cols());
  for (int v = 0; v < verts.cols(); ++v) points[v] = {verts(0, v), verts(1, v)};
  std::vector<std::array<int, 3>> roots;
  std::vector<Forest::Triangle> records(tris.size() / 4);
  for (std::size_t t = 0; t < records.size(); ++t) {
    records[t].v = {tris[4 * t], tris[4 * t + 1], tris[4 * t + 2]};
    records[t].parent = tris[4 * t + 3];
    if (records[t].parent < 0) {
      ADAPTROM_REQUIRE(roots.size() == t, ErrorKind::io, "roots must precede refined triangles");
      roots.push_back(records[t].v);
    }
  }
  InitDescriptor init{m["init"]["kind"].get<std::string>(), m["init"]["cells_per_side"].get<int>()};
  auto forest = std::make_shared<Forest>(points, roots, init);
  forest->merge_records(points, records);

  SnapshotSet set;
  set.reynolds = m["reynolds"];
  set.dt = m["dt"];
  set.t_end = m["t_end"];
  set.eps = m["eps"];
  set.theta = m["theta"];
  set.grid = m["grid"];
  set.boundary = m["boundary"];
  set.wall_seconds = m["wall_seconds"];
  set.init = Triangulation(forest, read_ints(dir / numbered("mesh", 0)));
  auto init_space = build_space(set.init);
  set.initial = FeField::velocity(init_space, read_vector(dir / numbered("vel", 0)));
  set.initial_lifting.values = read_vector(dir / numbered("lift", 0));
  set.initial_lifting.time = m["initial_lifting_time"];
  set.initial_lifting.time_factor = number_or_nan(m["initial_lifting_factor"]);

  const int n = m["n"];
  const auto& steps = m["steps"];
  ADAPTROM_REQUIRE(static_cast<int>(steps.size()) == n, ErrorKind::io, "step records missing");
  for (const auto& rec : steps) {
    SnapshotStep st;
    st.space = build_space(Triangulation(forest, read_ints(dir / rec["mesh"].get<std::string>())));
    st.velocity = FeField::velocity(st.space, read_vector(dir / rec["velocity"].get<std::string>()));
    st.pressure = FeField::pressure(st.space, read_vector(dir / rec["pressure"].get<std::string>()), true);
    st.lifting.values = read_vector(dir / rec["lifting"].get<std::string>());
    st.lifting.time = rec["lifting_time"];
    st.lifting.time_factor = number_or_nan(rec["lifting_factor"]);
    st.estimate = rec["estimate"];
    st.refinements = rec["refinements"];
    st.newton_iterations = rec["newton_iterations"];
    st.tolerance_met = rec["tolerance_met"];
    ADAPTROM_REQUIRE(st.velocity.coeffs.size() == st.space->velocity_dofs() &&
                         st.pressure.coeffs.size() == st.space->pressure_dofs() &&
                         st.lifting.values.size() == st.space->velocity_dofs(),
                     ErrorKind::io, "field length does not match its mesh");
    set.steps.push_back(std::move(st));
  }
  return set;
}

// ---------------------------------------------------------------- POD

void save_pod(const PodBasis& b, const fs::path& dir) {
  prepare_dir(dir);
  write_matrix(dir / "modes.bin", b.modes);
  write_vector(dir / "eigenvalues.bin", b.eigenvalues);
  write_vector(dir / "spectrum.bin", b.spectrum);
  write_matrix(dir / "xi.bin", b.xi);
  write_json(dir / "manifest.json", {{"format", "adaptrom-pod"},
                                     {"version", 1},
                                     {"space_id", b.space_id},
                                     {"inner_product", to_string(b.inner)},
                                     {"size", b.size()},
                                     {"rank_deficient", b.rank_deficient}});
}

PodBasis load_pod(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  ADAPTROM_REQUIRE(m.value("format", "") == "adaptrom-pod", ErrorKind::io, "not a POD archive: " + dir.string());
  PodBasis b;
  b.space_id = m["space_id"];
  b.inner = parse_inner_product(m["inner_product"]);
  b.rank_deficient = m["rank_deficient"];
  b.modes = read_matrix(dir / "modes.bin");
  b.eigenvalues = read_vector(dir / "eigenvalues.bin");
  b.spectrum = read_vector(dir / "spectrum.bin");
  b.xi = read_matrix(dir / "xi.bin");
  ADAPTROM_REQUIRE(b.size() == m["size"].get<int>() && b.eigenvalues.size() == b.size(), ErrorKind::io,
                   "POD archive sizes disagree");
  return b;
}

// ---------------------------------------------------------------- trajectories

namespace {

Matrix stack(const std::vector<Vector>& cols, int rows) {
  Matrix out = Matrix::Zero(rows, static_cast<int>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    if (cols[j].size() == rows) out.col(j) = cols[j];
  return out;
}

}  // namespace

void save_trajectory(const RomTrajectory& tr, const fs::path& dir) {
  prepare_dir(dir);
  const int rv = tr.velocity.empty() ? 0 : static_cast<int>(tr.velocity.front().size());
  int rp = 0;
  for (const Vector& p : tr.pressure) rp = std::max(rp, static_cast<int>(p.size()));
  write_matrix(dir / "velocity.bin", stack(tr.velocity, rv));
  if (!tr.pressure.empty()) write_matrix(dir / "pressure.bin", stack(tr.pressure, rp));
  write_json(dir / "manifest.json", {{"format", "adaptrom-trajectory"},
                                     {"version", 1},
                                     {"method", to_string(tr.method)},
                                     {"rv", rv},
                                     {"rp", rp},
                                     {"has_pressure", !tr.pressure.empty()},
                                     {"times", tr.times},
                                     {"newton_iterations", tr.newton_iterations},
                                     {"solve_seconds", tr.solve_seconds}});
}

RomTrajectory load_trajectory(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  ADAPTROM_REQUIRE(m.value("format", "") == "adaptrom-trajectory", ErrorKind::io,
                   "not a trajectory archive: " + dir.string());
  RomTrajectory tr;
  tr.method = parse_rom_method(m["method"]);
  tr.times = m["times"].get<std::vector<double>>();
  tr.newton_iterations = m["newton_iterations"].get<std::vector<int>>();
  tr.solve_seconds = m["solve_seconds"];
  const Matrix v = read_matrix(dir / "velocity.bin");
  for (int j = 0; j < v.cols(); ++j) tr.velocity.push_back(v.col(j));
  if (m["has_pressure"].get<bool>()) {
    const Matrix p = read_matrix(dir / "pressure.bin");
    tr.pressure.push_back(Vector());
    for (int j = 1; j < p.cols(); ++j) tr.pressure.push_back(p.col(j));
  }
  return tr;
}

// ---------------------------------------------------------------- operators

void save_operators(const ReducedOperators& ops, const fs::path& dir) {
  prepare_dir(dir);
  write_matrix(dir / "mass.bin", ops.mass);
  write_matrix(dir / "stiffness.bin", ops.stiffness);
  write_vector(dir / "tensor.bin", Eigen::Map<const Vector>(ops.tensor.data(), ops.tensor.size()));
  write_matrix(dir / "coupling.bin", ops.coupling);
  Matrix lj(ops.rv * ops.rv, ops.lift_jacobian.size());
  for (std::size_t j = 0; j < ops.lift_jacobian.size(); ++j)
    lj.col(j) = Eigen::Map<const Vector>(ops.lift_jacobian[j].data(), ops.rv * ops.rv);
  write_matrix(dir / "lift_jacobian.bin", lj);
  write_matrix(dir / "rhs.bin", stack(ops.rhs, ops.rv));
  write_matrix(dir / "continuity.bin", stack(ops.continuity_rhs, ops.rp));
  write_json(dir / "manifest.json", {{"format", "adaptrom-operators"},
                                     {"version", 1},
                                     {"rv", ops.rv},
                                     {"rp", ops.rp},
                                     {"reynolds", ops.reynolds},
                                     {"dt", ops.dt},
                                     {"steps", ops.steps()}});
}

ReducedOperators load_operators(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  ADAPTROM_REQUIRE(m.value("format", "") == "adaptrom-operators", ErrorKind::io,
                   "not an operator archive: " + dir.string());
  ReducedOperators ops;
  ops.rv = m["rv"];
  ops.rp = m["rp"];
  ops.reynolds = m["reynolds"];
  ops.dt = m["dt"];
  ops.mass = read_matrix(dir / "mass.bin");
  ops.stiffness = read_matrix(dir / "stiffness.bin");
  const Vector t = read_vector(dir / "tensor.bin");
  ops.tensor.assign(t.data(), t.data() + t.size());
  ops.coupling = read_matrix(dir / "coupling.bin");
  const Matrix lj = read_matrix(dir / "lift_jacobian.bin");
  for (int j = 0; j < lj.cols(); ++j) ops.lift_jacobian.push_back(Eigen::Map<const Matrix>(lj.col(j).data(), ops.rv, ops.rv));
  const Matrix rhs = read_matrix(dir / "rhs.bin");
  const Matrix cont = read_matrix(dir / "continuity.bin");
  for (int j = 0; j < rhs.cols(); ++j) {
    ops.rhs.push_back(rhs.col(j));
    ops.continuity_rhs.push_back(cont.col(j));
  }
  ADAPTROM_REQUIRE(static_cast<std::size_t>(ops.rv) * ops.rv * ops.rv == ops.tensor.size() &&
                       ops.steps() == m["steps"].get<int>(),
                   ErrorKind::io, "operator archive sizes disagree");
  return ops;
}

}  // namespace adaptrom
