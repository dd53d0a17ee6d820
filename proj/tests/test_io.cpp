#include <doctest.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <random>

#include <unistd.h>

#include "adaptrom/bench.hpp"
#include "adaptrom/error.hpp"
#include "adaptrom/io.hpp"

using namespace adaptrom;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("adaptrom_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

Matrix random_matrix(std::mt19937& rng, int rows, int cols) {
  std::normal_distribution<double> d;
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = d(rng);
  return m;
}

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same_or_both_nan(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST_CASE("arrays round-trip bit for bit") {
  TempDir tmp;
  fs::create_directories(tmp.path);
  std::mt19937 rng(11);
  const Matrix m = random_matrix(rng, 7, 3);
  write_matrix(tmp.path / "m.bin", m);
  CHECK(same(read_matrix(tmp.path / "m.bin"), m));

  const Vector v = random_matrix(rng, 9, 1);
  write_vector(tmp.path / "v.bin", v);
  CHECK(same(read_vector(tmp.path / "v.bin"), v));

  const std::vector<int> ints{3, -1, 0, 42, 1 << 30};
  write_ints(tmp.path / "i.bin", ints);
  CHECK(read_ints(tmp.path / "i.bin") == ints);

  write_matrix(tmp.path / "empty.bin", Matrix(0, 4));
  const Matrix e = read_matrix(tmp.path / "empty.bin");
  CHECK(e.rows() == 0);
  CHECK(e.cols() == 4);
}

TEST_CASE("malformed array files are rejected") {
  TempDir tmp;
  fs::create_directories(tmp.path);
  write_matrix(tmp.path / "m.bin", Matrix::Ones(4, 4));

  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_matrix(tmp.path / "none.bin"), Error);
  }
  SUBCASE("wrong element type") {
    CHECK_THROWS_AS(read_ints(tmp.path / "m.bin"), Error);
  }
  SUBCASE("matrix read as vector") {
    CHECK_THROWS_AS(read_vector(tmp.path / "m.bin"), Error);
  }
  SUBCASE("truncated payload") {
    fs::resize_file(tmp.path / "m.bin", fs::file_size(tmp.path / "m.bin") - 8);
    CHECK_THROWS_AS(read_matrix(tmp.path / "m.bin"), Error);
  }
  SUBCASE("bad magic") {
    std::ofstream(tmp.path / "bad.bin", std::ios::binary) << "XXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXX";
    try {
      read_matrix(tmp.path / "bad.bin");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::io);
    }
  }
  SUBCASE("malformed manifest") {
    fs::create_directories(tmp.path / "pod");
    std::ofstream(tmp.path / "pod" / "manifest.json") << "{ not json";
    CHECK_THROWS_AS(load_pod(tmp.path / "pod"), Error);
  }
}

TEST_CASE("snapshot archive reproduces meshes and fields") {
  FomParams p;
  p.grid = 4;
  p.steps = 3;
  p.t_end = 0.03;
  p.max_cells = 400;
  p.boundary = cavity_boundary();
  const SnapshotSet set = run_fom(p);

  TempDir tmp;
  save_snapshots(set, tmp.path);
  const SnapshotSet back = load_snapshots(tmp.path);

  CHECK(back.size() == set.size());
  CHECK(back.dt == set.dt);
  CHECK(back.t_end == set.t_end);
  CHECK(back.reynolds == set.reynolds);
  CHECK(back.eps == set.eps);
  CHECK(back.theta == set.theta);
  CHECK(back.grid == set.grid);
  CHECK(back.boundary == set.boundary);
  CHECK(back.init.size() == set.init.size());
  CHECK(same(back.initial.coeffs, set.initial.coeffs));
  CHECK(same(back.initial_lifting.values, set.initial_lifting.values));
  CHECK(same_or_both_nan(back.initial_lifting.time_factor, set.initial_lifting.time_factor));

  const Forest& f0 = set.init.forest();
  const Forest& f1 = back.init.forest();
  REQUIRE(f1.vertex_count() == f0.vertex_count());
  REQUIRE(f1.triangle_count() == f0.triangle_count());
  for (int v = 0; v < f0.vertex_count(); ++v) {
    CHECK(f1.vertex(v).x == f0.vertex(v).x);
    CHECK(f1.vertex(v).y == f0.vertex(v).y);
  }

  for (int j = 0; j < set.size(); ++j) {
    const SnapshotStep& a = set.steps[j];
    const SnapshotStep& b = back.steps[j];
    const auto la = a.space->mesh().triangles();
    const auto lb = b.space->mesh().triangles();
    CHECK(std::equal(la.begin(), la.end(), lb.begin(), lb.end()));
    REQUIRE(b.space->node_count() == a.space->node_count());
    for (int n = 0; n < a.space->node_count(); ++n) {
      CHECK(b.space->node(n).x == a.space->node(n).x);
      CHECK(b.space->node(n).y == a.space->node(n).y);
    }
    CHECK(same(b.velocity.coeffs, a.velocity.coeffs));
    CHECK(same(b.pressure.coeffs, a.pressure.coeffs));
    CHECK(same(b.lifting.values, a.lifting.values));
    CHECK(b.lifting.time == a.lifting.time);
    CHECK(same_or_both_nan(b.lifting.time_factor, a.lifting.time_factor));
    CHECK(b.estimate == a.estimate);
    CHECK(b.refinements == a.refinements);
    CHECK(b.newton_iterations == a.newton_iterations);
    CHECK(b.tolerance_met == a.tolerance_met);
  }
}

TEST_CASE("POD, trajectory and operator archives round-trip") {
  std::mt19937 rng(5);
  TempDir tmp;

  PodBasis b;
  b.space_id = 17;
  b.inner = InnerProduct::pressure_l2;
  b.modes = random_matrix(rng, 12, 3);
  b.eigenvalues = Vector{{3.0, 2.0, 1e-5}};
  b.spectrum = Vector{{3.0, 2.0, 1e-5, 1e-17}};
  b.xi = random_matrix(rng, 4, 3);
  b.rank_deficient = true;
  save_pod(b, tmp.path / "pod");
  const PodBasis pb = load_pod(tmp.path / "pod");
  CHECK(pb.space_id == b.space_id);
  CHECK(pb.inner == b.inner);
  CHECK(pb.rank_deficient == b.rank_deficient);
  CHECK(same(pb.modes, b.modes));
  CHECK(same(pb.eigenvalues, b.eigenvalues));
  CHECK(same(pb.spectrum, b.spectrum));
  CHECK(same(pb.xi, b.xi));

  for (bool pressure : {false, true}) {
    RomTrajectory tr;
    tr.method = pressure ? RomMethod::stabilized2 : RomMethod::divfree1;
    for (int j = 0; j <= 4; ++j) {
      tr.times.push_back(0.25 * j);
      tr.velocity.push_back(random_matrix(rng, 3, 1));
      if (pressure) tr.pressure.push_back(j == 0 ? Vector() : Vector(random_matrix(rng, 2, 1)));
      if (j > 0) tr.newton_iterations.push_back(j + 1);
    }
    tr.solve_seconds = 0.125;
    const fs::path dir = tmp.path / (pressure ? "tp" : "tv");
    save_trajectory(tr, dir);
    const RomTrajectory tb = load_trajectory(dir);
    CHECK(tb.method == tr.method);
    CHECK(tb.times == tr.times);
    CHECK(tb.newton_iterations == tr.newton_iterations);
    CHECK(tb.solve_seconds == tr.solve_seconds);
    REQUIRE(tb.velocity.size() == tr.velocity.size());
    REQUIRE(tb.pressure.size() == tr.pressure.size());
    for (std::size_t j = 0; j < tr.velocity.size(); ++j) CHECK(same(tb.velocity[j], tr.velocity[j]));
    for (std::size_t j = 0; j < tr.pressure.size(); ++j) CHECK(same(tb.pressure[j], tr.pressure[j]));
  }

  ReducedOperators ops;
  ops.rv = 3;
  ops.rp = 2;
  ops.reynolds = 100;
  ops.dt = 0.01;
  ops.mass = random_matrix(rng, 3, 3);
  ops.stiffness = random_matrix(rng, 3, 3);
  const Vector t = random_matrix(rng, 27, 1);
  ops.tensor.assign(t.data(), t.data() + t.size());
  ops.coupling = random_matrix(rng, 2, 3);
  for (int j = 0; j <= 2; ++j) {
    ops.lift_jacobian.push_back(random_matrix(rng, 3, 3));
    ops.rhs.push_back(random_matrix(rng, 3, 1));
    ops.continuity_rhs.push_back(random_matrix(rng, 2, 1));
  }
  save_operators(ops, tmp.path / "ops");
  const ReducedOperators ob = load_operators(tmp.path / "ops");
  CHECK(ob.rv == ops.rv);
  CHECK(ob.rp == ops.rp);
  CHECK(ob.reynolds == ops.reynolds);
  CHECK(ob.dt == ops.dt);
  CHECK(same(ob.mass, ops.mass));
  CHECK(same(ob.stiffness, ops.stiffness));
  CHECK(ob.tensor == ops.tensor);
  CHECK(same(ob.coupling, ops.coupling));
  REQUIRE(ob.steps() == ops.steps());
  for (int j = 0; j <= ops.steps(); ++j) {
    CHECK(same(ob.lift_jacobian[j], ops.lift_jacobian[j]));
    CHECK(same(ob.rhs[j], ops.rhs[j]));
    CHECK(same(ob.continuity_rhs[j], ops.continuity_rhs[j]));
  }

  CHECK_THROWS_AS(load_operators(tmp.path / "pod"), Error);
}
