#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "adaptrom/adapt.hpp"
#include "adaptrom/bench.hpp"
#include "support.hpp"

using namespace adaptrom;
using namespace testsupport;

namespace {

struct Setup {
  SpacePtr space;
  FormSet forms;
  StepProblem pb;

  Setup(const Triangulation& mesh, double re) : space(build_space(mesh)), forms(assemble_forms(*space)) {
    pb.space = space;
    pb.forms = &forms;
    pb.y_prev = FeField::velocity(space, Vector::Zero(space->velocity_dofs()));
    pb.g = Vector::Zero(space->velocity_dofs());
    pb.g_prev = pb.g;
    pb.reynolds = re;
    pb.dt = 0.01;
  }

  StepResult fields(const Vector& y) const {
    StepResult r;
    r.velocity = FeField::velocity(space, y);
    r.pressure = FeField::pressure(space, Vector::Zero(space->pressure_dofs()), true);
    return r;
  }
};

// unit square cut along the diagonal (0,0)-(1,1)
Triangulation two_triangles() {
  std::vector<Point> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  // refinement edge is the diagonal in both roots
  std::vector<std::array<int, 3>> roots{{2, 0, 1}, {0, 2, 3}};
  auto f = std::make_shared<Forest>(std::move(v), std::move(roots), InitDescriptor{"custom", 1});
  return Triangulation(f, {0, 1});
}

EstimatorResult indicators(std::vector<double> eta) {
  EstimatorResult r;
  r.eta = std::move(eta);
  r.triangles.resize(r.eta.size());
  std::iota(r.triangles.begin(), r.triangles.end(), 0);
  r.total = std::accumulate(r.eta.begin(), r.eta.end(), 0.0);
  return r;
}

double marked_sum(const EstimatorResult& r, const MarkSet& m) {
  double s = 0;
  for (int t : m) s += r.eta[t];
  return s;
}

}  // namespace

TEST_CASE("zero fields give zero indicators") {
  Setup s(criss_cross_init(4), 100);
  const auto eta = estimate(s.pb, s.fields(Vector::Zero(s.space->velocity_dofs())));
  CHECK(eta.eta.size() == s.space->mesh().size());
  for (double e : eta.eta) CHECK(e == 0.0);
  CHECK(eta.total == 0.0);
}

TEST_CASE("unit divergence contributes the triangle area") {
  std::mt19937 rng(3);
  Setup s(random_mesh(rng, 2, 3), 100);
  const Vector y = interpolate_velocity(*s.space, [](Point p) { return Vec2{p.x, 0.0}; });
  const auto eta = estimate(s.pb, s.fields(y));
  for (int c = 0; c < s.space->cell_count(); ++c)
    CHECK(eta.divergence_sq[c] == doctest::Approx(s.space->geometry(c).area).epsilon(1e-12));
}

TEST_CASE("a single kinked edge splits its jump evenly") {
  const double re = 4.0;
  Setup s(two_triangles(), re);
  REQUIRE(s.space->cell_count() == 2);
  // u_x = max(0, y - x): gradient (-1, 1) above the diagonal, zero below
  const Vector y = interpolate_velocity(*s.space, [](Point p) { return Vec2{std::max(0.0, p.y - p.x), 0.0}; });
  const auto eta = estimate(s.pb, s.fields(y));
  // |[grad u . n]| = sqrt(2) / Re on an edge of length sqrt(2):
  // h_E ||jump||^2 = sqrt(2) * (2 / Re^2) * sqrt(2) = 4 / Re^2, half per side
  const double expected = 2.0 / (re * re);
  CHECK(eta.jump_sq[0] == doctest::Approx(expected).epsilon(1e-13));
  CHECK(eta.jump_sq[1] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("indicators are consistent with their parts") {
  std::mt19937 rng(8);
  Setup s(random_mesh(rng, 3, 3), 100);
  s.pb.g = make_lifting(*s.space, cavity_boundary(), 0.03).values;
  s.pb.g_prev = make_lifting(*s.space, cavity_boundary(), 0.02).values;
  const StepResult r = solve_time_step(s.pb);
  const auto eta = estimate(s.pb, r);
  double sum = 0;
  for (std::size_t c = 0; c < eta.eta.size(); ++c) {
    CHECK(eta.eta[c] >= 0.0);
    CHECK(eta.eta[c] * eta.eta[c] ==
          doctest::Approx(eta.element_sq[c] + eta.divergence_sq[c] + eta.jump_sq[c]).epsilon(1e-12));
    sum += eta.eta[c];
  }
  CHECK(eta.total == doctest::Approx(sum).epsilon(1e-14));
  CHECK(std::is_sorted(eta.triangles.begin(), eta.triangles.end()));

  std::ostringstream csv;
  write_estimator_csv(csv, eta, s.space->mesh());
  const std::string text = csv.str();
  CHECK(text.rfind("triangle,eta,generation\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(eta.eta.size()) + 1);
}

TEST_CASE("Doerfler marking examples") {
  for (int n : {1, 7, 10, 37, 100}) {
    const auto r = indicators(std::vector<double>(n, 0.3));
    CHECK(mark_doerfler(r, 0.1).size() == static_cast<std::size_t>(std::ceil(0.9 * n - 1e-9)));
  }
  std::vector<double> dom(20, 0.05 / 19);
  dom[13] = 0.95;
  const auto m = mark_doerfler(indicators(dom), 0.1);
  REQUIRE(m.size() == 1);
  CHECK(m[0] == 13);

  const auto d = indicators({0.1, 0.4, 0.2, 0.3});
  const auto one = mark_doerfler(d, 0.999);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 1);

  // ties broken by ascending triangle id
  const auto tie = mark_doerfler(indicators({1, 2, 2, 1}), 0.6);
  CHECK(tie == MarkSet{1, 2});

  CHECK(mark_doerfler(EstimatorResult{}, 0.1).empty());
  CHECK_THROWS_AS(mark_doerfler(d, 0.0), Error);
  CHECK_THROWS_AS(mark_doerfler(d, 1.0), Error);
}

TEST_CASE("Doerfler marking is minimal on random indicators") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 200);
    std::vector<double> eta(n);
    for (double& e : eta) e = std::pow(u(rng), 3);
    const auto r = indicators(eta);
    const double theta = 0.01 + 0.98 * u(rng);
    const auto m = mark_doerfler(r, theta);
    REQUIRE(!m.empty());
    const double need = (1 - theta) * r.total;
    CHECK(marked_sum(r, m) >= need * (1 - 1e-12));
    double smallest = r.eta[m.front()];
    for (int t : m) smallest = std::min(smallest, r.eta[t]);
    CHECK(marked_sum(r, m) - smallest < need);
    // no unmarked indicator is larger than a marked one
    std::vector<bool> in(n, false);
    for (int t : m) in[t] = true;
    for (int t = 0; t < n; ++t)
      if (!in[t]) CHECK(r.eta[t] <= smallest);
  }
}

TEST_CASE("huge tolerance accepts the start mesh") {
  FomParams p;
  p.boundary = cavity_boundary();
  p.eps = 1e30;
  const auto init = criss_cross_init(8);
  auto s0 = build_space(init);
  const FeField y0 = FeField::velocity(s0, Vector::Zero(s0->velocity_dofs()));
  const auto r = adaptive_step(1, init, init, y0, p);
  CHECK(r.step.refinements == 0);
  CHECK(r.totals.size() == 1);
  CHECK(r.mesh == init);
  CHECK(r.next_start == init);
}

TEST_CASE("adaptive step refines near the lid and replays bit for bit") {
  FomParams p;
  p.boundary = cavity_boundary();
  p.max_cells = 2000;
  const auto init = criss_cross_init(8);
  auto s0 = build_space(init);
  const FeField y0 = FeField::velocity(s0, Vector::Zero(s0->velocity_dofs()));
  const auto a = adaptive_step(1, init, init, y0, p);
  const auto b = adaptive_step(1, init, init, y0, p);
  CHECK(a.mesh == b.mesh);
  CHECK(a.next_start == b.next_start);
  CHECK(a.totals == b.totals);
  CHECK(a.step.velocity.coeffs == b.step.velocity.coeffs);
  CHECK(a.step.pressure.coeffs == b.step.pressure.coeffs);

  CHECK(a.step.refinements > 0);
  CHECK(static_cast<int>(a.mesh.size()) <= p.max_cells);
  CHECK(a.step.tolerance_met == (a.step.estimate < p.eps));
  CHECK(check_conformity(a.mesh).conforming);
  CHECK(check_conformity(a.next_start).conforming);
  for (int t : a.next_start.triangles()) CHECK(init.leaf_ancestor(t) >= 0);
  CHECK(a.next_start.size() < a.mesh.size());
}

TEST_CASE("cavity mesh at t = 0.3 is finer at the lid than at the bottom") {
  FomParams p;
  p.boundary = cavity_boundary();
  p.steps = 30;
  p.t_end = 0.3;
  p.max_cells = 3000;
  const SnapshotSet s = run_fom(p);
  const auto& mesh = s.steps.back().space->mesh();
  int top = 0, bottom = 0;
  for (int t : mesh.triangles()) {
    const auto& tri = mesh.forest().triangle(t);
    double cy = 0;
    for (int v : tri.v) cy += mesh.forest().vertex(v).y / 3;
    if (cy > 0.9) top = std::max(top, tri.generation);
    if (cy < 0.1) bottom = std::max(bottom, tri.generation);
  }
  MESSAGE("max generation top strip " << top << ", bottom strip " << bottom);
  CHECK(top > bottom);
  for (const auto& st : s.steps)
    for (int t : st.space->mesh().triangles()) CHECK(s.init.leaf_ancestor(t) >= 0);
}
