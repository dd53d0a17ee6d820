#include "adaptrom/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "adaptrom/quadrature.hpp"

namespace adaptrom {

namespace {

struct Local {
  double v[2];
  double g[2][2];  // g[i][j] = d v_i / d x_j
};

Local velocity_at(const TaylorHoodSpace& s, int cell, const Vector& c,
                  const std::array<double, 3>& l) {
  const auto& n = s.cell_nodes(cell);
  const auto phi = p2_values(l);
  const auto grad = p2_gradients(l, s.geometry(cell));
  Local out{};
  for (int a = 0; a < 6; ++a) {
    for (int i = 0; i < 2; ++i) {
      const double x = c[2 * n[a] + i];
      out.v[i] += phi[a] * x;
      out.g[i][0] += grad[a].x * x;
      out.g[i][1] += grad[a].y * x;
    }
  }
  return out;
}

void collect_leaves_below(const Forest& f, const Triangulation& mesh, int t, std::vector<int>& out) {
  if (mesh.contains(t)) {
    out.push_back(t);
    return;
  }
  if (!f.has_children(t)) return;
  for (int c : f.triangle(t).children) collect_leaves_below(f, mesh, c, out);
}

}  // namespace

EstimatorResult estimate(const StepProblem& pb, const StepResult& sol, const VectorFunction& forcing) {
  const auto& s = *pb.space;
  const auto& prev = *pb.y_prev.space;
  ADAPTROM_REQUIRE(sol.velocity.coeffs.size() == s.velocity_dofs() &&
                       sol.pressure.coeffs.size() == s.pressure_dofs(),
                   ErrorKind::dimension_mismatch, "solution does not live on the step space");
  ADAPTROM_REQUIRE(prev.mesh().forest_ptr() == s.mesh().forest_ptr(), ErrorKind::invalid_hierarchy,
                   "previous level lives on another forest");
  const Forest& forest = s.mesh().forest();
  const Vector yh = sol.velocity.coeffs + pb.g;
  const Vector cur_minus_gprev = yh - pb.g_prev;
  const Vector& p = sol.pressure.coeffs;
  const Vector& yp = pb.y_prev.coeffs;
  const double nu = 1.0 / pb.reynolds;
  const auto& rule = degree5_rule();

  const int cells = s.cell_count();
  std::vector<double> sq(cells, 0.0), el(cells, 0.0), dv(cells, 0.0), jp(cells, 0.0);
  std::vector<int> subs;
  for (int c = 0; c < cells; ++c) {
    const int t = s.cell_triangle(c);
    const auto& geo = s.geometry(c);
    const auto& n = s.cell_nodes(c);
    const auto hess = p2_hessians(geo);
    double lap[2] = {0, 0};
    for (int a = 0; a < 6; ++a)
      for (int i = 0; i < 2; ++i) lap[i] += (hess[a][0] + hess[a][2]) * yh[2 * n[a] + i];
    double gp[2] = {0, 0};
    for (int k = 0; k < 3; ++k) {
      gp[0] += p[n[k]] * geo.grad_lambda[k].x;
      gp[1] += p[n[k]] * geo.grad_lambda[k].y;
    }

    subs.clear();
    const int anc = prev.mesh().leaf_ancestor(t);
    if (anc >= 0)
      subs.push_back(t);
    else
      collect_leaves_below(forest, prev.mesh(), t, subs);

    double res = 0.0, div = 0.0;
    for (int tau : subs) {
      const int src = anc >= 0 ? anc : tau;
      const int pc = prev.cell_of_triangle(src);
      const auto& v = forest.triangle(tau).v;
      const Point p0 = forest.vertex(v[0]), p1 = forest.vertex(v[1]), p2 = forest.vertex(v[2]);
      const double area = forest.signed_area(tau);
      for (int q = 0; q < 7; ++q) {
        const auto& l = rule.points[q];
        const Point x{l[0] * p0.x + l[1] * p1.x + l[2] * p2.x, l[0] * p0.y + l[1] * p1.y + l[2] * p2.y};
        const auto lc = barycentric(forest, t, x);
        const Local u = velocity_at(s, c, yh, lc);
        const Local d = velocity_at(s, c, cur_minus_gprev, lc);
        const Local o = velocity_at(prev, pc, yp, barycentric(forest, src, x));
        Vec2 f{0.0, 0.0};
        if (forcing) f = forcing(x);
        double r2 = 0.0;
        for (int i = 0; i < 2; ++i) {
          const double r = f[i] - (d.v[i] - o.v[i]) / pb.dt - (u.v[0] * u.g[i][0] + u.v[1] * u.g[i][1]) +
                           nu * lap[i] - gp[i];
          r2 += r * r;
        }
        const double dv = u.g[0][0] + u.g[1][1];
        res += rule.weights[q] * area * r2;
        div += rule.weights[q] * area * dv * dv;
      }
    }
    el[c] = geo.area * res;
    dv[c] = div;
    sq[c] = el[c] + dv[c];
  }

  // normal-derivative jumps across interior edges
  const auto& line = gauss3_rule();
  const int le[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  std::unordered_map<std::uint64_t, int> first;
  first.reserve(static_cast<std::size_t>(cells) * 2);
  for (int c = 0; c < cells; ++c) {
    const auto& v = forest.triangle(s.cell_triangle(c)).v;
    for (int k = 0; k < 3; ++k) {
      const std::uint64_t key = edge_key(v[le[k][0]], v[le[k][1]]);
      auto it = first.find(key);
      if (it == first.end()) {
        first.emplace(key, c);
        continue;
      }
      const int c0 = it->second, c1 = c;
      const int t0 = s.cell_triangle(c0), t1 = s.cell_triangle(c1);
      const Point a = forest.vertex(v[le[k][0]]), b = forest.vertex(v[le[k][1]]);
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      const double nx = (b.y - a.y) / len, ny = -(b.x - a.x) / len;
      double jump = 0.0;
      for (int q = 0; q < 3; ++q) {
        const double u = line.points[q];
        const Point x{a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
        const Local g0 = velocity_at(s, c0, yh, barycentric(forest, t0, x));
        const Local g1 = velocity_at(s, c1, yh, barycentric(forest, t1, x));
        double j2 = 0.0;
        for (int i = 0; i < 2; ++i) {
          const double dn = nu * ((g0.g[i][0] - g1.g[i][0]) * nx + (g0.g[i][1] - g1.g[i][1]) * ny);
          j2 += dn * dn;
        }
        jump += line.weights[q] * len * j2;
      }
      sq[c0] += 0.5 * len * jump;
      sq[c1] += 0.5 * len * jump;
      jp[c0] += 0.5 * len * jump;
      jp[c1] += 0.5 * len * jump;
    }
  }

  EstimatorResult out;
  out.triangles.assign(s.mesh().triangles().begin(), s.mesh().triangles().end());
  out.eta.resize(cells);
  for (int c = 0; c < cells; ++c) out.eta[c] = std::sqrt(sq[c]);
  out.total = std::accumulate(out.eta.begin(), out.eta.end(), 0.0);
  out.element_sq = std::move(el);
  out.divergence_sq = std::move(dv);
  out.jump_sq = std::move(jp);
  return out;
}

MarkSet mark_doerfler(const EstimatorResult& eta, double theta) {
  ADAPTROM_REQUIRE(theta > 0.0 && theta < 1.0, ErrorKind::invalid_parameter,
                   "Doerfler parameter must lie in (0, 1)");
  ADAPTROM_REQUIRE(eta.eta.size() == eta.triangles.size(), ErrorKind::dimension_mismatch,
                   "indicators and triangles differ in length");
  MarkSet marked;
  if (eta.eta.empty() || eta.total <= 0.0) return marked;
  std::vector<int> order(eta.eta.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (eta.eta[a] != eta.eta[b]) return eta.eta[a] > eta.eta[b];
    return eta.triangles[a] < eta.triangles[b];
  });
  // relative slack absorbs summation round-off
  const double target = (1.0 - theta) * eta.total * (1.0 - 1e-12);
  double sum = 0.0;
  for (int k : order) {
    marked.push_back(eta.triangles[k]);
    sum += eta.eta[k];
    if (sum >= target) break;
  }
  return marked;
}

AdaptiveStepResult adaptive_step(int j, const Triangulation& start, const Triangulation& init,
                                 const FeField& y_prev, const FomParams& params) {
  const double dt = params.dt();
  const double t = j * dt;
  AdaptiveStepResult out;
  Triangulation mesh = start;
  for (int level = 0;; ++level) {
    auto space = build_space(mesh);
    const FormSet forms = assemble_forms(*space);
    StepProblem pb;
    pb.space = space;
    pb.forms = &forms;
    pb.y_prev = y_prev;
    const Lifting g = make_lifting(*space, params.boundary, t);
    pb.g = g.values;
    pb.g_prev = make_lifting(*space, params.boundary, t - dt).values;
    VectorFunction f;
    if (params.forcing) {
      f = [&](Point x) { return params.forcing(t, x); };
      pb.load = load_vector(*space, f);
    }
    pb.reynolds = params.reynolds;
    pb.dt = dt;

    Vector guess = nodal_transfer(y_prev, space).coeffs;
    for (int d : space->dirichlet_velocity_dofs()) guess[d] = 0.0;
    StepResult sol = solve_time_step(pb, guess, params.newton);
    const EstimatorResult eta = estimate(pb, sol, f);
    out.totals.push_back(eta.total);
    const bool met = eta.total < params.eps;
    Triangulation refined;
    bool over_budget = false;
    if (!met) {
      if (level == params.max_refinements)
        throw NonConvergenceError("adaptive loop at step " + std::to_string(j) + " exceeded " +
                                      std::to_string(params.max_refinements) + " refinements",
                                  out.totals);
      refined = bisect(mesh, mark_doerfler(eta, params.theta));
      over_budget = params.max_cells > 0 && static_cast<int>(refined.size()) > params.max_cells;
    }
    if (met || over_budget) {
      out.step.tolerance_met = met;
      out.step.space = space;
      out.step.velocity = std::move(sol.velocity);
      out.step.pressure = std::move(sol.pressure);
      out.step.lifting = g;
      out.step.estimate = eta.total;
      out.step.refinements = level;
      out.step.newton_iterations = sol.iterations;
      out.mesh = mesh;
      out.next_start = coarsen_once(mesh, init);
      return out;
    }
    mesh = std::move(refined);
  }
}

void write_estimator_csv(std::ostream& out, const EstimatorResult& eta, const Triangulation& mesh) {
  out << "triangle,eta,generation\n";
  out.precision(17);
  for (std::size_t k = 0; k < eta.triangles.size(); ++k)
    out << eta.triangles[k] << ',' << eta.eta[k] << ','
        << mesh.forest().triangle(eta.triangles[k]).generation << '\n';
}

}  // namespace adaptrom
