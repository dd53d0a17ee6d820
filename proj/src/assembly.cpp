#include "adaptrom/assembly.hpp"

#include "adaptrom/quadrature.hpp"

namespace adaptrom {

namespace {

struct QuadData {
  std::array<std::array<double, 6>, 7> phi;
  std::array<std::array<Point, 6>, 7> grad;
};

const std::array<std::array<double, 6>, 7>& reference_values() {
  static const auto values = [] {
    std::array<std::array<double, 6>, 7> v;
    const auto& rule = degree5_rule();
    for (int q = 0; q < 7; ++q) v[q] = p2_values(rule.points[q]);
    return v;
  }();
  return values;
}

QuadData cell_quadrature(const CellGeometry& g) {
  QuadData d;
  const auto& rule = degree5_rule();
  d.phi = reference_values();
  for (int q = 0; q < 7; ++q) d.grad[q] = p2_gradients(rule.points[q], g);
  return d;
}

void require_valid(const CellGeometry& g) {
  ADAPTROM_REQUIRE(g.area > 0.0, ErrorKind::assembly, "degenerate triangle (area <= 0)");
}

// Velocity w and its gradient (dw_i/dx_j as g[i][j]) at quadrature point q.
void eval_velocity(const QuadData& d, int q, const std::array<int, 6>& n, const Vector& w,
                   double val[2], double g[2][2]) {
  val[0] = val[1] = 0.0;
  g[0][0] = g[0][1] = g[1][0] = g[1][1] = 0.0;
  for (int a = 0; a < 6; ++a) {
    const double wx = w[2 * n[a]], wy = w[2 * n[a] + 1];
    val[0] += d.phi[q][a] * wx;
    val[1] += d.phi[q][a] * wy;
    g[0][0] += d.grad[q][a].x * wx;
    g[0][1] += d.grad[q][a].y * wx;
    g[1][0] += d.grad[q][a].x * wy;
    g[1][1] += d.grad[q][a].y * wy;
  }
}

}  // namespace

FormSet assemble_forms(const TaylorHoodSpace& space) {
  const auto& rule = degree5_rule();
  const int nv = space.velocity_dofs();
  const int np = space.pressure_dofs();
  std::vector<Triplet> mass, stiff, div, pmass;
  const std::size_t cells = static_cast<std::size_t>(space.cell_count());
  mass.reserve(cells * 72);
  stiff.reserve(cells * 72);
  div.reserve(cells * 36);
  pmass.reserve(cells * 9);
  Vector mean = Vector::Zero(np);

  for (int c = 0; c < space.cell_count(); ++c) {
    const auto& g = space.geometry(c);
    require_valid(g);
    const auto& n = space.cell_nodes(c);
    const QuadData d = cell_quadrature(g);
    double m[6][6] = {}, s[6][6] = {}, bx[3][6] = {}, by[3][6] = {}, mp[3][3] = {};
    for (int q = 0; q < 7; ++q) {
      const double w = rule.weights[q] * g.area;
      const auto& lam = rule.points[q];
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          m[a][b] += w * d.phi[q][a] * d.phi[q][b];
          s[a][b] += w * (d.grad[q][a].x * d.grad[q][b].x + d.grad[q][a].y * d.grad[q][b].y);
        }
      }
      for (int k = 0; k < 3; ++k) {
        for (int b = 0; b < 6; ++b) {
          bx[k][b] -= w * lam[k] * d.grad[q][b].x;
          by[k][b] -= w * lam[k] * d.grad[q][b].y;
        }
        for (int l = 0; l < 3; ++l) mp[k][l] += w * lam[k] * lam[l];
      }
    }
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        for (int comp = 0; comp < 2; ++comp) {
          mass.emplace_back(2 * n[a] + comp, 2 * n[b] + comp, m[a][b]);
          stiff.emplace_back(2 * n[a] + comp, 2 * n[b] + comp, s[a][b]);
        }
      }
    }
    for (int k = 0; k < 3; ++k) {
      for (int b = 0; b < 6; ++b) {
        div.emplace_back(n[k], 2 * n[b], bx[k][b]);
        div.emplace_back(n[k], 2 * n[b] + 1, by[k][b]);
      }
      for (int l = 0; l < 3; ++l) pmass.emplace_back(n[k], n[l], mp[k][l]);
      mean[n[k]] += g.area / 3.0;
    }
  }

  FormSet f;
  f.mass.resize(nv, nv);
  f.stiffness.resize(nv, nv);
  f.divergence.resize(np, nv);
  f.pressure_mass.resize(np, np);
  f.mass.setFromTriplets(mass.begin(), mass.end());
  f.stiffness.setFromTriplets(stiff.begin(), stiff.end());
  f.divergence.setFromTriplets(div.begin(), div.end());
  f.pressure_mass.setFromTriplets(pmass.begin(), pmass.end());
  f.pressure_mean = std::move(mean);
  return f;
}

ConvectionPair convection_matrix(const TaylorHoodSpace& space, const Vector& w) {
  ADAPTROM_REQUIRE(w.size() == space.velocity_dofs(), ErrorKind::dimension_mismatch,
                   "convecting field has the wrong length");
  const auto& rule = degree5_rule();
  const int nv = space.velocity_dofs();
  std::vector<Triplet> adv, rea;
  adv.reserve(static_cast<std::size_t>(space.cell_count()) * 72);
  rea.reserve(static_cast<std::size_t>(space.cell_count()) * 144);
  for (int c = 0; c < space.cell_count(); ++c) {
    const auto& g = space.geometry(c);
    require_valid(g);
    const auto& n = space.cell_nodes(c);
    const QuadData d = cell_quadrature(g);
    double A[6][6] = {};
    double Rm[6][6][2][2] = {};
    for (int q = 0; q < 7; ++q) {
      const double wq = rule.weights[q] * g.area;
      double val[2], gw[2][2];
      eval_velocity(d, q, n, w, val, gw);
      for (int a = 0; a < 6; ++a) {
        const double pa = wq * d.phi[q][a];
        for (int b = 0; b < 6; ++b) {
          A[a][b] += pa * (val[0] * d.grad[q][b].x + val[1] * d.grad[q][b].y);
          const double pab = pa * d.phi[q][b];
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) Rm[a][b][i][j] += pab * gw[i][j];
        }
      }
    }
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        for (int i = 0; i < 2; ++i) {
          adv.emplace_back(2 * n[a] + i, 2 * n[b] + i, A[a][b]);
          for (int j = 0; j < 2; ++j) rea.emplace_back(2 * n[a] + i, 2 * n[b] + j, Rm[a][b][i][j]);
        }
      }
    }
  }
  ConvectionPair out;
  out.advect.resize(nv, nv);
  out.react.resize(nv, nv);
  out.advect.setFromTriplets(adv.begin(), adv.end());
  out.react.setFromTriplets(rea.begin(), rea.end());
  return out;
}

Vector convection_vector(const TaylorHoodSpace& space, const Vector& w, const Vector& u) {
  ADAPTROM_REQUIRE(w.size() == space.velocity_dofs() && u.size() == space.velocity_dofs(),
                   ErrorKind::dimension_mismatch, "convection operands have the wrong length");
  const auto& rule = degree5_rule();
  Vector out = Vector::Zero(space.velocity_dofs());
  for (int c = 0; c < space.cell_count(); ++c) {
    const auto& g = space.geometry(c);
    require_valid(g);
    const auto& n = space.cell_nodes(c);
    const QuadData d = cell_quadrature(g);
    for (int q = 0; q < 7; ++q) {
      const double wq = rule.weights[q] * g.area;
      double wv[2], wg[2][2], uv[2], ug[2][2];
      eval_velocity(d, q, n, w, wv, wg);
      eval_velocity(d, q, n, u, uv, ug);
      const double cx = wv[0] * ug[0][0] + wv[1] * ug[0][1];
      const double cy = wv[0] * ug[1][0] + wv[1] * ug[1][1];
      for (int a = 0; a < 6; ++a) {
        out[2 * n[a]] += wq * cx * d.phi[q][a];
        out[2 * n[a] + 1] += wq * cy * d.phi[q][a];
      }
    }
  }
  return out;
}

double apply_trilinear(const TaylorHoodSpace& space, const Vector& w, const Vector& u,
                       const Vector& v) {
  ADAPTROM_REQUIRE(v.size() == space.velocity_dofs(), ErrorKind::dimension_mismatch,
                   "test field has the wrong length");
  return convection_vector(space, w, u).dot(v);
}

Vector load_vector(const TaylorHoodSpace& space, const VectorFunction& f) {
  const auto& rule = degree5_rule();
  const auto& phi = reference_values();
  Vector out = Vector::Zero(space.velocity_dofs());
  for (int c = 0; c < space.cell_count(); ++c) {
    const auto& g = space.geometry(c);
    const auto& n = space.cell_nodes(c);
    for (int q = 0; q < 7; ++q) {
      const auto& l = rule.points[q];
      const Point x{l[0] * g.vertices[0].x + l[1] * g.vertices[1].x + l[2] * g.vertices[2].x,
                    l[0] * g.vertices[0].y + l[1] * g.vertices[1].y + l[2] * g.vertices[2].y};
      const Vec2 v = f(x);
      const double w = rule.weights[q] * g.area;
      for (int a = 0; a < 6; ++a) {
        out[2 * n[a]] += w * v[0] * phi[q][a];
        out[2 * n[a] + 1] += w * v[1] * phi[q][a];
      }
    }
  }
  return out;
}

Vector cross_mass(const FeField& source, const TaylorHoodSpace& target) {
  const auto& src = *source.space;
  ADAPTROM_REQUIRE(source.kind == FieldKind::velocity && source.coeffs.size() == src.velocity_dofs(),
                   ErrorKind::dimension_mismatch, "cross mass needs a velocity field");
  ADAPTROM_REQUIRE(src.mesh().forest_ptr() == target.mesh().forest_ptr(),
                   ErrorKind::invalid_hierarchy, "spaces live on different forests");
  const auto& rule = degree5_rule();
  const Forest& forest = src.mesh().forest();
  const Triangulation common = overlay(src.mesh(), target.mesh());
  Vector out = Vector::Zero(target.velocity_dofs());
  for (int t : common.triangles()) {
    const int ts = src.mesh().leaf_ancestor(t);
    const int tt = target.mesh().leaf_ancestor(t);
    const int cs = src.cell_of_triangle(ts);
    const int ct = target.cell_of_triangle(tt);
    const auto& v = forest.triangle(t).v;
    const Point& p0 = forest.vertex(v[0]);
    const Point& p1 = forest.vertex(v[1]);
    const Point& p2 = forest.vertex(v[2]);
    const double area = forest.signed_area(t);
    const auto& nt = target.cell_nodes(ct);
    for (int q = 0; q < 7; ++q) {
      const auto& l = rule.points[q];
      const Point x{l[0] * p0.x + l[1] * p1.x + l[2] * p2.x, l[0] * p0.y + l[1] * p1.y + l[2] * p2.y};
      const Vector u = evaluate_in_cell(source, cs, barycentric(forest, ts, x));
      const auto phi = p2_values(barycentric(forest, tt, x));
      const double w = rule.weights[q] * area;
      for (int a = 0; a < 6; ++a) {
        out[2 * nt[a]] += w * u[0] * phi[a];
        out[2 * nt[a] + 1] += w * u[1] * phi[a];
      }
    }
  }
  return out;
}

}  // namespace adaptrom
