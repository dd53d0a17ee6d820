#include "adaptrom/femspace.hpp"

#include <algorithm>
#include <unordered_map>

namespace adaptrom {

std::array<double, 6> p2_values(const std::array<double, 3>& l) {
  return {l[0] * (2 * l[0] - 1), l[1] * (2 * l[1] - 1), l[2] * (2 * l[2] - 1),
          4 * l[0] * l[1],       4 * l[1] * l[2],       4 * l[2] * l[0]};
}

std::array<Point, 6> p2_gradients(const std::array<double, 3>& l, const CellGeometry& g) {
  const auto& d = g.grad_lambda;
  auto scale = [](Point p, double s) { return Point{p.x * s, p.y * s}; };
  auto add = [](Point a, Point b) { return Point{a.x + b.x, a.y + b.y}; };
  std::array<Point, 6> out;
  for (int i = 0; i < 3; ++i) out[i] = scale(d[i], 4 * l[i] - 1);
  const int e[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int k = 0; k < 3; ++k) {
    const int i = e[k][0], j = e[k][1];
    out[3 + k] = add(scale(d[i], 4 * l[j]), scale(d[j], 4 * l[i]));
  }
  return out;
}

std::array<std::array<double, 3>, 6> p2_hessians(const CellGeometry& g) {
  const auto& d = g.grad_lambda;
  // H(l_i l_j) = d_i d_j^T + d_j d_i^T
  auto sym = [&](int i, int j, double s) {
    return std::array<double, 3>{s * 2 * d[i].x * d[j].x,
                                 s * (d[i].x * d[j].y + d[j].x * d[i].y),
                                 s * 2 * d[i].y * d[j].y};
  };
  std::array<std::array<double, 3>, 6> h;
  for (int i = 0; i < 3; ++i) h[i] = sym(i, i, 2.0);  // l(2l-1): 4 d d^T
  const int e[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int k = 0; k < 3; ++k) h[3 + k] = sym(e[k][0], e[k][1], 4.0);
  return h;
}

TaylorHoodSpace::TaylorHoodSpace(Triangulation mesh) : mesh_(std::move(mesh)) {
  const Forest& forest = mesh_.forest();
  const auto vertex_ids = mesh_.vertex_ids();
  const auto edges = mesh_.edges();
  vertex_count_ = static_cast<int>(vertex_ids.size());

  std::unordered_map<int, int> vertex_node;
  vertex_node.reserve(vertex_ids.size() * 2);
  for (int k = 0; k < vertex_count_; ++k) {
    vertex_node[vertex_ids[k]] = k;
    nodes_.push_back(forest.vertex(vertex_ids[k]));
  }
  std::unordered_map<std::uint64_t, int> edge_node;
  edge_node.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    edge_node[edge_key(e[0], e[1])] = static_cast<int>(nodes_.size());
    const Point& a = forest.vertex(e[0]);
    const Point& b = forest.vertex(e[1]);
    nodes_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
  }

  const auto leaves = mesh_.triangles();
  cell_index_.assign(leaves.empty() ? 0 : leaves.back() + 1, -1);
  dirichlet_flag_.assign(nodes_.size(), false);
  for (std::size_t c = 0; c < leaves.size(); ++c) {
    const int t = leaves[c];
    cell_index_[t] = static_cast<int>(c);
    const auto& v = forest.triangle(t).v;
    std::array<int, 6> n{vertex_node.at(v[0]), vertex_node.at(v[1]), vertex_node.at(v[2]),
                         edge_node.at(edge_key(v[0], v[1])),
                         edge_node.at(edge_key(v[1], v[2])),
                         edge_node.at(edge_key(v[2], v[0]))};
    cell_nodes_.push_back(n);

    CellGeometry g;
    for (int i = 0; i < 3; ++i) g.vertices[i] = forest.vertex(v[i]);
    const Point& a = g.vertices[0];
    const Point& b = g.vertices[1];
    const Point& cc = g.vertices[2];
    const double det = (b.x - a.x) * (cc.y - a.y) - (cc.x - a.x) * (b.y - a.y);
    g.area = 0.5 * det;
    g.grad_lambda[1] = {(cc.y - a.y) / det, -(cc.x - a.x) / det};
    g.grad_lambda[2] = {-(b.y - a.y) / det, (b.x - a.x) / det};
    g.grad_lambda[0] = {-g.grad_lambda[1].x - g.grad_lambda[2].x,
                        -g.grad_lambda[1].y - g.grad_lambda[2].y};
    geometry_.push_back(g);

    const int le[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    for (int k = 0; k < 3; ++k) {
      const Point& p = g.vertices[le[k][0]];
      const Point& q = g.vertices[le[k][1]];
      if (on_unit_square_boundary(p, q)) {
        dirichlet_flag_[n[le[k][0]]] = true;
        dirichlet_flag_[n[le[k][1]]] = true;
        dirichlet_flag_[n[3 + k]] = true;
      }
    }
  }

  interior_index_.assign(2 * nodes_.size(), -1);
  for (int k = 0; k < node_count(); ++k) {
    if (dirichlet_flag_[k]) {
      dirichlet_nodes_.push_back(k);
      dirichlet_dofs_.push_back(2 * k);
      dirichlet_dofs_.push_back(2 * k + 1);
    } else {
      for (int c = 0; c < 2; ++c) {
        interior_index_[2 * k + c] = static_cast<int>(interior_dofs_.size());
        interior_dofs_.push_back(2 * k + c);
      }
    }
  }
}

SpacePtr build_space(const Triangulation& mesh) {
  return std::make_shared<const TaylorHoodSpace>(mesh);
}

Eigen::VectorXd evaluate_in_cell(const FeField& field, int cell,
                                 const std::array<double, 3>& lambda) {
  const auto& n = field.space->cell_nodes(cell);
  if (field.kind == FieldKind::pressure) {
    Eigen::VectorXd out(1);
    out[0] = lambda[0] * field.coeffs[n[0]] + lambda[1] * field.coeffs[n[1]] +
             lambda[2] * field.coeffs[n[2]];
    return out;
  }
  const auto phi = p2_values(lambda);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2);
  for (int a = 0; a < 6; ++a) {
    out[0] += phi[a] * field.coeffs[2 * n[a]];
    out[1] += phi[a] * field.coeffs[2 * n[a] + 1];
  }
  return out;
}

Eigen::VectorXd evaluate(const FeField& field, Point p) {
  const auto& mesh = field.space->mesh();
  const int t = mesh.locate(p);
  const int cell = field.space->cell_of_triangle(t);
  return evaluate_in_cell(field, cell, barycentric(mesh.forest(), t, p));
}

namespace {

std::array<std::array<double, 3>, 6> local_node_barycentrics(const Forest& forest, int t_target,
                                                             int t_source) {
  const auto& v = forest.triangle(t_target).v;
  std::array<Point, 6> pts;
  for (int i = 0; i < 3; ++i) pts[i] = forest.vertex(v[i]);
  const int le[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int k = 0; k < 3; ++k)
    pts[3 + k] = {0.5 * (pts[le[k][0]].x + pts[le[k][1]].x),
                  0.5 * (pts[le[k][0]].y + pts[le[k][1]].y)};
  std::array<std::array<double, 3>, 6> out;
  for (int a = 0; a < 6; ++a) out[a] = barycentric(forest, t_source, pts[a]);
  return out;
}

void write_node(const FeField& field, int src_cell, const std::array<double, 3>& lambda,
                int node, Eigen::VectorXd& out) {
  const auto val = evaluate_in_cell(field, src_cell, lambda);
  if (field.kind == FieldKind::pressure) {
    out[node] = val[0];
  } else {
    out[2 * node] = val[0];
    out[2 * node + 1] = val[1];
  }
}

}  // namespace

FeField lagrange_interp(const FeField& field, const SpacePtr& target) {
  const auto& src = *field.space;
  ADAPTROM_REQUIRE(src.mesh().forest_ptr() == target->mesh().forest_ptr(),
                   ErrorKind::invalid_hierarchy, "spaces live on different forests");
  if (&src == target.get() || src.mesh() == target->mesh()) {
    return FeField{target, field.coeffs, field.kind, field.zero_mean};
  }
  const Forest& forest = src.mesh().forest();
  const bool pressure = field.kind == FieldKind::pressure;
  Eigen::VectorXd out(pressure ? target->pressure_dofs() : target->velocity_dofs());
  for (int c = 0; c < target->cell_count(); ++c) {
    const int t = target->cell_triangle(c);
    const int s = src.mesh().leaf_ancestor(t);
    ADAPTROM_REQUIRE(s >= 0, ErrorKind::invalid_hierarchy,
                     "target mesh does not refine the source mesh");
    const auto lam = local_node_barycentrics(forest, t, s);
    const auto& n = target->cell_nodes(c);
    const int count = pressure ? 3 : 6;
    for (int a = 0; a < count; ++a)
      write_node(field, src.cell_of_triangle(s), lam[a], n[a], out);
  }
  return FeField{target, std::move(out), field.kind, field.zero_mean};
}

FeField nodal_transfer(const FeField& field, const SpacePtr& target) {
  const auto& src = *field.space;
  ADAPTROM_REQUIRE(src.mesh().forest_ptr() == target->mesh().forest_ptr(),
                   ErrorKind::invalid_hierarchy, "spaces live on different forests");
  const Forest& forest = src.mesh().forest();
  const bool pressure = field.kind == FieldKind::pressure;
  Eigen::VectorXd out(pressure ? target->pressure_dofs() : target->velocity_dofs());
  for (int c = 0; c < target->cell_count(); ++c) {
    const int t = target->cell_triangle(c);
    const int s = src.mesh().leaf_ancestor(t);
    const auto& n = target->cell_nodes(c);
    const int count = pressure ? 3 : 6;
    if (s >= 0) {
      const auto lam = local_node_barycentrics(forest, t, s);
      for (int a = 0; a < count; ++a) write_node(field, src.cell_of_triangle(s), lam[a], n[a], out);
      continue;
    }
    // the source is finer here: locate each node among t's descendants
    for (int a = 0; a < count; ++a) {
      const Point p = target->node(n[a]);
      const int leaf = src.mesh().locate_below(t, p);
      ADAPTROM_REQUIRE(leaf >= 0, ErrorKind::invalid_hierarchy, "node not covered by source");
      write_node(field, src.cell_of_triangle(leaf), barycentric(forest, leaf, p), n[a], out);
    }
  }
  return FeField{target, std::move(out), field.kind, field.zero_mean};
}

Eigen::VectorXd interpolate_velocity(const TaylorHoodSpace& space, const VectorFunction& fn) {
  Eigen::VectorXd out(space.velocity_dofs());
  for (int k = 0; k < space.node_count(); ++k) {
    const Vec2 v = fn(space.node(k));
    out[2 * k] = v[0];
    out[2 * k + 1] = v[1];
  }
  return out;
}

Eigen::VectorXd boundary_interpolant(const TaylorHoodSpace& space, const VectorFunction& fn) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.velocity_dofs());
  for (int k : space.dirichlet_nodes()) {
    const Vec2 v = fn(space.node(k));
    out[2 * k] = v[0];
    out[2 * k + 1] = v[1];
  }
  return out;
}

Eigen::VectorXd interpolate_pressure(const TaylorHoodSpace& space, const ScalarFunction& fn) {
  Eigen::VectorXd out(space.pressure_dofs());
  for (int k = 0; k < space.pressure_dofs(); ++k) out[k] = fn(space.node(k));
  return out;
}

}  // namespace adaptrom
