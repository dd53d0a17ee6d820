#include "adaptrom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace adaptrom {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid parameter";
    case ErrorKind::invalid_hierarchy: return "invalid hierarchy";
    case ErrorKind::assembly: return "assembly error";
    case ErrorKind::factorization: return "factorization error";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::dimension_mismatch: return "dimension mismatch";
    case ErrorKind::out_of_domain: return "out of domain";
    case ErrorKind::rank_deficient: return "rank deficiency";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::unknown_method: return "unknown method";
  }
  return "error";
}

// ---------------------------------------------------------------- Forest

Forest::Forest(std::vector<Point> vertices, std::vector<std::array<int, 3>> roots,
               InitDescriptor init)
    : vertices_(vertices.begin(), vertices.end()),
      root_count_(static_cast<int>(roots.size())),
      init_(std::move(init)) {
  for (const auto& r : roots) {
    Triangle t;
    t.v = r;
    triangles_.push_back(t);
  }
}

int Forest::midpoint(int a, int b) const {
  auto it = midpoints_.find(edge_key(a, b));
  return it == midpoints_.end() ? -1 : it->second;
}

int Forest::midpoint_or_create(int a, int b) {
  auto key = edge_key(a, b);
  auto it = midpoints_.find(key);
  if (it != midpoints_.end()) return it->second;
  const Point& pa = vertices_[a];
  const Point& pb = vertices_[b];
  vertices_.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
  int id = static_cast<int>(vertices_.size()) - 1;
  midpoints_.emplace(key, id);
  return id;
}

std::array<int, 2> Forest::children(int t) {
  if (has_children(t)) return triangles_[t].children;
  std::lock_guard<std::mutex> lock(grow_mutex_);
  if (has_children(t)) return triangles_[t].children;
  const auto v = triangles_[t].v;
  const int gen = triangles_[t].generation + 1;
  const int m = midpoint_or_create(v[0], v[1]);
  Triangle c0, c1;
  c0.v = {v[2], v[0], m};
  c1.v = {v[1], v[2], m};
  c0.parent = c1.parent = t;
  c0.generation = c1.generation = gen;
  triangles_.push_back(c0);
  triangles_.push_back(c1);
  const int id1 = static_cast<int>(triangles_.size()) - 1;
  triangles_[t].children = {id1 - 1, id1};
  return triangles_[t].children;
}

double Forest::signed_area(int t) const {
  const auto& v = triangles_[t].v;
  const Point& a = vertices_[v[0]];
  const Point& b = vertices_[v[1]];
  const Point& c = vertices_[v[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

bool Forest::is_ancestor_or_self(int ancestor, int t) const {
  while (t >= 0) {
    if (t == ancestor) return true;
    if (t < ancestor) return false;  // ancestors always carry smaller ids
    t = triangles_[t].parent;
  }
  return false;
}

void Forest::merge_records(std::span<const Point> vertices,
                           std::span<const Triangle> triangles) {
  std::lock_guard<std::mutex> lock(grow_mutex_);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (i < vertices_.size()) {
      ADAPTROM_REQUIRE(vertices_[i].x == vertices[i].x && vertices_[i].y == vertices[i].y,
                       ErrorKind::invalid_hierarchy, "archived vertex disagrees with forest");
    } else {
      vertices_.push_back(vertices[i]);
    }
  }
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const Triangle& rec = triangles[i];
    if (i < triangles_.size()) {
      ADAPTROM_REQUIRE(triangles_[i].v == rec.v && triangles_[i].parent == rec.parent,
                       ErrorKind::invalid_hierarchy, "archived triangle disagrees with forest");
      continue;
    }
    ADAPTROM_REQUIRE(rec.parent >= 0 && rec.parent < static_cast<int>(i),
                     ErrorKind::invalid_hierarchy, "archived triangle has no valid parent");
    Triangle t;
    t.v = rec.v;
    t.parent = rec.parent;
    t.generation = triangles_[rec.parent].generation + 1;
    triangles_.push_back(t);
    auto& p = triangles_[rec.parent];
    const int slot = (p.children[0] < 0) ? 0 : 1;
    p.children[slot] = static_cast<int>(i);
    if (slot == 0) {
      // the refinement-edge midpoint is the newest vertex of both children
      midpoints_.emplace(edge_key(p.v[0], p.v[1]), rec.v[2]);
    }
  }
}

// ---------------------------------------------------------------- geometry

std::array<double, 3> barycentric(const Forest& forest, int t, Point p) {
  const auto& v = forest.triangle(t).v;
  const Point& a = forest.vertex(v[0]);
  const Point& b = forest.vertex(v[1]);
  const Point& c = forest.vertex(v[2]);
  const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  const double l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
  const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
  return {1.0 - l1 - l2, l1, l2};
}

bool point_in_triangle(const Forest& forest, int t, Point p, double tol) {
  const auto l = barycentric(forest, t, p);
  return l[0] >= -tol && l[1] >= -tol && l[2] >= -tol;
}

bool on_unit_square_boundary(Point a, Point b) {
  auto same = [](double u, double w, double c) { return u == c && w == c; };
  return same(a.x, b.x, 0.0) || same(a.x, b.x, 1.0) || same(a.y, b.y, 0.0) ||
         same(a.y, b.y, 1.0);
}

// ---------------------------------------------------------------- Triangulation

Triangulation::Triangulation(std::shared_ptr<Forest> forest, std::vector<int> leaves)
    : forest_(std::move(forest)), leaves_(std::move(leaves)) {
  std::sort(leaves_.begin(), leaves_.end());
  leaves_.erase(std::unique(leaves_.begin(), leaves_.end()), leaves_.end());
  member_.assign(leaves_.empty() ? 0 : leaves_.back() + 1, false);
  for (int t : leaves_) member_[t] = true;
}

std::vector<int> Triangulation::vertex_ids() const {
  std::vector<int> ids;
  ids.reserve(leaves_.size() * 3);
  for (int t : leaves_)
    for (int v : forest_->triangle(t).v) ids.push_back(v);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<std::array<int, 2>> Triangulation::edges() const {
  std::vector<std::array<int, 2>> e;
  e.reserve(leaves_.size() * 3);
  for (int t : leaves_) {
    const auto& v = forest_->triangle(t).v;
    for (int k = 0; k < 3; ++k) {
      int a = v[k], b = v[(k + 1) % 3];
      e.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return e;
}

std::vector<std::array<int, 2>> Triangulation::boundary_edges() const {
  std::map<std::array<int, 2>, int> count;
  for (int t : leaves_) {
    const auto& v = forest_->triangle(t).v;
    for (int k = 0; k < 3; ++k) {
      int a = v[k], b = v[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::vector<std::array<int, 2>> out;
  for (const auto& [e, c] : count)
    if (c == 1) out.push_back(e);
  return out;
}

int Triangulation::leaf_ancestor(int t) const {
  while (t >= 0) {
    if (contains(t)) return t;
    t = forest_->triangle(t).parent;
  }
  return -1;
}

int Triangulation::locate_below(int start, Point p) const {
  int t = start;
  for (;;) {
    if (contains(t)) return t;
    if (!forest_->has_children(t)) return -1;
    const auto ch = forest_->triangle(t).children;
    // pick the child with the largest minimal barycentric coordinate
    auto l0 = barycentric(*forest_, ch[0], p);
    auto l1 = barycentric(*forest_, ch[1], p);
    double m0 = std::min({l0[0], l0[1], l0[2]});
    double m1 = std::min({l1[0], l1[1], l1[2]});
    t = (m0 >= m1) ? ch[0] : ch[1];
  }
}

int Triangulation::locate(Point p) const {
  constexpr double tol = 1e-12;
  if (p.x < -tol || p.x > 1 + tol || p.y < -tol || p.y > 1 + tol)
    throw Error(ErrorKind::out_of_domain, "point outside the unit square");
  for (int r = 0; r < forest_->root_count(); ++r) {
    if (!point_in_triangle(*forest_, r, p, tol)) continue;
    int t = leaf_ancestor(r) >= 0 ? leaf_ancestor(r) : locate_below(r, p);
    if (t >= 0) return t;
  }
  throw Error(ErrorKind::out_of_domain, "point not covered by the triangulation");
}

int Triangulation::max_generation() const {
  int g = 0;
  for (int t : leaves_) g = std::max(g, forest_->triangle(t).generation);
  return g;
}

std::uint64_t Triangulation::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (int t : leaves_) {
    h ^= static_cast<std::uint64_t>(t);
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------- construction

Triangulation criss_cross_init(int m) {
  ADAPTROM_REQUIRE(m >= 1, ErrorKind::invalid_parameter, "cells per side must be >= 1");
  std::vector<Point> vertices;
  const double h = 1.0 / m;
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i) vertices.push_back({i * h, j * h});
  const int centers = static_cast<int>(vertices.size());
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) vertices.push_back({(i + 0.5) * h, (j + 0.5) * h});
  // the grid lines are exact multiples of h; pin the outer ones to 0 and 1
  for (auto& p : vertices) {
    if (std::abs(p.x - 1.0) < 1e-14) p.x = 1.0;
    if (std::abs(p.y - 1.0) < 1e-14) p.y = 1.0;
  }

  std::vector<std::array<int, 3>> roots;
  auto gid = [m](int i, int j) { return j * (m + 1) + i; };
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const int p00 = gid(i, j), p10 = gid(i + 1, j), p11 = gid(i + 1, j + 1),
                p01 = gid(i, j + 1), c = centers + j * m + i;
      // refinement edge on the square side, newest vertex at the center
      roots.push_back({p00, p10, c});
      roots.push_back({p10, p11, c});
      roots.push_back({p11, p01, c});
      roots.push_back({p01, p00, c});
    }
  }
  std::vector<int> leaves(roots.size());
  for (std::size_t k = 0; k < leaves.size(); ++k) leaves[k] = static_cast<int>(k);
  auto forest = std::make_shared<Forest>(std::move(vertices), std::move(roots),
                                         InitDescriptor{"criss_cross", m});
  return Triangulation(std::move(forest), std::move(leaves));
}

Triangulation roots_of(const Triangulation& mesh) {
  std::vector<int> leaves(mesh.forest().root_count());
  for (std::size_t k = 0; k < leaves.size(); ++k) leaves[k] = static_cast<int>(k);
  return Triangulation(mesh.forest_ptr(), std::move(leaves));
}

namespace {

// Mutable working state for refinement and coarsening.
struct WorkingMesh {
  Forest& forest;
  std::set<int> active;
  std::vector<int> vertex_use;
  std::unordered_map<std::uint64_t, std::vector<int>> edge_tris;

  explicit WorkingMesh(const Triangulation& mesh)
      : forest(mesh.forest_mut()), active(mesh.triangles().begin(), mesh.triangles().end()) {
    for (int t : active) add_incidence(t);
  }

  void add_incidence(int t) {
    const auto v = forest.triangle(t).v;
    for (int k = 0; k < 3; ++k) {
      if (static_cast<int>(vertex_use.size()) <= v[k]) vertex_use.resize(v[k] + 1, 0);
      ++vertex_use[v[k]];
      edge_tris[edge_key(v[k], v[(k + 1) % 3])].push_back(t);
    }
  }
  void remove_incidence(int t) {
    const auto v = forest.triangle(t).v;
    for (int k = 0; k < 3; ++k) {
      --vertex_use[v[k]];
      auto& list = edge_tris[edge_key(v[k], v[(k + 1) % 3])];
      list.erase(std::find(list.begin(), list.end(), t));
    }
  }
  bool vertex_active(int id) const {
    return id >= 0 && id < static_cast<int>(vertex_use.size()) && vertex_use[id] > 0;
  }
  bool has_hanging_node(int t) const {
    const auto& v = forest.triangle(t).v;
    for (int k = 0; k < 3; ++k)
      if (vertex_active(forest.midpoint(v[k], v[(k + 1) % 3]))) return true;
    return false;
  }
  std::vector<int> leaves() const { return {active.begin(), active.end()}; }
};

}  // namespace

Triangulation bisect(const Triangulation& mesh, const MarkSet& marked) {
  if (marked.empty()) return mesh;
  for (int t : marked)
    ADAPTROM_REQUIRE(mesh.contains(t), ErrorKind::invalid_parameter,
                     "marked triangle is not part of the mesh");
  WorkingMesh w(mesh);
  std::set<int> queue(marked.begin(), marked.end());
  while (!queue.empty()) {
    const int t = *queue.begin();
    queue.erase(queue.begin());
    if (!w.active.count(t)) continue;
    const auto v = w.forest.triangle(t).v;
    const auto ch = w.forest.children(t);
    w.remove_incidence(t);
    w.active.erase(t);
    for (int c : ch) {
      w.active.insert(c);
      w.add_incidence(c);
    }
    // triangles sharing the bisected edge now carry a hanging node
    for (int n : w.edge_tris[edge_key(v[0], v[1])]) queue.insert(n);
    for (int c : ch)
      if (w.has_hanging_node(c)) queue.insert(c);
  }
  return Triangulation(mesh.forest_ptr(), w.leaves());
}

Triangulation refine_uniform(const Triangulation& mesh) {
  return bisect(mesh, MarkSet(mesh.triangles().begin(), mesh.triangles().end()));
}

Triangulation coarsen_once(const Triangulation& mesh, const Triangulation& init) {
  ADAPTROM_REQUIRE(mesh.forest_ptr() == init.forest_ptr(), ErrorKind::invalid_hierarchy,
                   "mesh does not descend from the initial mesh");
  for (int t : mesh.triangles())
    ADAPTROM_REQUIRE(init.leaf_ancestor(t) >= 0, ErrorKind::invalid_hierarchy,
                     "mesh is coarser than the initial mesh");
  const Forest& forest = mesh.forest();

  std::set<int> candidates;
  for (int t : mesh.triangles()) {
    const int p = forest.triangle(t).parent;
    if (p < 0) continue;
    const auto ch = forest.triangle(p).children;
    if (mesh.contains(ch[0]) && mesh.contains(ch[1])) candidates.insert(p);
  }

  WorkingMesh w(mesh);
  std::unordered_map<int, std::vector<int>> vertex_tris;
  for (int t : w.active)
    for (int v : forest.triangle(t).v) vertex_tris[v].push_back(t);

  std::set<int> merged;
  for (int p : candidates) {
    if (merged.count(p)) continue;
    const auto ch = forest.triangle(p).children;
    if (!w.active.count(ch[0]) || !w.active.count(ch[1])) continue;
    const int m = forest.triangle(ch[0]).v[2];
    // m may be removed only if every triangle around it is a child whose
    // newest vertex is m and whose sibling is active as well
    std::set<int> parents;
    bool ok = true;
    for (int t : vertex_tris[m]) {
      if (!w.active.count(t)) continue;
      const auto& tri = forest.triangle(t);
      if (tri.v[2] != m || tri.parent < 0) { ok = false; break; }
      const auto sib = forest.triangle(tri.parent).children;
      if (!w.active.count(sib[0]) || !w.active.count(sib[1])) { ok = false; break; }
      // at most one generation per sweep
      if (!candidates.count(tri.parent)) { ok = false; break; }
      parents.insert(tri.parent);
    }
    // never coarser than the initial mesh
    for (int q : parents)
      if (ok && init.leaf_ancestor(q) < 0) ok = false;
    if (!ok) continue;
    for (int q : parents) {
      for (int c : forest.triangle(q).children) {
        w.remove_incidence(c);
        w.active.erase(c);
      }
      w.active.insert(q);
      w.add_incidence(q);
      for (int v : forest.triangle(q).v) vertex_tris[v].push_back(q);
      merged.insert(q);
    }
  }
  Triangulation coarse(mesh.forest_ptr(), w.leaves());
  return overlay(coarse, init);
}

Triangulation overlay_all(std::span<const Triangulation> meshes) {
  ADAPTROM_REQUIRE(!meshes.empty(), ErrorKind::invalid_parameter, "no meshes to overlay");
  const auto& forest_ptr = meshes[0].forest_ptr();
  for (const auto& m : meshes)
    ADAPTROM_REQUIRE(m.forest_ptr() == forest_ptr, ErrorKind::invalid_hierarchy,
                     "meshes descend from different initial meshes");
  const Forest& forest = *forest_ptr;
  std::vector<char> in_union(forest.triangle_count(), 0);
  std::vector<char> is_ancestor(forest.triangle_count(), 0);
  for (const auto& m : meshes)
    for (int t : m.triangles()) in_union[t] = 1;
  for (int t = 0; t < forest.triangle_count(); ++t) {
    if (!in_union[t]) continue;
    for (int p = forest.triangle(t).parent; p >= 0 && !is_ancestor[p];
         p = forest.triangle(p).parent)
      is_ancestor[p] = 1;
  }
  std::vector<int> leaves;
  for (int t = 0; t < forest.triangle_count(); ++t)
    if (in_union[t] && !is_ancestor[t]) leaves.push_back(t);
  return Triangulation(forest_ptr, std::move(leaves));
}

Triangulation overlay(const Triangulation& a, const Triangulation& b) {
  const Triangulation both[] = {a, b};
  return overlay_all(both);
}

ConformityReport check_conformity(const Triangulation& mesh) {
  ConformityReport report;
  const Forest& forest = mesh.forest();
  std::unordered_map<std::uint64_t, int> incidence;
  for (int t : mesh.triangles()) {
    if (!(forest.signed_area(t) > 0.0)) {
      report.positive_areas = false;
      report.message = "non-positive area in triangle " + std::to_string(t);
    }
    const auto& v = forest.triangle(t).v;
    for (int k = 0; k < 3; ++k) ++incidence[edge_key(v[k], v[(k + 1) % 3])];
  }
  for (const auto& [key, count] : incidence) {
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    const bool boundary = on_unit_square_boundary(forest.vertex(a), forest.vertex(b));
    if (count > 2 || (count == 1) != boundary) {
      report.conforming = false;
      std::ostringstream s;
      s << "edge (" << a << "," << b << ") has incidence " << count;
      report.message = s.str();
      break;
    }
  }
  return report;
}

}  // namespace adaptrom
