#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adaptrom/error.hpp"

namespace adaptrom {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

/// How the roots of a forest were generated; recorded in mesh archives.
struct InitDescriptor {
  std::string kind = "criss_cross";
  int cells_per_side = 0;
};

/// Append-only refinement forest shared by every mesh that descends from one
/// initial triangulation.
///
/// A forest triangle stores its vertices as (v0, v1, v2) in counter-clockwise
/// order; v2 is the newest vertex and (v0, v1) the refinement edge. Bisection
/// inserts the midpoint m of (v0, v1) and creates the children (v2, v0, m) and
/// (v1, v2, m). Children and midpoints are created once and cached, so a given
/// geometric triangle always carries the same id across all meshes of the
/// forest. Growth is serialized by an internal mutex; reading while another
/// thread refines the same forest is not supported.
class Forest {
 public:
  struct Triangle {
    std::array<int, 3> v{};
    int parent = -1;
    std::array<int, 2> children{-1, -1};
    int generation = 0;
  };

  Forest(std::vector<Point> vertices, std::vector<std::array<int, 3>> roots,
         InitDescriptor init);

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int triangle_count() const { return static_cast<int>(triangles_.size()); }
  int root_count() const { return root_count_; }
  const Point& vertex(int id) const { return vertices_[id]; }
  const Triangle& triangle(int id) const { return triangles_[id]; }
  const InitDescriptor& init() const { return init_; }

  bool has_children(int t) const { return triangles_[t].children[0] >= 0; }
  /// Children of t, created on first request.
  std::array<int, 2> children(int t);
  /// Midpoint vertex of (a, b) if it has been created, else -1.
  int midpoint(int a, int b) const;

  double signed_area(int t) const;
  bool is_ancestor_or_self(int ancestor, int t) const;

  /// Appends archived records; existing ids must agree with the records.
  void merge_records(std::span<const Point> vertices,
                     std::span<const Triangle> triangles);

 private:
  int midpoint_or_create(int a, int b);

  std::deque<Point> vertices_;
  std::deque<Triangle> triangles_;
  std::unordered_map<std::uint64_t, int> midpoints_;
  int root_count_ = 0;
  InitDescriptor init_;
  std::mutex grow_mutex_;
};

/// Conforming triangulation: the set of active (leaf) forest triangles.
/// Immutable after construction.
class Triangulation {
 public:
  Triangulation() = default;
  Triangulation(std::shared_ptr<Forest> forest, std::vector<int> leaves);

  const Forest& forest() const { return *forest_; }
  Forest& forest_mut() const { return *forest_; }
  const std::shared_ptr<Forest>& forest_ptr() const { return forest_; }

  std::span<const int> triangles() const { return leaves_; }
  std::size_t size() const { return leaves_.size(); }
  bool contains(int t) const {
    return t >= 0 && static_cast<std::size_t>(t) < member_.size() && member_[t];
  }

  /// Sorted forest ids of all vertices used by the mesh.
  std::vector<int> vertex_ids() const;
  std::size_t vertex_count() const { return vertex_ids().size(); }
  /// Sorted (min, max) vertex pairs of all edges.
  std::vector<std::array<int, 2>> edges() const;
  std::vector<std::array<int, 2>> boundary_edges() const;

  /// The mesh triangle equal to t or containing it, or -1 when the mesh is
  /// finer than t there.
  int leaf_ancestor(int t) const;
  /// Mesh triangle containing p; throws out_of_domain.
  int locate(Point p) const;
  /// Mesh triangle containing p, searching only below forest triangle `start`.
  int locate_below(int start, Point p) const;

  int max_generation() const;
  std::uint64_t hash() const;

  bool operator==(const Triangulation& other) const {
    return forest_ == other.forest_ && leaves_ == other.leaves_;
  }

 private:
  std::shared_ptr<Forest> forest_;
  std::vector<int> leaves_;
  std::vector<bool> member_;
};

using MarkSet = std::vector<int>;

/// Barycentric coordinates of p with respect to forest triangle t.
std::array<double, 3> barycentric(const Forest& forest, int t, Point p);
bool point_in_triangle(const Forest& forest, int t, Point p, double tol = 1e-12);
bool on_unit_square_boundary(Point a, Point b);

Triangulation criss_cross_init(int cells_per_side);
Triangulation bisect(const Triangulation& mesh, const MarkSet& marked);
Triangulation refine_uniform(const Triangulation& mesh);
Triangulation coarsen_once(const Triangulation& mesh, const Triangulation& init);
Triangulation overlay(const Triangulation& a, const Triangulation& b);
Triangulation overlay_all(std::span<const Triangulation> meshes);
/// The initial triangulation (all roots) of mesh's forest.
Triangulation roots_of(const Triangulation& mesh);

struct ConformityReport {
  bool conforming = true;
  bool positive_areas = true;
  std::string message;
};
ConformityReport check_conformity(const Triangulation& mesh);

}  // namespace adaptrom
