#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "adaptrom/mesh.hpp"

namespace adaptrom {

using Vec2 = std::array<double, 2>;

/// Geometry of one cell: area and the constant gradients of the three
/// barycentric coordinates.
struct CellGeometry {
  double area = 0.0;
  std::array<Point, 3> grad_lambda{};
  std::array<Point, 3> vertices{};
};

/// P2 shape functions in barycentric coordinates. Local order: the three
/// vertices, then the edge nodes (0,1), (1,2), (2,0).
std::array<double, 6> p2_values(const std::array<double, 3>& lambda);
std::array<Point, 6> p2_gradients(const std::array<double, 3>& lambda, const CellGeometry& g);
/// Constant second derivatives (xx, xy, yy) of the P2 shape functions.
std::array<std::array<double, 3>, 6> p2_hessians(const CellGeometry& g);

/// P2 velocity / P1 pressure Taylor-Hood pair on a triangulation.
///
/// Nodes are numbered vertices first (ascending forest vertex id), then edge
/// midpoints (ascending vertex pair). Pressure dof k is vertex node k.
/// Velocity dofs are interleaved per node: 2k is x, 2k+1 is y.
/// Dirichlet nodes are all nodes on the boundary of the unit square.
class TaylorHoodSpace {
 public:
  explicit TaylorHoodSpace(Triangulation mesh);

  const Triangulation& mesh() const { return mesh_; }
  std::uint64_t id() const { return mesh_.hash(); }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return node_count() - vertex_count_; }
  int velocity_dofs() const { return 2 * node_count(); }
  int pressure_dofs() const { return vertex_count_; }
  const Point& node(int k) const { return nodes_[k]; }

  int cell_count() const { return static_cast<int>(cell_nodes_.size()); }
  const std::array<int, 6>& cell_nodes(int cell) const { return cell_nodes_[cell]; }
  int cell_triangle(int cell) const { return mesh_.triangles()[cell]; }
  int cell_of_triangle(int forest_triangle) const {
    return forest_triangle >= 0 && forest_triangle < static_cast<int>(cell_index_.size())
               ? cell_index_[forest_triangle]
               : -1;
  }
  const CellGeometry& geometry(int cell) const { return geometry_[cell]; }

  bool is_dirichlet_node(int k) const { return dirichlet_flag_[k]; }
  const std::vector<int>& dirichlet_nodes() const { return dirichlet_nodes_; }
  const std::vector<int>& dirichlet_velocity_dofs() const { return dirichlet_dofs_; }
  const std::vector<int>& interior_velocity_dofs() const { return interior_dofs_; }
  /// Position of a velocity dof in the interior list, or -1 for Dirichlet dofs.
  int interior_index(int dof) const { return interior_index_[dof]; }

 private:
  Triangulation mesh_;
  int vertex_count_ = 0;
  std::vector<Point> nodes_;
  std::vector<std::array<int, 6>> cell_nodes_;
  std::vector<CellGeometry> geometry_;
  std::vector<int> cell_index_;
  std::vector<bool> dirichlet_flag_;
  std::vector<int> dirichlet_nodes_;
  std::vector<int> dirichlet_dofs_;
  std::vector<int> interior_dofs_;
  std::vector<int> interior_index_;
};

using SpacePtr = std::shared_ptr<const TaylorHoodSpace>;

SpacePtr build_space(const Triangulation& mesh);

enum class FieldKind { velocity, pressure };

struct FeField {
  SpacePtr space;
  Eigen::VectorXd coeffs;
  FieldKind kind = FieldKind::velocity;
  bool zero_mean = false;

  static FeField velocity(SpacePtr s, Eigen::VectorXd c) {
    return {std::move(s), std::move(c), FieldKind::velocity, false};
  }
  static FeField pressure(SpacePtr s, Eigen::VectorXd c, bool zero_mean = false) {
    return {std::move(s), std::move(c), FieldKind::pressure, zero_mean};
  }
};

/// Field value at p: two components for velocity, one for pressure.
Eigen::VectorXd evaluate(const FeField& field, Point p);
/// Value inside a known cell at barycentric coordinates lambda.
Eigen::VectorXd evaluate_in_cell(const FeField& field, int cell,
                                 const std::array<double, 3>& lambda);

/// Lagrange interpolation onto a space whose mesh refines the field's mesh.
FeField lagrange_interp(const FeField& field, const SpacePtr& target);
/// Nodal interpolation between arbitrary spaces of one forest (no nesting
/// required); exact only where the target is nested in the source.
FeField nodal_transfer(const FeField& field, const SpacePtr& target);

using VectorFunction = std::function<Vec2(Point)>;
using ScalarFunction = std::function<double(Point)>;

/// Velocity coefficients interpolating fn at every node.
Eigen::VectorXd interpolate_velocity(const TaylorHoodSpace& space, const VectorFunction& fn);
/// Velocity coefficients equal to fn at Dirichlet nodes and zero elsewhere.
Eigen::VectorXd boundary_interpolant(const TaylorHoodSpace& space, const VectorFunction& fn);
Eigen::VectorXd interpolate_pressure(const TaylorHoodSpace& space, const ScalarFunction& fn);

}  // namespace adaptrom
