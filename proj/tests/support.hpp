#pragma once

// Independent reference machinery for tests: fields are rebuilt per cell as
// monomial polynomials fitted to nodal values and integrated with a
// collapsed-square Gauss product rule, sharing no code with the library's
// shape functions or quadrature.

#include <array>
#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "adaptrom/femspace.hpp"
#include "adaptrom/mesh.hpp"

namespace testsupport {

using adaptrom::Point;

// Quadratic a0 + a1 x + a2 y + a3 x^2 + a4 xy + a5 y^2.
struct Quadratic {
  std::array<double, 6> a{};
  double value(Point p) const {
    return a[0] + a[1] * p.x + a[2] * p.y + a[3] * p.x * p.x + a[4] * p.x * p.y +
           a[5] * p.y * p.y;
  }
  double dx(Point p) const { return a[1] + 2 * a[3] * p.x + a[4] * p.y; }
  double dy(Point p) const { return a[2] + a[4] * p.x + 2 * a[5] * p.y; }
};

inline std::array<Point, 6> cell_node_points(const adaptrom::TaylorHoodSpace& s, int cell) {
  std::array<Point, 6> pts;
  const auto& n = s.cell_nodes(cell);
  for (int a = 0; a < 6; ++a) pts[a] = s.node(n[a]);
  return pts;
}

inline Quadratic fit_quadratic(const std::array<Point, 6>& pts, const std::array<double, 6>& vals) {
  Eigen::Matrix<double, 6, 6> V;
  Eigen::Matrix<double, 6, 1> b;
  for (int i = 0; i < 6; ++i) {
    const Point& p = pts[i];
    V.row(i) << 1, p.x, p.y, p.x * p.x, p.x * p.y, p.y * p.y;
    b[i] = vals[i];
  }
  const Eigen::Matrix<double, 6, 1> c = V.fullPivLu().solve(b);
  Quadratic q;
  for (int i = 0; i < 6; ++i) q.a[i] = c[i];
  return q;
}

struct LocalVelocity {
  Quadratic ux, uy;
};

inline LocalVelocity local_velocity(const adaptrom::TaylorHoodSpace& s, int cell,
                                    const Eigen::VectorXd& coeffs) {
  const auto pts = cell_node_points(s, cell);
  const auto& n = s.cell_nodes(cell);
  std::array<double, 6> vx, vy;
  for (int a = 0; a < 6; ++a) {
    vx[a] = coeffs[2 * n[a]];
    vy[a] = coeffs[2 * n[a] + 1];
  }
  return {fit_quadratic(pts, vx), fit_quadratic(pts, vy)};
}

// Linear a0 + a1 x + a2 y through three vertex values.
inline Quadratic local_pressure(const adaptrom::TaylorHoodSpace& s, int cell,
                                const Eigen::VectorXd& coeffs) {
  const auto& n = s.cell_nodes(cell);
  Eigen::Matrix3d V;
  Eigen::Vector3d b;
  for (int i = 0; i < 3; ++i) {
    const Point p = s.node(n[i]);
    V.row(i) << 1, p.x, p.y;
    b[i] = coeffs[n[i]];
  }
  const Eigen::Vector3d c = V.lu().solve(b);
  Quadratic q;
  q.a[0] = c[0];
  q.a[1] = c[1];
  q.a[2] = c[2];
  return q;
}

// Collapsed-square product of 4-point Gauss rules; exact to degree 6 on a
// triangle.
inline double integrate_triangle(Point p0, Point p1, Point p2,
                                 const std::function<double(Point)>& f) {
  const double r1 = std::sqrt(3.0 / 7 - 2.0 / 7 * std::sqrt(6.0 / 5));
  const double r2 = std::sqrt(3.0 / 7 + 2.0 / 7 * std::sqrt(6.0 / 5));
  const double w1 = (18 + std::sqrt(30.0)) / 36, w2 = (18 - std::sqrt(30.0)) / 36;
  const double x[4] = {-r2, -r1, r1, r2};
  const double w[4] = {w2, w1, w1, w2};
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  double sum = 0;
  for (int i = 0; i < 4; ++i) {
    const double s = 0.5 * (x[i] + 1);
    for (int j = 0; j < 4; ++j) {
      const double t = 0.5 * (x[j] + 1);
      // (s, t) in unit square -> (xi, eta) = (s, (1 - s) t) in the reference triangle
      const double xi = s, eta = (1 - s) * t;
      const Point p{p0.x + xi * (p1.x - p0.x) + eta * (p2.x - p0.x),
                    p0.y + xi * (p1.y - p0.y) + eta * (p2.y - p0.y)};
      sum += 0.25 * w[i] * w[j] * (1 - s) * f(p);
    }
  }
  return sum * std::abs(det);
}

inline double integrate_cell(const adaptrom::TaylorHoodSpace& s, int cell,
                             const std::function<double(Point)>& f) {
  const auto& n = s.cell_nodes(cell);
  return integrate_triangle(s.node(n[0]), s.node(n[1]), s.node(n[2]), f);
}

// Oracle for c(w,u,v) = ((w . grad) u, v).
inline double trilinear_oracle(const adaptrom::TaylorHoodSpace& s, const Eigen::VectorXd& w,
                               const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  double total = 0;
  for (int c = 0; c < s.cell_count(); ++c) {
    const auto W = local_velocity(s, c, w), U = local_velocity(s, c, u), V = local_velocity(s, c, v);
    total += integrate_cell(s, c, [&](Point p) {
      const double wx = W.ux.value(p), wy = W.uy.value(p);
      const double cx = wx * U.ux.dx(p) + wy * U.ux.dy(p);
      const double cy = wx * U.uy.dx(p) + wy * U.uy.dy(p);
      return cx * V.ux.value(p) + cy * V.uy.value(p);
    });
  }
  return total;
}

inline Eigen::VectorXd random_vector(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline adaptrom::Triangulation random_mesh(std::mt19937& rng, int cells_per_side, int steps,
                                           double fraction = 0.2) {
  auto mesh = adaptrom::criss_cross_init(cells_per_side);
  std::bernoulli_distribution pick(fraction);
  for (int k = 0; k < steps; ++k) {
    adaptrom::MarkSet marks;
    for (int t : mesh.triangles())
      if (pick(rng)) marks.push_back(t);
    mesh = adaptrom::bisect(mesh, marks);
  }
  return mesh;
}

inline Point random_point(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  return {d(rng), d(rng)};
}

}  // namespace testsupport
