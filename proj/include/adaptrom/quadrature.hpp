#pragma once

#include <array>
#include <cmath>

namespace adaptrom {

struct TriangleRule {
  std::array<std::array<double, 3>, 7> points;  // barycentric
  std::array<double, 7> weights;                // sum to one; scale by area
};

/// Seven-point rule, exact for polynomials of degree five.
inline const TriangleRule& degree5_rule() {
  static const TriangleRule rule = [] {
    const double s = std::sqrt(15.0);
    const double a1 = (6.0 - s) / 21.0, b1 = (9.0 + 2.0 * s) / 21.0;
    const double a2 = (6.0 + s) / 21.0, b2 = (9.0 - 2.0 * s) / 21.0;
    const double w1 = (155.0 - s) / 1200.0, w2 = (155.0 + s) / 1200.0;
    TriangleRule r;
    r.points = {{{1.0 / 3, 1.0 / 3, 1.0 / 3},
                 {b1, a1, a1}, {a1, b1, a1}, {a1, a1, b1},
                 {b2, a2, a2}, {a2, b2, a2}, {a2, a2, b2}}};
    r.weights = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

struct LineRule {
  std::array<double, 3> points;  // parameter in [0, 1]
  std::array<double, 3> weights;  // sum to one; scale by length
};

/// Three-point Gauss rule, exact for degree five.
inline const LineRule& gauss3_rule() {
  static const LineRule rule = [] {
    const double d = 0.5 * std::sqrt(0.6);
    return LineRule{{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18, 8.0 / 18, 5.0 / 18}};
  }();
  return rule;
}

}  // namespace adaptrom
