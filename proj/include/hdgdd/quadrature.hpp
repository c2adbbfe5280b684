#pragma once

#include <array>

namespace hdgdd::quadrature {

struct TrianglePoint {
  std::array<double, 3> barycentric;
  double weight;  // fraction of the triangle area
};

/// Six-point symmetric rule, exact for polynomials of degree 4.
inline constexpr std::array<TrianglePoint, 6> kTriangle = [] {
  constexpr double a = 0.44594849091596488632;
  constexpr double wa = 0.22338158967801146570;
  constexpr double b = 0.09157621350977074346;
  constexpr double wb = 0.10995174365532186764;
  return std::array<TrianglePoint, 6>{{
      {{a, a, 1.0 - 2.0 * a}, wa},
      {{a, 1.0 - 2.0 * a, a}, wa},
      {{1.0 - 2.0 * a, a, a}, wa},
      {{b, b, 1.0 - 2.0 * b}, wb},
      {{b, 1.0 - 2.0 * b, b}, wb},
      {{1.0 - 2.0 * b, b, b}, wb},
  }};
}();

struct EdgePoint {
  double t;       // parameter in [0, 1] from the first endpoint
  double weight;  // fraction of the edge length
};

/// Three-point Gauss-Legendre rule on [0, 1], exact to degree 5.
inline constexpr std::array<EdgePoint, 3> kEdge = {{
    {0.5 - 0.38729833462074168852, 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.5 + 0.38729833462074168852, 5.0 / 18.0},
}};

}  // namespace hdgdd::quadrature
