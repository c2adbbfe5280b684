#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "hdgdd/mesh.hpp"

namespace hdgdd {

/// Exact solution of -Δu = f with u = 0 on the boundary of the unit square.
struct ManufacturedSolution {
  std::function<double(const Point2&)> u;
  std::function<Point2(const Point2&)> grad_u;
  std::function<double(const Point2&)> f;
};

/// u = sin(πx) sin(πy), f = 2π² sin(πx) sin(πy).
inline ManufacturedSolution sine_problem() {
  constexpr double pi = std::numbers::pi;
  return {
      [](const Point2& p) { return std::sin(pi * p.x) * std::sin(pi * p.y); },
      [](const Point2& p) {
        return Point2{pi * std::cos(pi * p.x) * std::sin(pi * p.y),
                      pi * std::sin(pi * p.x) * std::cos(pi * p.y)};
      },
      [](const Point2& p) {
        return 2.0 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y);
      },
  };
}

inline ManufacturedSolution zero_problem() {
  return {
      [](const Point2&) { return 0.0; },
      [](const Point2&) { return Point2{}; },
      [](const Point2&) { return 0.0; },
  };
}

}  // namespace hdgdd
