#pragma once

#include <Eigen/Dense>

#include <array>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "hdgdd/mesh.hpp"
#include "hdgdd/quadrature.hpp"

// Element-level HDG machinery for linear elements on triangles.
//
// Local unknowns: flux q in P1(K)^2 (6 nodal values, x-components first),
// scalar u in P1(K) (3 nodal values) and the edge trace uhat (2 nodal values
// per edge). Local edge k is opposite local vertex k, and its two trace
// values sit at the edge endpoints in canonical (lexicographic) order, so
// neighbouring elements agree on the layout without any remapping.
namespace hdgdd {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Mat96 = Eigen::Matrix<double, 9, 6>;

class TriangleGeometry {
 public:
  explicit TriangleGeometry(const std::array<Point2, 3>& p) : points_(p) {
    const double det = (p[1].x - p[0].x) * (p[2].y - p[0].y) -
                       (p[2].x - p[0].x) * (p[1].y - p[0].y);
    area_ = 0.5 * det;
    if (!(area_ > 0.0) || !std::isfinite(area_)) {
      throw std::invalid_argument("degenerate or clockwise triangle");
    }
    for (int a = 0; a < 3; ++a) {
      const Point2& pb = p[(a + 1) % 3];
      const Point2& pc = p[(a + 2) % 3];
      grad_[a] = {(pb.y - pc.y) / det, (pc.x - pb.x) / det};
    }
    for (int k = 0; k < 3; ++k) {
      Point2 a = p[(k + 1) % 3];
      Point2 b = p[(k + 2) % 3];
      // Outward normal of the CCW edge (k+1) -> (k+2).
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      normal_[k] = {(b.y - a.y) / len, (a.x - b.x) / len};
      length_[k] = len;
      if (lex_less(b, a)) std::swap(a, b);
      edge_[k] = {a, b};
    }
  }

  [[nodiscard]] double area() const { return area_; }
  [[nodiscard]] const std::array<Point2, 3>& points() const { return points_; }
  /// Constant gradient of the barycentric coordinate of vertex a.
  [[nodiscard]] const Point2& grad(int a) const { return grad_[a]; }
  [[nodiscard]] const Point2& normal(int k) const { return normal_[k]; }
  [[nodiscard]] double length(int k) const { return length_[k]; }
  /// Endpoints of local edge k in canonical order.
  [[nodiscard]] const Segment& edge(int k) const { return edge_[k]; }

  [[nodiscard]] Point2 map(const std::array<double, 3>& bary) const {
    return {bary[0] * points_[0].x + bary[1] * points_[1].x + bary[2] * points_[2].x,
            bary[0] * points_[0].y + bary[1] * points_[1].y + bary[2] * points_[2].y};
  }

  [[nodiscard]] Vec3 barycentric(const Point2& x) const {
    Vec3 l;
    for (int a = 0; a < 3; ++a) {
      const Point2& pb = points_[(a + 1) % 3];
      l[a] = grad_[a].x * (x.x - pb.x) + grad_[a].y * (x.y - pb.y);
    }
    return l;
  }

  [[nodiscard]] Point2 edge_point(int k, double t) const {
    const Segment& s = edge_[k];
    return {s.a.x + t * (s.b.x - s.a.x), s.a.y + t * (s.b.y - s.a.y)};
  }

 private:
  std::array<Point2, 3> points_;
  std::array<Point2, 3> grad_{};
  std::array<Point2, 3> normal_{};
  std::array<double, 3> length_{};
  std::array<Segment, 3> edge_{};
  double area_ = 0.0;
};

/// Blocks of the local system
///
///   [ A     -D^T    C    ] [q]      [ 0   ]
///   [ -D    -tau E  tau G] [u]    = [ -F  ]
///   [ C^T   tau G^T -tau H] [uhat]   [ l   ]
///
/// where the first two rows are the local flux and balance equations and the
/// last row is the numerical-flux functional <qhat.n, mu> tested on the
/// element's trace basis.
struct LocalMatrices {
  double tau = 1.0;
  Mat3 mass;  // (phi_b, phi_a)_K
  Mat6 A;     // q-mass, block diagonal per component
  Mat36 D;    // (div v_j, phi_a)_K
  Mat6 C;     // <mu_m, v_j . n>_{dK}, rows q dofs
  Mat3 E;     // <phi_b, phi_a>_{dK}
  Mat36 G;    // <mu_m, phi_a>_{dK}
  Mat6 H;     // <mu_m', mu_m>_{dK}, block diagonal per edge

  /// The full 15x15 symmetric local matrix in (q, u, uhat) order.
  [[nodiscard]] Eigen::Matrix<double, 15, 15> full() const {
    Eigen::Matrix<double, 15, 15> m = Eigen::Matrix<double, 15, 15>::Zero();
    m.block<6, 6>(0, 0) = A;
    m.block<6, 3>(0, 6) = -D.transpose();
    m.block<6, 6>(0, 9) = C;
    m.block<3, 6>(6, 0) = -D;
    m.block<3, 3>(6, 6) = -tau * E;
    m.block<3, 6>(6, 9) = tau * G;
    m.block<6, 6>(9, 0) = C.transpose();
    m.block<6, 3>(9, 6) = tau * G.transpose();
    m.block<6, 6>(9, 9) = -tau * H;
    return m;
  }
};

inline LocalMatrices local_matrices(const TriangleGeometry& geo, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("stabilization tau must be > 0");
  LocalMatrices lm;
  lm.tau = tau;
  lm.mass.setZero();
  for (const auto& qp : quadrature::kTriangle) {
    const Vec3 phi(qp.barycentric[0], qp.barycentric[1], qp.barycentric[2]);
    lm.mass += (qp.weight * geo.area()) * phi * phi.transpose();
  }
  lm.A.setZero();
  lm.A.block<3, 3>(0, 0) = lm.mass;
  lm.A.block<3, 3>(3, 3) = lm.mass;

  const Vec3 mean = lm.mass.rowwise().sum();  // (1, phi_a)_K
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      lm.D(a, b) = geo.grad(b).x * mean[a];
      lm.D(a, 3 + b) = geo.grad(b).y * mean[a];
    }
  }

  lm.C.setZero();
  lm.E.setZero();
  lm.G.setZero();
  lm.H.setZero();
  for (int k = 0; k < 3; ++k) {
    const Point2 n = geo.normal(k);
    for (const auto& ep : quadrature::kEdge) {
      const double w = ep.weight * geo.length(k);
      const Vec3 phi = geo.barycentric(geo.edge_point(k, ep.t));
      const double mu[2] = {1.0 - ep.t, ep.t};
      lm.E += w * phi * phi.transpose();
      for (int s = 0; s < 2; ++s) {
        const int m = 2 * k + s;
        for (int a = 0; a < 3; ++a) {
          lm.G(a, m) += w * mu[s] * phi[a];
          lm.C(a, m) += w * mu[s] * phi[a] * n.x;
          lm.C(3 + a, m) += w * mu[s] * phi[a] * n.y;
        }
        for (int r = 0; r < 2; ++r) lm.H(2 * k + r, m) += w * mu[r] * mu[s];
      }
    }
  }
  return lm;
}

inline LocalMatrices local_matrices(const std::array<Point2, 3>& points, double tau) {
  return local_matrices(TriangleGeometry(points), tau);
}

/// (f, phi_a)_K with the degree-4 rule.
template <class Source>
Vec3 element_load(const TriangleGeometry& geo, const Source& f) {
  Vec3 load = Vec3::Zero();
  for (const auto& qp : quadrature::kTriangle) {
    const double fx = f(geo.map(qp.barycentric));
    for (int a = 0; a < 3; ++a) {
      load[a] += qp.weight * geo.area() * fx * qp.barycentric[a];
    }
  }
  return load;
}

/// Schur complement of the local system onto the element's trace dofs.
///
/// The numerical-flux functional of the element is l = g - K uhat, and the
/// interior fields are recovered as [q; u] = P uhat + p.
struct CondensedLocal {
  Mat6 K;
  Vec6 g;
  Mat96 P;  // trace -> (q, u)
  Vec9 p;   // source -> (q, u)
};

struct LocalFields {
  Vec6 q;  // nodal values, x-components then y-components
  Vec3 u;
};

inline CondensedLocal condense(const LocalMatrices& lm, const Vec3& load) {
  const double tau = lm.tau;
  Eigen::LLT<Mat6> a_llt(lm.A);
  const Mat36 ainv_dt_t = a_llt.solve(lm.D.transpose()).transpose();  // D A^-1
  const Mat3 su = tau * lm.E + ainv_dt_t * lm.D.transpose();
  Eigen::LLT<Mat3> su_llt(su);
  assert(a_llt.info() == Eigen::Success && su_llt.info() == Eigen::Success);

  CondensedLocal c;
  // Trace columns: right-hand sides r1 = -C, r2 = -tau G.
  const Mat36 pu = su_llt.solve(tau * lm.G + ainv_dt_t * lm.C);
  const Mat6 pq = a_llt.solve(-lm.C + lm.D.transpose() * pu);
  c.P.topRows<6>() = pq;
  c.P.bottomRows<3>() = pu;

  const Vec3 fu = su_llt.solve(load);
  const Vec6 fq = a_llt.solve(lm.D.transpose() * fu);
  c.p.head<6>() = fq;
  c.p.tail<3>() = fu;

  c.K = tau * lm.H - lm.C.transpose() * pq - tau * lm.G.transpose() * pu;
  c.K = 0.5 * (c.K + c.K.transpose()).eval();
  c.g = lm.C.transpose() * fq + tau * lm.G.transpose() * fu;
  return c;
}

/// Back-substitution. Pass with_source = false for a zero-source problem.
inline LocalFields recover(const CondensedLocal& c, const Vec6& trace, bool with_source = true) {
  Vec9 x = c.P * trace;
  if (with_source) x += c.p;
  return {x.head<6>(), x.tail<3>()};
}

/// qhat.n = q.n + tau (u - uhat) at the two canonical endpoints of local
/// edge k, with n the element's outward normal.
inline std::array<double, 2> numerical_flux(const TriangleGeometry& geo, const LocalFields& f,
                                            const Vec6& trace, int k, double tau) {
  std::array<double, 2> out{};
  const Point2 n = geo.normal(k);
  for (int s = 0; s < 2; ++s) {
    const Point2 x = s == 0 ? geo.edge(k).a : geo.edge(k).b;
    const Vec3 phi = geo.barycentric(x);
    const double qx = phi.dot(f.q.head<3>());
    const double qy = phi.dot(f.q.tail<3>());
    const double u = phi.dot(f.u);
    out[s] = qx * n.x + qy * n.y + tau * (u - trace[2 * k + s]);
  }
  return out;
}

}  // namespace hdgdd
