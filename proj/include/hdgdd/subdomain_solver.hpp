#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdgdd/hdg_local.hpp"
#include "hdgdd/mesh.hpp"
#include "hdgdd/problem.hpp"

namespace hdgdd {

/// Edgewise-linear function on an interface: two nodal values per edge at
/// the canonical endpoints, edges ordered by increasing y.
using EdgeFunction = Eigen::VectorXd;

class WellPosednessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  [[nodiscard]] double residual() const { return residual_; }

 private:
  double residual_;
};

/// L2 norm of an edge function over the given segments.
inline double edge_l2_norm(const std::vector<Segment>& segments, const EdgeFunction& g) {
  double sum = 0.0;
  for (std::size_t e = 0; e < segments.size(); ++e) {
    const double a = g[2 * e], b = g[2 * e + 1];
    sum += segments[e].length() / 3.0 * (a * a + a * b + b * b);
  }
  return std::sqrt(sum);
}

/// Trace dofs: two per non-Dirichlet edge; exterior edges carry none.
struct DofMap {
  std::vector<int> edge_base;  // -1 on Dirichlet edges
  std::map<int, std::vector<int>> interface_edges;  // canonical order
  std::map<int, std::vector<int>> interface_dofs;
  int num_dofs = 0;

  explicit DofMap(const Mesh& mesh) {
    edge_base.assign(mesh.num_edges(), -1);
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      if (mesh.edges()[e].kind == EdgeKind::kDirichlet) continue;
      edge_base[e] = num_dofs;
      num_dofs += 2;
    }
    for (const auto& edge : mesh.edges()) {
      if (edge.kind == EdgeKind::kInterface) interface_edges[edge.interface_id];
    }
    for (auto& [id, edges] : interface_edges) {
      edges = hdgdd::interface_edges(mesh, id);
      auto& dofs = interface_dofs[id];
      for (int e : edges) {
        dofs.push_back(edge_base[e]);
        dofs.push_back(edge_base[e] + 1);
      }
    }
  }
  DofMap() = default;
};

enum class InterfaceKind { kTrace, kFlux };

/// Data imposed on one interface. Trace kind: uhat values. Flux kind: the
/// numerical flux qhat.n (outward normal of the solving subdomain).
struct InterfaceCondition {
  InterfaceKind kind = InterfaceKind::kTrace;
  EdgeFunction values;
};

/// Keyed by interface id; must cover every interface of the subdomain.
using BoundaryData = std::map<int, InterfaceCondition>;

enum class SourceMode { kProblem, kZero };

struct SubdomainSolution {
  double tau = 1.0;
  std::vector<LocalFields> fields;
  /// Trace values per mesh edge (2 each, canonical order), zero on ∂Ω.
  Eigen::VectorXd trace;
  std::map<int, EdgeFunction> interface_trace;
  std::map<int, EdgeFunction> interface_flux;
};

struct ErrorNorms {
  double q_sq = 0.0;
  double u_sq = 0.0;
  [[nodiscard]] double q() const { return std::sqrt(q_sq); }
  [[nodiscard]] double u() const { return std::sqrt(u_sq); }
  ErrorNorms& operator+=(const ErrorNorms& o) {
    q_sq += o.q_sq;
    u_sq += o.u_sq;
    return *this;
  }
};

/// Condensed trace system of one subdomain. Immutable after assembly apart
/// from a thread-safe cache of factorizations, one per set of trace-kind
/// interfaces.
class SubdomainSystem {
 public:
  using SparseMatrix = Eigen::SparseMatrix<double>;

  template <class Source>
  SubdomainSystem(Mesh mesh, double tau, const Source& f)
      : mesh_(std::move(mesh)), tau_(tau), dofs_(mesh_) {
    if (!(tau > 0.0)) throw std::invalid_argument("stabilization tau must be > 0");
    const std::size_t nt = mesh_.num_triangles();
    geometry_.reserve(nt);
    locals_.reserve(nt);
    load_ = Eigen::VectorXd::Zero(dofs_.num_dofs);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(36 * nt);
    for (std::size_t t = 0; t < nt; ++t) {
      geometry_.emplace_back(mesh_.triangle_points(t));
      const auto& geo = geometry_.back();
      const Vec3 load = element_load(geo, f);
      source_integral_ += load.sum();
      locals_.push_back(condense(local_matrices(geo, tau), load));
      const auto& c = locals_.back();
      const auto dof = local_dofs(t);
      for (int i = 0; i < 6; ++i) {
        if (dof[i] < 0) continue;
        load_[dof[i]] += c.g[i];
        for (int j = 0; j < 6; ++j) {
          if (dof[j] >= 0) triplets.emplace_back(dof[i], dof[j], c.K(i, j));
        }
      }
    }
    for (const auto& e : mesh_.edges()) {
      if (e.kind == EdgeKind::kDirichlet) has_exterior_dirichlet_ = true;
    }
    matrix_.resize(dofs_.num_dofs, dofs_.num_dofs);
    matrix_.setFromTriplets(triplets.begin(), triplets.end());
  }

  SubdomainSystem(const SubdomainSystem&) = delete;
  SubdomainSystem& operator=(const SubdomainSystem&) = delete;

  [[nodiscard]] const Mesh& mesh() const { return mesh_; }
  [[nodiscard]] double tau() const { return tau_; }
  [[nodiscard]] const DofMap& dofs() const { return dofs_; }
  [[nodiscard]] const SparseMatrix& matrix() const { return matrix_; }
  [[nodiscard]] const Eigen::VectorXd& load() const { return load_; }
  [[nodiscard]] const std::vector<CondensedLocal>& locals() const { return locals_; }
  [[nodiscard]] const TriangleGeometry& geometry(std::size_t t) const { return geometry_[t]; }
  [[nodiscard]] bool has_exterior_dirichlet() const { return has_exterior_dirichlet_; }
  /// ∫ f over the subdomain with the element quadrature.
  [[nodiscard]] double source_integral() const { return source_integral_; }

  [[nodiscard]] std::vector<int> interface_ids() const {
    std::vector<int> ids;
    for (const auto& [id, _] : dofs_.interface_dofs) ids.push_back(id);
    return ids;
  }

  /// Global dof per local trace slot of triangle t, -1 on Dirichlet edges.
  [[nodiscard]] std::array<int, 6> local_dofs(std::size_t t) const {
    std::array<int, 6> d{};
    const auto& te = mesh_.triangle_edges(t);
    for (int k = 0; k < 3; ++k) {
      const int base = dofs_.edge_base[te[k]];
      d[2 * k] = base < 0 ? -1 : base;
      d[2 * k + 1] = base < 0 ? -1 : base + 1;
    }
    return d;
  }

  /// Factorization of the matrix with the dofs of `trace_ids` eliminated.
  struct Factorization {
    std::vector<int> free;       // reduced index -> global dof
    std::vector<int> fixed;      // eliminated global dofs
    SparseMatrix free_free;
    SparseMatrix free_fixed;
    Eigen::SimplicialLLT<SparseMatrix> llt;
    bool positive_definite = false;
  };

  [[nodiscard]] std::shared_ptr<const Factorization> factorization(
      const std::vector<int>& trace_ids) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->entries.find(trace_ids);
    if (it != cache_->entries.end()) return it->second;
    auto fac = build_factorization(trace_ids);
    cache_->entries.emplace(trace_ids, fac);
    return fac;
  }

 private:
  std::shared_ptr<Factorization> build_factorization(const std::vector<int>& trace_ids) const {
    auto fac = std::make_shared<Factorization>();
    std::vector<char> is_fixed(dofs_.num_dofs, 0);
    for (int id : trace_ids) {
      for (int d : dofs_.interface_dofs.at(id)) is_fixed[d] = 1;
    }
    std::vector<int> reduced(dofs_.num_dofs, -1);
    for (int d = 0; d < dofs_.num_dofs; ++d) {
      if (is_fixed[d]) {
        reduced[d] = static_cast<int>(fac->fixed.size());
        fac->fixed.push_back(d);
      } else {
        reduced[d] = static_cast<int>(fac->free.size());
        fac->free.push_back(d);
      }
    }
    std::vector<Eigen::Triplet<double>> ff, fc;
    for (int col = 0; col < matrix_.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(matrix_, col); it; ++it) {
        const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
        if (is_fixed[r]) continue;
        if (is_fixed[c]) {
          fc.emplace_back(reduced[r], reduced[c], it.value());
        } else {
          ff.emplace_back(reduced[r], reduced[c], it.value());
        }
      }
    }
    const auto nf = static_cast<Eigen::Index>(fac->free.size());
    const auto nc = static_cast<Eigen::Index>(fac->fixed.size());
    fac->free_free.resize(nf, nf);
    fac->free_free.setFromTriplets(ff.begin(), ff.end());
    fac->free_fixed.resize(nf, nc);
    fac->free_fixed.setFromTriplets(fc.begin(), fc.end());
    if (nf > 0) {
      fac->llt.compute(fac->free_free);
      fac->positive_definite = fac->llt.info() == Eigen::Success;
    } else {
      fac->positive_definite = true;
    }
    return fac;
  }

  struct Cache {
    std::mutex mutex;
    std::map<std::vector<int>, std::shared_ptr<const Factorization>> entries;
  };

  Mesh mesh_;
  double tau_;
  DofMap dofs_;
  std::vector<TriangleGeometry> geometry_;
  std::vector<CondensedLocal> locals_;
  SparseMatrix matrix_;
  Eigen::VectorXd load_;
  double source_integral_ = 0.0;
  bool has_exterior_dirichlet_ = false;
  std::unique_ptr<Cache> cache_ = std::make_unique<Cache>();
};

template <class Source>
std::unique_ptr<SubdomainSystem> assemble(Mesh mesh, double tau, const Source& f) {
  return std::make_unique<SubdomainSystem>(std::move(mesh), tau, f);
}

/// Edge mass matrix of a segment for the two endpoint basis functions.
inline Eigen::Matrix2d edge_mass(double length) {
  Eigen::Matrix2d m;
  m << 2.0, 1.0, 1.0, 2.0;
  return (length / 6.0) * m;
}

/// Local index k of `edge` within triangle t.
inline int local_edge_index(const Mesh& mesh, std::size_t t, int edge) {
  const auto& te = mesh.triangle_edges(t);
  for (int k = 0; k < 3; ++k) {
    if (te[k] == edge) return k;
  }
  throw std::logic_error("edge not on triangle");
}

/// Local trace vector of triangle t taken from the per-edge trace.
inline Vec6 element_trace(const Mesh& mesh, const SubdomainSolution& sol, std::size_t t) {
  Vec6 tr;
  const auto& te = mesh.triangle_edges(t);
  for (int k = 0; k < 3; ++k) tr.segment<2>(2 * k) = sol.trace.segment<2>(2 * te[k]);
  return tr;
}

inline constexpr double kSolveTolerance = 1e-12;

/// A x - b accumulated in extended precision, so that on large systems the
/// reported residual is not dominated by its own rounding error.
inline Eigen::VectorXd residual(const SubdomainSystem::SparseMatrix& a, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& b) {
  std::vector<long double> acc(static_cast<std::size_t>(b.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i) acc[i] = -static_cast<long double>(b[i]);
  for (int col = 0; col < a.outerSize(); ++col) {
    const long double xc = x[col];
    for (SubdomainSystem::SparseMatrix::InnerIterator it(a, col); it; ++it) {
      acc[it.row()] += static_cast<long double>(it.value()) * xc;
    }
  }
  Eigen::VectorXd r(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) r[i] = static_cast<double>(acc[i]);
  return r;
}

/// Solves the subdomain problem. Trace-kind interface dofs are eliminated;
/// flux-kind interfaces receive <g, mu> through the edge mass matrix.
inline SubdomainSolution solve(const SubdomainSystem& sys, const BoundaryData& data,
                               SourceMode source = SourceMode::kProblem) {
  const DofMap& dm = sys.dofs();
  std::vector<int> trace_ids;
  for (const auto& [id, dofs] : dm.interface_dofs) {
    auto it = data.find(id);
    if (it == data.end()) {
      throw std::invalid_argument("no boundary data for interface " + std::to_string(id));
    }
    if (it->second.values.size() != static_cast<Eigen::Index>(dofs.size())) {
      throw std::invalid_argument("boundary data for interface " + std::to_string(id) +
                                  " has wrong length");
    }
    if (it->second.kind == InterfaceKind::kTrace) trace_ids.push_back(id);
  }
  for (const auto& [id, _] : data) {
    if (!dm.interface_dofs.contains(id)) {
      throw std::invalid_argument("unknown interface id " + std::to_string(id));
    }
  }
  if (!sys.has_exterior_dirichlet() && trace_ids.empty()) {
    throw WellPosednessError("subdomain has no Dirichlet constraint; Neumann problem is singular");
  }
  const auto fac = sys.factorization(trace_ids);
  if (!fac->positive_definite) {
    throw WellPosednessError("reduced trace system is not positive definite");
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(dm.num_dofs);
  Eigen::VectorXd rhs = source == SourceMode::kProblem
                            ? Eigen::VectorXd(sys.load())
                            : Eigen::VectorXd(Eigen::VectorXd::Zero(dm.num_dofs));
  const Mesh& mesh = sys.mesh();
  for (const auto& [id, cond] : data) {
    const auto& edges = dm.interface_edges.at(id);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const int base = dm.edge_base[edges[e]];
      const Eigen::Vector2d v = cond.values.segment<2>(2 * e);
      if (cond.kind == InterfaceKind::kTrace) {
        x.segment<2>(base) = v;
      } else {
        rhs.segment<2>(base) -= edge_mass(edge_segment(mesh, edges[e]).length()) * v;
      }
    }
  }

  const auto nf = static_cast<Eigen::Index>(fac->free.size());
  if (nf > 0) {
    Eigen::VectorXd xc(fac->fixed.size());
    for (std::size_t i = 0; i < fac->fixed.size(); ++i) xc[i] = x[fac->fixed[i]];
    Eigen::VectorXd bf(nf);
    for (Eigen::Index i = 0; i < nf; ++i) bf[i] = rhs[fac->free[i]];
    if (xc.size() > 0) bf -= fac->free_fixed * xc;
    Eigen::VectorXd xf = fac->llt.solve(bf);
    const double bnorm = bf.norm();
    Eigen::VectorXd r = residual(fac->free_free, xf, bf);
    double res = bnorm > 0.0 ? r.norm() / bnorm : 0.0;
    for (int refine = 0; refine < 3 && res > kSolveTolerance; ++refine) {
      xf -= fac->llt.solve(r);
      r = residual(fac->free_free, xf, bf);
      res = r.norm() / bnorm;
    }
    if (!(res <= kSolveTolerance)) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "trace solve did not reach relative residual 1e-12 (got %.3e)",
                    res);
      throw NumericError(msg, res);
    }
    for (Eigen::Index i = 0; i < nf; ++i) x[fac->free[i]] = xf[i];
  }

  SubdomainSolution sol;
  sol.tau = sys.tau();
  sol.trace = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(mesh.num_edges()));
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const int base = dm.edge_base[e];
    if (base >= 0) sol.trace.segment<2>(2 * e) = x.segment<2>(base);
  }
  sol.fields.resize(mesh.num_triangles());
  const bool with_source = source == SourceMode::kProblem;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    sol.fields[t] = recover(sys.locals()[t], element_trace(mesh, sol, t), with_source);
  }

  for (const auto& [id, edges] : dm.interface_edges) {
    EdgeFunction tr(2 * edges.size()), flux(2 * edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Edge& edge = mesh.edges()[edges[e]];
      const auto t = static_cast<std::size_t>(edge.triangles[0]);
      const int k = local_edge_index(mesh, t, edges[e]);
      const auto q = numerical_flux(sys.geometry(t), sol.fields[t], element_trace(mesh, sol, t), k,
                                    sys.tau());
      tr.segment<2>(2 * e) = sol.trace.segment<2>(2 * edges[e]);
      flux[2 * e] = q[0];
      flux[2 * e + 1] = q[1];
    }
    sol.interface_trace[id] = std::move(tr);
    sol.interface_flux[id] = std::move(flux);
  }
  return sol;
}

inline const EdgeFunction& interface_trace(const SubdomainSolution& sol, int id) {
  auto it = sol.interface_trace.find(id);
  if (it == sol.interface_trace.end()) {
    throw std::out_of_range("unknown interface id " + std::to_string(id));
  }
  return it->second;
}

/// qhat.n on the interface, n the subdomain's outward normal.
inline const EdgeFunction& interface_numerical_flux(const SubdomainSolution& sol, int id) {
  auto it = sol.interface_flux.find(id);
  if (it == sol.interface_flux.end()) {
    throw std::out_of_range("unknown interface id " + std::to_string(id));
  }
  return it->second;
}

/// Squared L2 errors of q = -∇u and u against the exact solution.
inline ErrorNorms l2_errors(const SubdomainSystem& sys, const SubdomainSolution& sol,
                            const ManufacturedSolution& exact) {
  ErrorNorms err;
  for (std::size_t t = 0; t < sys.mesh().num_triangles(); ++t) {
    const auto& geo = sys.geometry(t);
    const auto& f = sol.fields[t];
    for (const auto& qp : quadrature::kTriangle) {
      const Vec3 phi(qp.barycentric[0], qp.barycentric[1], qp.barycentric[2]);
      const Point2 x = geo.map(qp.barycentric);
      const Point2 g = exact.grad_u(x);
      const double w = qp.weight * geo.area();
      const double dqx = phi.dot(f.q.head<3>()) + g.x;
      const double dqy = phi.dot(f.q.tail<3>()) + g.y;
      const double du = phi.dot(f.u) - exact.u(x);
      err.q_sq += w * (dqx * dqx + dqy * dqy);
      err.u_sq += w * du * du;
    }
  }
  return err;
}

/// Σ over boundary edges of ∫ qhat.n ds.
inline double boundary_flux(const SubdomainSystem& sys, const SubdomainSolution& sol) {
  const Mesh& mesh = sys.mesh();
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    if (!edge.on_boundary()) continue;
    const auto t = static_cast<std::size_t>(edge.triangles[0]);
    const int k = local_edge_index(mesh, t, static_cast<int>(e));
    const auto q = numerical_flux(sys.geometry(t), sol.fields[t], element_trace(mesh, sol, t), k,
                                  sys.tau());
    total += 0.5 * sys.geometry(t).length(k) * (q[0] + q[1]);
  }
  return total;
}

}  // namespace hdgdd
