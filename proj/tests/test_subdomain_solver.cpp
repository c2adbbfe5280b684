#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hdgdd/monolithic.hpp"
#include "hdgdd/subdomain_solver.hpp"

namespace hdgdd {
namespace {

constexpr double kPi = std::numbers::pi;

double max_asymmetry(const SubdomainSystem::SparseMatrix& k) {
  const SubdomainSystem::SparseMatrix diff = k - SubdomainSystem::SparseMatrix(k.transpose());
  return diff.nonZeros() == 0 ? 0.0 : diff.coeffs().cwiseAbs().maxCoeff();
}

ErrorNorms monolithic_errors(double h) {
  const int n = static_cast<int>(std::lround(1.0 / h));
  const auto sys = assemble(build_structured_mesh({}, n, n), 1.0, sine_problem().f);
  return l2_errors(*sys, solve(*sys, {}), sine_problem());
}

/// Nodal interpolant of sin(πy) on an interface.
EdgeFunction sine_trace(const InterfaceDescriptor& g) {
  EdgeFunction v(2 * g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    v[2 * e] = std::sin(kPi * g.segments[e].a.y);
    v[2 * e + 1] = std::sin(kPi * g.segments[e].b.y);
  }
  return v;
}

TEST(Assembly, SmallestMeshHasOneInteriorEdge) {
  const auto sys = assemble(build_structured_mesh({}, 1, 1), 1.0, sine_problem().f);
  EXPECT_EQ(sys->dofs().num_dofs, 2);
  EXPECT_TRUE(sys->has_exterior_dirichlet());
}

TEST(Assembly, SymmetricAndZeroLoadForZeroSource) {
  const auto sys = assemble(build_structured_mesh({}, 16, 16), 1.0, zero_problem().f);
  EXPECT_LE(max_asymmetry(sys->matrix()), 1e-13);
  EXPECT_EQ(sys->load().cwiseAbs().maxCoeff(), 0.0);
  const auto sol = solve(*sys, {});
  EXPECT_EQ(sol.trace.cwiseAbs().maxCoeff(), 0.0);
  for (const auto& f : sol.fields) {
    EXPECT_EQ(f.u.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(f.q.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Assembly, RejectsNonPositiveTau) {
  EXPECT_THROW(assemble(build_structured_mesh({}, 2, 2), 0.0, sine_problem().f),
               std::invalid_argument);
}

TEST(Monolithic, SecondOrderRates) {
  const ErrorNorms coarse = monolithic_errors(1.0 / 8);
  const ErrorNorms mid = monolithic_errors(1.0 / 16);
  const ErrorNorms fine = monolithic_errors(1.0 / 32);
  for (auto [a, b] : {std::pair{coarse, mid}, std::pair{mid, fine}}) {
    EXPECT_GE(std::log2(a.u() / b.u()), 1.8);
    EXPECT_GE(std::log2(a.q() / b.q()), 1.8);
  }
}

TEST(Monolithic, ConservesSource) {
  const auto sys = assemble(build_structured_mesh({}, 16, 16), 1.0, sine_problem().f);
  const auto sol = solve(*sys, {});
  EXPECT_NEAR(sys->source_integral(), 8.0, 1e-6);
  EXPECT_NEAR(boundary_flux(*sys, sol), sys->source_integral(), 1e-10);
}

TEST(SubdomainSolve, ExactInterfaceTraceGivesSecondOrderError) {
  double prev_u = 0.0, prev_q = 0.0;
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const auto dd = decompose_strips({0.0, 0.5, 1.0}, h);
    const auto sys = assemble(dd.submeshes[0], 1.0, sine_problem().f);
    const BoundaryData data{{0, {InterfaceKind::kTrace, sine_trace(dd.interfaces[0])}}};
    const auto sol = solve(*sys, data);
    const ErrorNorms err = l2_errors(*sys, sol, sine_problem());
    // Same order of magnitude as the whole-domain error at this h.
    const ErrorNorms mono = monolithic_errors(h);
    EXPECT_LT(err.u(), mono.u());
    EXPECT_LT(err.q(), mono.q());
    if (prev_u > 0.0) {
      EXPECT_GE(std::log2(prev_u / err.u()), 1.8);
      EXPECT_GE(std::log2(prev_q / err.q()), 1.8);
    }
    prev_u = err.u();
    prev_q = err.q();
  }
}

TEST(SubdomainSolve, TraceKindReturnsPrescribedData) {
  const auto dd = decompose_strips({0.0, 0.3, 1.0}, 1.0 / 16);
  const auto sys = assemble(dd.submeshes[1], 1.0, sine_problem().f);
  EdgeFunction g = sine_trace(dd.interfaces[0]) * 0.7;
  const auto sol = solve(*sys, {{0, {InterfaceKind::kTrace, g}}});
  EXPECT_EQ((interface_trace(sol, 0) - g).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SubdomainSolve, FluxKindReproducesData) {
  const auto dd = decompose_strips({0.0, 0.5, 1.0}, 1.0 / 16);
  for (int side : {0, 1}) {
    const auto sys = assemble(dd.submeshes[side], 1.0, sine_problem().f);
    EdgeFunction g(2 * dd.interfaces[0].num_edges());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = std::cos(0.37 * static_cast<double>(i));
    const auto sol = solve(*sys, {{0, {InterfaceKind::kFlux, g}}});
    EXPECT_LT((interface_numerical_flux(sol, 0) - g).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(boundary_flux(*sys, sol), sys->source_integral(), 1e-10);
  }
}

TEST(SubdomainSolve, ZeroSourceModeIgnoresLoad) {
  const auto dd = decompose_strips({0.0, 0.5, 1.0}, 1.0 / 8);
  const auto sys = assemble(dd.submeshes[0], 1.0, sine_problem().f);
  const EdgeFunction zero = EdgeFunction::Zero(2 * dd.interfaces[0].num_edges());
  const auto sol = solve(*sys, {{0, {InterfaceKind::kFlux, zero}}}, SourceMode::kZero);
  EXPECT_EQ(sol.trace.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SubdomainSolve, MonolithicTraceIsADecomposedFixedPoint) {
  const DDProblem problem(decompose_strips({0.0, 0.5, 1.0}, 1.0 / 16), 1.0, sine_problem());
  const auto ref = solve_monolithic(problem);
  const InterfaceData ref_data = reference_interface_data(ref, problem.interface(0));
  std::vector<SubdomainSolution> sols;
  for (int i = 0; i < 2; ++i) {
    sols.push_back(solve(problem.system(i), {{0, {InterfaceKind::kTrace, ref_data.trace}}}));
  }
  const EdgeFunction sum =
      interface_numerical_flux(sols[0], 0) + interface_numerical_flux(sols[1], 0);
  EXPECT_LT(sum.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((interface_numerical_flux(sols[0], 0) - ref_data.flux).cwiseAbs().maxCoeff(), 1e-10);
  const ErrorNorms d = difference_to_reference(problem, sols, ref);
  EXPECT_LT(d.u(), 1e-12);
  EXPECT_LT(d.q(), 1e-12);
}

TEST(SubdomainSolve, MirrorSymmetricMeshGivesSymmetricSolution) {
  // Lower half structured, upper half its reflection about y = 1/2.
  const Mesh lower = build_structured_mesh({0.0, 0.0, 1.0, 0.5}, 8, 8);
  std::vector<Point2> vs;
  for (const auto& p : lower.vertices()) vs.push_back({p.x, 1.0 - p.y});
  std::vector<std::array<int, 3>> ts;
  for (const auto& t : lower.triangles()) ts.push_back({t[0], t[2], t[1]});
  const Mesh upper(vs, ts);
  const auto sys = assemble(merge_submeshes({lower, upper}), 1.0, sine_problem().f);
  const auto sol = solve(*sys, {});
  const std::size_t nt = lower.num_triangles();
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& a = sol.fields[t];
    const auto& b = sol.fields[nt + t];
    const std::array<int, 3> perm{0, 2, 1};
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(a.u[i], b.u[perm[i]], 1e-12);
      EXPECT_NEAR(a.q[i], b.q[perm[i]], 1e-12);
      EXPECT_NEAR(a.q[3 + i], -b.q[3 + perm[i]], 1e-12);
    }
  }
}

TEST(SubdomainSolve, FactorizationCachedPerTraceSet) {
  const auto dd = decompose_strips({0.0, 1.0 / 3, 2.0 / 3, 1.0}, 1.0 / 12);
  const auto sys = assemble(dd.submeshes[1], 1.0, sine_problem().f);
  EXPECT_EQ(sys->interface_ids(), (std::vector<int>{0, 1}));
  const auto a = sys->factorization({0});
  EXPECT_EQ(a.get(), sys->factorization({0}).get());
  EXPECT_NE(a.get(), sys->factorization({0, 1}).get());
  EXPECT_TRUE(a->positive_definite);
  EXPECT_TRUE(sys->factorization({})->positive_definite);
}

TEST(SubdomainSolve, AllFluxWithoutDirichletIsIllPosed) {
  // Interior square whose whole boundary is one flux interface.
  Mesh m = build_structured_mesh({0.25, 0.25, 0.75, 0.75}, 4, 4);
  m.mark_interface(0, [](const Point2&, const Point2&) { return true; });
  const auto sys = assemble(std::move(m), 1.0, sine_problem().f);
  EXPECT_FALSE(sys->has_exterior_dirichlet());
  const auto n = static_cast<Eigen::Index>(sys->dofs().interface_dofs.at(0).size());
  const BoundaryData data{{0, {InterfaceKind::kFlux, EdgeFunction::Zero(n)}}};
  EXPECT_THROW(solve(*sys, data), WellPosednessError);
  EXPECT_NO_THROW(solve(*sys, {{0, {InterfaceKind::kTrace, EdgeFunction::Zero(n)}}}));
}

TEST(SubdomainSolve, RejectsBadBoundaryData) {
  const auto dd = decompose_strips({0.0, 0.5, 1.0}, 1.0 / 8);
  const auto sys = assemble(dd.submeshes[0], 1.0, sine_problem().f);
  const EdgeFunction ok = EdgeFunction::Zero(16);
  EXPECT_THROW(solve(*sys, {}), std::invalid_argument);
  EXPECT_THROW(solve(*sys, {{0, {InterfaceKind::kTrace, EdgeFunction::Zero(3)}}}),
               std::invalid_argument);
  EXPECT_THROW(solve(*sys, {{0, {InterfaceKind::kTrace, ok}}, {5, {InterfaceKind::kTrace, ok}}}),
               std::invalid_argument);
  const auto sol = solve(*sys, {{0, {InterfaceKind::kTrace, ok}}});
  EXPECT_THROW(interface_trace(sol, 3), std::out_of_range);
  EXPECT_THROW(interface_numerical_flux(sol, 3), std::out_of_range);
}

TEST(SubdomainSolve, ExtendedResidualMatchesDefinition) {
  const auto sys = assemble(build_structured_mesh({}, 4, 4), 1.0, sine_problem().f);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(sys->dofs().num_dofs, -1.0, 2.0);
  const Eigen::VectorXd r = residual(sys->matrix(), x, sys->load());
  EXPECT_LT((r - (sys->matrix() * x - sys->load())).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SubdomainSolve, WideSubdomainMeetsResidualContract) {
  // 64 x 128 cells: plain double residuals stall just above 1e-12 here.
  const auto dd = decompose_strips({0.0, 0.5, 1.0}, 1.0 / 128);
  const auto sys = assemble(dd.submeshes[0], 1.0, sine_problem().f);
  const BoundaryData data{{0, {InterfaceKind::kTrace, sine_trace(dd.interfaces[0])}}};
  EXPECT_NO_THROW(solve(*sys, data));
}

TEST(EdgeNorm, MatchesClosedFormForLinearFunction) {
  // g(y) = y on [0, 1] split into two edges: ∫ y² = 1/3.
  const std::vector<Segment> segs{{{0.5, 0.0}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 1.0}}};
  EdgeFunction g(4);
  g << 0.0, 0.5, 0.5, 1.0;
  EXPECT_NEAR(edge_l2_norm(segs, g), std::sqrt(1.0 / 3.0), 1e-15);
}

}  // namespace
}  // namespace hdgdd
