#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hdgdd/dd_problem.hpp"

// Whole-domain reference solve on the union of a strip decomposition, and
// the helpers that compare decomposed solutions against it.
namespace hdgdd {

struct MonolithicReference {
  std::unique_ptr<SubdomainSystem> system;
  SubdomainSolution solution;
  /// First union triangle of each subdomain; submesh triangles are contiguous.
  std::vector<std::size_t> triangle_offset;
};

inline MonolithicReference solve_monolithic(const DDProblem& problem) {
  MonolithicReference ref;
  const auto& dd = problem.decomposition();
  std::size_t offset = 0;
  for (const auto& m : dd.submeshes) {
    ref.triangle_offset.push_back(offset);
    offset += m.num_triangles();
  }
  ref.system = assemble(merge_submeshes(dd.submeshes), problem.tau(), problem.exact().f);
  ref.solution = solve(*ref.system, {});
  return ref;
}

/// Trace of the reference on an interface, and the numerical flux seen from
/// the left subdomain (normal +x), in canonical interface order.
struct InterfaceData {
  EdgeFunction trace;
  EdgeFunction flux;
};

inline InterfaceData reference_interface_data(const MonolithicReference& ref,
                                              const InterfaceDescriptor& g) {
  const Mesh& mesh = ref.system->mesh();
  std::map<std::pair<std::pair<double, double>, std::pair<double, double>>, int> lookup;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Segment s = edge_segment(mesh, static_cast<int>(e));
    lookup[{{s.a.x, s.a.y}, {s.b.x, s.b.y}}] = static_cast<int>(e);
  }
  InterfaceData out;
  const auto n = static_cast<Eigen::Index>(g.num_edges());
  out.trace.resize(2 * n);
  out.flux.resize(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Segment& s = g.segments[k];
    auto it = lookup.find({{s.a.x, s.a.y}, {s.b.x, s.b.y}});
    if (it == lookup.end()) throw std::logic_error("interface segment missing from union mesh");
    const int e = it->second;
    out.trace.segment<2>(2 * k) = ref.solution.trace.segment<2>(2 * e);
    const Edge& edge = mesh.edges()[e];
    // The left triangle lies at smaller x than the interface line.
    std::size_t t = static_cast<std::size_t>(edge.triangles[0]);
    const auto& pts = mesh.triangle_points(t);
    if ((pts[0].x + pts[1].x + pts[2].x) / 3.0 > g.x) t = static_cast<std::size_t>(edge.triangles[1]);
    const int local = local_edge_index(mesh, t, e);
    const auto q = numerical_flux(ref.system->geometry(t), ref.solution.fields[t],
                                  element_trace(mesh, ref.solution, t), local, ref.system->tau());
    out.flux[2 * k] = q[0];
    out.flux[2 * k + 1] = q[1];
  }
  return out;
}

/// L2 distance between decomposed fields and the reference, per field.
inline ErrorNorms difference_to_reference(const DDProblem& problem,
                                          const std::vector<SubdomainSolution>& sols,
                                          const MonolithicReference& ref) {
  ErrorNorms d;
  for (int i = 0; i < problem.num_subdomains(); ++i) {
    const auto& sys = problem.system(i);
    for (std::size_t t = 0; t < sys.mesh().num_triangles(); ++t) {
      const LocalFields& a = sols[i].fields[t];
      const LocalFields& b = ref.solution.fields[ref.triangle_offset[i] + t];
      // Nodal P1 differences integrate exactly against the element mass.
      const Vec3 du = a.u - b.u;
      const Vec3 dqx = a.q.head<3>() - b.q.head<3>();
      const Vec3 dqy = a.q.tail<3>() - b.q.tail<3>();
      const double area = sys.geometry(t).area();
      auto mass_norm = [area](const Vec3& v) {
        return area / 12.0 * (v.squaredNorm() + v.sum() * v.sum());
      };
      d.u_sq += mass_norm(du);
      d.q_sq += mass_norm(dqx) + mass_norm(dqy);
    }
  }
  return d;
}

}  // namespace hdgdd
