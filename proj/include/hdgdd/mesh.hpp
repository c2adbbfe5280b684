#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hdgdd {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Lexicographic (x, then y) order used to orient every edge canonically.
inline bool lex_less(const Point2& a, const Point2& b) {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

enum class EdgeKind : std::uint8_t { kInterior, kDirichlet, kInterface };

struct Edge {
  /// Vertex indices in canonical (lexicographic) order.
  std::array<int, 2> vertices{};
  /// Incident triangles; the second entry is -1 for boundary edges.
  std::array<int, 2> triangles{-1, -1};
  EdgeKind kind = EdgeKind::kInterior;
  /// Interface id when kind == kInterface, -1 otherwise.
  int interface_id = -1;

  [[nodiscard]] bool on_boundary() const { return triangles[1] < 0; }
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conforming triangulation. Edges and their classes are derived from the
/// vertex and triangle lists; boundary edges start out as Dirichlet edges.
class Mesh {
 public:
  Mesh() = default;

  Mesh(std::vector<Point2> vertices, std::vector<std::array<int, 3>> triangles)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    validate_and_build();
  }

  [[nodiscard]] const std::vector<Point2>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const {
    return triangles_;
  }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }

  [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t num_triangles() const { return triangles_.size(); }
  [[nodiscard]] std::size_t num_edges() const { return edges_.size(); }

  /// Edge ids of triangle t; local edge k is opposite local vertex k.
  [[nodiscard]] const std::array<int, 3>& triangle_edges(std::size_t t) const {
    return triangle_edges_[t];
  }

  [[nodiscard]] std::array<Point2, 3> triangle_points(std::size_t t) const {
    const auto& tri = triangles_[t];
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
  }

  [[nodiscard]] double triangle_area(std::size_t t) const {
    const auto p = triangle_points(t);
    return 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) -
                  (p[2].x - p[0].x) * (p[1].y - p[0].y));
  }

  /// Reclassifies every boundary edge for which `on_interface` returns true.
  template <class Predicate>
  void mark_interface(int interface_id, Predicate on_interface) {
    for (auto& e : edges_) {
      if (!e.on_boundary()) continue;
      if (on_interface(vertices_[e.vertices[0]], vertices_[e.vertices[1]])) {
        e.kind = EdgeKind::kInterface;
        e.interface_id = interface_id;
      }
    }
  }

  /// Vertex and triangle lists compare equal; derived data follows.
  friend bool operator==(const Mesh& a, const Mesh& b) {
    return a.vertices_ == b.vertices_ && a.triangles_ == b.triangles_;
  }

 private:
  void validate_and_build() {
    const auto nv = static_cast<int>(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      if (!std::isfinite(vertices_[i].x) || !std::isfinite(vertices_[i].y)) {
        throw MeshError("vertex " + std::to_string(i) +
                        " has a non-finite coordinate");
      }
    }
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      for (int v : triangles_[t]) {
        if (v < 0 || v >= nv) {
          throw MeshError("triangle " + std::to_string(t) +
                          " references vertex " + std::to_string(v) +
                          " outside [0, " + std::to_string(nv) + ")");
        }
      }
      if (!(triangle_area(t) > 0.0)) {
        throw MeshError("triangle " + std::to_string(t) +
                        " is not counterclockwise with positive area");
      }
    }

    std::map<std::pair<int, int>, int> lookup;
    triangle_edges_.assign(triangles_.size(), {-1, -1, -1});
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      const auto& tri = triangles_[t];
      for (int k = 0; k < 3; ++k) {
        int a = tri[(k + 1) % 3];
        int b = tri[(k + 2) % 3];
        if (lex_less(vertices_[b], vertices_[a])) std::swap(a, b);
        auto [it, inserted] =
            lookup.try_emplace({a, b}, static_cast<int>(edges_.size()));
        if (inserted) {
          Edge e;
          e.vertices = {a, b};
          e.triangles = {static_cast<int>(t), -1};
          edges_.push_back(e);
        } else {
          auto& e = edges_[it->second];
          if (e.triangles[1] >= 0) {
            throw MeshError("edge (" + std::to_string(a) + ", " +
                            std::to_string(b) +
                            ") is shared by more than two triangles");
          }
          e.triangles[1] = static_cast<int>(t);
        }
        triangle_edges_[t][k] = it->second;
      }
    }
    for (auto& e : edges_) {
      e.kind = e.on_boundary() ? EdgeKind::kDirichlet : EdgeKind::kInterior;
    }
  }

  std::vector<Point2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
};

/// nx-by-ny grid of cells, each cut by its lower-left to upper-right diagonal.
inline Mesh build_structured_mesh(const Rect& rect, int nx, int ny) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("build_structured_mesh: nx and ny must be >= 1");
  }
  if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0)) {
    throw std::invalid_argument("build_structured_mesh: empty rectangle");
  }
  // The last row/column is pinned to the rectangle edge so neighbouring
  // strips share bit-identical interface coordinates.
  auto coord = [](double lo, double hi, int i, int n) {
    return i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / n;
  };
  std::vector<Point2> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      vertices.push_back({coord(rect.x0, rect.x1, i, nx),
                          coord(rect.y0, rect.y1, j, ny)});
    }
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int ll = id(i, j), lr = id(i + 1, j);
      const int ul = id(i, j + 1), ur = id(i + 1, j + 1);
      triangles.push_back({ll, lr, ur});
      triangles.push_back({ll, ur, ul});
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

struct Segment {
  Point2 a;  // canonical first endpoint
  Point2 b;

  [[nodiscard]] double length() const { return std::hypot(b.x - a.x, b.y - a.y); }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Interface between strip `left` and strip `left + 1`. Its normal points from
/// the left strip into the right one (+x).
struct InterfaceDescriptor {
  int id = 0;
  int left = 0;
  int right = 1;
  double x = 0.0;
  /// Shared segments ordered by increasing y.
  std::vector<Segment> segments;
  /// Matching edge ids in the left and right submeshes, same order.
  std::vector<int> left_edges;
  std::vector<int> right_edges;

  [[nodiscard]] std::size_t num_edges() const { return segments.size(); }
  [[nodiscard]] Point2 normal() const { return {1.0, 0.0}; }
};

struct SubdomainDecomposition {
  std::vector<double> breakpoints;
  std::vector<Mesh> submeshes;
  std::vector<InterfaceDescriptor> interfaces;

  [[nodiscard]] int num_subdomains() const {
    return static_cast<int>(submeshes.size());
  }
  /// Interface ids touching subdomain i (at most two for strips).
  [[nodiscard]] std::vector<int> interfaces_of(int i) const {
    std::vector<int> ids;
    for (const auto& g : interfaces) {
      if (g.left == i || g.right == i) ids.push_back(g.id);
    }
    return ids;
  }
};

/// Interface edges of `mesh` carrying `interface_id`, sorted by canonical
/// first endpoint.
inline std::vector<int> interface_edges(const Mesh& mesh, int interface_id) {
  std::vector<int> ids;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& edge = mesh.edges()[e];
    if (edge.kind == EdgeKind::kInterface && edge.interface_id == interface_id) {
      ids.push_back(static_cast<int>(e));
    }
  }
  const auto& v = mesh.vertices();
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    return lex_less(v[mesh.edges()[a].vertices[0]], v[mesh.edges()[b].vertices[0]]);
  });
  return ids;
}

inline Segment edge_segment(const Mesh& mesh, int edge) {
  const auto& e = mesh.edges()[edge];
  return {mesh.vertices()[e.vertices[0]], mesh.vertices()[e.vertices[1]]};
}

inline Mesh merge_submeshes(const std::vector<Mesh>& meshes);

/// Splits the unit square into vertical strips at `breakpoints` and meshes
/// each strip with a structured grid of target size h.
inline SubdomainDecomposition decompose_strips(const std::vector<double>& breakpoints,
                                               double h) {
  if (breakpoints.size() < 2 || breakpoints.front() != 0.0 ||
      breakpoints.back() != 1.0) {
    throw std::invalid_argument("decompose_strips: breakpoints must span [0, 1]");
  }
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1])) {
      throw std::invalid_argument(
          "decompose_strips: breakpoints must be strictly increasing");
    }
  }
  if (!(h > 0.0)) throw std::invalid_argument("decompose_strips: h must be > 0");

  auto round_half_up = [](double v) { return static_cast<int>(std::floor(v + 0.5)); };
  const int ny = std::max(1, round_half_up(1.0 / h));

  SubdomainDecomposition dd;
  dd.breakpoints = breakpoints;
  const int n = static_cast<int>(breakpoints.size()) - 1;
  for (int i = 0; i < n; ++i) {
    const double a = breakpoints[i], b = breakpoints[i + 1];
    const int nx = std::max(1, round_half_up((b - a) / h));
    Mesh m = build_structured_mesh({a, 0.0, b, 1.0}, nx, ny);
    if (i > 0) {
      m.mark_interface(i - 1, [a](const Point2& p, const Point2& q) {
        return p.x == a && q.x == a;
      });
    }
    if (i + 1 < n) {
      m.mark_interface(i, [b](const Point2& p, const Point2& q) {
        return p.x == b && q.x == b;
      });
    }
    dd.submeshes.push_back(std::move(m));
  }
  for (int i = 0; i + 1 < n; ++i) {
    InterfaceDescriptor g;
    g.id = i;
    g.left = i;
    g.right = i + 1;
    g.x = breakpoints[i + 1];
    g.left_edges = interface_edges(dd.submeshes[i], i);
    g.right_edges = interface_edges(dd.submeshes[i + 1], i);
    if (g.left_edges.size() != g.right_edges.size()) {
      throw MeshError("decompose_strips: nonconforming interface " + std::to_string(i));
    }
    for (std::size_t k = 0; k < g.left_edges.size(); ++k) {
      const Segment sl = edge_segment(dd.submeshes[i], g.left_edges[k]);
      const Segment sr = edge_segment(dd.submeshes[i + 1], g.right_edges[k]);
      if (!(sl == sr)) {
        throw MeshError("decompose_strips: nonconforming interface " + std::to_string(i));
      }
      g.segments.push_back(sl);
    }
    dd.interfaces.push_back(std::move(g));
  }
  return dd;
}

/// Glues meshes whose shared vertices coincide bit-for-bit. Triangles keep
/// their order: submesh i's triangles follow those of submeshes 0..i-1.
inline Mesh merge_submeshes(const std::vector<Mesh>& meshes) {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  auto key = [](const Point2& p) { return std::make_pair(p.x, p.y); };
  std::map<std::pair<double, double>, int> index;
  for (const auto& m : meshes) {
    std::vector<int> remap(m.num_vertices());
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
      auto [it, inserted] =
          index.try_emplace(key(m.vertices()[v]), static_cast<int>(vertices.size()));
      if (inserted) vertices.push_back(m.vertices()[v]);
      remap[v] = it->second;
    }
    for (const auto& t : m.triangles()) {
      triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

/// Writes the `hdgmesh 1` text format. Coordinates round-trip exactly.
inline void export_mesh(const Mesh& mesh, std::ostream& os) {
  os << "hdgmesh 1\n";
  std::ostringstream line;
  line.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : mesh.vertices()) {
    line.str("");
    line << "v " << p.x << ' ' << p.y << '\n';
    os << line.str();
  }
  for (const auto& t : mesh.triangles()) {
    os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
}

inline Mesh import_mesh(std::istream& is) {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::string raw;
  int line_no = 0;
  bool header = false;
  auto fail = [&line_no](const std::string& what) {
    throw MeshError("mesh line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(is, raw)) {
    ++line_no;
    std::istringstream in(raw);
    std::string tag;
    if (!(in >> tag)) continue;
    if (!header) {
      int version = 0;
      if (tag != "hdgmesh" || !(in >> version) || version != 1) {
        fail("expected header 'hdgmesh 1'");
      }
      header = true;
      continue;
    }
    if (tag == "v") {
      if (!triangles.empty()) fail("vertex after triangle section");
      Point2 p;
      if (!(in >> p.x >> p.y)) fail("malformed vertex");
      vertices.push_back(p);
    } else if (tag == "t") {
      std::array<long long, 3> idx{};
      if (!(in >> idx[0] >> idx[1] >> idx[2])) fail("malformed triangle");
      std::array<int, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        if (idx[k] < 0 || idx[k] >= static_cast<long long>(vertices.size())) {
          fail("triangle index " + std::to_string(idx[k]) + " out of range");
        }
        tri[k] = static_cast<int>(idx[k]);
      }
      triangles.push_back(tri);
    } else {
      fail("unknown record '" + tag + "'");
    }
    std::string extra;
    if (in >> extra) fail("trailing data '" + extra + "'");
  }
  if (!header) throw MeshError("mesh: missing header 'hdgmesh 1'");
  return Mesh(std::move(vertices), std::move(triangles));
}

}  // namespace hdgdd
