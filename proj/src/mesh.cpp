#include "sfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <unordered_map>

namespace sfem {
namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

FlatMesh::FlatMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles, int level)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), level_(level) {
  const int nv = num_vertices();
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(triangles_.size() * 2);
  triangle_edges_.resize(triangles_.size());
  vertex_triangles_.assign(nv, {});

  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv) throw GeometryError("triangle references unknown vertex");
      vertex_triangles_[tri[k]].push_back(t);
    }
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e];
      const int b = tri[(e + 1) % 3];
      auto [it, inserted] = lookup.try_emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back(Edge{{std::min(a, b), std::max(a, b)}, {t, -1}});
      } else {
        auto& edge = edges_[it->second];
        if (edge.triangles[1] != -1) throw GeometryError("non-manifold edge: more than two triangles");
        edge.triangles[1] = t;
      }
      triangle_edges_[t][e] = it->second;
    }
  }
}

std::array<Vec3, 3> FlatMesh::corners(int t) const {
  const auto& tri = triangles_[t];
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

double FlatMesh::area(int t) const {
  const auto c = corners(t);
  return 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
}

Vec3 FlatMesh::centroid(int t) const {
  const auto c = corners(t);
  return (c[0] + c[1] + c[2]) / 3.0;
}

Vec3 FlatMesh::unit_normal(int t) const {
  const auto c = corners(t);
  return (c[1] - c[0]).cross(c[2] - c[0]).normalized();
}

int FlatMesh::num_boundary_edges() const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(),
                                        [](const Edge& e) { return e.triangles[1] == -1; }));
}

FlatMesh build_icosphere(int level) {
  if (level < 0) throw ConfigError("icosphere level must be nonnegative");
  if (level > kMaxIcosphereLevel)
    throw ResourceError("icosphere level " + std::to_string(level) + " exceeds the memory guard of " +
                        std::to_string(kMaxIcosphereLevel));

  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> vertices = {
      {-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0},
      {0, -1, g}, {0, 1, g}, {0, -1, -g}, {0, 1, -g},
      {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1},
  };
  for (auto& v : vertices) v.normalize();
  std::vector<std::array<int, 3>> triangles = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  // outward orientation
  for (auto& tri : triangles) {
    const Vec3& a = vertices[tri[0]];
    const Vec3 n = (vertices[tri[1]] - a).cross(vertices[tri[2]] - a);
    if (n.dot(a + vertices[tri[1]] + vertices[tri[2]]) < 0) std::swap(tri[1], tri[2]);
  }

  for (int l = 0; l < level; ++l) {
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(triangles.size() * 2);
    auto mid = [&](int a, int b) {
      auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), static_cast<int>(vertices.size()));
      if (inserted) {
        const int lo = std::min(a, b);
        const int hi = std::max(a, b);
        vertices.push_back((0.5 * (vertices[lo] + vertices[hi])).normalized());
      }
      return it->second;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(triangles.size() * 4);
    for (const auto& [a, b, c] : triangles) {
      const int ab = mid(a, b);
      const int bc = mid(b, c);
      const int ca = mid(c, a);
      refined.push_back({a, ab, ca});
      refined.push_back({ab, b, bc});
      refined.push_back({ca, bc, c});
      refined.push_back({ab, bc, ca});
    }
    triangles = std::move(refined);
  }
  return FlatMesh(std::move(vertices), std::move(triangles), level);
}

double mesh_size(const FlatMesh& mesh) {
  if (mesh.num_triangles() == 0) throw GeometryError("mesh_size of an empty mesh");
  double h = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    for (int e = 0; e < 3; ++e) h = std::max(h, (c[(e + 1) % 3] - c[e]).norm());
  }
  return h;
}

double shape_regularity(const FlatMesh& mesh) {
  double worst = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    double longest = 0.0;
    double perimeter = 0.0;
    for (int e = 0; e < 3; ++e) {
      const double len = (c[(e + 1) % 3] - c[e]).norm();
      longest = std::max(longest, len);
      perimeter += len;
    }
    const double inradius = 2.0 * mesh.area(t) / perimeter;
    worst = std::max(worst, longest / inradius);
  }
  return worst;
}

std::vector<Macroelement> vertex_star_partitioning(const FlatMesh& mesh) {
  std::vector<Macroelement> patches;
  patches.reserve(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    Macroelement patch;
    patch.triangles = mesh.vertex_triangles(v);

    Vec3 center = Vec3::Zero();
    double total = 0.0;
    for (int t : patch.triangles) {
      center += mesh.area(t) * mesh.centroid(t);
      total += mesh.area(t);
    }
    center /= total;
    double best = std::numeric_limits<double>::infinity();
    for (int t : patch.triangles) {
      const double d = (mesh.centroid(t) - center).norm();
      if (d < best) {  // strict: ties keep the lowest index
        best = d;
        patch.seed = t;
      }
    }

    patch.interior_vertices = {v};
    for (int t : patch.triangles)
      for (int w : mesh.triangles()[t])
        if (w != v) patch.boundary_vertices.push_back(w);
    std::sort(patch.boundary_vertices.begin(), patch.boundary_vertices.end());
    patch.boundary_vertices.erase(
        std::unique(patch.boundary_vertices.begin(), patch.boundary_vertices.end()),
        patch.boundary_vertices.end());
    patches.push_back(std::move(patch));
  }
  return patches;
}

void write_off(std::ostream& out, const std::vector<Vec3>& points,
               const std::vector<std::array<int, 3>>& faces) {
  out << "OFF\n" << points.size() << ' ' << faces.size() << " 0\n";
  out.precision(17);
  for (const auto& p : points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& f : faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void write_off(std::ostream& out, const FlatMesh& mesh) {
  write_off(out, mesh.vertices(), mesh.triangles());
}

}  // namespace sfem
