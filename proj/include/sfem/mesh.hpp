#pragma once

#include "sfem/types.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace sfem {

struct Edge {
  std::array<int, 2> vertices;       // sorted, vertices[0] < vertices[1]
  std::array<int, 2> triangles{-1, -1};
};

/// Piecewise-flat conforming triangulation with vertices on the surface.
///
/// Immutable after construction. Local edge `e` of a triangle joins local
/// vertices `e` and `(e + 1) % 3`.
class FlatMesh {
public:
  FlatMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles, int level = 0);

  [[nodiscard]] const std::vector<Vec3>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] int level() const { return level_; }

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }
  [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles_.size()); }
  [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }

  /// Global edge index of local edge `e` of triangle `t`.
  [[nodiscard]] int triangle_edge(int t, int e) const { return triangle_edges_[t][e]; }

  /// Triangles incident to vertex `v`, ascending.
  [[nodiscard]] const std::vector<int>& vertex_triangles(int v) const { return vertex_triangles_[v]; }

  [[nodiscard]] std::array<Vec3, 3> corners(int t) const;
  [[nodiscard]] double area(int t) const;
  [[nodiscard]] Vec3 centroid(int t) const;
  [[nodiscard]] Vec3 unit_normal(int t) const;

  /// Edges with a single incident triangle.
  [[nodiscard]] int num_boundary_edges() const;
  [[nodiscard]] int euler_characteristic() const {
    return num_vertices() - num_edges() + num_triangles();
  }

private:
  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::vector<int>> vertex_triangles_;
  int level_ = 0;
};

inline constexpr int kMaxIcosphereLevel = 8;

/// Regular icosahedron red-refined `level` times; every new vertex is projected
/// radially onto the unit sphere. Throws ResourceError above kMaxIcosphereLevel.
FlatMesh build_icosphere(int level);

/// Longest edge over all triangles.
double mesh_size(const FlatMesh& mesh);

/// max_T h_T / rho_T with rho_T the inradius.
double shape_regularity(const FlatMesh& mesh);

struct Macroelement {
  std::vector<int> triangles;        // edge-connected members, ascending
  int seed = -1;                     // member whose centroid is nearest the patch centroid
  std::vector<int> interior_vertices;
  std::vector<int> boundary_vertices;
};

/// One patch per vertex holding all incident triangles.
std::vector<Macroelement> vertex_star_partitioning(const FlatMesh& mesh);

/// ASCII OFF writer.
void write_off(std::ostream& out, const std::vector<Vec3>& points,
               const std::vector<std::array<int, 3>>& faces);
void write_off(std::ostream& out, const FlatMesh& mesh);

}  // namespace sfem
