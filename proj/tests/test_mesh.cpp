#include "sfem/mesh.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>

using namespace sfem;

namespace {

// Edge count from the triangle list alone, independent of the mesh's edge table.
int count_edges(const FlatMesh& mesh) {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : mesh.triangles())
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  return static_cast<int>(edges.size());
}

bool edge_connected(const FlatMesh& mesh, const std::vector<int>& members) {
  const std::set<int> in(members.begin(), members.end());
  std::set<int> seen{members.front()};
  std::queue<int> todo;
  todo.push(members.front());
  while (!todo.empty()) {
    const int t = todo.front();
    todo.pop();
    for (int e = 0; e < 3; ++e) {
      const auto& edge = mesh.edges()[mesh.triangle_edge(t, e)];
      for (int n : edge.triangles)
        if (n >= 0 && in.count(n) && seen.insert(n).second) todo.push(n);
    }
  }
  return seen.size() == in.size();
}

}  // namespace

TEST_CASE("icosphere combinatorics") {
  const int expected[3][3] = {{12, 30, 20}, {42, 120, 80}, {162, 480, 320}};
  for (int level = 0; level < 3; ++level) {
    const FlatMesh m = build_icosphere(level);
    CHECK(m.level() == level);
    CHECK(m.num_vertices() == expected[level][0]);
    CHECK(m.num_edges() == expected[level][1]);
    CHECK(m.num_triangles() == expected[level][2]);
    CHECK(count_edges(m) == m.num_edges());
  }
}

TEST_CASE("icosphere invariants over refinement") {
  for (int level = 0; level <= 4; ++level) {
    const FlatMesh m = build_icosphere(level);
    CHECK(m.euler_characteristic() == 2);
    CHECK(m.num_boundary_edges() == 0);
    double worst = 0.0;
    for (const Vec3& v : m.vertices()) worst = std::max(worst, std::abs(v.norm() - 1.0));
    CHECK(worst <= 1e-14);
    for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.area(t) > 0.0);
    for (const Edge& e : m.edges()) {
      CHECK(e.triangles[0] >= 0);
      CHECK(e.triangles[1] >= 0);
      CHECK(e.vertices[0] < e.vertices[1]);
    }
  }
}

TEST_CASE("outward orientation") {
  const FlatMesh m = build_icosphere(2);
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.unit_normal(t).dot(m.centroid(t)) > 0.0);
}

TEST_CASE("level guard") {
  CHECK_THROWS_AS(build_icosphere(kMaxIcosphereLevel + 1), ResourceError);
  CHECK_THROWS_AS(build_icosphere(-1), ConfigError);
}

TEST_CASE("mesh size") {
  const double edge = 4.0 / std::sqrt(10.0 + 2.0 * std::sqrt(5.0));
  CHECK(mesh_size(build_icosphere(0)) == doctest::Approx(edge).epsilon(1e-13));
  CHECK(edge == doctest::Approx(1.0515).epsilon(1e-4));
  double previous = mesh_size(build_icosphere(1));
  for (int level = 2; level <= 5; ++level) {
    const double h = mesh_size(build_icosphere(level));
    CHECK(h / previous >= 0.45);
    CHECK(h / previous <= 0.55);
    previous = h;
  }

  const FlatMesh single({Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(0, 4, 0)}, {{0, 1, 2}});
  CHECK(mesh_size(single) == doctest::Approx(5.0));
  CHECK(single.num_boundary_edges() == 3);
}

TEST_CASE("shape regularity bounded") {
  for (int level = 0; level <= 5; ++level) CHECK(shape_regularity(build_icosphere(level)) <= 10.0);
  // equilateral triangle: h / rho = 1 / (sqrt(3) / 6)
  const FlatMesh eq({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, std::sqrt(3.0) / 2, 0)}, {{0, 1, 2}});
  CHECK(shape_regularity(eq) == doctest::Approx(6.0 / std::sqrt(3.0)));
}

TEST_CASE("shape regularity non-increasing beyond level 1") {
  double previous = shape_regularity(build_icosphere(1));
  for (int level = 2; level <= 5; ++level) {
    const double s = shape_regularity(build_icosphere(level));
    CHECK(s <= previous + 1e-12);
    previous = s;
  }
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS_AS(FlatMesh({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {{0, 1, 2}}), GeometryError);
  const std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 1, 1)};
  CHECK_THROWS_AS(FlatMesh(v, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}), GeometryError);
}

TEST_CASE("vertex-star partitioning") {
  SUBCASE("level 0") {
    const FlatMesh m = build_icosphere(0);
    const auto patches = vertex_star_partitioning(m);
    CHECK(patches.size() == 12);
    for (const auto& p : patches) CHECK(p.triangles.size() == 5);
  }
  SUBCASE("level 1 valences") {
    const FlatMesh m = build_icosphere(1);
    const auto patches = vertex_star_partitioning(m);
    REQUIRE(patches.size() == 42);
    int five = 0, six = 0;
    for (int v = 0; v < 42; ++v) {
      const size_t n = patches[v].triangles.size();
      if (n == 5) {
        ++five;
        CHECK(v < 12);
      } else if (n == 6) {
        ++six;
      }
    }
    CHECK(five == 12);
    CHECK(six == 30);
  }
  SUBCASE("covering, seeds and connectivity") {
    for (int level = 0; level <= 3; ++level) {
      const FlatMesh m = build_icosphere(level);
      const auto patches = vertex_star_partitioning(m);
      std::map<int, int> multiplicity;
      size_t total = 0;
      for (const auto& p : patches) {
        total += p.triangles.size();
        for (int t : p.triangles) ++multiplicity[t];
        CHECK(std::is_sorted(p.triangles.begin(), p.triangles.end()));
        CHECK(edge_connected(m, p.triangles));

        // seed: member centroid nearest the area-weighted patch centroid
        Vec3 c = Vec3::Zero();
        double area = 0.0;
        for (int t : p.triangles) {
          c += m.area(t) * m.centroid(t);
          area += m.area(t);
        }
        c /= area;
        double nearest = 1e300;
        for (int t : p.triangles) nearest = std::min(nearest, (m.centroid(t) - c).norm());
        CHECK(std::count(p.triangles.begin(), p.triangles.end(), p.seed) == 1);
        CHECK((m.centroid(p.seed) - c).norm() <= nearest + 1e-12);
        CHECK(p.interior_vertices.size() == 1);
        CHECK(p.boundary_vertices.size() == p.triangles.size());
      }
      CHECK(total == 3 * static_cast<size_t>(m.num_triangles()));
      CHECK(static_cast<int>(multiplicity.size()) == m.num_triangles());
      for (const auto& [t, count] : multiplicity) CHECK(count == 3);
    }
  }
}

TEST_CASE("OFF output") {
  const FlatMesh m = build_icosphere(0);
  std::ostringstream out;
  write_off(out, m);
  std::istringstream in(out.str());
  std::string header;
  int nv = 0, nf = 0, ne = 0;
  in >> header >> nv >> nf >> ne;
  CHECK(header == "OFF");
  CHECK(nv == 12);
  CHECK(nf == 20);
  for (int i = 0; i < nv; ++i) {
    double x, y, z;
    in >> x >> y >> z;
    CHECK(Vec3(x, y, z).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int f = 0; f < nf; ++f) {
    int three, a, b, c;
    in >> three >> a >> b >> c;
    CHECK(three == 3);
    CHECK(std::array<int, 3>{a, b, c} == m.triangles()[f]);
  }
}
