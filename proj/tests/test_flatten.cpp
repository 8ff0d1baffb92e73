#include "sfem/flatten.hpp"
#include "sfem/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace sfem;

namespace {

const auto kSphere = std::make_shared<const UnitSphere>();

std::shared_ptr<const ParametricGeometry> sphere(int level, int kg) {
  return lift_geometry(std::make_shared<const FlatMesh>(build_icosphere(level)), kSphere, kg);
}

}  // namespace

TEST_CASE("seed member is flattened isometrically") {
  const FlatMesh m = build_icosphere(2);
  for (const auto& p : vertex_star_partitioning(m)) {
    const FlatPatch f = flatten_macroelement(m, p);
    const int s = f.member(p.seed);
    REQUIRE(s >= 0);
    CHECK(f.mu_bar[s] == 1.0);
    CHECK((f.gram[s] - Mat2::Identity()).norm() == 0.0);
    CHECK(std::abs(f.t1.dot(f.t2)) <= 1e-15);
    CHECK(f.t1.norm() == doctest::Approx(1.0));
    CHECK(f.t2.norm() == doctest::Approx(1.0));
    for (int j = 0; j < f.size(); ++j) {
      CHECK(f.mu_bar[j] > 0.0);
      CHECK(f.mu_bar[j] <= 1.0);
      CHECK(f.jacobian[j].determinant() > 0.0);
    }
  }
}

TEST_CASE("flat corners are the projected vertices") {
  const FlatMesh m = build_icosphere(2);
  const auto patches = vertex_star_partitioning(m);
  const FlatPatch f = flatten_macroelement(m, patches[5]);
  for (int j = 0; j < f.size(); ++j) {
    const auto c = m.corners(f.source.triangles[j]);
    for (int k = 0; k < 3; ++k) {
      CHECK(f.corners[j][k][0] == doctest::Approx(f.t1.dot(c[k] - f.origin)));
      CHECK(f.corners[j][k][1] == doctest::Approx(f.t2.dot(c[k] - f.origin)));
    }
  }
  CHECK(f.member(-7) == -1);
}

TEST_CASE("coarse patches are rejected") {
  const FlatMesh m = build_icosphere(0);
  const auto patches = vertex_star_partitioning(m);
  CHECK_THROWS_AS(flatten_macroelement(m, patches[0]), GeometryError);

  Macroelement bad = vertex_star_partitioning(build_icosphere(1))[0];
  bad.seed = -1;
  CHECK_THROWS_AS(flatten_macroelement(build_icosphere(1), bad), GeometryError);
}

TEST_CASE("planar patch is the identity") {
  // hexagonal fan in the z = 0 plane
  std::vector<Vec3> v{Vec3(0, 0, 0)};
  std::vector<std::array<int, 3>> t;
  for (int k = 0; k < 6; ++k) v.emplace_back(std::cos(k * M_PI / 3), std::sin(k * M_PI / 3), 0.0);
  for (int k = 0; k < 6; ++k) t.push_back({0, 1 + k, 1 + (k + 1) % 6});
  const FlatMesh m(v, t);
  const auto patches = vertex_star_partitioning(m);
  const FlatPatch f = flatten_macroelement(m, patches[0]);
  REQUIRE(f.size() == 6);
  for (int j = 0; j < 6; ++j) {
    CHECK(f.mu_bar[j] == doctest::Approx(1.0));
    CHECK((f.gram[j] - Mat2::Identity()).norm() <= 1e-15);
  }
}

TEST_CASE("composite map on the sphere") {
  const auto g = sphere(3, 2);
  const auto patches = vertex_star_partitioning(g->mesh());
  const FlatPatch f = flatten_macroelement(g->mesh(), patches[20]);
  const RefPoint xi(0.2, 0.3);
  for (int j = 0; j < f.size(); ++j) {
    const CompositeMapPoint c = evaluate_composite(f, *g, j, xi);
    CHECK(c.measure > 0.0);
    CHECK(std::abs(c.measure - 1.0) <= 0.05);
    // mu_h from its definition
    const double direct = std::sqrt((c.jacobian.transpose() * c.jacobian).determinant());
    CHECK(c.measure == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("patch rates under refinement") {
  std::vector<PatchMeasurement> levels;
  for (int level = 2; level <= 5; ++level) levels.push_back(measure_patches(*sphere(level, 2)));
  for (size_t i = 1; i < levels.size(); ++i) CHECK(levels[i].h < levels[i - 1].h);
  const RateReport r = verify_patch_rates(levels);
  CHECK(r.mu_bar >= 1.8);
  CHECK(r.flattening >= 0.9);
  CHECK(r.mu_h >= 1.8);
  CHECK(r.jump >= 0.9);
  CHECK(r.dmu >= 0.9);

  CHECK_THROWS_AS(verify_patch_rates({levels[0], levels[1]}), ConfigError);
}

TEST_CASE("fit exponent") {
  std::vector<double> hs{1.0, 0.5, 0.25, 0.125}, e2, e3;
  for (double h : hs) {
    e2.push_back(3.0 * h * h);
    e3.push_back(0.1 * h * h * h);
  }
  CHECK(fit_exponent(hs, e2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit_exponent(hs, e3) == doctest::Approx(3.0).epsilon(1e-12));
  e2[1] = 0.0;
  CHECK(std::isnan(fit_exponent(hs, e2)));
}
