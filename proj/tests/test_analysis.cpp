#include "sfem/analysis.hpp"
#include "sfem/mesh.hpp"
#include "sfem/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace sfem;

namespace {

std::vector<Vec3> sphere_samples(int count) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::vector<Vec3> out;
  for (int i = 0; i < count; ++i) out.push_back(Vec3(normal(rng), normal(rng), normal(rng)).normalized());
  return out;
}

// Unit tangent vectors orthogonal to y.
std::array<Vec3, 2> tangents(const Vec3& y) {
  const Vec3 a = std::abs(y.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 t1 = (a - a.dot(y) * y).normalized();
  return {t1, y.cross(t1)};
}

// Point on the unit sphere reached from y along tangent t after arc length s.
Vec3 geodesic(const Vec3& y, const Vec3& t, double s) { return std::cos(s) * y + std::sin(s) * t; }

StudyConfig th2(int kg, int lmin, int lmax) {
  StudyConfig c;
  c.pair = PairTag::taylor_hood;
  c.order = 2;
  c.kg = kg;
  c.level_min = lmin;
  c.level_max = lmax;
  return c;
}

}  // namespace

TEST_CASE("benchmark point values") {
  const Benchmark b = benchmark();
  CHECK((b.force(Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() <= 1e-15);
  CHECK(b.velocity(Vec3(0, 0, 1)).norm() <= 1e-15);
  // grad_Gamma phi = (0, 0, 1) at (1, 0, 0), crossed with n = (1, 0, 0)
  CHECK((b.velocity(Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() <= 1e-15);
  CHECK(b.pressure(Vec3(0.6, 0.8, 0)) == -0.6);
}

TEST_CASE("benchmark velocity is tangential and solenoidal") {
  const Benchmark b = benchmark();
  for (const Vec3& y : sphere_samples(200)) {
    CHECK(std::abs(b.velocity(y).dot(y)) <= 1e-13);
    const Mat3 P = Mat3::Identity() - y * y.transpose();
    // div_Gamma u = tr(P Du P) for tangential u
    CHECK(std::abs((P * b.velocity_jacobian(y) * P).trace()) <= 1e-13);
    CHECK(std::abs(b.pressure_gradient(y).dot(y)) <= 1e-14);
  }
}

TEST_CASE("benchmark derivatives match finite differences") {
  const Benchmark b = benchmark();
  const double d = 1e-6;
  for (const Vec3& y : sphere_samples(20)) {
    for (const Vec3& t : tangents(y)) {
      const Vec3 fd = (b.velocity(geodesic(y, t, d)) - b.velocity(geodesic(y, t, -d))) / (2 * d);
      CHECK((fd - b.velocity_jacobian(y) * t).norm() <= 1e-8);
      const double pd = (b.pressure(geodesic(y, t, d)) - b.pressure(geodesic(y, t, -d))) / (2 * d);
      CHECK(std::abs(pd - b.pressure_gradient(y).dot(t)) <= 1e-9);
    }
  }
}

TEST_CASE("benchmark pressure has zero mean") {
  const auto g = lift_geometry(std::make_shared<const FlatMesh>(build_icosphere(3)), std::make_shared<const UnitSphere>(), 3);
  const double mean = integrate_surface(*g, triangle_rule(8), [](const GeometryData& d) { return -d.exact_point.x(); });
  CHECK(std::abs(mean) <= 1e-13);
}

TEST_CASE("experimental orders of convergence") {
  const auto two = eoc({0.1, 0.025}, {1.0, 0.5});
  REQUIRE(two.size() == 1);
  CHECK(two[0] == doctest::Approx(2.0));
  CHECK(eoc({0.3, 0.3}, {1.0, 0.5})[0] == doctest::Approx(0.0));
  CHECK(eoc({8e-3, 1e-3}, {1.0, 0.5})[0] == doctest::Approx(3.0));
  const auto bad = eoc({1e-2, 0.0, 1e-4}, {1.0, 0.5, 0.25});
  CHECK(std::isnan(bad[0]));
  CHECK(std::isnan(bad[1]));
  CHECK(std::isnan(eoc({-1.0, 1.0}, {1.0, 0.5})[0]));
  CHECK_THROWS_AS(eoc({1.0, 0.5}, {1.0}), ConfigError);
}

TEST_CASE("predicted orders") {
  const double inf = std::numeric_limits<double>::infinity();
  const PredictedOrders p = predicted_orders(2, 2, 1, curvature_order(CurvatureMode::intrinsic, std::nullopt, 2));
  CHECK(p.energy == 1.5);
  CHECK(p.pressure == 2.0);
  CHECK(p.tangential_l2 == 3.0);
  CHECK(p.normal == 2.0);
  CHECK(p.h1 == 1.5);

  CHECK(predicted_orders(2, 1, 1, inf).tangential_l2 == 1.0);
  CHECK(predicted_orders(3, 3, 1, inf).tangential_l2 == 4.0);
  CHECK(predicted_orders(1, 2, 1, inf).tangential_l2 == 2.0);
  CHECK(predicted_orders(3, 3, 1, inf).energy == 2.5);
  CHECK(predicted_orders(3, 3, 1, inf).pressure == 3.0);

  // a_2 is limited by the curvature order
  const double kK = curvature_order(CurvatureMode::intrinsic, std::nullopt, 3);
  CHECK(kK == 2.0);
  CHECK(predicted_orders(2, 3, 2, kK).tangential_l2 == 2.0);
  CHECK(predicted_orders(2, 3, 1, kK).tangential_l2 == 3.0);
  CHECK(predicted_orders(2, 3, 2, inf).tangential_l2 == 3.0);

  CHECK(curvature_order(CurvatureMode::intrinsic, std::nullopt, 2) == 2.0);
  CHECK(curvature_order(CurvatureMode::lifted, 4, 3) == 4.0);
  CHECK(std::isinf(curvature_order(CurvatureMode::exact, std::nullopt, 2)));
}

TEST_CASE("errors of the zero solution") {
  // |u*|^2 = |grad phi|^2 - (grad phi . n)^2 integrates to 24 pi / 5, |p*|^2 to 4 pi / 3
  const double u_norm = std::sqrt(24.0 * std::numbers::pi / 5.0);
  const double p_norm = std::sqrt(4.0 * std::numbers::pi / 3.0);
  for (int level : {2, 3}) {
    const auto g = lift_geometry(std::make_shared<const FlatMesh>(build_icosphere(level)),
                                 std::make_shared<const UnitSphere>(), 3);
    const MixedSpace th = build_pair(PairTag::taylor_hood, 2, g);
    SaddleSolution zero;
    zero.u = VecX::Zero(th.velocity_dofs());
    zero.p = VecX::Zero(th.pressure_dofs());
    const ErrorRow r = compute_errors(zero, th, benchmark(), 1.0);
    CHECK(r.u_tan_l2 == doctest::Approx(u_norm).epsilon(1e-4));
    CHECK(r.u_tan_l2_exact == doctest::Approx(u_norm).epsilon(1e-4));
    CHECK(r.p_l2 == doctest::Approx(p_norm).epsilon(1e-4));
    CHECK(r.u_normal == 0.0);
    CHECK(r.penalty_energy == 0.0);
    CHECK(r.energy >= r.u_tan_l2);
    CHECK(r.dofs_u == th.velocity_dofs());
    CHECK(r.dofs_p == th.pressure_dofs());

    SaddleSolution wrong = zero;
    wrong.p = VecX::Zero(3);
    CHECK_THROWS_AS(compute_errors(wrong, th, benchmark(), 1.0), ConfigError);
  }
}

TEST_CASE("study configuration validation") {
  CHECK_NOTHROW(th2(2, 1, 2).validate());
  auto fails = [](auto change) {
    StudyConfig c = th2(2, 1, 2);
    change(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  fails([](StudyConfig& c) { c.kg = 0; });
  fails([](StudyConfig& c) { c.kg = 6; });
  fails([](StudyConfig& c) { c.form_a = 3; });
  fails([](StudyConfig& c) { c.form_b = 0; });
  fails([](StudyConfig& c) { c.eta = 0.0; });
  fails([](StudyConfig& c) { c.eta = std::nan(""); });
  fails([](StudyConfig& c) { c.level_min = 3; });
  fails([](StudyConfig& c) { c.order = 1; });
  fails([](StudyConfig& c) { c.order.reset(); });
  fails([](StudyConfig& c) {
    c.pair = PairTag::mini;
  });
  fails([](StudyConfig& c) {
    c.pair = PairTag::p2p0;
    c.order.reset();
    c.form_b = 2;
  });
  fails([](StudyConfig& c) {
    c.pair = PairTag::p1p1;
    c.order.reset();
  });
  fails([](StudyConfig& c) { c.curvature = CurvatureMode::lifted; });
  fails([](StudyConfig& c) {
    c.curvature = CurvatureMode::lifted;
    c.lifted_order = 2;
  });
  fails([](StudyConfig& c) { c.lifted_order = 4; });

  StudyConfig big = th2(2, 1, kMaxIcosphereLevel + 1);
  CHECK_THROWS_AS(big.validate(), ResourceError);

  StudyConfig unsafe = th2(1, 1, 2);
  unsafe.pair = PairTag::p1p1;
  unsafe.order.reset();
  unsafe.allow_unsafe = true;
  CHECK_NOTHROW(unsafe.validate());
}

TEST_CASE("configuration tags") {
  StudyConfig c = th2(2, 1, 3);
  CHECK(c.element_tag() == "th:2");
  CHECK(c.curvature_tag() == "intrinsic");
  c.curvature = CurvatureMode::lifted;
  c.lifted_order = 3;
  CHECK(c.curvature_tag() == "lifted:3");
  CHECK(c.echo() == "element=th:2 kg=2 form_a=1 form_b=1 curvature=lifted:3 eta=1 levels=1:3 inf_sup=off");
}

TEST_CASE("number formatting") {
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "nan");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(2.0) == "2");
}

TEST_CASE("small study") {
  std::vector<int> seen;
  const StudyReport r = run_study(th2(2, 1, 3), [&](const LevelArtifacts& a) {
    seen.push_back(a.level);
    CHECK(a.mesh.level() == a.level);
    CHECK(a.solution.u.size() == a.mixed.velocity_dofs());
  });
  CHECK(seen == std::vector<int>{1, 2, 3});
  REQUIRE(r.rows.size() == 3);
  CHECK(r.orders(&ErrorRow::u_tan_l2).size() == 2);
  CHECK(r.pair_order == 2);
  CHECK(r.predicted.tangential_l2 == 3.0);
  CHECK(r.final_order(&ErrorRow::u_tan_l2) == doctest::Approx(r.orders(&ErrorRow::u_tan_l2)[1]));
  for (size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].h < r.rows[i - 1].h);
    CHECK(r.rows[i].u_tan_l2 < r.rows[i - 1].u_tan_l2);
    CHECK(r.rows[i].p_l2 < r.rows[i - 1].p_l2);
  }
  for (const ErrorRow& row : r.rows) {
    CHECK(std::isnan(row.beta_h));
    CHECK(row.u_tan_l2 >= 0.0);
    CHECK(row.energy >= row.u_tan_h1);
    CHECK(row.energy >= row.penalty_energy);
  }

  std::ostringstream csv;
  write_csv(csv, r);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# " + r.config.echo());
  std::getline(in, line);
  CHECK(line ==
        "level,h,dofs_u,dofs_p,err_u_tan_l2,eoc_u_tan_l2,err_u_tan_h1,eoc_u_tan_h1,err_u_normal,eoc_u_normal,"
        "err_p_l2,eoc_p_l2,err_energy,eoc_energy,beta_h");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 14);
  }
  CHECK(rows == 3);
}
