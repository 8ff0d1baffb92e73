#include "sfem/flatten.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sfem {
namespace {

const RefPoint kRefVertex[3] = {RefPoint(0.0, 0.0), RefPoint(1.0, 0.0), RefPoint(0.0, 1.0)};

double spectral_norm_symmetric(const Mat2& m) {
  const Eigen::SelfAdjointEigenSolver<Mat2> es(m);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

int FlatPatch::member(int triangle) const {
  const auto it = std::find(source.triangles.begin(), source.triangles.end(), triangle);
  return it == source.triangles.end() ? -1 : static_cast<int>(it - source.triangles.begin());
}

FlatPatch flatten_macroelement(const FlatMesh& mesh, const Macroelement& patch) {
  if (patch.seed < 0 || std::find(patch.triangles.begin(), patch.triangles.end(), patch.seed) == patch.triangles.end())
    throw GeometryError("macroelement seed is not one of its members");
  FlatPatch f;
  f.source = patch;
  const auto seed = mesh.corners(patch.seed);
  const Vec3 n = mesh.unit_normal(patch.seed);
  f.origin = seed[0];
  f.t1 = (seed[1] - seed[0]).normalized();
  f.t2 = n.cross(f.t1);

  for (int t : patch.triangles) {
    const Vec3 nj = mesh.unit_normal(t);
    const double deviation = 1.0 - nj.dot(n);
    if (deviation > kMaxPatchNormalDeviation)
      throw GeometryError("cannot flatten macroelement: normal deviation " + std::to_string(deviation) +
                          " exceeds " + std::to_string(kMaxPatchNormalDeviation) + "; refine the mesh");
    Mat2 g = Mat2::Identity();
    if (t != patch.seed) {
      const Vec2 a(f.t1.dot(nj), f.t2.dot(nj));
      g -= a * a.transpose();
    }
    f.gram.push_back(g);
    f.mu_bar.push_back(g.determinant());

    const auto c = mesh.corners(t);
    std::array<Vec2, 3> flat;
    for (int k = 0; k < 3; ++k) flat[k] = Vec2(f.t1.dot(c[k] - f.origin), f.t2.dot(c[k] - f.origin));
    Mat2 j;
    j.col(0) = flat[1] - flat[0];
    j.col(1) = flat[2] - flat[0];
    if (!(std::abs(j.determinant()) > 0.0)) throw GeometryError("flattened triangle is degenerate");
    f.corners.push_back(flat);
    f.jacobian.push_back(j);
  }
  return f;
}

CompositeMapPoint evaluate_composite(const FlatPatch& patch, const ParametricGeometry& geom, int member,
                                     const RefPoint& xi) {
  const int t = patch.source.triangles.at(member);
  const GeometryData d = geom.evaluate(t, xi);
  const Mat2 jinv = patch.jacobian[member].inverse();
  const double det = std::abs(patch.jacobian[member].determinant());
  CompositeMapPoint p;
  p.jacobian = d.jacobian * jinv;
  p.measure = d.measure / det;
  p.measure_gradient = jinv.transpose() * d.measure_gradient / det;
  return p;
}

PatchMeasurement measure_patches(const ParametricGeometry& geom, int edge_samples) {
  const FlatMesh& mesh = geom.mesh();
  PatchMeasurement m;
  m.level = mesh.level();
  m.h = mesh_size(mesh);
  std::vector<RefPoint> samples = triangle_rule(4).points;
  samples.insert(samples.end(), std::begin(kRefVertex), std::end(kRefVertex));

  for (const auto& patch : vertex_star_partitioning(mesh)) {
    const FlatPatch f = flatten_macroelement(mesh, patch);
    for (int j = 0; j < f.size(); ++j) {
      m.mu_bar = std::max(m.mu_bar, std::abs(f.mu_bar[j] - 1.0));
      // G_j = I - a a^T, so |(D pi_bar - Id) on T_j| = |a|
      m.flattening = std::max(m.flattening, std::sqrt(spectral_norm_symmetric(f.gram[j] - Mat2::Identity())));
      for (const auto& xi : samples) {
        const CompositeMapPoint p = evaluate_composite(f, geom, j, xi);
        m.mu_h = std::max(m.mu_h, std::abs(p.measure - 1.0));
        m.dmu = std::max(m.dmu, p.measure_gradient.norm());
      }
    }
    // interior edges of the patch: shared by two members
    for (int j = 0; j < f.size(); ++j) {
      const int t = f.source.triangles[j];
      for (int e = 0; e < 3; ++e) {
        const Edge& edge = mesh.edges()[mesh.triangle_edge(t, e)];
        const int other = edge.triangles[0] == t ? edge.triangles[1] : edge.triangles[0];
        const int k = f.member(other);
        if (k < 0 || other < t) continue;
        int e_other = -1;
        for (int l = 0; l < 3; ++l)
          if (mesh.triangle_edge(other, l) == mesh.triangle_edge(t, e)) e_other = l;
        const int a = mesh.triangles()[t][e];
        const int a_other = mesh.triangles()[other][e_other];
        for (int s = 0; s < edge_samples; ++s) {
          const double u = (s + 0.5) / edge_samples;  // parameter from vertex a
          const RefPoint x1 = (1.0 - u) * kRefVertex[e] + u * kRefVertex[(e + 1) % 3];
          const double v = (a_other == a) ? u : 1.0 - u;
          const RefPoint x2 = (1.0 - v) * kRefVertex[e_other] + v * kRefVertex[(e_other + 1) % 3];
          const Mat32 jump = evaluate_composite(f, geom, j, x1).jacobian - evaluate_composite(f, geom, k, x2).jacobian;
          m.jump = std::max(m.jump, jump.norm());
        }
      }
    }
  }
  return m;
}

double fit_exponent(const std::vector<double>& hs, const std::vector<double>& values) {
  if (hs.size() != values.size() || hs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const int n = static_cast<int>(hs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (!(values[i] > 0.0) || !(hs[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double x = std::log(hs[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RateReport verify_patch_rates(const std::vector<PatchMeasurement>& levels) {
  if (levels.size() < 3) throw ConfigError("rate verification needs at least 3 levels");
  RateReport r;
  r.levels = levels;
  std::vector<double> hs;
  for (const auto& l : levels) hs.push_back(l.h);
  auto fit = [&](double PatchMeasurement::*field) {
    std::vector<double> v;
    for (const auto& l : levels) v.push_back(l.*field);
    return fit_exponent(hs, v);
  };
  r.mu_bar = fit(&PatchMeasurement::mu_bar);
  r.flattening = fit(&PatchMeasurement::flattening);
  r.mu_h = fit(&PatchMeasurement::mu_h);
  r.jump = fit(&PatchMeasurement::jump);
  r.dmu = fit(&PatchMeasurement::dmu);
  return r;
}

}  // namespace sfem
