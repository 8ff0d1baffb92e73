#include "sfem/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace sfem {

Vec3 UnitSphere::project(const Vec3& x) const {
  const double r = x.norm();
  if (r == 0.0) throw GeometryError("closest-point projection undefined at the sphere centre");
  return x / r;
}

Mat3 UnitSphere::project_jacobian(const Vec3& x) const {
  const double r = x.norm();
  if (r == 0.0) throw GeometryError("closest-point projection undefined at the sphere centre");
  const Vec3 y = x / r;
  return (Mat3::Identity() - y * y.transpose()) / r;
}

BasisTable tabulate(const LagrangeBasis& basis, const std::vector<RefPoint>& points) {
  BasisTable table;
  const int n = basis.size();
  for (const auto& p : points) {
    VecX v(n);
    MatX g(n, 2);
    MatX h(n, 3);
    basis.evaluate_all(p, v, g, h);
    table.values.push_back(std::move(v));
    table.gradients.push_back(std::move(g));
    table.hessians.push_back(std::move(h));
  }
  return table;
}

ParametricGeometry::ParametricGeometry(std::shared_ptr<const FlatMesh> mesh,
                                       std::shared_ptr<const SurfaceOracle> oracle, int order)
    : mesh_(std::move(mesh)), oracle_(std::move(oracle)), basis_(order) {
  if (!mesh_ || !oracle_) throw ConfigError("geometry needs a mesh and a surface");
  const int k = order;
  const int nb = basis_.size();
  const auto& verts = mesh_->vertices();
  nodes_.resize(static_cast<size_t>(mesh_->num_triangles()) * nb);

  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    const auto& tri = mesh_->triangles()[t];
    for (int i = 0; i < nb; ++i) {
      const auto& a = basis_.associations()[i];
      Vec3 x;
      if (a.kind == NodeAssociation::vertex) {
        // mesh vertices already lie on the surface; keep them bit-identical
        nodes_[static_cast<size_t>(t) * nb + i] = verts[tri[a.entity]];
        continue;
      } else if (a.kind == NodeAssociation::edge) {
        // Evaluate from the lower global vertex so both neighbours get identical bits.
        const int va = tri[a.entity];
        const int vb = tri[(a.entity + 1) % 3];
        const int s = a.offset + 1;
        const int lo = std::min(va, vb);
        const int hi = std::max(va, vb);
        const int from_lo = (va == lo) ? s : k - s;
        x = (static_cast<double>(k - from_lo) * verts[lo] + static_cast<double>(from_lo) * verts[hi]) / k;
      } else {
        const auto lam = barycentric(basis_.nodes()[i]);
        x = lam[0] * verts[tri[0]] + lam[1] * verts[tri[1]] + lam[2] * verts[tri[2]];
      }
      nodes_[static_cast<size_t>(t) * nb + i] = oracle_->project(x);
    }
  }
}

Vec3 ParametricGeometry::flat_point(int t, const RefPoint& xi) const {
  const auto lam = barycentric(xi);
  const auto c = mesh_->corners(t);
  return lam[0] * c[0] + lam[1] * c[1] + lam[2] * c[2];
}

Vec3 ParametricGeometry::position(int t, const RefPoint& xi) const {
  VecX v(basis_.size());
  basis_.values(xi, v);
  const Vec3* nodes = element_nodes(t);
  Vec3 x = Vec3::Zero();
  for (int i = 0; i < basis_.size(); ++i) x += v[i] * nodes[i];
  return x;
}

GeometryData ParametricGeometry::evaluate(int t, const RefPoint& xi) const {
  const int n = basis_.size();
  VecX v(n);
  MatX g(n, 2);
  MatX h(n, 3);
  basis_.evaluate_all(xi, v, g, h);
  return compute(t, v, g, h);
}

GeometryData ParametricGeometry::evaluate(int t, const BasisTable& table, int q) const {
  return compute(t, table.values[q], table.gradients[q], table.hessians[q]);
}

GeometryData ParametricGeometry::compute(int t, const VecX& vals, const MatX& grads, const MatX& hess) const {
  const Vec3* nodes = element_nodes(t);
  GeometryData d;
  Vec3 x = Vec3::Zero(), f1 = Vec3::Zero(), f2 = Vec3::Zero();
  Vec3 f11 = Vec3::Zero(), f12 = Vec3::Zero(), f22 = Vec3::Zero();
  for (int i = 0; i < basis_.size(); ++i) {
    x += vals[i] * nodes[i];
    f1 += grads(i, 0) * nodes[i];
    f2 += grads(i, 1) * nodes[i];
    f11 += hess(i, 0) * nodes[i];
    f12 += hess(i, 1) * nodes[i];
    f22 += hess(i, 2) * nodes[i];
  }
  d.x = x;
  d.jacobian.col(0) = f1;
  d.jacobian.col(1) = f2;

  const Vec3 c = f1.cross(f2);
  d.measure = c.norm();
  if (!(d.measure > 1e-14)) throw GeometryError("degenerate parametrization on element " + std::to_string(t));
  d.normal = c / d.measure;
  d.normal_projection = d.normal * d.normal.transpose();
  d.tangential = Mat3::Identity() - d.normal_projection;

  const Mat2 gram = d.jacobian.transpose() * d.jacobian;
  const Mat2 gram_inv = gram.inverse();
  d.pseudo_inverse_t = d.jacobian * gram_inv;

  const Vec3 dc1 = f11.cross(f2) + f1.cross(f12);
  const Vec3 dc2 = f12.cross(f2) + f1.cross(f22);
  d.measure_gradient = Vec2(d.normal.dot(dc1), d.normal.dot(dc2));
  Mat32 dn;
  dn.col(0) = d.tangential * dc1 / d.measure;
  dn.col(1) = d.tangential * dc2 / d.measure;
  d.weingarten = -dn * d.pseudo_inverse_t.transpose();
  const double tr = d.weingarten.trace();
  d.gaussian_curvature = 0.5 * (tr * tr - (d.weingarten * d.weingarten).trace());

  d.exact_point = oracle_->project(x);
  d.exact_normal = oracle_->normal(d.exact_point);
  d.exact_tangential = Mat3::Identity() - d.exact_normal * d.exact_normal.transpose();
  d.exact_gaussian_curvature = oracle_->gaussian_curvature(d.exact_point);
  return d;
}

std::shared_ptr<const ParametricGeometry> lift_geometry(std::shared_ptr<const FlatMesh> mesh,
                                                         std::shared_ptr<const SurfaceOracle> oracle,
                                                         int order) {
  if (order < 1 || order > 5) throw ConfigError("geometry order must be in [1, 5], got " + std::to_string(order));
  return std::make_shared<const ParametricGeometry>(std::move(mesh), std::move(oracle), order);
}

double integrate_surface(const ParametricGeometry& geom, const QuadratureRule& rule,
                         const std::function<double(const GeometryData&)>& integrand) {
  const BasisTable table = tabulate(geom.basis(), rule.points);
  double total = 0.0;
  for (int t = 0; t < geom.num_elements(); ++t)
    for (int q = 0; q < rule.size(); ++q) {
      const GeometryData d = geom.evaluate(t, table, q);
      total += rule.weights[q] * d.measure * integrand(d);
    }
  return total;
}

CurvatureField::CurvatureField(std::shared_ptr<const ParametricGeometry> geometry, CurvatureMode mode,
                               std::optional<int> lifted_order)
    : geometry_(std::move(geometry)), mode_(mode), lifted_order_(lifted_order) {
  if (!geometry_) throw ConfigError("curvature field needs a geometry");
  if (mode_ == CurvatureMode::lifted) {
    if (!lifted_order_) throw ConfigError("lifted curvature needs an order");
    if (*lifted_order_ <= geometry_->order())
      throw ConfigError("lifted curvature order must exceed the geometry order");
    if (*lifted_order_ > 6) throw ConfigError("lifted curvature order must be at most 6");
    lifted_ = std::make_shared<const ParametricGeometry>(geometry_->mesh_ptr(), geometry_->oracle_ptr(),
                                                         *lifted_order_);
  } else {
    lifted_order_.reset();
  }
}

double CurvatureField::evaluate(int t, const RefPoint& xi, const GeometryData& data) const {
  switch (mode_) {
    case CurvatureMode::intrinsic:
      return data.gaussian_curvature;
    case CurvatureMode::exact:
      return data.exact_gaussian_curvature;
    case CurvatureMode::lifted:
      return lifted_->evaluate(t, xi).gaussian_curvature;
  }
  return data.gaussian_curvature;
}

}  // namespace sfem
