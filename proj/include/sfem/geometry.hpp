#pragma once

#include "sfem/lagrange.hpp"
#include "sfem/mesh.hpp"
#include "sfem/quadrature.hpp"
#include "sfem/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace sfem {

/// Exact smooth surface, accessed through its closest-point projection.
class SurfaceOracle {
public:
  virtual ~SurfaceOracle() = default;

  /// Closest point on the surface.
  [[nodiscard]] virtual Vec3 project(const Vec3& x) const = 0;
  /// Derivative of `project` at x (3x3).
  [[nodiscard]] virtual Mat3 project_jacobian(const Vec3& x) const = 0;
  /// Outward unit normal at a surface point.
  [[nodiscard]] virtual Vec3 normal(const Vec3& y) const = 0;
  [[nodiscard]] virtual double gaussian_curvature(const Vec3& y) const = 0;

  [[nodiscard]] Mat3 tangential_projection(const Vec3& y) const {
    const Vec3 n = normal(y);
    return Mat3::Identity() - n * n.transpose();
  }
};

/// Unit sphere centred at the origin: pi(x) = x / |x|, n(y) = y, K = 1.
class UnitSphere final : public SurfaceOracle {
public:
  [[nodiscard]] Vec3 project(const Vec3& x) const override;
  [[nodiscard]] Mat3 project_jacobian(const Vec3& x) const override;
  [[nodiscard]] Vec3 normal(const Vec3& y) const override { return y.normalized(); }
  [[nodiscard]] double gaussian_curvature(const Vec3&) const override { return 1.0; }
};

/// Pointwise geometry of the parametric surface at one reference point of one element.
struct GeometryData {
  Vec3 x;                     // point on Gamma_h
  Mat32 jacobian;             // DF, columns d/dxi, d/deta
  Mat32 pseudo_inverse_t;     // DF (DF^T DF)^{-1}; surface gradient = pseudo_inverse_t * ref gradient
  double measure = 0.0;       // mu_h = sqrt(det(DF^T DF))
  Vec2 measure_gradient;      // d mu_h / d(xi, eta)
  Vec3 normal;                // n_h
  Mat3 tangential;            // P_h
  Mat3 normal_projection;     // Q_h
  Mat3 weingarten;            // W_h = -grad n_h, tangential and symmetric
  double gaussian_curvature = 0.0;  // K_h

  Vec3 exact_point;           // pi(x)
  Vec3 exact_normal;          // n o pi
  Mat3 exact_tangential;      // P o pi
  double exact_gaussian_curvature = 0.0;
};

/// Reference basis values tabulated at a fixed set of points.
struct BasisTable {
  std::vector<VecX> values;
  std::vector<MatX> gradients;
  std::vector<MatX> hessians;
};

BasisTable tabulate(const LagrangeBasis& basis, const std::vector<RefPoint>& points);

/// Elementwise order-k_g Lagrange interpolant of the closest-point projection.
class ParametricGeometry {
public:
  ParametricGeometry(std::shared_ptr<const FlatMesh> mesh, std::shared_ptr<const SurfaceOracle> oracle,
                     int order);

  [[nodiscard]] int order() const { return basis_.order(); }
  [[nodiscard]] const FlatMesh& mesh() const { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const FlatMesh>& mesh_ptr() const { return mesh_; }
  [[nodiscard]] const SurfaceOracle& oracle() const { return *oracle_; }
  [[nodiscard]] const std::shared_ptr<const SurfaceOracle>& oracle_ptr() const { return oracle_; }
  [[nodiscard]] const LagrangeBasis& basis() const { return basis_; }
  [[nodiscard]] int num_elements() const { return mesh_->num_triangles(); }

  /// Geometry node coefficients of element t (basis().size() entries).
  [[nodiscard]] const Vec3* element_nodes(int t) const { return nodes_.data() + static_cast<size_t>(t) * basis_.size(); }

  /// Flat-mesh point of element t at a reference point.
  [[nodiscard]] Vec3 flat_point(int t, const RefPoint& xi) const;
  [[nodiscard]] Vec3 position(int t, const RefPoint& xi) const;

  [[nodiscard]] GeometryData evaluate(int t, const RefPoint& xi) const;
  /// Same as evaluate() using precomputed basis values at point index q of `table`.
  [[nodiscard]] GeometryData evaluate(int t, const BasisTable& table, int q) const;

private:
  GeometryData compute(int t, const VecX& vals, const MatX& grads, const MatX& hess) const;

  std::shared_ptr<const FlatMesh> mesh_;
  std::shared_ptr<const SurfaceOracle> oracle_;
  LagrangeBasis basis_;
  std::vector<Vec3> nodes_;
};

/// k_g in {1, ..., 5}.
std::shared_ptr<const ParametricGeometry> lift_geometry(std::shared_ptr<const FlatMesh> mesh,
                                                         std::shared_ptr<const SurfaceOracle> oracle,
                                                         int order);

/// sum_T sum_q w_q mu_h(q) integrand(q).
double integrate_surface(const ParametricGeometry& geom, const QuadratureRule& rule,
                         const std::function<double(const GeometryData&)>& integrand);

enum class CurvatureMode { intrinsic, lifted, exact };

/// Approximation K#_h of the Gaussian curvature on Gamma_h.
class CurvatureField {
public:
  /// `lifted_order` is required for (and only used by) CurvatureMode::lifted and must exceed
  /// the geometry order.
  CurvatureField(std::shared_ptr<const ParametricGeometry> geometry, CurvatureMode mode,
                 std::optional<int> lifted_order = std::nullopt);

  [[nodiscard]] CurvatureMode mode() const { return mode_; }
  [[nodiscard]] std::optional<int> lifted_order() const { return lifted_order_; }

  /// K#_h at (element, reference point); `data` is the geometry data of the base geometry there.
  [[nodiscard]] double evaluate(int t, const RefPoint& xi, const GeometryData& data) const;

private:
  std::shared_ptr<const ParametricGeometry> geometry_;
  std::shared_ptr<const ParametricGeometry> lifted_;
  CurvatureMode mode_;
  std::optional<int> lifted_order_;
};

}  // namespace sfem
