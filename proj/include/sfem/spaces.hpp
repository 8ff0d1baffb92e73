#pragma once

#include "sfem/geometry.hpp"
#include "sfem/lagrange.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sfem {

enum class ElementFamily { lagrange, lagrange_plus_bubble, broken_lagrange, broken_constant };

/// Reference finite element. Bubble enrichment uses B3 = 27 l0 l1 l2; the enriched basis is
/// made nodal by subtracting the bubble-weighted centroid values, so it still sums to one.
class LocalElement {
public:
  /// `order` is the Lagrange order r (ignored for broken_constant). Bubble enrichment needs r <= 2.
  LocalElement(ElementFamily family, int order);

  [[nodiscard]] ElementFamily family() const { return family_; }
  [[nodiscard]] int order() const { return order_; }
  /// Total polynomial degree of the local space.
  [[nodiscard]] int degree() const;
  [[nodiscard]] bool continuous() const {
    return family_ == ElementFamily::lagrange || family_ == ElementFamily::lagrange_plus_bubble;
  }
  [[nodiscard]] int size() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] const std::vector<RefPoint>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<NodeAssociation>& associations() const { return assoc_; }
  /// Local DOFs per entity for continuous numbering.
  [[nodiscard]] int dofs_per_edge() const { return per_edge_; }
  [[nodiscard]] int dofs_per_interior() const { return per_interior_; }

  /// grads is size() x 2.
  void evaluate(const RefPoint& x, Eigen::Ref<VecX> vals, Eigen::Ref<MatX> grads) const;

private:
  ElementFamily family_;
  int order_;
  std::optional<LagrangeBasis> base_;
  std::vector<RefPoint> nodes_;
  std::vector<NodeAssociation> assoc_;
  int per_edge_ = 0;
  int per_interior_ = 0;
};

/// Scalar finite element space on a parametric surface with its global DOF map.
///
/// Continuous numbering: vertex DOFs, then edge DOFs (running from the lower global vertex),
/// then element-interior DOFs. Broken spaces number element by element.
class ScalarSpace {
public:
  ScalarSpace(std::shared_ptr<const ParametricGeometry> geometry, LocalElement element);

  [[nodiscard]] const LocalElement& element() const { return element_; }
  [[nodiscard]] const ParametricGeometry& geometry() const { return *geometry_; }
  [[nodiscard]] const std::shared_ptr<const ParametricGeometry>& geometry_ptr() const { return geometry_; }
  [[nodiscard]] int dimension() const { return dimension_; }
  [[nodiscard]] int local_size() const { return element_.size(); }
  [[nodiscard]] bool continuous() const { return element_.continuous(); }
  /// Global DOF indices of element t, in local basis order.
  [[nodiscard]] const int* dofs(int t) const { return dofs_.data() + static_cast<size_t>(t) * element_.size(); }

private:
  std::shared_ptr<const ParametricGeometry> geometry_;
  LocalElement element_;
  std::vector<int> dofs_;
  int dimension_ = 0;
};

/// Local values and reference gradients of the basis of `space` on `element`.
void evaluate_basis(const ScalarSpace& space, int element, const RefPoint& x, Eigen::Ref<VecX> vals,
                    Eigen::Ref<MatX> grads);

/// Nodal interpolation of a function of the world point on Gamma_h.
VecX lagrange_interpolate(const ScalarSpace& space, const std::function<double(const Vec3&)>& f);

/// Componentwise interpolation into [S_h]^3, component-major.
VecX lagrange_interpolate_vector(const ScalarSpace& space, const std::function<Vec3(const Vec3&)>& f);

/// Value of a discrete scalar field at a reference point of an element.
double evaluate_field(const ScalarSpace& space, const VecX& coeffs, int element, const RefPoint& x);

enum class PairTag { taylor_hood, mini, crouzeix_raviart, p2p0, p1p1 };

struct MixedSpace {
  PairTag tag = PairTag::taylor_hood;
  std::shared_ptr<const ScalarSpace> velocity;  // one component; V_h is three copies
  std::shared_ptr<const ScalarSpace> pressure;
  int velocity_order = 0;  // r_v
  int pressure_order = 0;  // r_q
  int pair_order = 0;      // k_u = min(r_v, r_q + 1)

  [[nodiscard]] int velocity_dofs() const { return 3 * velocity->dimension(); }
  [[nodiscard]] int pressure_dofs() const { return pressure->dimension(); }
  [[nodiscard]] bool pressure_continuous() const { return pressure->continuous(); }
  [[nodiscard]] const ParametricGeometry& geometry() const { return velocity->geometry(); }
  [[nodiscard]] std::string name() const;
};

/// `order` is the Taylor-Hood velocity order k >= 2 and must be absent for the other pairs.
/// The P1-P1 pair is unstable and only built with `allow_unsafe`.
MixedSpace build_pair(PairTag tag, std::optional<int> order, std::shared_ptr<const ParametricGeometry> geometry,
                      bool allow_unsafe = false);

}  // namespace sfem
