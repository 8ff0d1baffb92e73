#pragma once

#include "sfem/types.hpp"

#include <array>
#include <vector>

namespace sfem {

/// Which mesh entity a reference node sits on.
struct NodeAssociation {
  enum Kind { vertex, edge, interior } kind;
  int entity;  // local vertex / local edge index; running index for interior nodes
  int offset;  // position along the edge (from its first local vertex) or within the interior
};

/// Nodal Lagrange basis of order k >= 1 on the reference triangle with equidistant nodes.
///
/// Node order: the three vertices, then the k-1 nodes of each local edge
/// (edge e runs from vertex e to vertex (e+1)%3), then interior nodes.
class LagrangeBasis {
public:
  explicit LagrangeBasis(int order);

  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] int size() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] const std::vector<RefPoint>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<NodeAssociation>& associations() const { return assoc_; }

  void values(const RefPoint& x, Eigen::Ref<VecX> out) const;
  /// grads is size() x 2 (d/dxi, d/deta).
  void values_and_gradients(const RefPoint& x, Eigen::Ref<VecX> vals, Eigen::Ref<MatX> grads) const;
  /// hess is size() x 3 with columns (xi xi, xi eta, eta eta).
  void evaluate_all(const RefPoint& x, Eigen::Ref<VecX> vals, Eigen::Ref<MatX> grads,
                    Eigen::Ref<MatX> hess) const;

private:
  int order_;
  std::vector<RefPoint> nodes_;
  std::vector<std::array<int, 3>> multi_;  // barycentric multi-indices, sum == order
  std::vector<NodeAssociation> assoc_;
};

/// Barycentric coordinates of a reference point.
inline std::array<double, 3> barycentric(const RefPoint& x) { return {1.0 - x[0] - x[1], x[0], x[1]}; }

}  // namespace sfem
