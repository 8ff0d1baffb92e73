#include "sfem/spaces.hpp"

#include <algorithm>
#include <string>

namespace sfem {
namespace {

constexpr double kBubbleScale = 27.0;

}  // namespace

LocalElement::LocalElement(ElementFamily family, int order) : family_(family), order_(order) {
  switch (family_) {
    case ElementFamily::broken_constant:
      order_ = 0;
      nodes_ = {RefPoint(1.0 / 3.0, 1.0 / 3.0)};
      assoc_ = {{NodeAssociation::interior, 0, 0}};
      per_interior_ = 1;
      return;
    case ElementFamily::lagrange_plus_bubble:
      if (order < 1 || order > 2) throw ConfigError("bubble enrichment is defined for orders 1 and 2");
      break;
    default:
      if (order < 1) throw ConfigError("Lagrange element order must be at least 1");
  }
  base_.emplace(order_);
  nodes_ = base_->nodes();
  assoc_ = base_->associations();
  per_edge_ = order_ - 1;
  per_interior_ = (order_ - 1) * (order_ - 2) / 2;
  if (family_ == ElementFamily::lagrange_plus_bubble) {
    nodes_.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    assoc_.push_back({NodeAssociation::interior, per_interior_, per_interior_});
    ++per_interior_;
  }
  if (family_ == ElementFamily::broken_lagrange) {
    per_edge_ = 0;
    per_interior_ = size();
  }
}

int LocalElement::degree() const {
  return family_ == ElementFamily::lagrange_plus_bubble ? std::max(order_, 3) : order_;
}

void LocalElement::evaluate(const RefPoint& x, Eigen::Ref<VecX> vals, Eigen::Ref<MatX> grads) const {
  if (family_ == ElementFamily::broken_constant) {
    vals[0] = 1.0;
    grads.row(0).setZero();
    return;
  }
  const int nb = base_->size();
  base_->values_and_gradients(x, vals.head(nb), grads.topRows(nb));
  if (family_ != ElementFamily::lagrange_plus_bubble) return;

  const auto l = barycentric(x);
  const double b = kBubbleScale * l[0] * l[1] * l[2];
  const Vec2 db(kBubbleScale * (l[0] * l[2] - l[1] * l[2]), kBubbleScale * (l[0] * l[1] - l[1] * l[2]));
  VecX centre(nb);
  base_->values(RefPoint(1.0 / 3.0, 1.0 / 3.0), centre);
  for (int i = 0; i < nb; ++i) {
    vals[i] -= centre[i] * b;
    grads.row(i) -= centre[i] * db.transpose();
  }
  vals[nb] = b;
  grads.row(nb) = db.transpose();
}

ScalarSpace::ScalarSpace(std::shared_ptr<const ParametricGeometry> geometry, LocalElement element)
    : geometry_(std::move(geometry)), element_(std::move(element)) {
  const FlatMesh& mesh = geometry_->mesh();
  const int nl = element_.size();
  const int nt = mesh.num_triangles();
  dofs_.resize(static_cast<size_t>(nt) * nl);

  if (!element_.continuous()) {
    for (int i = 0; i < nt * nl; ++i) dofs_[i] = i;
    dimension_ = nt * nl;
    return;
  }

  const int pe = element_.dofs_per_edge();
  const int pi = element_.dofs_per_interior();
  const int edge_base = mesh.num_vertices();
  const int interior_base = edge_base + pe * mesh.num_edges();
  dimension_ = interior_base + pi * nt;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles()[t];
    for (int i = 0; i < nl; ++i) {
      const auto& a = element_.associations()[i];
      int g = 0;
      switch (a.kind) {
        case NodeAssociation::vertex:
          g = tri[a.entity];
          break;
        case NodeAssociation::edge: {
          const int edge = mesh.triangle_edge(t, a.entity);
          const bool forward = tri[a.entity] < tri[(a.entity + 1) % 3];
          g = edge_base + pe * edge + (forward ? a.offset : pe - 1 - a.offset);
          break;
        }
        case NodeAssociation::interior:
          g = interior_base + pi * t + a.offset;
          break;
      }
      dofs_[static_cast<size_t>(t) * nl + i] = g;
    }
  }
}

void evaluate_basis(const ScalarSpace& space, int, const RefPoint& x, Eigen::Ref<VecX> vals,
                    Eigen::Ref<MatX> grads) {
  space.element().evaluate(x, vals, grads);
}

VecX lagrange_interpolate(const ScalarSpace& space, const std::function<double(const Vec3&)>& f) {
  VecX coeffs(space.dimension());
  std::vector<char> done(space.dimension(), 0);
  const auto& nodes = space.element().nodes();
  for (int t = 0; t < space.geometry().num_elements(); ++t) {
    const int* dofs = space.dofs(t);
    for (int i = 0; i < space.local_size(); ++i) {
      if (done[dofs[i]]) continue;
      coeffs[dofs[i]] = f(space.geometry().position(t, nodes[i]));
      done[dofs[i]] = 1;
    }
  }
  return coeffs;
}

VecX lagrange_interpolate_vector(const ScalarSpace& space, const std::function<Vec3(const Vec3&)>& f) {
  const int n = space.dimension();
  VecX coeffs(3 * n);
  std::vector<char> done(n, 0);
  const auto& nodes = space.element().nodes();
  for (int t = 0; t < space.geometry().num_elements(); ++t) {
    const int* dofs = space.dofs(t);
    for (int i = 0; i < space.local_size(); ++i) {
      if (done[dofs[i]]) continue;
      const Vec3 v = f(space.geometry().position(t, nodes[i]));
      for (int c = 0; c < 3; ++c) coeffs[c * n + dofs[i]] = v[c];
      done[dofs[i]] = 1;
    }
  }
  return coeffs;
}

double evaluate_field(const ScalarSpace& space, const VecX& coeffs, int element, const RefPoint& x) {
  const int nl = space.local_size();
  VecX vals(nl);
  MatX grads(nl, 2);
  space.element().evaluate(x, vals, grads);
  const int* dofs = space.dofs(element);
  double s = 0.0;
  for (int i = 0; i < nl; ++i) s += vals[i] * coeffs[dofs[i]];
  return s;
}

std::string MixedSpace::name() const {
  switch (tag) {
    case PairTag::taylor_hood:
      return "TH" + std::to_string(velocity_order);
    case PairTag::mini:
      return "MINI";
    case PairTag::crouzeix_raviart:
      return "CR";
    case PairTag::p2p0:
      return "P2P0";
    case PairTag::p1p1:
      return "P1P1";
  }
  return "?";
}

MixedSpace build_pair(PairTag tag, std::optional<int> order, std::shared_ptr<const ParametricGeometry> geometry,
                      bool allow_unsafe) {
  if (!geometry) throw ConfigError("build_pair needs a geometry");
  if (tag != PairTag::taylor_hood && order)
    throw ConfigError("only the Taylor-Hood pair takes an order");

  MixedSpace m;
  m.tag = tag;
  auto make = [&](ElementFamily family, int r) { return std::make_shared<const ScalarSpace>(geometry, LocalElement(family, r)); };
  switch (tag) {
    case PairTag::taylor_hood: {
      if (!order || *order < 2) throw ConfigError("Taylor-Hood needs velocity order k >= 2");
      m.velocity = make(ElementFamily::lagrange, *order);
      m.pressure = make(ElementFamily::lagrange, *order - 1);
      m.velocity_order = *order;
      m.pressure_order = *order - 1;
      break;
    }
    case PairTag::mini:
      m.velocity = make(ElementFamily::lagrange_plus_bubble, 1);
      m.pressure = make(ElementFamily::lagrange, 1);
      m.velocity_order = 1;
      m.pressure_order = 1;
      break;
    case PairTag::crouzeix_raviart:
      m.velocity = make(ElementFamily::lagrange_plus_bubble, 2);
      m.pressure = make(ElementFamily::broken_lagrange, 1);
      m.velocity_order = 2;
      m.pressure_order = 1;
      break;
    case PairTag::p2p0:
      m.velocity = make(ElementFamily::lagrange, 2);
      m.pressure = make(ElementFamily::broken_constant, 0);
      m.velocity_order = 2;
      m.pressure_order = 0;
      break;
    case PairTag::p1p1:
      if (!allow_unsafe) throw ConfigError("the P1-P1 pair is not inf-sup stable; pass the unsafe flag to build it");
      m.velocity = make(ElementFamily::lagrange, 1);
      m.pressure = make(ElementFamily::lagrange, 1);
      m.velocity_order = 1;
      m.pressure_order = 1;
      break;
  }
  m.pair_order = std::min(m.velocity_order, m.pressure_order + 1);
  return m;
}

}  // namespace sfem
