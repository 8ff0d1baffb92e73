#pragma once

#include "sfem/geometry.hpp"

namespace sfem::detail {

// Velocity basis u = phi_a e_c (local index c * na + a) at one quadrature point.
struct VelocityPoint {
  MatX tangential;   // 3 x 3na : P_h u
  VecX normal;       // 3na     : u . n_h
  MatX gradient;     // 9 x 3na : grad_{Gamma_h} (P_h u), column-major flattening
  MatX symmetric;    // 9 x 3na : sym(gradient)
  VecX divergence;   // 3na     : tr(gradient)
};

// grad_{Gamma_h}(P_h phi e_c) = (P_h e_c) grad phi^T + phi (n_h)_c W_h
inline VelocityPoint velocity_point(const GeometryData& g, const VecX& phi, const MatX& ref_grads) {
  const int na = static_cast<int>(phi.size());
  const MatX grads = ref_grads * g.pseudo_inverse_t.transpose();  // na x 3
  VelocityPoint v;
  v.tangential.resize(3, 3 * na);
  v.normal.resize(3 * na);
  v.gradient.resize(9, 3 * na);
  v.symmetric.resize(9, 3 * na);
  v.divergence.resize(3 * na);
  for (int c = 0; c < 3; ++c) {
    const Vec3 pc = g.tangential.col(c);
    const double nc = g.normal[c];
    for (int a = 0; a < na; ++a) {
      const int l = c * na + a;
      const Mat3 G = pc * grads.row(a) + (phi[a] * nc) * g.weingarten;
      const Mat3 E = 0.5 * (G + G.transpose());
      v.tangential.col(l) = phi[a] * pc;
      v.normal[l] = phi[a] * nc;
      v.gradient.col(l) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(G.data());
      v.symmetric.col(l) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(E.data());
      v.divergence[l] = G.trace();
    }
  }
  return v;
}

}  // namespace sfem::detail
