#pragma once

#include "sfem/geometry.hpp"
#include "sfem/mesh.hpp"

#include <array>
#include <vector>

namespace sfem {

/// Planar image of a macroelement under the flattening map built from the seed tangent basis.
///
/// On member j the map sends x to (t1.(x - o), t2.(x - o)); in the orthonormal frame of the
/// member it acts through the Gram matrix G_j = [t_i . P_j t_k], so mu_bar_j = det G_j.
struct FlatPatch {
  Macroelement source;
  Vec3 origin;
  Vec3 t1;
  Vec3 t2;
  std::vector<Mat2> gram;                      // per member
  std::vector<double> mu_bar;                  // per member
  std::vector<std::array<Vec2, 3>> corners;    // flat coordinates in local vertex order
  std::vector<Mat2> jacobian;                  // per member: [x1 - x0, x2 - x0] in the plane

  [[nodiscard]] int size() const { return static_cast<int>(source.triangles.size()); }
  /// Local member index of a mesh triangle, -1 if absent.
  [[nodiscard]] int member(int triangle) const;
};

/// Rejects patches where 1 - n_j . n_seed exceeds this for some member j.
inline constexpr double kMaxPatchNormalDeviation = 0.5;

FlatPatch flatten_macroelement(const FlatMesh& mesh, const Macroelement& patch);

/// Composite map F_h = pi_h o pi_bar^-1 on one member, at a reference point of that triangle.
struct CompositeMapPoint {
  Mat32 jacobian;        // D_xbar F_h
  double measure = 0.0;  // mu_h = sqrt(det(D F_h^T D F_h))
  Vec2 measure_gradient; // D_xbar mu_h
};

CompositeMapPoint evaluate_composite(const FlatPatch& patch, const ParametricGeometry& geom, int member,
                                     const RefPoint& xi);

/// Largest deviations over all vertex-star patches of one level.
struct PatchMeasurement {
  int level = 0;
  double h = 0.0;
  double mu_bar = 0.0;      // max |mu_bar - 1|
  double flattening = 0.0;  // max |(D pi_bar - Id) restricted to T_j| = sqrt(|G_j - I|_2)
  double mu_h = 0.0;        // max |mu_h - 1|
  double jump = 0.0;        // max |[D F_h]| across interior patch edges
  double dmu = 0.0;         // max |D mu_h|
};

PatchMeasurement measure_patches(const ParametricGeometry& geom, int edge_samples = 5);

struct RateReport {
  std::vector<PatchMeasurement> levels;
  double mu_bar = 0.0;  // fitted exponents
  double flattening = 0.0;
  double mu_h = 0.0;
  double jump = 0.0;
  double dmu = 0.0;
};

/// Least-squares slope of log(value) against log(h); needs >= 3 levels.
RateReport verify_patch_rates(const std::vector<PatchMeasurement>& levels);

/// Least-squares slope of log(values) over log(hs); NaN if any value is not positive.
double fit_exponent(const std::vector<double>& hs, const std::vector<double>& values);

}  // namespace sfem
