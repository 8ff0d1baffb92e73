#pragma once

#include "sfem/types.hpp"

#include <vector>

namespace sfem {

/// Quadrature on the reference triangle; weights sum to its area 1/2.
struct QuadratureRule {
  std::vector<RefPoint> points;
  std::vector<double> weights;
  int degree = 0;  // guaranteed polynomial exactness

  [[nodiscard]] int size() const { return static_cast<int>(points.size()); }
};

inline constexpr int kMaxQuadratureDegree = 20;

/// Rule exact for all polynomials of total degree <= `degree` (1..20), positive weights.
/// Degrees up to 5 use symmetric Gauss rules; beyond that a collapsed Gauss-Legendre product.
QuadratureRule triangle_rule(int degree);

/// n-point Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Exact integral of xi^a eta^b over the reference triangle: a! b! / (a + b + 2)!.
double reference_monomial_integral(int a, int b);

}  // namespace sfem
