#include "sfem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace sfem {
namespace {

void add_orbit3(QuadratureRule& rule, double a, double w) {
  // permutations of barycentric (a, a, 1 - 2a)
  const double b = 1.0 - 2.0 * a;
  rule.points.emplace_back(a, a);
  rule.points.emplace_back(b, a);
  rule.points.emplace_back(a, b);
  for (int i = 0; i < 3; ++i) rule.weights.push_back(w);
}

}  // namespace

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)p'^2) scaled by 1/2
  }
}

QuadratureRule triangle_rule(int degree) {
  if (degree < 1 || degree > kMaxQuadratureDegree)
    throw ConfigError("quadrature degree " + std::to_string(degree) + " outside [1, " +
                      std::to_string(kMaxQuadratureDegree) + "]");
  QuadratureRule rule;
  rule.degree = degree;
  if (degree == 1) {
    rule.points = {RefPoint(1.0 / 3.0, 1.0 / 3.0)};
    rule.weights = {0.5};
    return rule;
  }
  if (degree == 2) {
    add_orbit3(rule, 1.0 / 6.0, 1.0 / 6.0);
    return rule;
  }
  if (degree <= 4) {
    add_orbit3(rule, 0.445948490915965, 0.5 * 0.223381589678011);
    add_orbit3(rule, 0.091576213509771, 0.5 * 0.109951743655322);
    rule.degree = 4;
    return rule;
  }
  if (degree == 5) {
    rule.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    rule.weights.push_back(0.5 * 0.225);
    add_orbit3(rule, 0.470142064105115, 0.5 * 0.132394152788506);
    add_orbit3(rule, 0.101286507323456, 0.5 * 0.125939180544827);
    return rule;
  }

  // Collapsed product: xi = u, eta = v (1 - u), Jacobian (1 - u).
  const int nu = (degree + 3) / 2;  // exact for degree + 1 in u
  const int nv = (degree + 2) / 2;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre_unit(nu, xu, wu);
  gauss_legendre_unit(nv, xv, wv);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      rule.points.emplace_back(xu[i], xv[j] * (1.0 - xu[i]));
      rule.weights.push_back(wu[i] * wv[j] * (1.0 - xu[i]));
    }
  return rule;
}

double reference_monomial_integral(int a, int b) {
  return std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 3.0));
}

}  // namespace sfem
