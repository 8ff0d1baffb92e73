#include "sfem/lagrange.hpp"

namespace sfem {
namespace {

// L_a(l) = prod_{m<a} (k l - m) / (m + 1) together with its first two derivatives.
struct Factor {
  double v, d, dd;
};

Factor shape_factor(int a, int k, double l) {
  Factor f{1.0, 0.0, 0.0};
  for (int m = 0; m < a; ++m) {
    const double s = 1.0 / (m + 1);
    const double lin = (k * l - m) * s;
    const double slope = k * s;
    f.dd = f.dd * lin + 2.0 * f.d * slope;
    f.d = f.d * lin + f.v * slope;
    f.v *= lin;
  }
  return f;
}

constexpr double kDLambda[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};

}  // namespace

LagrangeBasis::LagrangeBasis(int order) : order_(order) {
  if (order < 1) throw ConfigError("Lagrange order must be at least 1");
  const int k = order;
  auto push = [&](std::array<int, 3> m, NodeAssociation a) {
    multi_.push_back(m);
    nodes_.emplace_back(static_cast<double>(m[1]) / k, static_cast<double>(m[2]) / k);
    assoc_.push_back(a);
  };
  for (int v = 0; v < 3; ++v) {
    std::array<int, 3> m{0, 0, 0};
    m[v] = k;
    push(m, {NodeAssociation::vertex, v, 0});
  }
  for (int e = 0; e < 3; ++e) {
    const int a = e;
    const int b = (e + 1) % 3;
    for (int s = 1; s < k; ++s) {
      std::array<int, 3> m{0, 0, 0};
      m[a] = k - s;
      m[b] = s;
      push(m, {NodeAssociation::edge, e, s - 1});
    }
  }
  int running = 0;
  for (int j = 1; j < k; ++j)
    for (int i = 1; i + j < k; ++i) {
      push({k - i - j, i, j}, {NodeAssociation::interior, running, running});
      ++running;
    }
}

void LagrangeBasis::values(const RefPoint& x, Eigen::Ref<VecX> out) const {
  const auto lam = barycentric(x);
  for (int n = 0; n < size(); ++n) {
    double v = 1.0;
    for (int i = 0; i < 3; ++i) v *= shape_factor(multi_[n][i], order_, lam[i]).v;
    out[n] = v;
  }
}

void LagrangeBasis::values_and_gradients(const RefPoint& x, Eigen::Ref<VecX> vals,
                                         Eigen::Ref<MatX> grads) const {
  const auto lam = barycentric(x);
  for (int n = 0; n < size(); ++n) {
    Factor f[3];
    for (int i = 0; i < 3; ++i) f[i] = shape_factor(multi_[n][i], order_, lam[i]);
    vals[n] = f[0].v * f[1].v * f[2].v;
    const double dl[3] = {f[0].d * f[1].v * f[2].v, f[0].v * f[1].d * f[2].v, f[0].v * f[1].v * f[2].d};
    for (int c = 0; c < 2; ++c) grads(n, c) = dl[0] * kDLambda[0][c] + dl[1] * kDLambda[1][c] + dl[2] * kDLambda[2][c];
  }
}

void LagrangeBasis::evaluate_all(const RefPoint& x, Eigen::Ref<VecX> vals, Eigen::Ref<MatX> grads,
                                 Eigen::Ref<MatX> hess) const {
  const auto lam = barycentric(x);
  for (int n = 0; n < size(); ++n) {
    Factor f[3];
    for (int i = 0; i < 3; ++i) f[i] = shape_factor(multi_[n][i], order_, lam[i]);
    vals[n] = f[0].v * f[1].v * f[2].v;
    double dl[3];
    double ddl[3][3];
    for (int i = 0; i < 3; ++i) {
      dl[i] = 1.0;
      for (int j = 0; j < 3; ++j) {
        dl[i] *= (j == i) ? f[j].d : f[j].v;
        ddl[i][j] = 1.0;
        for (int l = 0; l < 3; ++l) {
          if (i == j)
            ddl[i][j] *= (l == i) ? f[l].dd : f[l].v;
          else
            ddl[i][j] *= (l == i || l == j) ? f[l].d : f[l].v;
        }
      }
    }
    for (int c = 0; c < 2; ++c) {
      grads(n, c) = 0.0;
      for (int i = 0; i < 3; ++i) grads(n, c) += dl[i] * kDLambda[i][c];
    }
    const int pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    for (int p = 0; p < 3; ++p) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += ddl[i][j] * kDLambda[i][pairs[p][0]] * kDLambda[j][pairs[p][1]];
      hess(n, p) = s;
    }
  }
}

}  // namespace sfem
