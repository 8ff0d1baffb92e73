#include "sfem/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace sfem {
namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

void append(std::vector<Triplet>& out, const SparseMatrix& m, int row_offset, int col_offset, double scale = 1.0,
            bool transpose = false) {
  for (int r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      const int i = static_cast<int>(transpose ? it.col() : it.row());
      const int j = static_cast<int>(transpose ? it.row() : it.col());
      out.emplace_back(row_offset + i, col_offset + j, scale * it.value());
    }
}

// [[top, B^T, 0], [B, 0, sign m], [0, sign m^T, 0]]
ColMatrix saddle_matrix(const SparseMatrix& top, const SparseMatrix& B, const VecX& m, double sign) {
  const int nu = static_cast<int>(top.rows());
  const int np = static_cast<int>(B.rows());
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(top.nonZeros() + 2 * B.nonZeros() + 2 * m.size()));
  append(t, top, 0, 0);
  append(t, B, nu, 0);
  append(t, B, 0, nu, 1.0, true);
  for (int i = 0; i < np; ++i) {
    if (m[i] == 0.0) continue;
    t.emplace_back(nu + i, nu + np, sign * m[i]);
    t.emplace_back(nu + np, nu + i, sign * m[i]);
  }
  ColMatrix K(nu + np + 1, nu + np + 1);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

MatX random_block(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  MatX X(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) X(i, j) = dist(rng);
  return X;
}

struct RitzResult {
  VecX values;
  int iterations = 0;
  double relative_change = 0.0;
  bool converged = false;
};

// M-orthonormalizes the columns of W against V and among themselves; drops dependent directions.
MatX orthonormalize(const SparseMatrix& M, const MatX& V, MatX W) {
  for (int pass = 0; pass < 2; ++pass)
    if (V.cols() > 0) W -= V * (V.transpose() * (M * W));
  const MatX gram = W.transpose() * (M * W);
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (gram + gram.transpose()));
  const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
  std::vector<int> keep;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 1e-20 * std::max(top, 1e-300) && es.eigenvalues()[i] > 0.0) keep.push_back(i);
  MatX Q(W.rows(), static_cast<int>(keep.size()));
  for (size_t c = 0; c < keep.size(); ++c)
    Q.col(static_cast<int>(c)) = W * es.eigenvectors().col(keep[c]) / std::sqrt(es.eigenvalues()[keep[c]]);
  if (V.cols() > 0) Q -= V * (V.transpose() * (M * Q));
  return Q;
}

// Block Krylov Rayleigh-Ritz for T = K^-1 M (self-adjoint in the M inner product).
// `solve` applies T; the smallest eigenvalues of K u = lambda M u are the reciprocals of the largest Ritz values.
RitzResult subspace_iteration(const std::function<MatX(const MatX&)>& solve, const SparseMatrix& M, MatX X,
                              int count, const EigenOptions& options) {
  const int block = static_cast<int>(X.cols());
  const int max_dim = std::max(20 * block, 4 * count + 2 * block);
  RitzResult r;
  double previous = std::numeric_limits<double>::quiet_NaN();
  MatX V = orthonormalize(M, MatX(X.rows(), 0), solve(X));
  MatX TV(X.rows(), 0);
  int it = 1;
  while (true) {
    const int fresh = static_cast<int>(V.cols() - TV.cols());
    if (fresh == 0) break;
    const MatX W = solve(V.rightCols(fresh));
    ++it;
    TV.conservativeResize(Eigen::NoChange, V.cols());
    TV.rightCols(fresh) = W;
    MatX H = V.transpose() * (M * TV);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatX> es(H);
    if (es.info() != Eigen::Success) throw NumericalError("Rayleigh-Ritz step failed at iteration " + std::to_string(it));
    const int dim = static_cast<int>(H.rows());
    const int found = std::min(count, dim);
    r.values.resize(found);
    for (int i = 0; i < found; ++i) r.values[i] = 1.0 / es.eigenvalues()[dim - 1 - i];
    r.iterations = it;
    const double current = r.values[found - 1];
    r.relative_change = std::abs(current - previous) / std::max(std::abs(current), 1e-300);
    if (found == count && r.relative_change < options.tolerance) {
      r.converged = true;
      return r;
    }
    previous = current;
    if (it >= options.max_iterations) return r;
    MatX next;
    if (dim + block > max_dim) {
      // thick restart on the leading Ritz vectors; T of those is already known
      const int kept = std::min(dim, std::max(2 * block, 2 * count));
      const MatX Z = es.eigenvectors().rightCols(kept);
      V = (V * Z).eval();
      TV = (TV * Z).eval();
      next = orthonormalize(M, V, TV.rightCols(std::min(block, kept)));
    } else {
      next = orthonormalize(M, V, W);
    }
    if (next.cols() == 0) {
      r.converged = found == count;
      return r;
    }
    V.conservativeResize(Eigen::NoChange, V.cols() + next.cols());
    V.rightCols(next.cols()) = next;
  }
  r.converged = r.values.size() == count;
  return r;
}

}  // namespace

SaddleSolution solve_stokes(const StokesSystem& system) {
  const int nu = static_cast<int>(system.A.rows());
  const int np = static_cast<int>(system.B.rows());
  if (system.B.cols() != nu || system.rhs.size() != nu || system.m.size() != np)
    throw ConfigError("inconsistent Stokes system dimensions");
  const SparseMatrix top = system.A + system.S;
  const ColMatrix K = saddle_matrix(top, system.B, system.m, 1.0);

  VecX b = VecX::Zero(nu + np + 1);
  b.head(nu) = system.rhs;
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw NumericalError("saddle-point factorization failed: system is singular");
  const VecX x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("saddle-point solve failed");

  SaddleSolution s;
  s.u = x.head(nu);
  s.p = x.segment(nu, np);
  s.multiplier = x[nu + np];
  const double scale = std::max(system.rhs.norm(), 1e-300);
  const bool homogeneous = system.rhs.norm() == 0.0;
  const double denom = homogeneous ? 1.0 : scale;
  s.residual_momentum = (top * s.u + system.B.transpose() * s.p - system.rhs).norm() / denom;
  s.residual_continuity = (system.B * s.u + s.multiplier * system.m).norm() / denom;
  s.residual_mean = std::abs(system.m.dot(s.p));
  return s;
}

InfSupEstimate estimate_inf_sup(const SparseMatrix& B, const SparseMatrix& N1, const SparseMatrix& Mp, const VecX& m,
                                const EigenOptions& options) {
  const int nu = static_cast<int>(N1.rows());
  const int np = static_cast<int>(B.rows());
  if (np - 1 < 1)
    throw NumericalError("inf-sup estimate undefined: no pressure modes remain after removing constants");
  const ColMatrix K = saddle_matrix(N1, B, m, -1.0);
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw NumericalError("inf-sup operator factorization failed");

  auto solve = [&](const MatX& X) {
    MatX rhs = MatX::Zero(nu + np + 1, X.cols());
    rhs.middleRows(nu, np) = -(Mp * X);
    const MatX sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite()) throw NumericalError("inf-sup inner solve failed");
    return MatX(sol.middleRows(nu, np));
  };

  const int block = std::min(options.block_size, np - 1);
  const RitzResult r = subspace_iteration(solve, Mp, random_block(np, block, options.seed), 1, options);
  if (!r.converged)
    throw NumericalError("inf-sup eigen-iteration did not converge in " + std::to_string(r.iterations) +
                         " iterations (last relative change " + std::to_string(r.relative_change) + ")");
  InfSupEstimate e;
  e.eigenvalue = r.values[0];
  e.beta = std::sqrt(std::max(e.eigenvalue, 0.0));
  e.iterations = r.iterations;
  e.relative_change = r.relative_change;
  return e;
}

GeneralizedEigen smallest_generalized_eigenvalues(const SparseMatrix& K, const SparseMatrix& M, int count,
                                                  const EigenOptions& options) {
  const int n = static_cast<int>(K.rows());
  if (count < 1 || count > n) throw ConfigError("requested eigenvalue count out of range");
  const ColMatrix Kc = K;
  Eigen::SimplicialLLT<ColMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> chol;
  chol.compute(Kc);
  if (chol.info() != Eigen::Success) throw NumericalError("Cholesky factorization failed: matrix not positive definite");
  auto solve = [&](const MatX& X) {
    const MatX rhs = M * X;
    MatX Y = chol.solve(rhs);
    if (chol.info() != Eigen::Success) throw NumericalError("Cholesky solve failed");
    return Y;
  };
  const int block = std::min(n, std::max(count, options.block_size));
  const RitzResult r = subspace_iteration(solve, M, random_block(n, block, options.seed), count, options);
  GeneralizedEigen g;
  g.values = r.values;
  g.iterations = r.iterations;
  g.relative_change = r.relative_change;
  g.converged = r.converged;
  return g;
}

BrezziReport brezzi_check(const StokesSystem& system, const SparseMatrix& energy_norm, const InfSupEstimate* estimate,
                          const EigenOptions& options) {
  const SparseMatrix top = system.A + system.S;
  BrezziReport r;
  r.coercivity = smallest_generalized_eigenvalues(top, energy_norm, 1, options).values[0];
  r.continuity = 1.0 / smallest_generalized_eigenvalues(energy_norm, top, 1, options).values[0];
  if (!estimate || system.B.rows() <= 1) {
    r.beta3 = r.coercivity;
    return r;
  }
  r.beta_energy = estimate->beta / std::max(1.0, std::sqrt(system.eta * system.h));
  const double M = r.continuity;
  const double composed = 0.5 * (std::sqrt(M * M + 4.0 * r.beta_energy * r.beta_energy) - M);
  r.beta3 = std::min(r.coercivity, composed);
  return r;
}

}  // namespace sfem
