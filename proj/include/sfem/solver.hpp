#pragma once

#include "sfem/assembly.hpp"
#include "sfem/types.hpp"

#include <cstdint>

namespace sfem {

struct SaddleSolution {
  VecX u;
  VecX p;
  double multiplier = 0.0;  // for the zero-mean constraint
  double residual_momentum = 0.0;    // relative to |rhs| (absolute if rhs = 0)
  double residual_continuity = 0.0;  // |B u + m lambda| relative to |B| |u| scale
  double residual_mean = 0.0;        // |m^T p|
};

/// Direct solve of [[A+S, B^T, 0], [B, 0, m], [0, m^T, 0]] (u, p, lambda) = (rhs, 0, 0).
SaddleSolution solve_stokes(const StokesSystem& system);

struct InfSupEstimate {
  double beta = 0.0;          // sqrt of the smallest eigenvalue
  double eigenvalue = 0.0;
  bool constant_mode_deflated = true;
  int iterations = 0;
  double relative_change = 0.0;
};

struct EigenOptions {
  double tolerance = 1e-8;  // relative change of the smallest Ritz value
  int max_iterations = 500;
  int block_size = 4;
  std::uint64_t seed = 20240611;
};

/// Smallest eigenvalue of (B N1^-1 B^T) q = lambda Mp q on {q : m^T q = 0}.
InfSupEstimate estimate_inf_sup(const SparseMatrix& B, const SparseMatrix& N1, const SparseMatrix& Mp,
                                const VecX& m, const EigenOptions& options = {});

struct BrezziReport {
  double coercivity = 0.0;  // alpha: min Rayleigh quotient of A + S against N_A
  double continuity = 0.0;  // M: max Rayleigh quotient of A + S against N_A
  double beta_energy = 0.0; // inf-sup constant rescaled to the N_A norm
  double beta3 = 0.0;       // lower bound on the combined inf-sup constant
};

/// N_A = |grad P_h v|^2 + |P_h v|^2 + eta / h |v.n_h|^2 is passed in as `energy_norm`.
/// beta3 >= min(alpha, (sqrt(M^2 + 4 beta^2) - M) / 2), with beta the constant of `estimate`
/// measured in the N_A norm. Without a constrained pressure space beta3 = alpha.
BrezziReport brezzi_check(const StokesSystem& system, const SparseMatrix& energy_norm,
                          const InfSupEstimate* estimate, const EigenOptions& options = {});

/// Smallest eigenvalues of K x = lambda M x for SPD K, M (block Krylov inverse iteration).
struct GeneralizedEigen {
  VecX values;
  int iterations = 0;
  double relative_change = 0.0;
  bool converged = false;
};
GeneralizedEigen smallest_generalized_eigenvalues(const SparseMatrix& K, const SparseMatrix& M, int count,
                                                  const EigenOptions& options = {});

}  // namespace sfem
