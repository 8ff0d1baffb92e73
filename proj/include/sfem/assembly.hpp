#pragma once

#include "sfem/geometry.hpp"
#include "sfem/spaces.hpp"

#include <functional>
#include <iosfwd>
#include <string>

namespace sfem {

struct AssemblyOptions {
  int quadrature_degree = 0;  // 0: default_quadrature_degree()
  Execution execution = Execution::serial;
};

/// 2 max(velocity degree, k_g) + 2.
int default_quadrature_degree(const MixedSpace& mixed);

using VectorField = std::function<Vec3(const Vec3&)>;

/// Viscous form a_1 (i = 1, symmetric gradient) or a_2 (i = 2, full gradient with curvature
/// correction). a_2 needs `curvature`.
SparseMatrix assemble_a(int i, const MixedSpace& mixed, const CurvatureField* curvature,
                        const AssemblyOptions& options = {});

/// Normal penalty eta / h <u.n_h, v.n_h>.
SparseMatrix assemble_sh(const MixedSpace& mixed, double eta, double h, const AssemblyOptions& options = {});

/// Coupling b_1 (j = 1) or b_2 (j = 2); rows are pressure DOFs, columns velocity DOFs.
SparseMatrix assemble_b(int j, const MixedSpace& mixed, const AssemblyOptions& options = {});

/// <f o pi, v_h> against the unprojected velocity basis.
VecX assemble_rhs(const MixedSpace& mixed, const VectorField& f, const AssemblyOptions& options = {});

/// |||v|||_1^2 = |grad P_h v|^2 + |P_h v|^2 + h^-2 |Q_h v|^2.
SparseMatrix assemble_norm1(const MixedSpace& mixed, double h, const AssemblyOptions& options = {});

/// |grad P_h v|^2 + |P_h v|^2 + w |v.n_h|^2 for a given normal weight w.
SparseMatrix assemble_velocity_norm(const MixedSpace& mixed, double normal_weight,
                                    const AssemblyOptions& options = {});

SparseMatrix assemble_pressure_mass(const MixedSpace& mixed, const AssemblyOptions& options = {});

/// m_i = integral of the i-th pressure basis function.
VecX assemble_pressure_mean(const MixedSpace& mixed, const AssemblyOptions& options = {});

struct StokesSystem {
  int form_a = 1;
  int form_b = 1;
  double eta = 1.0;
  double h = 0.0;
  SparseMatrix A;
  SparseMatrix S;
  SparseMatrix B;
  SparseMatrix Mp;
  SparseMatrix N1;
  VecX m;
  VecX rhs;
};

/// Assembles every block of the discrete problem. h defaults to mesh_size of the flat mesh.
StokesSystem assemble_stokes(const MixedSpace& mixed, int form_a, int form_b, const CurvatureField* curvature,
                             const VectorField& f, double eta, const AssemblyOptions& options = {});

/// MatrixMarket coordinate (general, real) writer; 17 significant digits.
void write_matrix_market(std::ostream& out, const SparseMatrix& matrix);
void write_matrix_market(std::ostream& out, const VecX& vector);

/// Writes A.mtx, S.mtx, B.mtx, Mp.mtx, N1.mtx, m.mtx, rhs.mtx into `directory` (created if needed).
void dump_system(const std::string& directory, const StokesSystem& system);

}  // namespace sfem
