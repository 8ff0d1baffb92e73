#include "sfem/assembly.hpp"

#include "local_fields.hpp"
#include "sfem/mesh.hpp"
#include "sfem/quadrature.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace sfem {
namespace {

struct ElementBlock {
  std::vector<int> rows;
  std::vector<int> cols;
  MatX values;
};

using detail::VelocityPoint;
using detail::velocity_point;

std::vector<int> velocity_dofs(const ScalarSpace& s, int t) {
  const int na = s.local_size();
  const int n = s.dimension();
  std::vector<int> dofs(3 * na);
  const int* d = s.dofs(t);
  for (int c = 0; c < 3; ++c)
    for (int a = 0; a < na; ++a) dofs[c * na + a] = c * n + d[a];
  return dofs;
}

std::vector<int> scalar_dofs(const ScalarSpace& s, int t) {
  const int* d = s.dofs(t);
  return std::vector<int>(d, d + s.local_size());
}

// Runs `kernel` over all elements; results are kept per element so the merge order is fixed.
template <class Kernel>
std::vector<ElementBlock> run_elements(int num_elements, Execution execution, Kernel&& kernel) {
  std::vector<ElementBlock> blocks(num_elements);
  if (execution == Execution::serial) {
    for (int t = 0; t < num_elements; ++t) blocks[t] = kernel(t);
    return blocks;
  }
  std::vector<std::exception_ptr> errors(num_elements);
#pragma omp parallel for schedule(dynamic, 16)
  for (int t = 0; t < num_elements; ++t) {
    try {
      blocks[t] = kernel(t);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return blocks;
}

SparseMatrix to_sparse(int rows, int cols, const std::vector<ElementBlock>& blocks) {
  size_t total = 0;
  for (const auto& b : blocks) total += static_cast<size_t>(b.values.size());
  std::vector<Triplet> triplets;
  triplets.reserve(total);
  for (const auto& b : blocks)
    for (size_t i = 0; i < b.rows.size(); ++i)
      for (size_t j = 0; j < b.cols.size(); ++j)
        triplets.emplace_back(b.rows[i], b.cols[j], b.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

VecX to_vector(int rows, const std::vector<ElementBlock>& blocks) {
  VecX v = VecX::Zero(rows);
  for (const auto& b : blocks)
    for (size_t i = 0; i < b.rows.size(); ++i) v[b.rows[i]] += b.values(static_cast<Eigen::Index>(i), 0);
  return v;
}

// Shared setup for one assembly call.
class Assembler {
public:
  Assembler(const MixedSpace& mixed, const AssemblyOptions& options)
      : mixed_(mixed),
        options_(options),
        rule_(triangle_rule(options.quadrature_degree > 0 ? options.quadrature_degree
                                                          : default_quadrature_degree(mixed))),
        table_(tabulate(mixed.geometry().basis(), rule_.points)) {
    tabulate_space(*mixed.velocity, velocity_values_, velocity_grads_);
    tabulate_space(*mixed.pressure, pressure_values_, pressure_grads_);
  }

  [[nodiscard]] int num_elements() const { return mixed_.geometry().num_elements(); }
  [[nodiscard]] int num_points() const { return rule_.size(); }
  [[nodiscard]] GeometryData geometry(int t, int q) const { return mixed_.geometry().evaluate(t, table_, q); }
  [[nodiscard]] double weight(int q) const { return rule_.weights[q]; }
  [[nodiscard]] const RefPoint& point(int q) const { return rule_.points[q]; }
  [[nodiscard]] VelocityPoint velocity(const GeometryData& g, int q) const {
    return velocity_point(g, velocity_values_[q], velocity_grads_[q]);
  }
  [[nodiscard]] const VecX& pressure_values(int q) const { return pressure_values_[q]; }
  [[nodiscard]] MatX pressure_gradients(const GeometryData& g, int q) const {
    return pressure_grads_[q] * g.pseudo_inverse_t.transpose();
  }
  [[nodiscard]] const VecX& velocity_values(int q) const { return velocity_values_[q]; }

  template <class Kernel>
  std::vector<ElementBlock> run(Kernel&& kernel) const {
    return run_elements(num_elements(), options_.execution, std::forward<Kernel>(kernel));
  }

private:
  void tabulate_space(const ScalarSpace& s, std::vector<VecX>& vals, std::vector<MatX>& grads) const {
    const int n = s.local_size();
    for (const auto& p : rule_.points) {
      VecX v(n);
      MatX g(n, 2);
      s.element().evaluate(p, v, g);
      vals.push_back(std::move(v));
      grads.push_back(std::move(g));
    }
  }

  const MixedSpace& mixed_;
  AssemblyOptions options_;
  QuadratureRule rule_;
  BasisTable table_;
  std::vector<VecX> velocity_values_, pressure_values_;
  std::vector<MatX> velocity_grads_, pressure_grads_;
};

// Velocity-velocity form sum_q w mu (c_g G:G + c_e E:E + c_m(q) Pu.Pv + c_n un vn).
struct VelocityFormWeights {
  double gradient = 0.0;
  double symmetric = 0.0;
  double mass = 0.0;
  double normal = 0.0;
  const CurvatureField* curvature = nullptr;  // adds -curvature_factor K# to the mass weight
  double curvature_factor = 0.0;
};

SparseMatrix assemble_velocity_form(const MixedSpace& mixed, const VelocityFormWeights& w,
                                    const AssemblyOptions& options) {
  const Assembler as(mixed, options);
  const int n = 3 * mixed.velocity->local_size();
  auto blocks = as.run([&](int t) {
    ElementBlock b;
    b.rows = velocity_dofs(*mixed.velocity, t);
    b.cols = b.rows;
    b.values = MatX::Zero(n, n);
    for (int q = 0; q < as.num_points(); ++q) {
      const GeometryData g = as.geometry(t, q);
      const VelocityPoint v = as.velocity(g, q);
      const double dx = as.weight(q) * g.measure;
      double mass = w.mass;
      if (w.curvature) mass -= w.curvature_factor * w.curvature->evaluate(t, as.point(q), g);
      if (w.gradient != 0.0) b.values.noalias() += (dx * w.gradient) * v.gradient.transpose() * v.gradient;
      if (w.symmetric != 0.0) b.values.noalias() += (dx * w.symmetric) * v.symmetric.transpose() * v.symmetric;
      if (mass != 0.0) b.values.noalias() += (dx * mass) * v.tangential.transpose() * v.tangential;
      if (w.normal != 0.0) b.values.noalias() += (dx * w.normal) * v.normal * v.normal.transpose();
    }
    return b;
  });
  return to_sparse(mixed.velocity_dofs(), mixed.velocity_dofs(), blocks);
}

}  // namespace

int default_quadrature_degree(const MixedSpace& mixed) {
  return std::min(2 * std::max(mixed.velocity->element().degree(), mixed.geometry().order()) + 2,
                  kMaxQuadratureDegree);
}

SparseMatrix assemble_a(int i, const MixedSpace& mixed, const CurvatureField* curvature,
                        const AssemblyOptions& options) {
  VelocityFormWeights w;
  w.mass = 1.0;
  if (i == 1) {
    w.symmetric = 1.0;
  } else if (i == 2) {
    if (!curvature) throw ConfigError("form a2 needs a curvature approximation");
    w.gradient = 0.5;
    w.curvature = curvature;
    w.curvature_factor = 0.5;
  } else {
    throw ConfigError("form a_i needs i in {1, 2}");
  }
  return assemble_velocity_form(mixed, w, options);
}

SparseMatrix assemble_sh(const MixedSpace& mixed, double eta, double h, const AssemblyOptions& options) {
  if (!(h > 0.0)) throw ConfigError("penalty needs h > 0");
  VelocityFormWeights w;
  w.normal = eta / h;
  return assemble_velocity_form(mixed, w, options);
}

SparseMatrix assemble_norm1(const MixedSpace& mixed, double h, const AssemblyOptions& options) {
  if (!(h > 0.0)) throw ConfigError("norm needs h > 0");
  return assemble_velocity_norm(mixed, 1.0 / (h * h), options);
}

SparseMatrix assemble_velocity_norm(const MixedSpace& mixed, double normal_weight, const AssemblyOptions& options) {
  VelocityFormWeights w;
  w.gradient = 1.0;
  w.mass = 1.0;
  w.normal = normal_weight;
  return assemble_velocity_form(mixed, w, options);
}

SparseMatrix assemble_b(int j, const MixedSpace& mixed, const AssemblyOptions& options) {
  if (j != 1 && j != 2) throw ConfigError("form b_j needs j in {1, 2}");
  if (j == 2 && !mixed.pressure_continuous())
    throw ConfigError("form b2 needs a continuous pressure space; " + mixed.name() +
                      " has a discontinuous pressure");
  const Assembler as(mixed, options);
  const int na = mixed.velocity->local_size();
  const int np = mixed.pressure->local_size();
  auto blocks = as.run([&](int t) {
    ElementBlock b;
    b.rows = scalar_dofs(*mixed.pressure, t);
    b.cols = velocity_dofs(*mixed.velocity, t);
    b.values = MatX::Zero(np, 3 * na);
    for (int q = 0; q < as.num_points(); ++q) {
      const GeometryData g = as.geometry(t, q);
      const double dx = as.weight(q) * g.measure;
      if (j == 1) {
        const VelocityPoint v = as.velocity(g, q);
        b.values.noalias() += dx * as.pressure_values(q) * v.divergence.transpose();
      } else {
        const MatX pg = as.pressure_gradients(g, q);  // np x 3
        const VecX& phi = as.velocity_values(q);
        for (int c = 0; c < 3; ++c) b.values.middleCols(c * na, na).noalias() -= dx * pg.col(c) * phi.transpose();
      }
    }
    return b;
  });
  return to_sparse(mixed.pressure_dofs(), mixed.velocity_dofs(), blocks);
}

VecX assemble_rhs(const MixedSpace& mixed, const VectorField& f, const AssemblyOptions& options) {
  const Assembler as(mixed, options);
  const int na = mixed.velocity->local_size();
  auto blocks = as.run([&](int t) {
    ElementBlock b;
    b.rows = velocity_dofs(*mixed.velocity, t);
    b.cols = {0};
    b.values = MatX::Zero(3 * na, 1);
    for (int q = 0; q < as.num_points(); ++q) {
      const GeometryData g = as.geometry(t, q);
      const double dx = as.weight(q) * g.measure;
      const Vec3 fq = f(g.exact_point);
      const VecX& phi = as.velocity_values(q);
      for (int c = 0; c < 3; ++c) b.values.col(0).segment(c * na, na) += (dx * fq[c]) * phi;
    }
    return b;
  });
  return to_vector(mixed.velocity_dofs(), blocks);
}

SparseMatrix assemble_pressure_mass(const MixedSpace& mixed, const AssemblyOptions& options) {
  const Assembler as(mixed, options);
  const int np = mixed.pressure->local_size();
  auto blocks = as.run([&](int t) {
    ElementBlock b;
    b.rows = scalar_dofs(*mixed.pressure, t);
    b.cols = b.rows;
    b.values = MatX::Zero(np, np);
    for (int q = 0; q < as.num_points(); ++q) {
      const GeometryData g = as.geometry(t, q);
      const VecX& psi = as.pressure_values(q);
      b.values.noalias() += (as.weight(q) * g.measure) * psi * psi.transpose();
    }
    return b;
  });
  return to_sparse(mixed.pressure_dofs(), mixed.pressure_dofs(), blocks);
}

VecX assemble_pressure_mean(const MixedSpace& mixed, const AssemblyOptions& options) {
  const Assembler as(mixed, options);
  const int np = mixed.pressure->local_size();
  auto blocks = as.run([&](int t) {
    ElementBlock b;
    b.rows = scalar_dofs(*mixed.pressure, t);
    b.cols = {0};
    b.values = MatX::Zero(np, 1);
    for (int q = 0; q < as.num_points(); ++q) {
      const GeometryData g = as.geometry(t, q);
      b.values.col(0) += (as.weight(q) * g.measure) * as.pressure_values(q);
    }
    return b;
  });
  return to_vector(mixed.pressure_dofs(), blocks);
}

StokesSystem assemble_stokes(const MixedSpace& mixed, int form_a, int form_b, const CurvatureField* curvature,
                             const VectorField& f, double eta, const AssemblyOptions& options) {
  if (!(eta > 0.0)) throw ConfigError("penalty weight eta must be positive");
  StokesSystem s;
  s.form_a = form_a;
  s.form_b = form_b;
  s.eta = eta;
  s.h = mesh_size(mixed.geometry().mesh());
  s.B = assemble_b(form_b, mixed, options);  // validates pair/form compatibility first
  s.A = assemble_a(form_a, mixed, curvature, options);
  s.S = assemble_sh(mixed, eta, s.h, options);
  s.Mp = assemble_pressure_mass(mixed, options);
  s.N1 = assemble_norm1(mixed, s.h, options);
  s.m = assemble_pressure_mean(mixed, options);
  s.rhs = assemble_rhs(mixed, f, options);
  return s;
}

void write_matrix_market(std::ostream& out, const SparseMatrix& matrix) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  out.precision(17);
  for (int r = 0; r < matrix.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_matrix_market(std::ostream& out, const VecX& vector) {
  out << "%%MatrixMarket matrix array real general\n";
  out << vector.size() << " 1\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < vector.size(); ++i) out << vector[i] << '\n';
}

void dump_system(const std::string& directory, const StokesSystem& system) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto write = [&](const std::string& name, const auto& object) {
    std::ofstream out(fs::path(directory) / name);
    if (!out) throw ResourceError("cannot write " + (fs::path(directory) / name).string());
    write_matrix_market(out, object);
  };
  write("A.mtx", system.A);
  write("S.mtx", system.S);
  write("B.mtx", system.B);
  write("Mp.mtx", system.Mp);
  write("N1.mtx", system.N1);
  write("m.mtx", system.m);
  write("rhs.mtx", system.rhs);
}

}  // namespace sfem
