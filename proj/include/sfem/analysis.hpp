#pragma once

#include "sfem/assembly.hpp"
#include "sfem/geometry.hpp"
#include "sfem/solver.hpp"
#include "sfem/spaces.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sfem {

/// Sphere benchmark: phi = z - x^2, u* = grad_Gamma phi x n, p* = -x and the matching load
/// f = (-x^2 - y + 1, x (6z - y + 1), -x (6y + z)).
struct Benchmark {
  [[nodiscard]] Vec3 velocity(const Vec3& y) const;
  /// Derivative of the ambient formula for u* at a sphere point; only its action on tangent
  /// vectors is meaningful.
  [[nodiscard]] Mat3 velocity_jacobian(const Vec3& y) const;
  [[nodiscard]] double pressure(const Vec3& y) const { return -y.x(); }
  [[nodiscard]] Vec3 pressure_gradient(const Vec3& y) const;
  [[nodiscard]] Vec3 force(const Vec3& y) const;
};

Benchmark benchmark();

struct ErrorRow {
  int level = 0;
  double h = 0.0;
  int dofs_u = 0;
  int dofs_p = 0;
  double u_tan_l2 = 0.0;        // |P_h (u^e - u_h)|
  double u_tan_l2_exact = 0.0;  // |(P o pi)(u^e - u_h)|
  double u_tan_h1 = 0.0;        // |grad P_h (u^e - u_h)|
  double u_normal = 0.0;        // |(n o pi) . u_h|
  double p_l2 = 0.0;            // both pressures shifted to zero mean
  double energy = 0.0;
  double penalty_energy = 0.0;  // sqrt(s_h(u_h, u_h))
  double beta_h = std::numeric_limits<double>::quiet_NaN();
};

ErrorRow compute_errors(const SaddleSolution& solution, const MixedSpace& mixed, const Benchmark& bench,
                        double eta, const AssemblyOptions& options = {});

/// order_l = log(e_l / e_{l+1}) / log(h_l / h_{l+1}); NaN where an error is not positive.
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs);

/// k_K of a curvature approximation (infinity for the exact curvature).
double curvature_order(CurvatureMode mode, std::optional<int> lifted_order, int kg);

struct PredictedOrders {
  double energy = 0.0;    // m_i
  double pressure = 0.0;  // m-hat_i
  double tangential_l2 = 0.0;  // l_i
  double normal = 0.0;    // m_i + 1/2
  double h1 = 0.0;        // bounded by the energy error: m_i
};

PredictedOrders predicted_orders(int k_u, int kg, int form_a, double k_K);

struct StudyConfig {
  PairTag pair = PairTag::taylor_hood;
  std::optional<int> order;  // Taylor-Hood velocity order; must be empty for other pairs
  bool allow_unsafe = false;
  int kg = 2;
  int form_a = 1;
  int form_b = 1;
  CurvatureMode curvature = CurvatureMode::intrinsic;
  std::optional<int> lifted_order;
  double eta = 1.0;
  int level_min = 1;
  int level_max = 4;
  bool compute_inf_sup = false;
  AssemblyOptions assembly;

  /// Rejects invalid combinations with ConfigError before any work is done.
  void validate() const;
  [[nodiscard]] std::string element_tag() const;
  [[nodiscard]] std::string curvature_tag() const;
  [[nodiscard]] std::string echo() const;
};

struct StudyReport {
  StudyConfig config;
  std::vector<ErrorRow> rows;
  PredictedOrders predicted;
  int pair_order = 0;
  double curvature_order = 0.0;

  [[nodiscard]] std::vector<double> column(double ErrorRow::*field) const;
  [[nodiscard]] std::vector<double> orders(double ErrorRow::*field) const;
  /// EOC between the two finest levels.
  [[nodiscard]] double final_order(double ErrorRow::*field) const;
};

struct LevelArtifacts {
  int level;
  const FlatMesh& mesh;
  const ParametricGeometry& geometry;
  const MixedSpace& mixed;
  const StokesSystem& system;
  const SaddleSolution& solution;
};

StudyReport run_study(const StudyConfig& config,
                      const std::function<void(const LevelArtifacts&)>& on_level = nullptr);

/// CSV with a "#" configuration echo line, the fixed header and one row per level.
void write_csv(std::ostream& out, const StudyReport& report);

/// 12 significant digits; "nan" for non-finite values.
std::string format_number(double value);

}  // namespace sfem
