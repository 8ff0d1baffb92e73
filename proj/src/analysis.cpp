#include "sfem/analysis.hpp"

#include "local_fields.hpp"
#include "sfem/mesh.hpp"
#include "sfem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

namespace sfem {
namespace {

Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

bool pressure_is_broken(PairTag tag) { return tag == PairTag::crouzeix_raviart || tag == PairTag::p2p0; }

struct ElementSums {
  double area = 0, pe = 0, ph = 0;
  double tan = 0, tan_exact = 0, h1 = 0, normal = 0, p = 0, penalty = 0, normal_h = 0;
};

}  // namespace

Vec3 Benchmark::velocity(const Vec3& y) const {
  const Vec3 a(-2.0 * y.x(), 0.0, 1.0);
  const Vec3 w = a - a.dot(y) * y;
  return w.cross(y);
}

Mat3 Benchmark::velocity_jacobian(const Vec3& y) const {
  const Vec3 a(-2.0 * y.x(), 0.0, 1.0);
  Mat3 H = Mat3::Zero();
  H(0, 0) = -2.0;
  const double s = a.dot(y);
  const Vec3 w = a - s * y;
  const Mat3 dw = H - y * (H * y + a).transpose() - s * Mat3::Identity();
  return -cross_matrix(y) * dw + cross_matrix(w);
}

Vec3 Benchmark::pressure_gradient(const Vec3& y) const { return -Vec3::UnitX() + y.x() * y; }

Vec3 Benchmark::force(const Vec3& p) const {
  const double x = p.x(), y = p.y(), z = p.z();
  return {-x * x - y + 1.0, x * (6.0 * z - y + 1.0), -x * (6.0 * y + z)};
}

Benchmark benchmark() { return {}; }

ErrorRow compute_errors(const SaddleSolution& solution, const MixedSpace& mixed, const Benchmark& bench, double eta,
                        const AssemblyOptions& options) {
  if (solution.u.size() != mixed.velocity_dofs() || solution.p.size() != mixed.pressure_dofs())
    throw ConfigError("solution does not match the mixed space");
  const ParametricGeometry& geom = mixed.geometry();
  const ScalarSpace& V = *mixed.velocity;
  const ScalarSpace& Q = *mixed.pressure;
  const int degree = options.quadrature_degree > 0
                         ? options.quadrature_degree
                         : std::min(default_quadrature_degree(mixed) + 2, kMaxQuadratureDegree);
  const QuadratureRule rule = triangle_rule(degree);
  const BasisTable table = tabulate(geom.basis(), rule.points);
  const int na = V.local_size();
  const int np = Q.local_size();
  const int nv = V.dimension();
  std::vector<VecX> vv, qv;
  std::vector<MatX> vg;
  for (const auto& pt : rule.points) {
    VecX v(na), w(np);
    MatX g(na, 2), h(np, 2);
    V.element().evaluate(pt, v, g);
    Q.element().evaluate(pt, w, h);
    vv.push_back(v);
    vg.push_back(g);
    qv.push_back(w);
  }
  const double h = mesh_size(geom.mesh());
  const int ne = geom.num_elements();

  auto local_velocity = [&](int t) {
    VecX c(3 * na);
    const int* d = V.dofs(t);
    for (int k = 0; k < 3; ++k)
      for (int a = 0; a < na; ++a) c[k * na + a] = solution.u[k * nv + d[a]];
    return c;
  };
  auto local_pressure = [&](int t) {
    VecX c(np);
    const int* d = Q.dofs(t);
    for (int a = 0; a < np; ++a) c[a] = solution.p[d[a]];
    return c;
  };

  // pass 1: means
  std::vector<ElementSums> sums(ne);
  auto mean_pass = [&](int t) {
    const VecX pc = local_pressure(t);
    ElementSums& s = sums[t];
    for (int q = 0; q < rule.size(); ++q) {
      const GeometryData g = geom.evaluate(t, table, q);
      const double dx = rule.weights[q] * g.measure;
      s.area += dx;
      s.pe += dx * bench.pressure(g.exact_point);
      s.ph += dx * qv[q].dot(pc);
    }
  };
  if (options.execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int t = 0; t < ne; ++t) mean_pass(t);
  } else {
    for (int t = 0; t < ne; ++t) mean_pass(t);
  }
  double area = 0, pe_total = 0, ph_total = 0;
  for (const auto& s : sums) {
    area += s.area;
    pe_total += s.pe;
    ph_total += s.ph;
  }
  const double pe_mean = pe_total / area;
  const double ph_mean = ph_total / area;

  // pass 2: error integrals
  auto error_pass = [&](int t) {
    const VecX uc = local_velocity(t);
    const VecX pc = local_pressure(t);
    ElementSums& s = sums[t];
    for (int q = 0; q < rule.size(); ++q) {
      const GeometryData g = geom.evaluate(t, table, q);
      const double dx = rule.weights[q] * g.measure;
      const detail::VelocityPoint vp = detail::velocity_point(g, vv[q], vg[q]);
      Vec3 uh = Vec3::Zero();
      for (int k = 0; k < 3; ++k) uh[k] = vv[q].dot(uc.segment(k * na, na));
      const Eigen::Matrix<double, 9, 1> gh = vp.gradient * uc;
      const Mat3 grad_h = Eigen::Map<const Mat3>(gh.data());

      const Vec3 ue = bench.velocity(g.exact_point);
      const Mat3 due = bench.velocity_jacobian(g.exact_point) * geom.oracle().project_jacobian(g.x);
      const Mat3 grad_e = g.normal.dot(ue) * g.weingarten + g.tangential * due * g.tangential;
      const Vec3 e = ue - uh;

      const double ep = (bench.pressure(g.exact_point) - pe_mean) - (qv[q].dot(pc) - ph_mean);
      const double en = e.dot(g.normal);
      s.tan += dx * (g.tangential * e).squaredNorm();
      s.tan_exact += dx * (g.exact_tangential * e).squaredNorm();
      s.h1 += dx * (grad_e - grad_h).squaredNorm();
      s.normal += dx * std::pow(g.exact_normal.dot(uh), 2);
      s.normal_h += dx * en * en;
      s.p += dx * ep * ep;
      s.penalty += dx * std::pow(uh.dot(g.normal), 2);
    }
  };
  if (options.execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int t = 0; t < ne; ++t) error_pass(t);
  } else {
    for (int t = 0; t < ne; ++t) error_pass(t);
  }
  ElementSums total;
  for (const auto& s : sums) {
    total.tan += s.tan;
    total.tan_exact += s.tan_exact;
    total.h1 += s.h1;
    total.normal += s.normal;
    total.normal_h += s.normal_h;
    total.p += s.p;
    total.penalty += s.penalty;
  }

  ErrorRow row;
  row.level = geom.mesh().level();
  row.h = h;
  row.dofs_u = mixed.velocity_dofs();
  row.dofs_p = mixed.pressure_dofs();
  row.u_tan_l2 = std::sqrt(total.tan);
  row.u_tan_l2_exact = std::sqrt(total.tan_exact);
  row.u_tan_h1 = std::sqrt(total.h1);
  row.u_normal = std::sqrt(total.normal);
  row.p_l2 = std::sqrt(total.p);
  row.energy = std::sqrt(total.h1 + total.tan + eta / h * total.normal_h + total.p);
  row.penalty_energy = std::sqrt(eta / h * total.penalty);
  return row;
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw ConfigError("eoc needs one mesh size per error");
  std::vector<double> out;
  for (size_t l = 0; l + 1 < errors.size(); ++l) {
    const double e0 = errors[l], e1 = errors[l + 1];
    if (!(e0 > 0.0) || !(e1 > 0.0) || !(hs[l] > 0.0) || !(hs[l + 1] > 0.0) || hs[l] == hs[l + 1]) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    out.push_back(std::log(e0 / e1) / std::log(hs[l] / hs[l + 1]));
  }
  return out;
}

double curvature_order(CurvatureMode mode, std::optional<int> lifted_order, int kg) {
  auto intrinsic = [](int k) { return static_cast<double>(k % 2 == 0 ? k : k - 1); };
  switch (mode) {
    case CurvatureMode::intrinsic:
      return intrinsic(kg);
    case CurvatureMode::lifted:
      return intrinsic(lifted_order.value_or(kg));
    case CurvatureMode::exact:
      return std::numeric_limits<double>::infinity();
  }
  return intrinsic(kg);
}

PredictedOrders predicted_orders(int k_u, int kg, int form_a, double k_K) {
  PredictedOrders p;
  const double ku = k_u;
  const double g = kg;
  p.energy = std::min(ku, g - 0.5);
  p.pressure = std::min(ku, g);
  p.tangential_l2 = std::min({ku + 1.0, g + 1.0, 2.0 * g - 1.0});
  if (form_a == 2) {
    p.energy = std::min(p.energy, k_K);
    p.pressure = std::min(p.pressure, k_K);
    p.tangential_l2 = std::min(p.tangential_l2, k_K);
  }
  p.normal = p.energy + 0.5;
  p.h1 = p.energy;
  return p;
}

void StudyConfig::validate() const {
  if (kg < 1 || kg > 5) throw ConfigError("geometry order kg must be in 1..5");
  if (form_a != 1 && form_a != 2) throw ConfigError("form-a must be 1 or 2");
  if (form_b != 1 && form_b != 2) throw ConfigError("form-b must be 1 or 2");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be a positive number");
  if (level_min < 0 || level_min > level_max) throw ConfigError("levels must satisfy 0 <= min <= max");
  if (level_max > kMaxIcosphereLevel)
    throw ResourceError("level " + std::to_string(level_max) + " exceeds the memory guard of " +
                        std::to_string(kMaxIcosphereLevel));
  if (pair == PairTag::taylor_hood) {
    if (!order || *order < 2) throw ConfigError("Taylor-Hood needs velocity order k >= 2 (th:k)");
  } else if (order) {
    throw ConfigError("only the Taylor-Hood pair takes an order");
  }
  if (pair == PairTag::p1p1 && !allow_unsafe) throw ConfigError("the P1-P1 pair needs the unsafe flag");
  if (form_b == 2 && pressure_is_broken(pair))
    throw ConfigError("form b2 needs the gradient of a continuous pressure, but " + element_tag() +
                      " has a discontinuous pressure space");
  if (curvature == CurvatureMode::lifted) {
    if (!lifted_order) throw ConfigError("lifted curvature needs an order (lifted:k')");
    if (*lifted_order <= kg) throw ConfigError("lifted curvature order k' must exceed kg");
    if (*lifted_order > 6) throw ConfigError("lifted curvature order k' must be at most 6");
  } else if (lifted_order) {
    throw ConfigError("a curvature order is only meaningful for lifted curvature");
  }
}

std::string StudyConfig::element_tag() const {
  switch (pair) {
    case PairTag::taylor_hood:
      return "th:" + (order ? std::to_string(*order) : std::string("?"));
    case PairTag::mini:
      return "mini";
    case PairTag::crouzeix_raviart:
      return "cr";
    case PairTag::p2p0:
      return "p2p0";
    case PairTag::p1p1:
      return "p1p1-unsafe";
  }
  return "?";
}

std::string StudyConfig::curvature_tag() const {
  switch (curvature) {
    case CurvatureMode::intrinsic:
      return "intrinsic";
    case CurvatureMode::lifted:
      return "lifted:" + (lifted_order ? std::to_string(*lifted_order) : std::string("?"));
    case CurvatureMode::exact:
      return "exact";
  }
  return "?";
}

std::string StudyConfig::echo() const {
  std::ostringstream s;
  s << "element=" << element_tag() << " kg=" << kg << " form_a=" << form_a << " form_b=" << form_b
    << " curvature=" << curvature_tag() << " eta=" << format_number(eta) << " levels=" << level_min << ':'
    << level_max << " inf_sup=" << (compute_inf_sup ? "on" : "off");
  if (assembly.quadrature_degree > 0) s << " quadrature=" << assembly.quadrature_degree;
  return s.str();
}

std::vector<double> StudyReport::column(double ErrorRow::*field) const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.*field);
  return out;
}

std::vector<double> StudyReport::orders(double ErrorRow::*field) const {
  return eoc(column(field), column(&ErrorRow::h));
}

double StudyReport::final_order(double ErrorRow::*field) const {
  const auto o = orders(field);
  return o.empty() ? std::numeric_limits<double>::quiet_NaN() : o.back();
}

StudyReport run_study(const StudyConfig& config, const std::function<void(const LevelArtifacts&)>& on_level) {
  config.validate();
  StudyReport report;
  report.config = config;
  const auto sphere = std::make_shared<const UnitSphere>();
  const Benchmark bench = benchmark();
  const VectorField force = [&bench](const Vec3& y) { return bench.force(y); };

  for (int level = config.level_min; level <= config.level_max; ++level) {
    const auto mesh = std::make_shared<const FlatMesh>(build_icosphere(level));
    const auto geom = lift_geometry(mesh, sphere, config.kg);
    const MixedSpace mixed = build_pair(config.pair, config.order, geom, config.allow_unsafe);
    std::unique_ptr<CurvatureField> curvature;
    if (config.form_a == 2) curvature = std::make_unique<CurvatureField>(geom, config.curvature, config.lifted_order);
    const StokesSystem system =
        assemble_stokes(mixed, config.form_a, config.form_b, curvature.get(), force, config.eta, config.assembly);
    const SaddleSolution solution = solve_stokes(system);
    ErrorRow row = compute_errors(solution, mixed, bench, config.eta, config.assembly);
    if (config.compute_inf_sup) row.beta_h = estimate_inf_sup(system.B, system.N1, system.Mp, system.m).beta;
    report.rows.push_back(row);
    report.pair_order = mixed.pair_order;
    if (on_level) on_level({level, *mesh, *geom, mixed, system, solution});
  }
  report.curvature_order = curvature_order(config.curvature, config.lifted_order, config.kg);
  report.predicted = predicted_orders(report.pair_order, config.kg, config.form_a, report.curvature_order);
  return report;
}

std::string format_number(double value) {
  if (!std::isfinite(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void write_csv(std::ostream& out, const StudyReport& report) {
  out << "# " << report.config.echo() << '\n';
  out << "level,h,dofs_u,dofs_p,err_u_tan_l2,eoc_u_tan_l2,err_u_tan_h1,eoc_u_tan_h1,err_u_normal,eoc_u_normal,"
         "err_p_l2,eoc_p_l2,err_energy,eoc_energy,beta_h\n";
  const auto tan = report.orders(&ErrorRow::u_tan_l2);
  const auto h1 = report.orders(&ErrorRow::u_tan_h1);
  const auto nor = report.orders(&ErrorRow::u_normal);
  const auto pre = report.orders(&ErrorRow::p_l2);
  const auto ene = report.orders(&ErrorRow::energy);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (size_t i = 0; i < report.rows.size(); ++i) {
    const ErrorRow& r = report.rows[i];
    auto order = [&](const std::vector<double>& o) { return format_number(i == 0 ? nan : o[i - 1]); };
    out << r.level << ',' << format_number(r.h) << ',' << r.dofs_u << ',' << r.dofs_p << ','
        << format_number(r.u_tan_l2) << ',' << order(tan) << ',' << format_number(r.u_tan_h1) << ',' << order(h1)
        << ',' << format_number(r.u_normal) << ',' << order(nor) << ',' << format_number(r.p_l2) << ','
        << order(pre) << ',' << format_number(r.energy) << ',' << order(ene) << ',' << format_number(r.beta_h)
        << '\n';
  }
}

}  // namespace sfem
