#include "sfem/cli.hpp"

#include "sfem/analysis.hpp"
#include "sfem/flatten.hpp"
#include "sfem/mesh.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sfem {
namespace {

void parse_element(const std::string& tag, StudyConfig& c) {
  c.order.reset();
  c.allow_unsafe = false;
  if (tag.rfind("th:", 0) == 0) {
    c.pair = PairTag::taylor_hood;
    try {
      size_t used = 0;
      c.order = std::stoi(tag.substr(3), &used);
      if (used != tag.size() - 3) throw std::invalid_argument(tag);
    } catch (const std::exception&) {
      throw ConfigError("invalid Taylor-Hood tag '" + tag + "', expected th:k");
    }
  } else if (tag == "mini") {
    c.pair = PairTag::mini;
  } else if (tag == "cr") {
    c.pair = PairTag::crouzeix_raviart;
  } else if (tag == "p2p0") {
    c.pair = PairTag::p2p0;
  } else if (tag == "p1p1-unsafe") {
    c.pair = PairTag::p1p1;
    c.allow_unsafe = true;
  } else {
    throw ConfigError("unknown element '" + tag + "' (expected th:k, mini, cr, p2p0 or p1p1-unsafe)");
  }
}

void parse_curvature(const std::string& tag, StudyConfig& c) {
  c.lifted_order.reset();
  if (tag == "intrinsic") {
    c.curvature = CurvatureMode::intrinsic;
  } else if (tag == "exact") {
    c.curvature = CurvatureMode::exact;
  } else if (tag.rfind("lifted:", 0) == 0) {
    c.curvature = CurvatureMode::lifted;
    try {
      size_t used = 0;
      c.lifted_order = std::stoi(tag.substr(7), &used);
      if (used != tag.size() - 7) throw std::invalid_argument(tag);
    } catch (const std::exception&) {
      throw ConfigError("invalid curvature '" + tag + "', expected lifted:k'");
    }
  } else {
    throw ConfigError("unknown curvature '" + tag + "' (expected intrinsic, lifted:k' or exact)");
  }
}

void parse_levels(const std::string& text, StudyConfig& c) {
  const auto colon = text.find(':');
  try {
    size_t used = 0;
    if (colon == std::string::npos) {
      c.level_min = c.level_max = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } else {
      c.level_min = std::stoi(text.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument(text);
      c.level_max = std::stoi(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw std::invalid_argument(text);
    }
  } catch (const std::exception&) {
    throw ConfigError("invalid levels '" + text + "', expected min:max");
  }
}

void write_summary(std::ostream& out, const StudyReport& r) {
  struct Line {
    const char* name;
    double ErrorRow::*field;
    double predicted;
  };
  const Line lines[] = {
      {"tangential L2", &ErrorRow::u_tan_l2, r.predicted.tangential_l2},
      {"tangential H1", &ErrorRow::u_tan_h1, r.predicted.h1},
      {"normal L2", &ErrorRow::u_normal, r.predicted.normal},
      {"pressure L2", &ErrorRow::p_l2, r.predicted.pressure},
      {"energy", &ErrorRow::energy, r.predicted.energy},
  };
  out << "summary (" << r.config.echo() << ", k_u=" << r.pair_order << ")\n";
  out << std::left << std::setw(16) << "quantity" << std::setw(22) << "final error" << std::setw(18) << "final EOC"
      << "predicted\n";
  for (const auto& l : lines) {
    const double err = r.rows.empty() ? 0.0 : r.rows.back().*(l.field);
    out << std::left << std::setw(16) << l.name << std::setw(22) << format_number(err) << std::setw(18)
        << format_number(r.final_order(l.field)) << format_number(l.predicted) << '\n';
  }
}

std::vector<ErrorRow> inf_sup_scan(const StudyConfig& c) {
  c.validate();
  const auto sphere = std::make_shared<const UnitSphere>();
  std::vector<ErrorRow> rows;
  for (int level = c.level_min; level <= c.level_max; ++level) {
    const auto mesh = std::make_shared<const FlatMesh>(build_icosphere(level));
    const auto geom = lift_geometry(mesh, sphere, c.kg);
    const MixedSpace mixed = build_pair(c.pair, c.order, geom, c.allow_unsafe);
    const double h = mesh_size(*mesh);
    const SparseMatrix B = assemble_b(c.form_b, mixed, c.assembly);
    const SparseMatrix N1 = assemble_norm1(mixed, h, c.assembly);
    const SparseMatrix Mp = assemble_pressure_mass(mixed, c.assembly);
    const VecX m = assemble_pressure_mean(mixed, c.assembly);
    ErrorRow row;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.u_tan_l2 = row.u_tan_h1 = row.u_normal = row.p_l2 = row.energy = nan;
    row.level = level;
    row.h = h;
    row.dofs_u = mixed.velocity_dofs();
    row.dofs_p = mixed.pressure_dofs();
    row.beta_h = estimate_inf_sup(B, N1, Mp, m).beta;
    rows.push_back(row);
  }
  return rows;
}

void write_georates(std::ostream& out, const RateReport& r, int kg) {
  out << "# mode=georates kg=" << kg << '\n';
  out << "level,h,mu_bar_dev,flattening_dev,mu_h_dev,jump_dfh,grad_mu_h\n";
  for (const auto& l : r.levels)
    out << l.level << ',' << format_number(l.h) << ',' << format_number(l.mu_bar) << ','
        << format_number(l.flattening) << ',' << format_number(l.mu_h) << ',' << format_number(l.jump) << ','
        << format_number(l.dmu) << '\n';
}

void write_georates_summary(std::ostream& out, const RateReport& r) {
  out << "exponents (least-squares log-log fit)\n";
  out << std::left << std::setw(22) << "|mu_bar - 1|" << format_number(r.mu_bar) << "  (expected >= 1.8)\n";
  out << std::left << std::setw(22) << "|pi_bar - Id|" << format_number(r.flattening) << "  (expected >= 0.9)\n";
  out << std::left << std::setw(22) << "|mu_h - 1|" << format_number(r.mu_h) << "  (expected >= 1.8)\n";
  out << std::left << std::setw(22) << "|[D F_h]|" << format_number(r.jump) << "  (expected >= 0.9)\n";
  out << std::left << std::setw(22) << "|D mu_h|" << format_number(r.dmu) << "  (expected >= 0.9)\n";
}

// Writes to the --csv file if given, else to `fallback`.
template <class Writer>
void emit(const std::string& path, std::ostream& fallback, Writer&& writer) {
  if (path.empty()) {
    writer(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot open CSV output '" + path + "'");
  writer(file);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Surface Stokes finite element studies on the unit sphere"};
  std::string mode = "converge";
  std::string element = "th:2";
  std::string curvature = "intrinsic";
  std::string levels = "1:4";
  std::string csv;
  std::string dump_mesh;
  std::string dump_matrices;
  StudyConfig config;
  bool inf_sup = false;
  bool parallel = false;
  app.add_option("--mode", mode, "converge | infsup | georates")->check(CLI::IsMember({"converge", "infsup", "georates"}));
  app.add_option("--element", element, "th:k | mini | cr | p2p0 | p1p1-unsafe");
  app.add_option("--kg", config.kg, "geometry order (1..5)");
  app.add_option("--form-a", config.form_a, "viscous form a_i (1 or 2)");
  app.add_option("--form-b", config.form_b, "coupling form b_j (1 or 2)");
  app.add_option("--curvature", curvature, "intrinsic | lifted:k' | exact (used by form a2)");
  app.add_option("--eta", config.eta, "penalty weight");
  app.add_option("--levels", levels, "refinement levels min:max");
  app.add_option("--quadrature", config.assembly.quadrature_degree, "quadrature exactness degree (0: default)");
  app.add_option("--csv", csv, "CSV output path (default: standard output)");
  app.add_option("--dump-mesh", dump_mesh, "write the finest flat mesh as OFF");
  app.add_option("--dump-matrices", dump_matrices, "write assembled blocks per level as MatrixMarket");
  app.add_flag("--inf-sup", inf_sup, "also estimate beta_h in converge mode");
  app.add_flag("--parallel", parallel, "OpenMP element loops");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, x;
    const int code = app.exit(e, o, x);
    out << o.str();
    err << x.str();
    return code == 0 ? 0 : 2;
  }

  try {
    parse_element(element, config);
    parse_curvature(curvature, config);
    parse_levels(levels, config);
    config.compute_inf_sup = inf_sup;
    config.assembly.execution = parallel ? Execution::parallel : Execution::serial;
    if (config.curvature != CurvatureMode::intrinsic && config.form_a != 2 && mode == "converge")
      err << "note: --curvature only affects form a2\n";

    if (mode == "georates") {
      if (config.kg < 1 || config.kg > 5) throw ConfigError("geometry order kg must be in 1..5");
      if (config.level_min < 0 || config.level_min > config.level_max)
        throw ConfigError("levels must satisfy 0 <= min <= max");
      if (config.level_max > kMaxIcosphereLevel) throw ResourceError("level exceeds the memory guard");
      const auto sphere = std::make_shared<const UnitSphere>();
      std::vector<PatchMeasurement> measured;
      for (int level = config.level_min; level <= config.level_max; ++level) {
        const auto mesh = std::make_shared<const FlatMesh>(build_icosphere(level));
        measured.push_back(measure_patches(*lift_geometry(mesh, sphere, config.kg)));
      }
      const RateReport report = verify_patch_rates(measured);
      emit(csv, out, [&](std::ostream& o) { write_georates(o, report, config.kg); });
      write_georates_summary(out, report);
      return 0;
    }

    if (mode == "infsup") {
      StudyReport report;
      report.config = config;
      report.config.compute_inf_sup = true;
      report.rows = inf_sup_scan(config);
      emit(csv, out, [&](std::ostream& o) {
        o << "# mode=infsup ";
        std::ostringstream body;
        write_csv(body, report);
        o << body.str().substr(2);
      });
      out << "beta_h per level:";
      for (const auto& r : report.rows) out << ' ' << format_number(r.beta_h);
      out << '\n';
      return 0;
    }

    config.validate();
    auto hook = [&](const LevelArtifacts& a) {
      if (!dump_matrices.empty())
        dump_system((std::filesystem::path(dump_matrices) / ("level_" + std::to_string(a.level))).string(), a.system);
      if (!dump_mesh.empty() && a.level == config.level_max) {
        std::ofstream f(dump_mesh);
        if (!f) throw ConfigError("cannot open mesh output '" + dump_mesh + "'");
        write_off(f, a.mesh);
      }
    };
    const StudyReport report = run_study(config, hook);
    emit(csv, out, [&](std::ostream& o) {
      o << "# mode=converge ";
      std::ostringstream body;
      write_csv(body, report);
      o << body.str().substr(2);
    });
    write_summary(out, report);
    return 0;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ResourceError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sfem
