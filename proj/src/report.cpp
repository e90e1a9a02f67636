#include "cmfd/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cmfd/errors.hpp"
#include "cmfd/mesh_io.hpp"

namespace cmfd {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "level,h,seed,method,num_faces,num_cells,flux_error,power,power_error,p1,p2,continuity\n";
  for (const auto& level : report.levels) {
    for (const auto& m : level.methods) {
      os << level.level << ',' << fmt(level.h) << ',' << level.seed << ',' << m.method << ',' << m.num_faces << ','
         << m.num_cells << ',' << fmt(m.flux_error) << ',' << fmt(m.power) << ',' << fmt(m.power_error) << ','
         << fmt(m.p1) << ',' << fmt(m.p2) << ',' << fmt(m.continuity) << '\n';
    }
  }
  for (const auto& [method, rate] : report.rates) os << "# rate=" << fmt(rate) << " method=" << method << '\n';
  return os.str();
}

void export_csv(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << report_to_csv(report);
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

json report_to_json(const ExperimentReport& report) {
  json levels = json::array();
  for (const auto& level : report.levels) {
    json methods = json::array();
    for (const auto& m : level.methods) {
      methods.push_back({{"method", m.method},
                         {"num_faces", m.num_faces},
                         {"num_cells", m.num_cells},
                         {"dofs", m.num_faces + m.num_cells},
                         {"flux_error", number_or_null(m.flux_error)},
                         {"power", number_or_null(m.power)},
                         {"power_error", number_or_null(m.power_error)},
                         {"p1", number_or_null(m.p1)},
                         {"p2", number_or_null(m.p2)},
                         {"continuity", number_or_null(m.continuity)},
                         {"solve_seconds", m.solve_seconds}});
    }
    levels.push_back({{"level", level.level},
                      {"h", level.h},
                      {"seed", level.seed},
                      {"reseeds", level.reseeds},
                      {"methods", std::move(methods)}});
  }
  return {{"experiment", to_string(report.config.kind)},
          {"config", config_to_json(report.config)},
          {"reference_power", number_or_null(report.reference_power)},
          {"levels", std::move(levels)},
          {"rates", report.rates},
          {"rates_without_coarsest", report.rates_without_coarsest},
          {"invariants_pass", report.invariants_pass},
          {"log", report.log}};
}

json recon_to_json(const ReconstructionSet& set, const ConsistencyReport& rep) {
  json bf = json::array(), bc = json::array();
  for (const auto& p : set.b_f) bf.push_back(to_json(p));
  for (const auto& p : set.b_c) bc.push_back(to_json(p));
  return {{"b_f", std::move(bf)},
          {"b_c", std::move(bc)},
          {"constraint_residual", set.constraint_residual},
          {"p1", rep.p1},
          {"p2", rep.p2}};
}

ReconstructionSet recon_from_json(const json& doc, const CurvedGrid& grid, const GridGeometry& geom) {
  try {
    std::vector<Vec3> bf, bc;
    for (const auto& p : doc.at("b_f")) bf.push_back(vec3_from_json(p));
    for (const auto& p : doc.at("b_c")) bc.push_back(vec3_from_json(p));
    if (static_cast<Index>(bf.size()) != grid.num_faces() || static_cast<Index>(bc.size()) != grid.num_cells())
      throw InvalidArgument("reconstruction does not match the mesh sizes");
    ReconstructionSet set = operators_from_points(grid, geom, std::move(bf), std::move(bc));
    set.constraint_residual = doc.value("constraint_residual", 0.0);
    return set;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed reconstruction document: ") + e.what());
  }
}

BoundaryConditions bc_from_json(const json& doc) {
  BoundaryConditions bc;
  try {
    if (doc.contains("electrodes")) {
      for (const auto& [key, value] : doc.at("electrodes").items())
        bc.electrode_potentials[std::stoi(key)] = value.get<double>();
    }
    if (doc.contains("potential")) {
      const json& p = doc.at("potential");
      const std::string type = p.at("type").get<std::string>();
      if (type == "linear") {
        const Vec3 g = vec3_from_json(p.at("gradient"));
        const double c = p.value("offset", 0.0);
        bc.potential = [g, c](const Vec3& x) { return g.dot(x) + c; };
      } else if (type == "harmonic") {
        bc.potential = [](const Vec3& x) { return x.x() * x.x() - 2 * x.y() * x.y() + x.z() * x.z(); };
      } else {
        throw InvalidArgument("unknown potential type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed boundary-condition document: ") + e.what());
  } catch (const std::logic_error& e) {
    throw InvalidArgument(std::string("malformed electrode index: ") + e.what());
  }
  if (!bc.potential && bc.electrode_potentials.empty())
    throw InvalidArgument("boundary conditions need 'electrodes' or 'potential'");
  return bc;
}

json solution_to_json(const SolveResult& r, const std::vector<Vec3>& fields, double power) {
  json f = json::array();
  for (const auto& v : fields) f.push_back(to_json(v));
  return {{"J", std::vector<double>(r.J.data(), r.J.data() + r.J.size())},
          {"U", std::vector<double>(r.U.data(), r.U.data() + r.U.size())},
          {"fields", std::move(f)},
          {"power", power},
          {"residual", r.residual},
          {"continuity", r.continuity},
          {"iterations", r.iterations}};
}

SolveResult solution_from_json(const json& doc) {
  try {
    SolveResult r;
    const auto J = doc.at("J").get<std::vector<double>>();
    const auto U = doc.value("U", std::vector<double>{});
    r.J = Eigen::Map<const Eigen::VectorXd>(J.data(), static_cast<Index>(J.size()));
    r.U = Eigen::Map<const Eigen::VectorXd>(U.data(), static_cast<Index>(U.size()));
    r.residual = doc.value("residual", 0.0);
    r.continuity = doc.value("continuity", 0.0);
    r.iterations = doc.value("iterations", 0);
    return r;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed solution document: ") + e.what());
  }
}

}  // namespace cmfd
