#include "cmfd/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>

#include "cmfd/errors.hpp"
#include "cmfd/mesh_io.hpp"

namespace cmfd {

using nlohmann::json;

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "patch") return ExperimentKind::patch;
  if (name == "convergence") return ExperimentKind::convergence;
  if (name == "sphere") return ExperimentKind::sphere;
  if (name == "torus") return ExperimentKind::torus;
  throw InvalidArgument("unknown experiment '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::patch: return "patch";
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::sphere: return "sphere";
    case ExperimentKind::torus: return "torus";
  }
  return "unknown";
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case ExperimentKind::patch:
      cfg.levels = {4};
      cfg.methods = {"curved", "barycentric"};
      break;
    case ExperimentKind::convergence:
      cfg.levels = {4, 8, 12, 16};
      cfg.methods = {"curved", "flattened"};
      break;
    case ExperimentKind::sphere:
      cfg.levels = {2, 4, 6, 8};
      cfg.amplitude = 0.0;
      cfg.methods = {"curved", "flattened"};
      break;
    case ExperimentKind::torus:
      cfg.levels = {4};
      cfg.methods = {"curved", "barycentric", "flattened"};
      break;
  }
  return cfg;
}

namespace {

json box_to_json(const Box& b) { return {{"lo", to_json(b.lo)}, {"hi", to_json(b.hi)}}; }
Box box_from_json(const json& j) { return {vec3_from_json(j.at("lo")), vec3_from_json(j.at("hi"))}; }

const std::set<std::string> kMethodNames{"curved", "barycentric", "flattened"};

}  // namespace

ExperimentConfig config_from_json(const json& doc, ExperimentKind kind) {
  static const std::set<std::string> known{
      "config_version", "experiment", "levels",  "amplitude", "seed",        "samples_per_edge",
      "r_in",           "r_out",      "torus_outer", "torus_hole", "tol",    "method",
      "methods",        "max_reseeds", "quadrature_refinement", "stabilization_scale"};
  if (!doc.is_object()) throw InvalidArgument("experiment config must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (!known.count(key)) throw InvalidArgument("unknown config key '" + key + "'");

  ExperimentConfig cfg = default_config(kind);
  try {
    if (doc.contains("config_version") && doc["config_version"].get<int>() != kConfigVersion)
      throw InvalidArgument("unsupported config_version");
    if (doc.contains("experiment") && parse_experiment_kind(doc["experiment"].get<std::string>()) != kind)
      throw InvalidArgument("config is for experiment '" + doc["experiment"].get<std::string>() + "'");
    if (doc.contains("levels")) cfg.levels = doc["levels"].get<std::vector<int>>();
    if (doc.contains("amplitude")) cfg.amplitude = doc["amplitude"].get<double>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("samples_per_edge")) cfg.samples_per_edge = doc["samples_per_edge"].get<int>();
    if (doc.contains("r_in")) cfg.r_in = doc["r_in"].get<double>();
    if (doc.contains("r_out")) cfg.r_out = doc["r_out"].get<double>();
    if (doc.contains("torus_outer")) cfg.torus_outer = box_from_json(doc["torus_outer"]);
    if (doc.contains("torus_hole")) cfg.torus_hole = box_from_json(doc["torus_hole"]);
    if (doc.contains("tol")) cfg.tol = doc["tol"].get<double>();
    if (doc.contains("method")) cfg.method = parse_solve_method(doc["method"].get<std::string>());
    if (doc.contains("methods")) cfg.methods = doc["methods"].get<std::vector<std::string>>();
    if (doc.contains("max_reseeds")) cfg.max_reseeds = doc["max_reseeds"].get<int>();
    if (doc.contains("quadrature_refinement")) cfg.quadrature_refinement = doc["quadrature_refinement"].get<int>();
    if (doc.contains("stabilization_scale")) cfg.stabilization_scale = doc["stabilization_scale"].get<double>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
  }

  if (cfg.levels.empty()) throw InvalidArgument("config: levels must not be empty");
  for (int n : cfg.levels)
    if (n < 1) throw InvalidArgument("config: every level must be >= 1");
  if (!(cfg.amplitude >= 0.0 && cfg.amplitude < 0.5)) throw InvalidArgument("config: amplitude must lie in [0, 0.5)");
  if (!(cfg.tol > 0.0 && cfg.tol < 1e-2)) throw InvalidArgument("config: tol must lie in (0, 1e-2)");
  if (cfg.max_reseeds < 0) throw InvalidArgument("config: max_reseeds must be >= 0");
  if (cfg.quadrature_refinement < 0) throw InvalidArgument("config: quadrature_refinement must be >= 0");
  if (!(cfg.stabilization_scale > 0.0)) throw InvalidArgument("config: stabilization_scale must be positive");
  if (cfg.methods.empty() || std::find(cfg.methods.begin(), cfg.methods.end(), "curved") == cfg.methods.end())
    throw InvalidArgument("config: methods must include 'curved'");
  for (const auto& m : cfg.methods)
    if (!kMethodNames.count(m)) throw InvalidArgument("config: unknown method '" + m + "'");
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  return {{"config_version", kConfigVersion},
          {"experiment", to_string(cfg.kind)},
          {"levels", cfg.levels},
          {"amplitude", cfg.amplitude},
          {"seed", cfg.seed},
          {"samples_per_edge", cfg.samples_per_edge},
          {"r_in", cfg.r_in},
          {"r_out", cfg.r_out},
          {"torus_outer", box_to_json(cfg.torus_outer)},
          {"torus_hole", box_to_json(cfg.torus_hole)},
          {"tol", cfg.tol},
          {"method", to_string(cfg.method)},
          {"methods", cfg.methods},
          {"max_reseeds", cfg.max_reseeds},
          {"quadrature_refinement", cfg.quadrature_refinement},
          {"stabilization_scale", cfg.stabilization_scale}};
}

const MethodRow* LevelResult::find(const std::string& method) const {
  for (const auto& m : methods)
    if (m.method == method) return &m;
  return nullptr;
}

double power_delta(const LevelResult& level, const std::string& a, const std::string& b) {
  const MethodRow* ra = level.find(a);
  const MethodRow* rb = level.find(b);
  if (!ra || !rb) return kNaN;
  return std::abs(ra->power - rb->power) / std::abs(rb->power);
}

SolvedState solve_problem(CurvedGrid grid, OperatorKind ops, const BoundaryConditions& bc,
                          const SolveOptions& options, double recon_tol, double stabilization_scale) {
  SolvedState s;
  s.geom = compute_geometry(grid);
  s.set = ops == OperatorKind::curved ? reconstruct(grid, s.geom, recon_tol) : barycentric_operators(grid, s.geom);
  s.mass = assemble_global_mass(grid, s.geom, s.set, {}, stabilization_scale);
  const MixedSystem sys = assemble_mixed(grid, s.set, s.mass, bc);
  s.solution = solve_mixed(sys, options);
  s.fields = reconstruct_cell_fields(grid, s.set, s.solution.J);
  s.grid = std::move(grid);
  return s;
}

double fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_rate: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

constexpr std::uint64_t kReseedStride = 0x9E3779B97F4A7C15ull;

struct Problem {
  BoundaryConditions bc;
  VectorField exact_flux;  // empty if unknown
  double reference_power = kNaN;
};

struct LevelSetup {
  double h = 0.0;
  std::function<CurvedGrid(std::uint64_t seed)> make_grid;
};

bool wants(const ExperimentConfig& cfg, const std::string& method) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), method) != cfg.methods.end();
}

MethodRow measure(const std::string& name, const SolvedState& s, const Problem& prob, const ExperimentConfig& cfg,
                  double seconds) {
  MethodRow row;
  row.method = name;
  row.num_faces = s.grid.num_faces();
  row.num_cells = s.grid.num_cells();
  const ConsistencyReport cons = check_consistency(s.grid, s.geom, s.set, cfg.tol);
  row.p1 = cons.p1;
  row.p2 = cons.p2;
  row.continuity = s.solution.continuity;
  row.power = dissipated_power(s.solution.J, s.mass.M);
  if (std::isfinite(prob.reference_power))
    row.power_error = std::abs(row.power - prob.reference_power) / std::abs(prob.reference_power);
  if (prob.exact_flux) {
    const Eigen::VectorXd je = project_exact_flux(s.grid, s.geom, prob.exact_flux, cfg.quadrature_refinement);
    row.flux_error = flux_error(s.solution.J, je, s.mass.M);
  }
  row.solve_seconds = seconds;
  return row;
}

void assert_invariants(const MethodRow& row, const SolvedState& s, const ExperimentConfig& cfg, bool consistent,
                       ExperimentReport& report, int level) {
  const std::string where = row.method + " at level " + std::to_string(level);
  if (consistent && !(row.p1 <= cfg.tol && row.p2 <= cfg.tol)) {
    throw Error("consistency check failed for " + where + ": (P1) " + std::to_string(row.p1) + ", (P2) " +
                std::to_string(row.p2));
  }
  const double scale = std::max(1.0, s.solution.J.cwiseAbs().maxCoeff());
  if (!(row.continuity <= cfg.tol * scale)) {
    report.invariants_pass = false;
    report.log.push_back("continuity residual " + std::to_string(row.continuity) + " above tolerance for " + where);
  }
}

template <class Clock = std::chrono::steady_clock>
double seconds_since(typename Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ExperimentReport run_levels(const ExperimentConfig& cfg, const Problem& prob,
                            const std::function<LevelSetup(int n)>& setup, bool randomized) {
  ExperimentReport report;
  report.config = cfg;
  report.reference_power = prob.reference_power;
  const SolveOptions opts{cfg.tol, cfg.method, 0};
  double finest_h = 0.0;

  for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
    const int n = cfg.levels[li];
    const LevelSetup ls = setup(n);
    LevelResult level;
    level.level = n;
    level.h = ls.h;
    const std::uint64_t base_seed = cfg.seed + static_cast<std::uint64_t>(li);

    std::shared_ptr<SolvedState> curved;
    double curved_seconds = 0.0;
    for (int attempt = 0;; ++attempt) {
      level.seed = base_seed + static_cast<std::uint64_t>(attempt) * kReseedStride;
      level.reseeds = attempt;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        curved = std::make_shared<SolvedState>(
            solve_problem(ls.make_grid(level.seed), OperatorKind::curved, prob.bc, opts, cfg.tol, cfg.stabilization_scale));
        curved_seconds = seconds_since(t0);
        break;
      } catch (const RankDeficient& e) {
        report.log.push_back("level " + std::to_string(n) + " seed " + std::to_string(level.seed) + ": " +
                             e.what() + " (" + e.diagnosis() + ")");
        if (!randomized || attempt >= cfg.max_reseeds) throw;
      }
    }

    level.methods.push_back(measure("curved", *curved, prob, cfg, curved_seconds));
    assert_invariants(level.methods.back(), *curved, cfg, true, report, n);

    if (wants(cfg, "barycentric")) {
      const auto t0 = std::chrono::steady_clock::now();
      const SolvedState s = solve_problem(curved->grid, OperatorKind::barycentric, prob.bc, opts, cfg.tol, cfg.stabilization_scale);
      level.methods.push_back(measure("barycentric", s, prob, cfg, seconds_since(t0)));
      assert_invariants(level.methods.back(), s, cfg, false, report, n);
    }
    if (wants(cfg, "flattened")) {
      const auto t0 = std::chrono::steady_clock::now();
      const SolvedState s = solve_problem(flatten_grid(curved->grid), OperatorKind::barycentric, prob.bc, opts, cfg.tol,
                                          cfg.stabilization_scale);
      level.methods.push_back(measure("flattened", s, prob, cfg, seconds_since(t0)));
      assert_invariants(level.methods.back(), s, cfg, true, report, n);
    }
    if (!report.finest_curved || level.h < finest_h) {
      report.finest_curved = curved;
      finest_h = level.h;
    }
    report.levels.push_back(std::move(level));
  }

  std::stable_sort(report.levels.begin(), report.levels.end(),
                   [](const LevelResult& a, const LevelResult& b) { return a.h > b.h; });

  for (const auto& method : cfg.methods) {
    std::vector<double> hs, errs;
    for (const auto& level : report.levels) {
      const MethodRow* row = level.find(method);
      if (!row) continue;
      const double e = cfg.kind == ExperimentKind::sphere ? row->power_error : row->flux_error;
      if (!(e > 0.0) || !std::isfinite(e)) continue;
      hs.push_back(level.h);
      errs.push_back(e);
    }
    if (hs.size() >= 3 && hs.size() == report.levels.size()) {
      report.rates[method] = fit_rate(hs, errs);
      if (hs.size() >= 4)
        report.rates_without_coarsest[method] = fit_rate({hs.begin() + 1, hs.end()}, {errs.begin() + 1, errs.end()});
    }
  }
  return report;
}

BoundaryTag resistor_tags(const Vec3& center) {
  if (center.z() <= 1e-12) return BoundaryTag::electrode_tag(0);
  if (center.z() >= 1.0 - 1e-12) return BoundaryTag::electrode_tag(1);
  return BoundaryTag::neumann();
}

}  // namespace

ExperimentReport run_patch(const ExperimentConfig& cfg) {
  Problem prob;
  prob.bc.potential = [](const Vec3& x) { return x.z(); };
  prob.exact_flux = [](const Vec3&) { return Vec3(0, 0, -1); };
  prob.reference_power = 1.0;
  const double amplitude = cfg.amplitude;
  return run_levels(
      cfg, prob,
      [amplitude](int n) {
        const double h = 1.0 / n;
        return LevelSetup{h, [=](std::uint64_t seed) {
                            return perturb_grid(build_cubic_grid(n, h, resistor_tags), amplitude, seed, h);
                          }};
      },
      amplitude > 0.0);
}

ExperimentReport run_convergence(const ExperimentConfig& cfg) {
  if (cfg.levels.size() < 3) throw InvalidArgument("run_convergence: at least 3 levels required");
  Problem prob;
  prob.bc.potential = [](const Vec3& x) { return x.x() * x.x() - 2 * x.y() * x.y() + x.z() * x.z(); };
  prob.exact_flux = [](const Vec3& x) { return Vec3(-2 * x.x(), 4 * x.y(), -2 * x.z()); };
  prob.reference_power = 8.0;
  const double amplitude = cfg.amplitude;
  return run_levels(
      cfg, prob,
      [amplitude](int n) {
        const double h = 1.0 / n;
        return LevelSetup{h, [=](std::uint64_t seed) {
                            return perturb_grid(build_cubic_grid(n, h), amplitude, seed, h);
                          }};
      },
      amplitude > 0.0);
}

ExperimentReport run_sphere(const ExperimentConfig& cfg) {
  if (!(cfg.r_in > 0.0 && cfg.r_out > cfg.r_in)) throw InvalidArgument("run_sphere: need 0 < r_in < r_out");
  Problem prob;
  prob.bc.electrode_potentials = {{0, 0.0}, {1, 1.0}};
  // Octant of a spherical shell: 4 pi sigma / (1/r_in - 1/r_out) / 8 at 1 V.
  prob.reference_power = 0.5 * std::numbers::pi / (1.0 / cfg.r_in - 1.0 / cfg.r_out);
  const ExperimentConfig c = cfg;
  return run_levels(
      cfg, prob,
      [c](int n) {
        SphereOctantParams p{n, n, n, c.r_in, c.r_out, c.samples_per_edge};
        return LevelSetup{(c.r_out - c.r_in) / n, [=](std::uint64_t) { return build_spherical_octant_grid(p); }};
      },
      false);
}

ExperimentReport run_torus(const ExperimentConfig& cfg) {
  Problem prob;
  prob.bc.electrode_potentials = {{0, 0.0}, {1, 1.0}};
  const ExperimentConfig c = cfg;
  return run_levels(
      cfg, prob,
      [c](int n) {
        SquareTorusParams p{c.torus_outer, c.torus_hole, n, c.amplitude, 0};
        SquareTorusInfo info;
        build_square_torus_grid(p, &info);
        return LevelSetup{info.h, [=](std::uint64_t seed) {
                            SquareTorusParams q = p;
                            q.seed = seed;
                            return build_square_torus_grid(q);
                          }};
      },
      cfg.amplitude > 0.0);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::patch: return run_patch(cfg);
    case ExperimentKind::convergence: return run_convergence(cfg);
    case ExperimentKind::sphere: return run_sphere(cfg);
    case ExperimentKind::torus: return run_torus(cfg);
  }
  throw InvalidArgument("unknown experiment kind");
}

}  // namespace cmfd
