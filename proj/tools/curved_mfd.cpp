#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "cmfd/errors.hpp"
#include "cmfd/experiments.hpp"
#include "cmfd/mesh_io.hpp"
#include "cmfd/report.hpp"

namespace fs = std::filesystem;
using namespace cmfd;

namespace {

int mesh_generate(const std::string& kind, int n, double h, double amplitude, std::uint64_t seed, int spe,
                  const fs::path& out) {
  CurvedGrid grid;
  if (kind == "cubic") {
    grid = build_cubic_grid(n, h);
  } else if (kind == "perturbed") {
    grid = perturb_grid(build_cubic_grid(n, h), amplitude, seed, h);
  } else if (kind == "sphere") {
    grid = build_spherical_octant_grid({n, n, n, 1.0, 2.0, spe});
  } else if (kind == "torus") {
    SquareTorusParams p;
    p.n = n;
    p.amplitude = amplitude;
    p.seed = seed;
    grid = build_square_torus_grid(p);
  } else {
    throw InvalidArgument("unknown mesh kind '" + kind + "'");
  }
  write_mesh(grid, out);
  std::cout << "wrote " << out.string() << ": " << grid.num_nodes() << " nodes, " << grid.num_edges() << " edges, "
            << grid.num_faces() << " faces, " << grid.num_cells() << " cells\n";
  return 0;
}

int mesh_check(const fs::path& path) {
  const CurvedGrid grid = read_mesh(path);
  const ValidationReport rep = validate_complex(grid);
  auto line = [](const char* name, bool ok) { std::cout << (ok ? "PASS " : "FAIL ") << name << '\n'; };
  line("D*C = 0", rep.dc_zero);
  line("C*G = 0", rep.cg_zero);
  line("face loops closed", rep.loops_closed);
  line("polyline endpoints", rep.polyline_endpoints);
  line("face multiplicity", rep.face_multiplicity);
  line("boundary tags", rep.tags_consistent);
  for (const auto& v : rep.violations) std::cout << "  " << v << '\n';
  return rep.pass() ? 0 : 1;
}

int recon_solve(const fs::path& mesh, double tol, const fs::path& out) {
  const CurvedGrid grid = read_mesh(mesh);
  const GridGeometry geom = compute_geometry(grid);
  const ReconstructionSet set = reconstruct(grid, geom, tol);
  const ConsistencyReport rep = check_consistency(grid, geom, set, tol);
  write_json_file(recon_to_json(set, rep), out);
  std::cout << "constraint residual " << set.constraint_residual << ", (P1) " << rep.p1 << ", (P2) " << rep.p2
            << '\n';
  return rep.pass ? 0 : 1;
}

int recon_check(const fs::path& mesh, const fs::path& recon, double tol) {
  const CurvedGrid grid = read_mesh(mesh);
  const GridGeometry geom = compute_geometry(grid);
  const ReconstructionSet set = recon_from_json(read_json_file(recon), grid, geom);
  const ConsistencyReport rep = check_consistency(grid, geom, set, tol);
  std::cout << (rep.p1 <= tol ? "PASS" : "FAIL") << " (P1) max residual " << rep.p1 << '\n'
            << (rep.p2 <= tol ? "PASS" : "FAIL") << " (P2) max residual " << rep.p2 << '\n';
  return rep.pass ? 0 : 1;
}

int solve(const fs::path& mesh, const fs::path& recon, const fs::path& bc_path, double tol, const std::string& method,
          const fs::path& out) {
  const CurvedGrid grid = read_mesh(mesh);
  const GridGeometry geom = compute_geometry(grid);
  const ReconstructionSet set = recon.empty() ? reconstruct(grid, geom) : recon_from_json(read_json_file(recon), grid, geom);
  const FaceMass mass = assemble_global_mass(grid, geom, set);
  const MixedSystem sys = assemble_mixed(grid, set, mass, bc_from_json(read_json_file(bc_path)));
  const SolveResult res = solve_mixed(sys, {tol, parse_solve_method(method), 0});
  const double power = dissipated_power(res.J, mass.M);
  write_json_file(solution_to_json(res, reconstruct_cell_fields(grid, set, res.J), power), out);
  std::cout << "power " << power << " W, residual " << res.residual << ", |DJ|_inf " << res.continuity << ", "
            << res.iterations << " iterations\n";
  return 0;
}

int run(const std::string& experiment, const fs::path& config, const std::uint64_t* seed, const fs::path& out) {
  const ExperimentKind kind = parse_experiment_kind(experiment);
  ExperimentConfig cfg = config.empty() ? config_from_json(nlohmann::json::object(), kind)
                                        : config_from_json(read_json_file(config), kind);
  if (seed) cfg.seed = *seed;
  const ExperimentReport report = run_experiment(cfg);
  std::cout << report_to_csv(report);
  for (const auto& line : report.log) std::cerr << line << '\n';
  if (!out.empty()) {
    fs::create_directories(out);
    export_csv(report, out / (experiment + ".csv"));
    write_json_file(report_to_json(report), out / (experiment + ".json"));
    if (report.finest_curved) {
      const SolvedState& s = *report.finest_curved;
      export_vtk(s.grid, s.geom, s.set, s.solution.J, out / (experiment + ".vtk"));
    }
  }
  return report.invariants_pass ? 0 : 1;
}

int export_vtk_cmd(const fs::path& mesh, const fs::path& recon, const fs::path& solution, const fs::path& out) {
  const CurvedGrid grid = read_mesh(mesh);
  const GridGeometry geom = compute_geometry(grid);
  const ReconstructionSet set = recon_from_json(read_json_file(recon), grid, geom);
  const SolveResult res = solution_from_json(read_json_file(solution));
  export_vtk(grid, geom, set, res.J, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curved mimetic finite differences: meshes, reconstruction operators, mixed solves, experiments"};
  app.require_subcommand(1);

  auto* mesh = app.add_subcommand("mesh", "Generate or check meshes");
  mesh->require_subcommand(1);
  auto* gen = mesh->add_subcommand("generate", "Write a generated mesh");
  gen->set_help_flag("--help", "Print this help message and exit");
  std::string kind = "cubic";
  int n = 2;
  double h = 1.0, amplitude = 0.3, tol = 1e-10;
  std::uint64_t seed = 42;
  int spe = 8;
  fs::path out, mesh_path, recon_path, bc_path, config_path, solution_path;
  gen->add_option("--kind", kind, "cubic | perturbed | sphere | torus")
      ->check(CLI::IsMember({"cubic", "perturbed", "sphere", "torus"}));
  gen->add_option("--n", n, "Resolution")->check(CLI::PositiveNumber);
  gen->add_option("--h", h, "Edge length (cubic, perturbed)");
  gen->add_option("--amplitude", amplitude, "Node displacement as a fraction of h");
  gen->add_option("--seed", seed, "Perturbation seed");
  gen->add_option("--samples-per-edge", spe, "Polyline samples on curved edges (sphere)");
  gen->add_option("--out", out, "Output mesh file")->required();
  auto* check = mesh->add_subcommand("check", "Validate a mesh file");
  check->add_option("mesh", mesh_path, "Mesh file")->required()->check(CLI::ExistingFile);

  auto* recon = app.add_subcommand("recon", "Reconstruction operators");
  recon->require_subcommand(1);
  auto* rsolve = recon->add_subcommand("solve", "Solve for the generalized dual points");
  rsolve->add_option("mesh", mesh_path, "Mesh file")->required()->check(CLI::ExistingFile);
  rsolve->add_option("--tol", tol, "Relative constraint tolerance");
  rsolve->add_option("--out", out, "Output reconstruction file")->required();
  auto* rcheck = recon->add_subcommand("check", "Check (P1)/(P2) of a stored reconstruction");
  rcheck->add_option("mesh", mesh_path, "Mesh file")->required()->check(CLI::ExistingFile);
  rcheck->add_option("recon", recon_path, "Reconstruction file")->required()->check(CLI::ExistingFile);
  rcheck->add_option("--tol", tol, "Tolerance");

  auto* solve_cmd = app.add_subcommand("solve", "Solve the mixed conduction problem");
  std::string method = "direct";
  solve_cmd->add_option("--mesh", mesh_path, "Mesh file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--recon", recon_path, "Reconstruction file (computed if omitted)")->check(CLI::ExistingFile);
  solve_cmd->add_option("--bc", bc_path, "Boundary-condition file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--tol", tol, "Relative residual tolerance");
  solve_cmd->add_option("--method", method, "direct | minres")->check(CLI::IsMember({"direct", "minres"}));
  solve_cmd->add_option("--out", out, "Output solution file")->required();

  auto* run_cmd = app.add_subcommand("run", "Run an experiment");
  std::string experiment;
  run_cmd->add_option("experiment", experiment, "patch | convergence | sphere | torus")
      ->required()
      ->check(CLI::IsMember({"patch", "convergence", "sphere", "torus"}));
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--out", out, "Output directory for CSV, JSON and VTK");

  auto* vtk = app.add_subcommand("export-vtk", "Write a VTK file from stored mesh, reconstruction and solution");
  vtk->add_option("--mesh", mesh_path, "Mesh file")->required()->check(CLI::ExistingFile);
  vtk->add_option("--recon", recon_path, "Reconstruction file")->required()->check(CLI::ExistingFile);
  vtk->add_option("--solution", solution_path, "Solution file")->required()->check(CLI::ExistingFile);
  vtk->add_option("--out", out, "Output VTK file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return mesh_generate(kind, n, h, amplitude, seed, spe, out);
    if (check->parsed()) return mesh_check(mesh_path);
    if (rsolve->parsed()) return recon_solve(mesh_path, tol, out);
    if (rcheck->parsed()) return recon_check(mesh_path, recon_path, tol);
    if (solve_cmd->parsed()) return solve(mesh_path, recon_path, bc_path, tol, method, out);
    if (run_cmd->parsed()) return run(experiment, config_path, seed_opt->count() ? &seed : nullptr, out);
    if (vtk->parsed()) return export_vtk_cmd(mesh_path, recon_path, solution_path, out);
  } catch (const RankDeficient& e) {
    std::cerr << "error: " << e.what() << " (" << e.diagnosis() << ")\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
