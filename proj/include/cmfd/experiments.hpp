#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmfd/generators.hpp"
#include "cmfd/solver.hpp"

namespace cmfd {

enum class ExperimentKind { patch, convergence, sphere, torus };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

/// Method names used in reports: "curved", "barycentric", "flattened".
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::patch;
  /// Resolution per level: cells per axis (patch, convergence), cells per
  /// direction (sphere), cells across the cut arm (torus).
  std::vector<int> levels;
  double amplitude = 0.3;
  std::uint64_t seed = 42;
  int samples_per_edge = 8;
  double r_in = 1.0;
  double r_out = 2.0;
  Box torus_outer{Vec3(0, 0, 0), Vec3(3, 3, 1)};
  Box torus_hole{Vec3(1, 1, 0), Vec3(2, 2, 1)};
  double tol = 1e-10;
  SolveMethod method = SolveMethod::direct;
  std::vector<std::string> methods;
  int max_reseeds = 3;
  int quadrature_refinement = 1;
  /// Multiplies the stabilization scalar of every local mass matrix.
  double stabilization_scale = 1.0;
};

ExperimentConfig default_config(ExperimentKind kind);

/// Overrides defaults for `kind` with the keys present in `doc`. Unknown keys
/// are rejected. Optional "experiment" must match `kind` when given.
ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentKind kind);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

inline constexpr int kConfigVersion = 1;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct MethodRow {
  std::string method;
  Index num_faces = 0;
  Index num_cells = 0;
  double flux_error = kNaN;
  double power = kNaN;
  double power_error = kNaN;  // relative to the analytic reference, when one exists
  double p1 = kNaN;
  double p2 = kNaN;
  double continuity = kNaN;
  double solve_seconds = 0.0;
};

struct LevelResult {
  int level = 0;
  double h = 0.0;
  std::uint64_t seed = 0;
  int reseeds = 0;
  std::vector<MethodRow> methods;

  const MethodRow* find(const std::string& method) const;
};

/// Everything produced by one discretize-and-solve pass.
struct SolvedState {
  CurvedGrid grid;
  GridGeometry geom;
  ReconstructionSet set;
  FaceMass mass;
  SolveResult solution;
  std::vector<Vec3> fields;
};

enum class OperatorKind { curved, barycentric };

SolvedState solve_problem(CurvedGrid grid, OperatorKind ops, const BoundaryConditions& bc,
                          const SolveOptions& options, double recon_tol = 1e-10, double stabilization_scale = 1.0);

struct ExperimentReport {
  ExperimentConfig config;
  double reference_power = kNaN;
  std::vector<LevelResult> levels;  // decreasing h
  /// Least-squares log-log slope per method: of e^F (patch, convergence) or of
  /// the power error (sphere). Present only with at least 3 levels.
  std::map<std::string, double> rates;
  std::map<std::string, double> rates_without_coarsest;
  std::vector<std::string> log;
  bool invariants_pass = true;
  /// Curved-method state on the finest level, for export.
  std::shared_ptr<const SolvedState> finest_curved;
};

/// Least-squares slope of log(y) against log(x).
double fit_rate(const std::vector<double>& x, const std::vector<double>& y);

ExperimentReport run_patch(const ExperimentConfig& cfg);
ExperimentReport run_convergence(const ExperimentConfig& cfg);
ExperimentReport run_sphere(const ExperimentConfig& cfg);
ExperimentReport run_torus(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// |P_a - P_b| / |P_b| on one level; NaN if either method is missing.
double power_delta(const LevelResult& level, const std::string& a, const std::string& b);

}  // namespace cmfd
