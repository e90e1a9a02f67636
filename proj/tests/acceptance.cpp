// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/SparseCholesky>

#include "cmfd/errors.hpp"
#include "cmfd/experiments.hpp"

using namespace cmfd;

namespace {

constexpr double kPatchTol = 1e-9;
constexpr double kBaselinePowerBand = 1e-3;
constexpr double kMinRate = 0.9;
constexpr double kRateGap = 0.15;
constexpr double kConvergenceSeconds = 60.0;
constexpr double kPatchSeconds = 5.0;
constexpr double kSpherePowerBand = 0.02;
constexpr double kConsistencyTol = 1e-10;
constexpr double kClosureTol = 1e-12;
constexpr double kMassTol = 1e-10;
constexpr double kContinuityTol = 1e-10;
constexpr double kEquivariancePoints = 1e-9;
constexpr double kEquivarianceSolution = 1e-8;
constexpr double kPlanarPoints = 1e-10;
constexpr double kPlanarSolution = 1e-10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Uniform random rotation from a normalized Gaussian quaternion.
Eigen::Matrix3d random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Eigen::Quaterniond q(n01(rng), n01(rng), n01(rng), n01(rng));
  return q.normalized().toRotationMatrix();
}

CurvedGrid perturbed(int n, double amplitude, std::uint64_t seed) {
  const double h = 1.0 / n;
  return perturb_grid(build_cubic_grid(n, h), amplitude, seed, h);
}

double harmonic(const Vec3& x) { return x.x() * x.x() - 2 * x.y() * x.y() + x.z() * x.z(); }

ExperimentReport patch_report;
double patch_seconds = 0.0;

Outcome patch_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  patch_report = run_patch(default_config(ExperimentKind::patch));
  patch_seconds = seconds_since(t0);
  const MethodRow* row = patch_report.levels.at(0).find("curved");
  double field_dev = 0.0;
  for (const Vec3& v : patch_report.finest_curved->fields) field_dev = std::max(field_dev, (v - Vec3(0, 0, -1)).norm());
  const bool ok = row->flux_error <= kPatchTol && field_dev <= kPatchTol && patch_seconds < kPatchSeconds;
  return {ok, "e^F " + fmt(row->flux_error) + ", max |field - (0,0,-1)| " + fmt(field_dev) + ", " +
                  fmt(patch_seconds) + " s"};
}

Outcome baseline_inconsistency() {
  const MethodRow* row = patch_report.levels.at(0).find("barycentric");
  return {row->power_error > kBaselinePowerBand, "barycentric power error " + fmt(row->power_error)};
}

Outcome convergence_order() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentReport r = run_convergence(default_config(ExperimentKind::convergence));
  const double secs = seconds_since(t0);
  const double curved = r.rates.at("curved"), flat = r.rates.at("flattened");
  const bool ok = curved >= kMinRate && std::abs(curved - flat) <= kRateGap && secs < kConvergenceSeconds;
  return {ok, "curved rate " + fmt(curved) + ", flattened rate " + fmt(flat) + ", " + fmt(secs) + " s"};
}

Outcome spherical_resistor() {
  const ExperimentReport r = run_sphere(default_config(ExperimentKind::sphere));
  const MethodRow* finest = r.levels.back().find("curved");
  const MethodRow* coarse_c = r.levels.front().find("curved");
  const MethodRow* coarse_f = r.levels.front().find("flattened");
  const bool ok = finest->power_error <= kSpherePowerBand && coarse_c->power_error <= coarse_f->power_error;
  return {ok, "finest power error " + fmt(finest->power_error) + " (band " + fmt(kSpherePowerBand) +
                  "), coarsest curved " + fmt(coarse_c->power_error) + " vs flattened " +
                  fmt(coarse_f->power_error)};
}

Outcome consistency_suite() {
  int rank_failures = 0, consistency_failures = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const CurvedGrid g = perturbed(3, 0.3, seed);
    const GridGeometry geom = compute_geometry(g);
    if (!rank_probe(assemble_constraints(g, geom).P).full_rank) ++rank_failures;
    const ConsistencyReport rep = check_consistency(g, geom, reconstruct(g, geom, kConsistencyTol), kConsistencyTol);
    worst = std::max({worst, rep.p1, rep.p2});
    if (!(rep.p1 <= kConsistencyTol && rep.p2 <= kConsistencyTol)) ++consistency_failures;
  }
  return {rank_failures == 0 && consistency_failures == 0,
          std::to_string(rank_failures) + " rank failures, " + std::to_string(consistency_failures) +
              " consistency failures, worst residual " + fmt(worst)};
}

std::vector<CurvedGrid> all_grids() {
  std::vector<CurvedGrid> out;
  for (int n = 1; n <= 4; ++n) out.push_back(build_cubic_grid(n, 1.0 / n));
  std::uint64_t seed = 42;
  for (int n : default_config(ExperimentKind::convergence).levels) out.push_back(perturbed(n, 0.3, seed++));
  for (int n : default_config(ExperimentKind::sphere).levels) out.push_back(build_spherical_octant_grid({n, n, n, 1.0, 2.0, 8}));
  SquareTorusParams tp;
  tp.amplitude = 0.3;
  tp.seed = 42;
  out.push_back(build_square_torus_grid(tp));
  const std::size_t base = out.size();
  for (std::size_t i = 0; i < base; ++i) out.push_back(flatten_grid(out[i]));
  return out;
}

Outcome structural_identities() {
  int bad = 0;
  double worst = 0.0;
  const auto grids = all_grids();
  for (const CurvedGrid& g : grids) {
    const ValidationReport rep = validate_complex(g);
    if (!rep.dc_zero || !rep.cg_zero) ++bad;
    const GridGeometry geom = compute_geometry(g);
    for (Index c = 0; c < g.num_cells(); ++c) {
      Vec3 s = Vec3::Zero();
      double norms = 0.0;
      for (const auto& cf : g.cells()[static_cast<std::size_t>(c)].faces) {
        s += cf.sign * geom.face(cf.face).face_vector;
        norms += geom.face(cf.face).face_vector.norm();
      }
      worst = std::max(worst, s.norm() / norms);
    }
  }
  return {bad == 0 && worst <= kClosureTol, std::to_string(grids.size()) + " grids, " + std::to_string(bad) +
                                                " with D*C or C*G != 0, worst closure " + fmt(worst)};
}

Outcome algebraic_invariants() {
  struct Case {
    CurvedGrid grid;
    BoundaryConditions bc;
  };
  std::vector<Case> cases;
  BoundaryConditions hb;
  hb.potential = harmonic;
  cases.push_back({perturbed(4, 0.3, 42), hb});
  cases.push_back({build_spherical_octant_grid({4, 4, 4, 1.0, 2.0, 8}), {{{0, 0.0}, {1, 1.0}}, {}}});
  SquareTorusParams tp;
  tp.amplitude = 0.3;
  tp.seed = 42;
  cases.push_back({build_square_torus_grid(tp), {{{0, 0.0}, {1, 1.0}}, {}}});

  bool cholesky = true;
  double asym = 0.0, cons = 0.0, cont = 0.0;
  for (const Case& k : cases) {
    const GridGeometry geom = compute_geometry(k.grid);
    const ReconstructionSet set = reconstruct(k.grid, geom);
    const FaceMass fm = assemble_global_mass(k.grid, geom, set);
    asym = std::max(asym, SparseMatrix(fm.M - SparseMatrix(fm.M.transpose())).coeffs().cwiseAbs().maxCoeff());
    Eigen::SimplicialLLT<SparseMatrix> llt(fm.M);
    cholesky = cholesky && llt.info() == Eigen::Success;
    for (Index c = 0; c < k.grid.num_cells(); ++c) {
      const Eigen::MatrixX3d P = local_projection(k.grid, geom, c);
      const OperatorMatrix& R = set.R[static_cast<std::size_t>(c)];
      const Eigen::MatrixXd rhs = geom.cell(c).volume * R.transpose() * fm.K[static_cast<std::size_t>(c)];
      cons = std::max(cons, (fm.local[static_cast<std::size_t>(c)] * P - rhs).norm() / rhs.norm());
    }
    const SolveResult r = solve_mixed(assemble_mixed(k.grid, set, fm, k.bc));
    cont = std::max(cont, r.continuity);
  }
  const bool ok = cholesky && asym == 0.0 && cons <= kMassTol && cont <= kContinuityTol;
  return {ok, "asymmetry " + fmt(asym) + ", Cholesky " + std::string(cholesky ? "ok" : "failed") + ", M_c P_c residual " +
                  fmt(cons) + ", |DJ|_inf " + fmt(cont)};
}

Outcome equivariance() {
  const CurvedGrid g = perturbed(3, 0.3, 42);
  const GridGeometry geom = compute_geometry(g);
  const ReconstructionSet set = reconstruct(g, geom);
  const FaceMass fm = assemble_global_mass(g, geom, set);
  BoundaryConditions bc;
  bc.potential = harmonic;
  const SolveResult ref = solve_mixed(assemble_mixed(g, set, fm, bc));
  const std::vector<Vec3> ref_fields = reconstruct_cell_fields(g, set, ref.J);

  double point_err = 0.0, sol_err = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Eigen::Matrix3d L = random_rotation(seed);
    const CurvedGrid rg = g.transformed([&](const Vec3& p) { return Vec3(L * p); });
    const GridGeometry rgeom = compute_geometry(rg);
    const ReconstructionSet rset = reconstruct(rg, rgeom);
    for (Index f = 0; f < g.num_faces(); ++f)
      point_err = std::max(point_err, (rset.b_f[static_cast<std::size_t>(f)] - L * set.b_f[static_cast<std::size_t>(f)]).norm());
    BoundaryConditions rbc;
    rbc.potential = [L](const Vec3& x) { return harmonic(L.transpose() * x); };
    const FaceMass rfm = assemble_global_mass(rg, rgeom, rset);
    const SolveResult rs = solve_mixed(assemble_mixed(rg, rset, rfm, rbc));
    sol_err = std::max(sol_err, (rs.J - ref.J).norm() / ref.J.norm());
    sol_err = std::max(sol_err, (rs.U - ref.U).norm() / ref.U.norm());
    const std::vector<Vec3> fields = reconstruct_cell_fields(rg, rset, rs.J);
    for (std::size_t c = 0; c < fields.size(); ++c)
      sol_err = std::max(sol_err, (L.transpose() * fields[c] - ref_fields[c]).norm() / ref_fields[c].norm());
  }
  return {point_err <= kEquivariancePoints && sol_err <= kEquivarianceSolution,
          "b_f error " + fmt(point_err) + ", mapped solution error " + fmt(sol_err)};
}

Outcome planar_degeneration() {
  BoundaryConditions bc;
  bc.potential = harmonic;
  std::vector<std::pair<CurvedGrid, BoundaryConditions>> cases;
  cases.emplace_back(build_cubic_grid(4, 0.25), bc);
  cases.emplace_back(build_square_torus_grid({}), BoundaryConditions{{{0, 0.0}, {1, 1.0}}, {}});
  double point_err = 0.0, sol_err = 0.0;
  bool same_layout = true;
  for (const auto& [g, b] : cases) {
    const GridGeometry geom = compute_geometry(g);
    const SolveOptions opts;
    const SolvedState curved = solve_problem(g, OperatorKind::curved, b, opts);
    const SolvedState bary = solve_problem(g, OperatorKind::barycentric, b, opts);
    const SolvedState flat = solve_problem(flatten_grid(g), OperatorKind::barycentric, b, opts);
    for (Index f = 0; f < g.num_faces(); ++f)
      point_err = std::max(point_err, (curved.set.b_f[static_cast<std::size_t>(f)] - geom.face(f).anchor).norm());
    same_layout = same_layout && flat.grid.num_faces() == g.num_faces();
    const Eigen::VectorXd& J = curved.solution.J;
    sol_err = std::max(sol_err, (bary.solution.J - J).norm() / J.norm());
    if (same_layout) sol_err = std::max(sol_err, (flat.solution.J - J).norm() / J.norm());
    sol_err = std::max(sol_err, (bary.solution.U - curved.solution.U).norm() / curved.solution.U.norm());
  }
  return {same_layout && point_err <= kPlanarPoints && sol_err <= kPlanarSolution,
          "max |b_f - barycenter| " + fmt(point_err) + ", max relative solution difference " + fmt(sol_err)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"patch-test exactness", patch_exactness},
      {"baseline inconsistency witnessed", baseline_inconsistency},
      {"convergence order", convergence_order},
      {"spherical resistor", spherical_resistor},
      {"P0-consistency suite", consistency_suite},
      {"structural identities", structural_identities},
      {"algebraic invariants", algebraic_invariants},
      {"equivariance", equivariance},
      {"planar degeneration", planar_degeneration},
  };
  int failures = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << index << " (" << name << "): " << o.detail << std::endl;
  }
  std::cout << failures << " of " << index << " criteria failed" << std::endl;
  return failures == 0 ? 0 : 1;
}
