#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cmfd/discretization.hpp"

namespace cmfd {

/// Dirichlet data on electrode faces. If `potential` is set it is evaluated at
/// b_f for every electrode face; otherwise each electrode index needs a constant.
struct BoundaryConditions {
  std::map<int, double> electrode_potentials;
  std::function<double(const Vec3&)> potential;
};

/// Symmetric saddle-point system on (J restricted to non-Neumann faces, U):
///
///   [  M  -D^T ] [J]   [b_F]
///   [ -D   0   ] [U] = [ 0 ]
///
/// b_F[f] = -g(b_f) D[c(f),f] on electrode faces. Neumann faces carry J_f = 0
/// and are removed from the system.
struct MixedSystem {
  SparseMatrix A;
  Eigen::VectorXd rhs;
  Index num_faces = 0;
  Index num_cells = 0;
  std::vector<Index> active_faces;  // flux unknown k -> face id
  std::vector<Index> face_dof;      // face id -> flux unknown, -1 if eliminated
  std::vector<Index> neumann_faces;
  SparseMatrix D;                   // |C| x |F|, full face numbering
  Eigen::VectorXd mass_diagonal;    // diag(M) on active faces

  Index num_flux_unknowns() const { return static_cast<Index>(active_faces.size()); }
};

MixedSystem assemble_mixed(const CurvedGrid& grid, const ReconstructionSet& set, const FaceMass& mass,
                           const BoundaryConditions& bc);

enum class SolveMethod { direct, minres };

SolveMethod parse_solve_method(const std::string& name);
std::string to_string(SolveMethod method);

struct SolveOptions {
  double tol = 1e-10;
  SolveMethod method = SolveMethod::direct;
  int max_iterations = 0;  // 0: 10 * system size
};

struct SolveResult {
  Eigen::VectorXd J;  // one entry per face
  Eigen::VectorXd U;  // one entry per cell
  double residual = 0.0;    // ||A x - b|| / ||b||
  double continuity = 0.0;  // ||D J||_inf
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Throws NonConvergence on factorization breakdown, residual above tol, or
/// iteration limit.
SolveResult solve_mixed(const MixedSystem& system, const SolveOptions& options = {});

struct MinresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // preconditioned residual estimate relative to its initial value
};

/// Preconditioned MINRES for symmetric A with SPD preconditioner `apply_inverse`.
MinresResult minres(const SparseMatrix& A, const Eigen::VectorXd& b,
                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_inverse, double tol,
                    int max_iterations);

/// Per-cell field R_c J|_c.
std::vector<Vec3> reconstruct_cell_fields(const CurvedGrid& grid, const ReconstructionSet& set,
                                          const Eigen::VectorXd& J);

using VectorField = std::function<Vec3(const Vec3&)>;

/// Flux of `field` through each face, by the centroid rule on the surrogate
/// triangles after `refinement` levels of 4-way subdivision.
Eigen::VectorXd project_exact_flux(const CurvedGrid& grid, const GridGeometry& geom, const VectorField& field,
                                   int refinement = 1);

/// ||J - J_exact||_M / ||J_exact||_M. Throws InvalidArgument on a zero denominator.
double flux_error(const Eigen::VectorXd& J, const Eigen::VectorXd& J_exact, const SparseMatrix& M);

/// J^T M J.
double dissipated_power(const Eigen::VectorXd& J, const SparseMatrix& M);

/// Relative W-weighted error of U against exact(b_c).
double potential_error(const Eigen::VectorXd& U, const ReconstructionSet& set, const CellMass& W,
                       const std::function<double(const Vec3&)>& exact);

}  // namespace cmfd
