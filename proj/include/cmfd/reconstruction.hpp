#pragma once

#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "cmfd/geometry.hpp"
#include "cmfd/grid.hpp"

namespace cmfd {

using SparseMatrix = Eigen::SparseMatrix<double>;
using OperatorMatrix = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// P (3|C| x |F|, row 3c+i) and the stacked right-hand side (3|C| x 3,
/// blocks |c| I_3). Column f of cell c's block is D[c,f] times the face vector.
struct ConstraintSystem {
  SparseMatrix P;
  Eigen::MatrixXd rhs;
};

ConstraintSystem assemble_constraints(const CurvedGrid& grid, const GridGeometry& geom);

/// Generalized dual points and per-cell operators. R[c] has one column per
/// entry of cell c's face list, in that order.
struct ReconstructionSet {
  std::vector<Vec3> b_f;
  std::vector<Vec3> b_c;
  std::vector<OperatorMatrix> R;
  double constraint_residual = 0.0;
};

/// Points b_f closest to `targets` (in the summed squared distance) such that
/// P*B = rhs, where row f of B is b_f. Each coordinate column is solved as a
/// minimum-norm correction through a factorization of P*P^T.
///
/// Throws RankDeficient if P*P^T is singular to working precision and
/// NonConvergence if the relative constraint residual stays above tol.
std::vector<Vec3> solve_reconstruction(const ConstraintSystem& system, const std::vector<Vec3>& targets,
                                       double tol = 1e-10, double* residual = nullptr);

/// R_c with |c| col_f(R_c) = D[c,f] (b_f - b_c) for given points.
ReconstructionSet operators_from_points(const CurvedGrid& grid, const GridGeometry& geom,
                                        std::vector<Vec3> b_f, std::vector<Vec3> b_c);

/// Builds R_0 from b_f, then shifts every cell to b_c = mean of its b_f.
ReconstructionSet local_operators(const CurvedGrid& grid, const GridGeometry& geom, std::vector<Vec3> b_f);

/// R_c - (1/|c|) p_c D_c^T for every cell; b_c moves by p_c.
ReconstructionSet shift_operators(const CurvedGrid& grid, const GridGeometry& geom, const ReconstructionSet& set,
                                  const std::vector<Vec3>& shifts);

/// assemble_constraints + solve_reconstruction (targets = face anchors) + local_operators.
ReconstructionSet reconstruct(const CurvedGrid& grid, const GridGeometry& geom, double tol = 1e-10);

/// Rows of P_c: the face vectors of cell c in its face-list order (|F(c)| x 3).
Eigen::MatrixX3d local_projection(const CurvedGrid& grid, const GridGeometry& geom, Index c);

struct ConsistencyReport {
  double p1 = 0.0;              // max_c ||R_c P_c - I||_F
  double p2 = 0.0;              // max over internal edges, relative closed-path residual
  double representation = 0.0;  // max_{c,f} || |c| col_f(R_c) - D[c,f](b_f - b_c) ||
  Index worst_cell = -1;
  Index worst_edge = -1;
  bool pass = false;
};

ConsistencyReport check_consistency(const CurvedGrid& grid, const GridGeometry& geom,
                                    const ReconstructionSet& set, double tol = 1e-10);

struct RankProbe {
  bool full_rank = false;
  Index rank = 0;
  Index expected = 0;
  std::string hint;
};

/// Numerical rank of P from a rank-revealing sparse QR of P^T.
RankProbe rank_probe(const SparseMatrix& P);

}  // namespace cmfd
