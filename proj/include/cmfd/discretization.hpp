#pragma once

#include <filesystem>
#include <vector>

#include "cmfd/geometry.hpp"
#include "cmfd/reconstruction.hpp"

namespace cmfd {

struct LocalMass {
  Eigen::MatrixXd M;
  double lambda = 0.0;
};

/// M_c = |c| R^T K R + lambda (I - P (P^T P)^{-1} P^T), lambda = s * trace(|c| R^T K R) / 2
/// with s = stabilization_scale (1 by default).
/// Throws DegenerateGeometry if P^T P is singular.
LocalMass local_mass(const Eigen::MatrixX3d& P, const OperatorMatrix& R, double volume, const Eigen::Matrix3d& K,
                     double stabilization_scale = 1.0);

struct FaceMass {
  SparseMatrix M;
  std::vector<Eigen::MatrixXd> local;
  std::vector<double> lambda;
  std::vector<Eigen::Matrix3d> K;
};

/// Sums the local blocks in cell order. An empty K means K_c = I for all cells.
FaceMass assemble_global_mass(const CurvedGrid& grid, const GridGeometry& geom, const ReconstructionSet& set,
                              const std::vector<Eigen::Matrix3d>& K = {}, double stabilization_scale = 1.0);

/// Diagonal of the cell inner product: W[c] = |c|.
struct CellMass {
  Eigen::VectorXd W;
};

CellMass cell_mass(const GridGeometry& geom);

/// Standard MFD operators: face anchors and cell barycenters as dual points.
ReconstructionSet barycentric_operators(const CurvedGrid& grid, const GridGeometry& geom);

/// Writes M in Matrix Market coordinate format.
void write_matrix_market(const SparseMatrix& M, const std::filesystem::path& path);

}  // namespace cmfd
