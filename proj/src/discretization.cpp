#include "cmfd/discretization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cmfd/errors.hpp"

namespace cmfd {

LocalMass local_mass(const Eigen::MatrixX3d& P, const OperatorMatrix& R, double volume, const Eigen::Matrix3d& K,
                     double stabilization_scale) {
  const Index n = P.rows();
  if (R.cols() != n) throw InvalidArgument("local_mass: R and P sizes differ");
  if (!(stabilization_scale > 0.0)) throw InvalidArgument("local_mass: stabilization scale must be positive");
  const Eigen::Matrix3d PtP = P.transpose() * P;
  Eigen::Matrix3d inv;
  bool invertible = false;
  PtP.computeInverseWithCheck(inv, invertible, 0.0);
  const double rcond = 1.0 / (PtP.norm() * inv.norm());
  if (!invertible || !(rcond > 1e-14)) throw DegenerateGeometry("local_mass: face vectors do not span R^3");

  LocalMass out;
  const Eigen::MatrixXd consistent = volume * R.transpose() * K * R;
  out.lambda = 0.5 * stabilization_scale * consistent.trace();
  const Eigen::MatrixXd stab = Eigen::MatrixXd::Identity(n, n) - P * inv * P.transpose();
  Eigen::MatrixXd M = consistent + out.lambda * stab;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) M(j, i) = M(i, j);
  out.M = std::move(M);
  return out;
}

FaceMass assemble_global_mass(const CurvedGrid& grid, const GridGeometry& geom, const ReconstructionSet& set,
                              const std::vector<Eigen::Matrix3d>& K, double stabilization_scale) {
  const Index nc = grid.num_cells();
  if (!K.empty() && static_cast<Index>(K.size()) != nc)
    throw InvalidArgument("assemble_global_mass: one material tensor per cell expected");
  FaceMass fm;
  fm.local.reserve(static_cast<std::size_t>(nc));
  fm.lambda.reserve(static_cast<std::size_t>(nc));
  fm.K = K.empty() ? std::vector<Eigen::Matrix3d>(static_cast<std::size_t>(nc), Eigen::Matrix3d::Identity()) : K;

  std::vector<Eigen::Triplet<double>> trips;
  for (Index c = 0; c < nc; ++c) {
    LocalMass lm;
    try {
      lm = local_mass(local_projection(grid, geom, c), set.R[static_cast<std::size_t>(c)], geom.cell(c).volume,
                      fm.K[static_cast<std::size_t>(c)], stabilization_scale);
    } catch (const DegenerateGeometry& e) {
      throw DegenerateGeometry("cell " + std::to_string(c) + ": " + e.what());
    }
    const auto& faces = grid.cells()[static_cast<std::size_t>(c)].faces;
    for (std::size_t a = 0; a < faces.size(); ++a)
      for (std::size_t b = 0; b < faces.size(); ++b)
        trips.emplace_back(faces[a].face, faces[b].face, lm.M(static_cast<Index>(a), static_cast<Index>(b)));
    fm.local.push_back(std::move(lm.M));
    fm.lambda.push_back(lm.lambda);
  }
  fm.M.resize(grid.num_faces(), grid.num_faces());
  fm.M.setFromTriplets(trips.begin(), trips.end());
  return fm;
}

CellMass cell_mass(const GridGeometry& geom) {
  CellMass cm;
  cm.W.resize(static_cast<Index>(geom.cells.size()));
  for (std::size_t c = 0; c < geom.cells.size(); ++c) cm.W[static_cast<Index>(c)] = geom.cells[c].volume;
  return cm;
}

ReconstructionSet barycentric_operators(const CurvedGrid& grid, const GridGeometry& geom) {
  std::vector<Vec3> xf, xc;
  for (const auto& f : geom.faces) xf.push_back(f.anchor);
  for (const auto& c : geom.cells) xc.push_back(c.barycenter);
  return operators_from_points(grid, geom, std::move(xf), std::move(xc));
}

void write_matrix_market(const SparseMatrix& M, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n" << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
  char buf[64];
  for (Index k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << buf << '\n';
    }
  if (!out) throw InvalidArgument("cannot write " + path.string());
}

}  // namespace cmfd
