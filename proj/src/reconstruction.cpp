#include "cmfd/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseQR>

#include "cmfd/errors.hpp"

namespace cmfd {

ConstraintSystem assemble_constraints(const CurvedGrid& grid, const GridGeometry& geom) {
  const Index nc = grid.num_cells();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nc) * 18);
  ConstraintSystem sys;
  sys.rhs = Eigen::MatrixXd::Zero(3 * nc, 3);
  for (Index c = 0; c < nc; ++c) {
    for (const auto& cf : grid.cells()[static_cast<std::size_t>(c)].faces) {
      const Vec3& fv = geom.face(cf.face).face_vector;
      for (int i = 0; i < 3; ++i) trips.emplace_back(3 * c + i, cf.face, cf.sign * fv[i]);
    }
    sys.rhs.block<3, 3>(3 * c, 0) = geom.cell(c).volume * Eigen::Matrix3d::Identity();
  }
  sys.P.resize(3 * nc, grid.num_faces());
  sys.P.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

std::vector<Vec3> solve_reconstruction(const ConstraintSystem& sys, const std::vector<Vec3>& targets,
                                       double tol, double* residual) {
  const SparseMatrix& P = sys.P;
  if (static_cast<Index>(targets.size()) != P.cols())
    throw InvalidArgument("solve_reconstruction: expected " + std::to_string(P.cols()) + " targets");
  for (const auto& t : targets)
    if (!t.allFinite()) throw InvalidArgument("solve_reconstruction: non-finite target");

  const Index m = P.rows();
  const SparseMatrix PT = P.transpose();
  const SparseMatrix PPt = P * PT;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(PPt);
  if (ldlt.info() != Eigen::Success)
    throw RankDeficient("P P^T factorization failed", "numerical breakdown in LDL^T");

  const Eigen::VectorXd& d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  Index small = 0;
  Index first_small = -1;
  for (Index i = 0; i < d.size(); ++i) {
    if (!(std::abs(d[i]) > 1e-12 * dmax) || d[i] < 0.0) {
      if (first_small < 0) first_small = i;
      ++small;
    }
  }
  if (small > 0) {
    std::ostringstream diag;
    diag << small << " of " << m << " pivots of P P^T are below 1e-12 relative";
    throw RankDeficient("constraint matrix P is rank deficient", diag.str());
  }

  Eigen::MatrixXd X(P.cols(), 3);
  for (Index f = 0; f < P.cols(); ++f) X.row(f) = targets[static_cast<std::size_t>(f)].transpose();

  double worst = 0.0;
  std::vector<double> history;
  for (int j = 0; j < 3; ++j) {
    const Eigen::VectorXd rhs = sys.rhs.col(j);
    const double scale = std::max(rhs.norm(), 1e-300);
    Eigen::VectorXd x = X.col(j);
    double rel = 0.0;
    for (int pass = 0; pass < 4; ++pass) {
      const Eigen::VectorXd r = rhs - P * x;
      rel = r.norm() / scale;
      history.push_back(rel);
      if (pass > 0 && rel <= 1e-3 * tol) break;
      x += PT * ldlt.solve(r);
    }
    rel = (rhs - P * x).norm() / scale;
    if (!(rel <= tol)) {
      throw NonConvergence("reconstruction constraint residual " + std::to_string(rel) +
                               " above tolerance in coordinate " + std::to_string(j),
                           history);
    }
    worst = std::max(worst, rel);
    X.col(j) = x;
  }
  if (residual) *residual = worst;

  std::vector<Vec3> b_f(static_cast<std::size_t>(P.cols()));
  for (Index f = 0; f < P.cols(); ++f) b_f[static_cast<std::size_t>(f)] = X.row(f).transpose();
  return b_f;
}

ReconstructionSet operators_from_points(const CurvedGrid& grid, const GridGeometry& geom,
                                        std::vector<Vec3> b_f, std::vector<Vec3> b_c) {
  ReconstructionSet set;
  set.R.resize(static_cast<std::size_t>(grid.num_cells()));
  for (Index c = 0; c < grid.num_cells(); ++c) {
    const auto& faces = grid.cells()[static_cast<std::size_t>(c)].faces;
    const double vol = geom.cell(c).volume;
    const Vec3& bc = b_c[static_cast<std::size_t>(c)];
    OperatorMatrix R(3, static_cast<Index>(faces.size()));
    for (std::size_t k = 0; k < faces.size(); ++k)
      R.col(static_cast<Index>(k)) =
          (faces[k].sign / vol) * (b_f[static_cast<std::size_t>(faces[k].face)] - bc);
    set.R[static_cast<std::size_t>(c)] = std::move(R);
  }
  set.b_f = std::move(b_f);
  set.b_c = std::move(b_c);
  return set;
}

ReconstructionSet local_operators(const CurvedGrid& grid, const GridGeometry& geom, std::vector<Vec3> b_f) {
  ReconstructionSet r0 = operators_from_points(
      grid, geom, std::move(b_f), std::vector<Vec3>(static_cast<std::size_t>(grid.num_cells()), Vec3::Zero()));
  std::vector<Vec3> mean(static_cast<std::size_t>(grid.num_cells()));
  for (Index c = 0; c < grid.num_cells(); ++c) {
    const auto& faces = grid.cells()[static_cast<std::size_t>(c)].faces;
    Vec3 s = Vec3::Zero();
    for (const auto& cf : faces) s += r0.b_f[static_cast<std::size_t>(cf.face)];
    mean[static_cast<std::size_t>(c)] = s / static_cast<double>(faces.size());
  }
  return shift_operators(grid, geom, r0, mean);
}

ReconstructionSet shift_operators(const CurvedGrid& grid, const GridGeometry& geom, const ReconstructionSet& set,
                                  const std::vector<Vec3>& shifts) {
  ReconstructionSet out = set;
  for (Index c = 0; c < grid.num_cells(); ++c) {
    const auto& faces = grid.cells()[static_cast<std::size_t>(c)].faces;
    const Vec3& p = shifts[static_cast<std::size_t>(c)];
    Eigen::RowVectorXd dc(static_cast<Index>(faces.size()));
    for (std::size_t k = 0; k < faces.size(); ++k) dc[static_cast<Index>(k)] = faces[k].sign;
    out.R[static_cast<std::size_t>(c)] -= (1.0 / geom.cell(c).volume) * p * dc;
    out.b_c[static_cast<std::size_t>(c)] += p;
  }
  return out;
}

ReconstructionSet reconstruct(const CurvedGrid& grid, const GridGeometry& geom, double tol) {
  const ConstraintSystem sys = assemble_constraints(grid, geom);
  std::vector<Vec3> targets;
  targets.reserve(geom.faces.size());
  for (const auto& fg : geom.faces) targets.push_back(fg.anchor);
  double residual = 0.0;
  ReconstructionSet set = local_operators(grid, geom, solve_reconstruction(sys, targets, tol, &residual));
  set.constraint_residual = residual;
  return set;
}

Eigen::MatrixX3d local_projection(const CurvedGrid& grid, const GridGeometry& geom, Index c) {
  const auto& faces = grid.cells()[static_cast<std::size_t>(c)].faces;
  Eigen::MatrixX3d P(static_cast<Index>(faces.size()), 3);
  for (std::size_t k = 0; k < faces.size(); ++k)
    P.row(static_cast<Index>(k)) = geom.face(faces[k].face).face_vector.transpose();
  return P;
}

ConsistencyReport check_consistency(const CurvedGrid& grid, const GridGeometry& geom,
                                    const ReconstructionSet& set, double tol) {
  ConsistencyReport rep;
  for (Index c = 0; c < grid.num_cells(); ++c) {
    const auto& R = set.R[static_cast<std::size_t>(c)];
    const double p1 = (R * local_projection(grid, geom, c) - Eigen::Matrix3d::Identity()).norm();
    if (rep.worst_cell < 0 || !(p1 <= rep.p1)) {
      rep.p1 = p1;
      rep.worst_cell = c;
    }
    const auto& faces = grid.cells()[static_cast<std::size_t>(c)].faces;
    const double vol = geom.cell(c).volume;
    for (std::size_t k = 0; k < faces.size(); ++k) {
      const Vec3 expect = faces[k].sign * (set.b_f[static_cast<std::size_t>(faces[k].face)] -
                                           set.b_c[static_cast<std::size_t>(c)]);
      rep.representation = std::max(rep.representation, (vol * R.col(static_cast<Index>(k)) - expect).norm());
    }
  }

  auto column = [&](Index c, Index f) -> Vec3 {
    const auto& faces = grid.cells()[static_cast<std::size_t>(c)].faces;
    for (std::size_t k = 0; k < faces.size(); ++k)
      if (faces[k].face == f) return set.R[static_cast<std::size_t>(c)].col(static_cast<Index>(k));
    throw StructuralError("cell " + std::to_string(c) + " does not contain face " + std::to_string(f));
  };
  for (Index e = 0; e < grid.num_edges(); ++e) {
    if (!grid.is_internal_edge(e)) continue;
    Vec3 sum = Vec3::Zero();
    double scale = 0.0;
    for (const auto& fe : grid.edge_faces(e)) {
      for (const auto& fc : grid.face_cells(fe.id)) {
        const Vec3 addend = fe.sign * geom.cell(fc.id).volume * column(fc.id, fe.id);
        sum += addend;
        scale += addend.norm();
      }
    }
    const double p2 = scale > 0.0 ? sum.norm() / scale : sum.norm();
    if (!(p2 <= rep.p2)) {
      rep.p2 = p2;
      rep.worst_edge = e;
    }
  }
  rep.pass = rep.p1 <= tol && rep.p2 <= tol;
  return rep;
}

RankProbe rank_probe(const SparseMatrix& P) {
  RankProbe probe;
  probe.expected = P.rows();
  SparseMatrix PT = P.transpose();
  PT.makeCompressed();
  Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
  // Threshold relative to the largest column norm, scaled by problem size.
  double colmax = 0.0;
  for (Index k = 0; k < PT.outerSize(); ++k) colmax = std::max(colmax, PT.col(k).norm());
  qr.setPivotThreshold(1e-10 * colmax);
  qr.compute(PT);
  if (qr.info() != Eigen::Success) {
    probe.hint = "sparse QR failed";
    return probe;
  }
  probe.rank = qr.rank();
  probe.full_rank = probe.rank == probe.expected;
  if (!probe.full_rank) {
    std::ostringstream hint;
    hint << "rank " << probe.rank << " < " << probe.expected << " (deficiency "
         << probe.expected - probe.rank << ")";
    probe.hint = hint.str();
  }
  return probe;
}

}  // namespace cmfd
