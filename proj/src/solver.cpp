#include "cmfd/solver.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/UmfPackSupport>

#include "cmfd/errors.hpp"

namespace cmfd {

SolveMethod parse_solve_method(const std::string& name) {
  if (name == "direct") return SolveMethod::direct;
  if (name == "minres") return SolveMethod::minres;
  throw InvalidArgument("unknown solve method '" + name + "' (expected direct or minres)");
}

std::string to_string(SolveMethod method) { return method == SolveMethod::direct ? "direct" : "minres"; }

MixedSystem assemble_mixed(const CurvedGrid& grid, const ReconstructionSet& set, const FaceMass& mass,
                           const BoundaryConditions& bc) {
  MixedSystem sys;
  sys.num_faces = grid.num_faces();
  sys.num_cells = grid.num_cells();
  sys.face_dof.assign(static_cast<std::size_t>(sys.num_faces), -1);

  bool any_electrode = false;
  for (Index f = 0; f < sys.num_faces; ++f) {
    const BoundaryTag& tag = grid.tag(f);
    if (grid.is_boundary_face(f)) {
      if (tag.kind == BoundaryKind::interior)
        throw InvalidArgument("boundary face " + std::to_string(f) + " has no boundary tag");
      if (tag.kind == BoundaryKind::neumann) {
        sys.neumann_faces.push_back(f);
        continue;
      }
      any_electrode = true;
      if (!bc.potential && !bc.electrode_potentials.count(tag.electrode))
        throw InvalidArgument("no potential given for electrode " + std::to_string(tag.electrode));
    }
    sys.face_dof[static_cast<std::size_t>(f)] = static_cast<Index>(sys.active_faces.size());
    sys.active_faces.push_back(f);
  }
  if (!any_electrode) throw InvalidArgument("assemble_mixed: no electrode face, the problem is singular");

  const Index nf = sys.num_flux_unknowns();
  const Index nc = sys.num_cells;
  std::vector<Eigen::Triplet<double>> trips;
  sys.mass_diagonal = Eigen::VectorXd::Zero(nf);
  for (Index k = 0; k < mass.M.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(mass.M, k); it; ++it) {
      const Index a = sys.face_dof[static_cast<std::size_t>(it.row())];
      const Index b = sys.face_dof[static_cast<std::size_t>(it.col())];
      if (a < 0 || b < 0) continue;
      trips.emplace_back(a, b, it.value());
      if (a == b) sys.mass_diagonal[a] += it.value();
    }
  }

  sys.rhs = Eigen::VectorXd::Zero(nf + nc);
  std::vector<Eigen::Triplet<double>> dtrips;
  for (Index c = 0; c < nc; ++c) {
    for (const auto& cf : grid.cells()[static_cast<std::size_t>(c)].faces) {
      dtrips.emplace_back(c, cf.face, cf.sign);
      const Index k = sys.face_dof[static_cast<std::size_t>(cf.face)];
      if (k < 0) continue;
      trips.emplace_back(k, nf + c, -cf.sign);
      trips.emplace_back(nf + c, k, -cf.sign);
      const BoundaryTag& tag = grid.tag(cf.face);
      if (tag.kind == BoundaryKind::electrode) {
        const Vec3& bf = set.b_f[static_cast<std::size_t>(cf.face)];
        const double g = bc.potential ? bc.potential(bf) : bc.electrode_potentials.at(tag.electrode);
        sys.rhs[k] = -g * cf.sign;
      }
    }
  }
  sys.A.resize(nf + nc, nf + nc);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.D.resize(nc, sys.num_faces);
  sys.D.setFromTriplets(dtrips.begin(), dtrips.end());
  return sys;
}

namespace {

double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  const double nr = (b - A * x).norm();
  return nb > 0.0 ? nr / nb : nr;
}

Eigen::VectorXd solve_direct(const MixedSystem& sys, const SolveOptions& opt, SolveResult& res) {
  Eigen::UmfPackLU<SparseMatrix> lu;
  lu.compute(sys.A);
  if (lu.info() != Eigen::Success) throw NonConvergence("direct factorization failed (singular or breakdown)", {});
  Eigen::VectorXd x = lu.solve(sys.rhs);
  double rel = relative_residual(sys.A, x, sys.rhs);
  res.residual_history.push_back(rel);
  for (int pass = 0; pass < 3 && !(rel <= 1e-2 * opt.tol) && std::isfinite(rel); ++pass) {
    const Eigen::VectorXd r = sys.rhs - sys.A * x;
    x += lu.solve(r);
    rel = relative_residual(sys.A, x, sys.rhs);
    res.residual_history.push_back(rel);
  }
  if (!x.allFinite() || !(rel <= opt.tol))
    throw NonConvergence("direct solve residual " + std::to_string(rel) + " above tolerance", res.residual_history);
  res.iterations = 1;
  return x;
}

Eigen::VectorXd solve_minres(const MixedSystem& sys, const SolveOptions& opt, SolveResult& res) {
  const Index nf = sys.num_flux_unknowns();
  const Index nc = sys.num_cells;
  const Eigen::VectorXd dinv = sys.mass_diagonal.cwiseInverse();
  if (!dinv.allFinite() || (sys.mass_diagonal.array() <= 0.0).any())
    throw NonConvergence("minres: mass matrix diagonal is not positive", {});

  // Schur approximation D diag(M)^{-1} D^T on the active faces.
  const SparseMatrix Dt = sys.A.block(0, nf, nf, nc);
  const SparseMatrix S = SparseMatrix(Dt.transpose()) * dinv.asDiagonal() * Dt;
  Eigen::SimplicialLLT<SparseMatrix> schur(S);
  if (schur.info() != Eigen::Success) throw NonConvergence("minres: Schur preconditioner is singular", {});

  auto apply = [&](const Eigen::VectorXd& r) {
    Eigen::VectorXd z(r.size());
    z.head(nf) = dinv.cwiseProduct(r.head(nf));
    z.tail(nc) = schur.solve(r.tail(nc));
    return z;
  };
  const int max_it = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(10 * sys.A.rows());

  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.A.rows());
  double rel = relative_residual(sys.A, x, sys.rhs);
  int total = 0;
  for (int restart = 0; restart < 4 && !(rel <= opt.tol); ++restart) {
    const Eigen::VectorXd r = sys.rhs - sys.A * x;
    MinresResult mr = minres(sys.A, r, apply, 0.1 * opt.tol * sys.rhs.norm() / std::max(r.norm(), 1e-300),
                             max_it - total);
    total += mr.iterations;
    res.residual_history.insert(res.residual_history.end(), mr.history.begin(), mr.history.end());
    x += mr.x;
    rel = relative_residual(sys.A, x, sys.rhs);
    if (total >= max_it) break;
  }
  res.iterations = total;
  if (!x.allFinite() || !(rel <= opt.tol))
    throw NonConvergence("minres stopped at relative residual " + std::to_string(rel) + " after " +
                             std::to_string(total) + " iterations",
                         res.residual_history);
  return x;
}

}  // namespace

SolveResult solve_mixed(const MixedSystem& sys, const SolveOptions& opt) {
  SolveResult res;
  const Eigen::VectorXd x =
      opt.method == SolveMethod::direct ? solve_direct(sys, opt, res) : solve_minres(sys, opt, res);
  res.residual = relative_residual(sys.A, x, sys.rhs);
  const Index nf = sys.num_flux_unknowns();
  res.J = Eigen::VectorXd::Zero(sys.num_faces);
  for (Index k = 0; k < nf; ++k) res.J[sys.active_faces[static_cast<std::size_t>(k)]] = x[k];
  res.U = x.tail(sys.num_cells);
  res.continuity = (sys.D * res.J).cwiseAbs().maxCoeff();
  return res;
}

std::vector<Vec3> reconstruct_cell_fields(const CurvedGrid& grid, const ReconstructionSet& set,
                                          const Eigen::VectorXd& J) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(grid.num_cells()));
  for (Index c = 0; c < grid.num_cells(); ++c) {
    const auto& faces = grid.cells()[static_cast<std::size_t>(c)].faces;
    Eigen::VectorXd local(static_cast<Index>(faces.size()));
    for (std::size_t k = 0; k < faces.size(); ++k) local[static_cast<Index>(k)] = J[faces[k].face];
    out.push_back(set.R[static_cast<std::size_t>(c)] * local);
  }
  return out;
}

namespace {

double triangle_flux(const Triangle& t, const VectorField& field, int level) {
  if (level == 0) return field(t.centroid()).dot(t.area_vector());
  const Vec3 ab = 0.5 * (t.a + t.b), bc = 0.5 * (t.b + t.c), ca = 0.5 * (t.c + t.a);
  return triangle_flux({t.a, ab, ca}, field, level - 1) + triangle_flux({ab, t.b, bc}, field, level - 1) +
         triangle_flux({ca, bc, t.c}, field, level - 1) + triangle_flux({ab, bc, ca}, field, level - 1);
}

}  // namespace

Eigen::VectorXd project_exact_flux(const CurvedGrid& grid, const GridGeometry& geom, const VectorField& field,
                                   int refinement) {
  if (refinement < 0) throw InvalidArgument("project_exact_flux: refinement must be >= 0");
  Eigen::VectorXd out(grid.num_faces());
  for (Index f = 0; f < grid.num_faces(); ++f) {
    double s = 0.0;
    for (const auto& t : geom.face(f).surrogate) s += triangle_flux(t, field, refinement);
    out[f] = s;
  }
  return out;
}

double flux_error(const Eigen::VectorXd& J, const Eigen::VectorXd& J_exact, const SparseMatrix& M) {
  const double den = J_exact.dot(M * J_exact);
  if (!(den > 0.0)) throw InvalidArgument("flux_error: exact flux has zero norm");
  const Eigen::VectorXd d = J - J_exact;
  return std::sqrt(std::max(0.0, d.dot(M * d)) / den);
}

double dissipated_power(const Eigen::VectorXd& J, const SparseMatrix& M) { return J.dot(M * J); }

double potential_error(const Eigen::VectorXd& U, const ReconstructionSet& set, const CellMass& W,
                       const std::function<double(const Vec3&)>& exact) {
  double num = 0.0, den = 0.0;
  for (Index c = 0; c < U.size(); ++c) {
    const double ue = exact(set.b_c[static_cast<std::size_t>(c)]);
    num += W.W[c] * (U[c] - ue) * (U[c] - ue);
    den += W.W[c] * ue * ue;
  }
  if (!(den > 0.0)) throw InvalidArgument("potential_error: exact potential has zero norm");
  return std::sqrt(num / den);
}

}  // namespace cmfd
