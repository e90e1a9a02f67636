#include "cmfd/geometry.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "cmfd/errors.hpp"

namespace cmfd {

Vec3 polygon_vector_area(const std::vector<Vec3>& loop) {
  Vec3 sum = Vec3::Zero();
  if (loop.size() < 3) return sum;
  const Vec3& o = loop.front();
  for (std::size_t i = 1; i + 1 < loop.size(); ++i) sum += (loop[i] - o).cross(loop[i + 1] - o);
  return 0.5 * sum;
}

Vec3 face_vector(const CurvedGrid& grid, Index f) { return polygon_vector_area(grid.face_polyline(f)); }

namespace {

FaceGeometry fan_geometry(const std::vector<Vec3>& loop, Index f) {
  FaceGeometry g;
  g.face_vector = polygon_vector_area(loop);
  Vec3 center = Vec3::Zero();
  for (const auto& p : loop) center += p;
  center /= static_cast<double>(loop.size());

  g.surrogate.reserve(loop.size());
  Vec3 weighted = Vec3::Zero();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    Triangle t{center, loop[i], loop[(i + 1) % loop.size()]};
    const double a = t.area_vector().norm();
    g.area += a;
    weighted += a * t.centroid();
    g.surrogate.push_back(t);
  }
  if (!(g.area > 0.0)) throw DegenerateGeometry("face " + std::to_string(f) + " has zero area");
  g.anchor = weighted / g.area;
  return g;
}

}  // namespace

FaceGeometry face_geometry(const CurvedGrid& grid, Index f) { return fan_geometry(grid.face_polyline(f), f); }

Vec3 face_anchor(const CurvedGrid& grid, Index f) { return face_geometry(grid, f).anchor; }

double face_planarity(const CurvedGrid& grid, Index f) {
  const auto loop = grid.face_polyline(f);
  const FaceGeometry g = fan_geometry(loop, f);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : loop) mean += p;
  mean /= static_cast<double>(loop.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : loop) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Vec3 normal = eig.eigenvectors().col(0);
  double dev = 0.0;
  for (const auto& p : loop) dev = std::max(dev, std::abs((p - mean).dot(normal)));
  return dev / std::sqrt(g.area);
}

CellGeometry cell_geometry(const CurvedGrid& grid, Index c, const std::vector<FaceGeometry>& faces) {
  const Cell& cell = grid.cells()[static_cast<std::size_t>(c)];
  // Signed tetrahedra from a reference point on the cell surface.
  const Vec3 ref = faces[static_cast<std::size_t>(cell.faces.front().face)].surrogate.front().b;
  double volume = 0.0;
  Vec3 moment = Vec3::Zero();
  for (const auto& cf : cell.faces) {
    for (const auto& t : faces[static_cast<std::size_t>(cf.face)].surrogate) {
      const double v = cf.sign * (t.a - ref).dot((t.b - ref).cross(t.c - ref)) / 6.0;
      volume += v;
      moment += v * (ref + t.a + t.b + t.c) / 4.0;
    }
  }
  if (!(volume > 0.0)) {
    throw DegenerateGeometry("cell " + std::to_string(c) + " has non-positive volume " +
                             std::to_string(volume));
  }
  return {volume, moment / volume};
}

double cell_volume(const CurvedGrid& grid, Index c) {
  std::vector<FaceGeometry> faces(static_cast<std::size_t>(grid.num_faces()));
  for (const auto& cf : grid.cells()[static_cast<std::size_t>(c)].faces)
    faces[static_cast<std::size_t>(cf.face)] = face_geometry(grid, cf.face);
  return cell_geometry(grid, c, faces).volume;
}

GridGeometry compute_geometry(const CurvedGrid& grid) {
  GridGeometry g;
  g.faces.reserve(static_cast<std::size_t>(grid.num_faces()));
  for (Index f = 0; f < grid.num_faces(); ++f) g.faces.push_back(face_geometry(grid, f));
  g.cells.reserve(static_cast<std::size_t>(grid.num_cells()));
  for (Index c = 0; c < grid.num_cells(); ++c) g.cells.push_back(cell_geometry(grid, c, g.faces));
  return g;
}

}  // namespace cmfd
