#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cmfd/grid.hpp"

namespace cmfd {

struct Triangle {
  Vec3 a, b, c;
  Vec3 area_vector() const { return 0.5 * (b - a).cross(c - a); }
  Vec3 centroid() const { return (a + b + c) / 3.0; }
};

/// Metric data of one face. The face vector is boundary-determined; area and
/// anchor are measured on the surrogate triangle fan.
struct FaceGeometry {
  Vec3 face_vector = Vec3::Zero();
  std::vector<Triangle> surrogate;
  double area = 0.0;
  Vec3 anchor = Vec3::Zero();
};

struct CellGeometry {
  double volume = 0.0;
  Vec3 barycenter = Vec3::Zero();
};

struct GridGeometry {
  std::vector<FaceGeometry> faces;
  std::vector<CellGeometry> cells;

  const FaceGeometry& face(Index f) const { return faces[static_cast<std::size_t>(f)]; }
  const CellGeometry& cell(Index c) const { return cells[static_cast<std::size_t>(c)]; }
};

/// 1/2 * sum r_i x r_{i+1} over a closed polygon (evaluated relative to its first point).
Vec3 polygon_vector_area(const std::vector<Vec3>& loop);

/// Face vector of face f: the vector area of its closed boundary polyline.
Vec3 face_vector(const CurvedGrid& grid, Index f);

/// Triangle fan over the boundary polyline from the mean of its samples,
/// with area-weighted centroid as anchor. Throws DegenerateGeometry on zero area.
FaceGeometry face_geometry(const CurvedGrid& grid, Index f);

/// Area-weighted centroid of the surrogate of face f.
Vec3 face_anchor(const CurvedGrid& grid, Index f);

/// Max distance of the boundary samples to their best-fit plane, divided by sqrt(area).
double face_planarity(const CurvedGrid& grid, Index f);

/// Volume and centroid of the surrogate polyhedron bounded by the face fans.
/// Throws DegenerateGeometry if the volume is not positive.
CellGeometry cell_geometry(const CurvedGrid& grid, Index c, const std::vector<FaceGeometry>& faces);
double cell_volume(const CurvedGrid& grid, Index c);

GridGeometry compute_geometry(const CurvedGrid& grid);

inline constexpr double kPlanarityTolerance = 1e-9;

/// Straightens every edge and replaces every non-planar face by planar
/// triangles spanning the same boundary. Quads are split along the diagonal
/// through their smallest node id; other polygons get a fan from a new node at
/// the face anchor. Children inherit the parent's orientation, cell signs and tag.
CurvedGrid flatten_grid(const CurvedGrid& grid, double planarity_tol = kPlanarityTolerance);

}  // namespace cmfd
