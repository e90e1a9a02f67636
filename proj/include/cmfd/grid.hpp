#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace cmfd {

using Index = Eigen::Index;
using Vec3 = Eigen::Vector3d;
using IncidenceMatrix = Eigen::SparseMatrix<int, Eigen::RowMajor>;

struct Edge {
  Index tail = 0;
  Index head = 0;
  /// Ordered polyline from tail to head, at least two points.
  std::vector<Vec3> samples;
};

struct OrientedEdge {
  Index edge = 0;
  int sign = 1;
};

/// A 2-cell given by its boundary loop; traversal order fixes the inner orientation.
struct Face {
  std::vector<OrientedEdge> loop;
};

struct CellFace {
  Index face = 0;
  int sign = 1;  // +1 if the face normal points out of the cell
};

struct Cell {
  std::vector<CellFace> faces;
};

enum class BoundaryKind { interior, neumann, electrode };

struct BoundaryTag {
  BoundaryKind kind = BoundaryKind::interior;
  int electrode = -1;

  static BoundaryTag interior() { return {}; }
  static BoundaryTag neumann() { return {BoundaryKind::neumann, -1}; }
  static BoundaryTag electrode_tag(int index) { return {BoundaryKind::electrode, index}; }

  friend bool operator==(const BoundaryTag&, const BoundaryTag&) = default;
};

std::string to_string(const BoundaryTag& tag);

/// Adjacency entry: a neighbouring entity id and its incidence number.
struct Incident {
  Index id = 0;
  int sign = 1;
};

/// Cell complex K = (N, E, F, C) with curved geometry carried by edge polylines.
///
/// The incidence matrices G (|E|x|N|), C (|F|x|E|) and D (|C|x|F|) are derived
/// from the entity lists on construction. Construction only checks that ids are
/// in range; the cell-complex invariants are checked by validate_complex().
class CurvedGrid {
public:
  CurvedGrid() = default;
  CurvedGrid(std::vector<Vec3> nodes, std::vector<Edge> edges, std::vector<Face> faces,
             std::vector<Cell> cells, std::vector<BoundaryTag> tags);

  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<BoundaryTag>& boundary_tags() const { return tags_; }

  Index num_nodes() const { return static_cast<Index>(nodes_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  Index num_faces() const { return static_cast<Index>(faces_.size()); }
  Index num_cells() const { return static_cast<Index>(cells_.size()); }

  const IncidenceMatrix& G() const { return G_; }
  const IncidenceMatrix& C() const { return C_; }
  const IncidenceMatrix& D() const { return D_; }

  /// C(f): the cells having f on their boundary, with the D sign.
  std::span<const Incident> face_cells(Index f) const;
  bool is_boundary_face(Index f) const { return face_cells(f).size() == 1; }
  const BoundaryTag& tag(Index f) const { return tags_[static_cast<std::size_t>(f)]; }

  /// F(e): faces containing edge e, with the C sign.
  std::span<const Incident> edge_faces(Index e) const;
  /// An edge is internal when none of its faces lies on the boundary.
  bool is_internal_edge(Index e) const;
  /// Node flags: true for nodes on a boundary face.
  const std::vector<bool>& boundary_nodes() const { return boundary_nodes_; }

  /// Start node of each oriented edge in loop order.
  std::vector<Index> face_nodes(Index f) const;
  /// Closed boundary polyline (edge samples concatenated, last point not repeated).
  /// Throws StructuralError if the loop does not close.
  std::vector<Vec3> face_polyline(Index f) const;

  CurvedGrid with_tags(std::vector<BoundaryTag> tags) const;
  /// Applies a point map to nodes and every edge sample; topology unchanged.
  CurvedGrid transformed(const std::function<Vec3(const Vec3&)>& map) const;

private:
  void build_incidence();

  std::vector<Vec3> nodes_;
  std::vector<Edge> edges_;
  std::vector<Face> faces_;
  std::vector<Cell> cells_;
  std::vector<BoundaryTag> tags_;

  IncidenceMatrix G_, C_, D_;
  std::vector<Index> face_cell_offsets_;
  std::vector<Incident> face_cell_list_;
  std::vector<Index> edge_face_offsets_;
  std::vector<Incident> edge_face_list_;
  std::vector<bool> boundary_nodes_;
};

struct ValidationReport {
  bool dc_zero = true;
  bool cg_zero = true;
  bool loops_closed = true;
  bool polyline_endpoints = true;
  bool face_multiplicity = true;
  bool tags_consistent = true;
  std::vector<std::string> violations;

  bool pass() const {
    return dc_zero && cg_zero && loops_closed && polyline_endpoints && face_multiplicity &&
           tags_consistent;
  }
};

/// Checks D*C = 0, C*G = 0 (integer arithmetic), loop closure, polyline
/// endpoints, face-cell multiplicities and boundary tag consistency.
ValidationReport validate_complex(const CurvedGrid& grid, std::size_t max_messages = 20);

}  // namespace cmfd
