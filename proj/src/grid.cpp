#include "cmfd/grid.hpp"

#include <sstream>

#include "cmfd/errors.hpp"

namespace cmfd {

std::string to_string(const BoundaryTag& tag) {
  switch (tag.kind) {
    case BoundaryKind::interior:
      return "interior";
    case BoundaryKind::neumann:
      return "neumann";
    case BoundaryKind::electrode:
      return "electrode(" + std::to_string(tag.electrode) + ")";
  }
  return "unknown";
}

namespace {

void check_range(Index id, Index size, const char* what, Index owner) {
  if (id < 0 || id >= size) {
    std::ostringstream os;
    os << what << " id " << id << " out of range [0, " << size << ") referenced by entity "
       << owner;
    throw StructuralError(os.str());
  }
}

void check_sign(int sign, const char* what, Index owner) {
  if (sign != 1 && sign != -1) {
    std::ostringstream os;
    os << what << " incidence sign " << sign << " is not +-1 at entity " << owner;
    throw StructuralError(os.str());
  }
}

}  // namespace

CurvedGrid::CurvedGrid(std::vector<Vec3> nodes, std::vector<Edge> edges, std::vector<Face> faces,
                       std::vector<Cell> cells, std::vector<BoundaryTag> tags)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      faces_(std::move(faces)),
      cells_(std::move(cells)),
      tags_(std::move(tags)) {
  if (tags_.empty()) tags_.assign(faces_.size(), BoundaryTag::interior());
  if (tags_.size() != faces_.size()) {
    throw StructuralError("boundary tag list has " + std::to_string(tags_.size()) +
                          " entries for " + std::to_string(faces_.size()) + " faces");
  }
  for (Index e = 0; e < num_edges(); ++e) {
    const Edge& edge = edges_[static_cast<std::size_t>(e)];
    check_range(edge.tail, num_nodes(), "node", e);
    check_range(edge.head, num_nodes(), "node", e);
    if (edge.samples.size() < 2) {
      throw StructuralError("edge " + std::to_string(e) + " has fewer than two samples");
    }
  }
  for (Index f = 0; f < num_faces(); ++f) {
    const Face& face = faces_[static_cast<std::size_t>(f)];
    if (face.loop.empty()) throw StructuralError("face " + std::to_string(f) + " has no edges");
    for (const auto& oe : face.loop) {
      check_range(oe.edge, num_edges(), "edge", f);
      check_sign(oe.sign, "face-edge", f);
    }
  }
  for (Index c = 0; c < num_cells(); ++c) {
    for (const auto& cf : cells_[static_cast<std::size_t>(c)].faces) {
      check_range(cf.face, num_faces(), "face", c);
      check_sign(cf.sign, "cell-face", c);
    }
  }
  build_incidence();
}

void CurvedGrid::build_incidence() {
  using Triplet = Eigen::Triplet<int>;
  std::vector<Triplet> t;

  t.reserve(edges_.size() * 2);
  for (Index e = 0; e < num_edges(); ++e) {
    const Edge& edge = edges_[static_cast<std::size_t>(e)];
    t.emplace_back(e, edge.tail, -1);
    t.emplace_back(e, edge.head, 1);
  }
  G_.resize(num_edges(), num_nodes());
  G_.setFromTriplets(t.begin(), t.end());

  t.clear();
  for (Index f = 0; f < num_faces(); ++f) {
    for (const auto& oe : faces_[static_cast<std::size_t>(f)].loop) t.emplace_back(f, oe.edge, oe.sign);
  }
  C_.resize(num_faces(), num_edges());
  C_.setFromTriplets(t.begin(), t.end());

  t.clear();
  for (Index c = 0; c < num_cells(); ++c) {
    for (const auto& cf : cells_[static_cast<std::size_t>(c)].faces) t.emplace_back(c, cf.face, cf.sign);
  }
  D_.resize(num_cells(), num_faces());
  D_.setFromTriplets(t.begin(), t.end());

  // CSR-style adjacency lists in id order.
  face_cell_offsets_.assign(faces_.size() + 1, 0);
  for (const auto& cell : cells_)
    for (const auto& cf : cell.faces) ++face_cell_offsets_[static_cast<std::size_t>(cf.face) + 1];
  for (std::size_t i = 1; i < face_cell_offsets_.size(); ++i)
    face_cell_offsets_[i] += face_cell_offsets_[i - 1];
  face_cell_list_.assign(static_cast<std::size_t>(face_cell_offsets_.back()), {});
  {
    auto fill = face_cell_offsets_;
    for (Index c = 0; c < num_cells(); ++c)
      for (const auto& cf : cells_[static_cast<std::size_t>(c)].faces)
        face_cell_list_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cf.face)]++)] = {c, cf.sign};
  }

  edge_face_offsets_.assign(edges_.size() + 1, 0);
  for (const auto& face : faces_)
    for (const auto& oe : face.loop) ++edge_face_offsets_[static_cast<std::size_t>(oe.edge) + 1];
  for (std::size_t i = 1; i < edge_face_offsets_.size(); ++i)
    edge_face_offsets_[i] += edge_face_offsets_[i - 1];
  edge_face_list_.assign(static_cast<std::size_t>(edge_face_offsets_.back()), {});
  {
    auto fill = edge_face_offsets_;
    for (Index f = 0; f < num_faces(); ++f)
      for (const auto& oe : faces_[static_cast<std::size_t>(f)].loop)
        edge_face_list_[static_cast<std::size_t>(fill[static_cast<std::size_t>(oe.edge)]++)] = {f, oe.sign};
  }

  boundary_nodes_.assign(nodes_.size(), false);
  for (Index f = 0; f < num_faces(); ++f) {
    if (!is_boundary_face(f)) continue;
    for (const auto& oe : faces_[static_cast<std::size_t>(f)].loop) {
      const Edge& edge = edges_[static_cast<std::size_t>(oe.edge)];
      boundary_nodes_[static_cast<std::size_t>(edge.tail)] = true;
      boundary_nodes_[static_cast<std::size_t>(edge.head)] = true;
    }
  }
}

std::span<const Incident> CurvedGrid::face_cells(Index f) const {
  const auto b = static_cast<std::size_t>(face_cell_offsets_[static_cast<std::size_t>(f)]);
  const auto e = static_cast<std::size_t>(face_cell_offsets_[static_cast<std::size_t>(f) + 1]);
  return {face_cell_list_.data() + b, e - b};
}

std::span<const Incident> CurvedGrid::edge_faces(Index e) const {
  const auto b = static_cast<std::size_t>(edge_face_offsets_[static_cast<std::size_t>(e)]);
  const auto end = static_cast<std::size_t>(edge_face_offsets_[static_cast<std::size_t>(e) + 1]);
  return {edge_face_list_.data() + b, end - b};
}

bool CurvedGrid::is_internal_edge(Index e) const {
  for (const auto& inc : edge_faces(e))
    if (face_cells(inc.id).size() != 2) return false;
  return true;
}

std::vector<Index> CurvedGrid::face_nodes(Index f) const {
  std::vector<Index> out;
  const Face& face = faces_[static_cast<std::size_t>(f)];
  out.reserve(face.loop.size());
  for (const auto& oe : face.loop) {
    const Edge& edge = edges_[static_cast<std::size_t>(oe.edge)];
    out.push_back(oe.sign > 0 ? edge.tail : edge.head);
  }
  return out;
}

std::vector<Vec3> CurvedGrid::face_polyline(Index f) const {
  const Face& face = faces_[static_cast<std::size_t>(f)];
  std::vector<Vec3> pts;
  Index expected_start = -1;
  Index first_start = -1;
  for (const auto& oe : face.loop) {
    const Edge& edge = edges_[static_cast<std::size_t>(oe.edge)];
    const Index start = oe.sign > 0 ? edge.tail : edge.head;
    const Index end = oe.sign > 0 ? edge.head : edge.tail;
    if (expected_start >= 0 && start != expected_start) {
      throw StructuralError("face " + std::to_string(f) + " boundary loop is open at edge " +
                            std::to_string(oe.edge));
    }
    if (first_start < 0) first_start = start;
    expected_start = end;
    const auto& s = edge.samples;
    if (oe.sign > 0) {
      pts.insert(pts.end(), s.begin(), s.end() - 1);
    } else {
      pts.insert(pts.end(), s.rbegin(), s.rend() - 1);
    }
  }
  if (expected_start != first_start) {
    throw StructuralError("face " + std::to_string(f) + " boundary loop does not close");
  }
  return pts;
}

CurvedGrid CurvedGrid::with_tags(std::vector<BoundaryTag> tags) const {
  return CurvedGrid(nodes_, edges_, faces_, cells_, std::move(tags));
}

CurvedGrid CurvedGrid::transformed(const std::function<Vec3(const Vec3&)>& map) const {
  std::vector<Vec3> nodes;
  nodes.reserve(nodes_.size());
  for (const auto& p : nodes_) nodes.push_back(map(p));
  std::vector<Edge> edges = edges_;
  for (auto& edge : edges) {
    for (auto& p : edge.samples) p = map(p);
    // Keep endpoints bit-identical to the node coordinates.
    edge.samples.front() = nodes[static_cast<std::size_t>(edge.tail)];
    edge.samples.back() = nodes[static_cast<std::size_t>(edge.head)];
  }
  return CurvedGrid(std::move(nodes), std::move(edges), faces_, cells_, tags_);
}

ValidationReport validate_complex(const CurvedGrid& grid, std::size_t max_messages) {
  ValidationReport report;
  auto note = [&](std::string msg) {
    if (report.violations.size() < max_messages) report.violations.push_back(std::move(msg));
  };

  IncidenceMatrix dc = grid.D() * grid.C();
  dc.prune(0);
  for (Index r = 0; r < dc.outerSize(); ++r) {
    for (IncidenceMatrix::InnerIterator it(dc, r); it; ++it) {
      report.dc_zero = false;
      note("D·C ≠ 0 at (cell " + std::to_string(it.row()) + ", edge " + std::to_string(it.col()) +
           "): " + std::to_string(it.value()));
    }
  }

  IncidenceMatrix cg = grid.C() * grid.G();
  cg.prune(0);
  for (Index r = 0; r < cg.outerSize(); ++r) {
    for (IncidenceMatrix::InnerIterator it(cg, r); it; ++it) {
      report.cg_zero = false;
      note("C·G ≠ 0 at (face " + std::to_string(it.row()) + ", node " + std::to_string(it.col()) +
           "): " + std::to_string(it.value()));
    }
  }

  for (Index f = 0; f < grid.num_faces(); ++f) {
    try {
      (void)grid.face_polyline(f);
    } catch (const StructuralError& e) {
      report.loops_closed = false;
      note(std::string("loop closure violated: ") + e.what());
    }
  }

  for (Index e = 0; e < grid.num_edges(); ++e) {
    const Edge& edge = grid.edges()[static_cast<std::size_t>(e)];
    const Vec3& tail = grid.nodes()[static_cast<std::size_t>(edge.tail)];
    const Vec3& head = grid.nodes()[static_cast<std::size_t>(edge.head)];
    if (edge.samples.front() != tail || edge.samples.back() != head) {
      report.polyline_endpoints = false;
      note("edge " + std::to_string(e) + " polyline endpoints differ from its node coordinates");
    }
  }

  for (Index f = 0; f < grid.num_faces(); ++f) {
    const auto cells = grid.face_cells(f);
    const BoundaryTag& tag = grid.tag(f);
    if (cells.size() == 2) {
      if (cells[0].sign + cells[1].sign != 0) {
        report.face_multiplicity = false;
        note("interior face " + std::to_string(f) + " has equal D signs in cells " +
             std::to_string(cells[0].id) + " and " + std::to_string(cells[1].id));
      }
      if (tag.kind != BoundaryKind::interior) {
        report.tags_consistent = false;
        note("interior face " + std::to_string(f) + " carries boundary tag " + to_string(tag));
      }
    } else if (cells.size() == 1) {
      if (tag.kind == BoundaryKind::interior) {
        report.tags_consistent = false;
        note("boundary face " + std::to_string(f) + " has no boundary tag");
      } else if (tag.kind == BoundaryKind::electrode && tag.electrode < 0) {
        report.tags_consistent = false;
        note("boundary face " + std::to_string(f) + " has a negative electrode index");
      }
    } else {
      report.face_multiplicity = false;
      note("face " + std::to_string(f) + " is incident to " + std::to_string(cells.size()) +
           " cells");
    }
  }
  return report;
}

}  // namespace cmfd
