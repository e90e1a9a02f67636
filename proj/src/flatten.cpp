#include <algorithm>

#include "cmfd/errors.hpp"
#include "cmfd/geometry.hpp"

namespace cmfd {

CurvedGrid flatten_grid(const CurvedGrid& grid, double planarity_tol) {
  std::vector<Vec3> nodes = grid.nodes();
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(grid.num_edges()));
  for (const auto& e : grid.edges()) {
    edges.push_back({e.tail, e.head,
                     {nodes[static_cast<std::size_t>(e.tail)], nodes[static_cast<std::size_t>(e.head)]}});
  }
  const CurvedGrid straight(nodes, edges, grid.faces(), grid.cells(), grid.boundary_tags());

  auto add_edge = [&](Index a, Index b) -> OrientedEdge {
    const Index lo = std::min(a, b), hi = std::max(a, b);
    edges.push_back({lo, hi, {nodes[static_cast<std::size_t>(lo)], nodes[static_cast<std::size_t>(hi)]}});
    return {static_cast<Index>(edges.size()) - 1, a == lo ? 1 : -1};
  };
  auto reversed = [](OrientedEdge oe) { return OrientedEdge{oe.edge, -oe.sign}; };

  std::vector<Face> faces;
  std::vector<BoundaryTag> tags;
  std::vector<std::vector<Index>> children(static_cast<std::size_t>(grid.num_faces()));

  for (Index f = 0; f < grid.num_faces(); ++f) {
    const Face& face = grid.faces()[static_cast<std::size_t>(f)];
    auto& kids = children[static_cast<std::size_t>(f)];
    auto emit = [&](Face child) {
      kids.push_back(static_cast<Index>(faces.size()));
      faces.push_back(std::move(child));
      tags.push_back(grid.tag(f));
    };

    const std::size_t m = face.loop.size();
    if (m <= 3 || face_planarity(straight, f) <= planarity_tol) {
      emit(face);
      continue;
    }
    const std::vector<Index> fn = straight.face_nodes(f);
    if (m == 4) {
      const std::size_t k = static_cast<std::size_t>(std::min_element(fn.begin(), fn.end()) - fn.begin());
      const std::size_t k2 = (k + 2) % 4;
      const OrientedEdge diag = add_edge(fn[k], fn[k2]);  // fn[k] -> fn[k2]
      emit(Face{{face.loop[k], face.loop[(k + 1) % 4], reversed(diag)}});
      emit(Face{{diag, face.loop[k2], face.loop[(k + 3) % 4]}});
    } else {
      const Vec3 anchor = face_anchor(straight, f);
      const Index center = static_cast<Index>(nodes.size());
      nodes.push_back(anchor);
      std::vector<OrientedEdge> spokes;  // center -> fn[i]
      for (std::size_t i = 0; i < m; ++i) spokes.push_back(add_edge(center, fn[i]));
      for (std::size_t i = 0; i < m; ++i)
        emit(Face{{spokes[i], face.loop[i], reversed(spokes[(i + 1) % m])}});
    }
  }

  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(grid.num_cells()));
  for (const auto& cell : grid.cells()) {
    Cell out;
    for (const auto& cf : cell.faces)
      for (Index child : children[static_cast<std::size_t>(cf.face)]) out.faces.push_back({child, cf.sign});
    cells.push_back(std::move(out));
  }

  CurvedGrid flat(std::move(nodes), std::move(edges), std::move(faces), std::move(cells), std::move(tags));
  const ValidationReport report = validate_complex(flat);
  if (!report.pass()) {
    throw StructuralError("flattened grid is not a valid complex: " +
                          (report.violations.empty() ? std::string("unknown") : report.violations.front()));
  }
  return flat;
}

}  // namespace cmfd
