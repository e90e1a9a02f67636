#include <fstream>

#include "cmfd/errors.hpp"
#include "cmfd/report.hpp"

namespace cmfd {

void export_vtk(const CurvedGrid& grid, const GridGeometry& geom, const ReconstructionSet& set,
                const Eigen::VectorXd& J, const std::filesystem::path& path) {
  if (J.size() != grid.num_faces()) throw InvalidArgument("export_vtk: flux vector does not match the mesh");
  const std::vector<Vec3> fields = reconstruct_cell_fields(grid, set, J);

  std::vector<Vec3> points;
  struct VtkCell {
    int type;
    std::vector<std::size_t> ids;
    double flux;
    Vec3 field;
  };
  std::vector<VtkCell> cells;

  for (Index f = 0; f < grid.num_faces(); ++f) {
    const FaceGeometry& fg = geom.face(f);
    for (const auto& t : fg.surrogate) {
      const std::size_t base = points.size();
      points.push_back(t.a);
      points.push_back(t.b);
      points.push_back(t.c);
      cells.push_back({5, {base, base + 1, base + 2}, J[f] / fg.area, Vec3::Zero()});
    }
  }
  std::vector<std::size_t> bc_point(static_cast<std::size_t>(grid.num_cells()));
  for (Index c = 0; c < grid.num_cells(); ++c) {
    bc_point[static_cast<std::size_t>(c)] = points.size();
    points.push_back(set.b_c[static_cast<std::size_t>(c)]);
    cells.push_back({1, {bc_point[static_cast<std::size_t>(c)]}, 0.0, fields[static_cast<std::size_t>(c)]});
  }
  for (Index c = 0; c < grid.num_cells(); ++c) {
    for (const auto& cf : grid.cells()[static_cast<std::size_t>(c)].faces) {
      const std::size_t p = points.size();
      points.push_back(set.b_f[static_cast<std::size_t>(cf.face)]);
      cells.push_back({3, {bc_point[static_cast<std::size_t>(c)], p}, 0.0, Vec3::Zero()});
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.precision(17);
  out << "# vtk DataFile Version 3.0\ncurved mfd solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << points.size() << " double\n";
  for (const auto& p : points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  std::size_t size = 0;
  for (const auto& c : cells) size += c.ids.size() + 1;
  out << "CELLS " << cells.size() << ' ' << size << '\n';
  for (const auto& c : cells) {
    out << c.ids.size();
    for (auto id : c.ids) out << ' ' << id;
    out << '\n';
  }
  out << "CELL_TYPES " << cells.size() << '\n';
  for (const auto& c : cells) out << c.type << '\n';
  out << "CELL_DATA " << cells.size() << '\n';
  out << "SCALARS kind int 1\nLOOKUP_TABLE default\n";
  for (const auto& c : cells) out << (c.type == 5 ? 0 : c.type == 1 ? 1 : 2) << '\n';
  out << "SCALARS flux double 1\nLOOKUP_TABLE default\n";
  for (const auto& c : cells) out << c.flux << '\n';
  out << "VECTORS field double\n";
  for (const auto& c : cells) out << c.field.x() << ' ' << c.field.y() << ' ' << c.field.z() << '\n';
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

}  // namespace cmfd
