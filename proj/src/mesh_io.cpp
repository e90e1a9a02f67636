#include "cmfd/mesh_io.hpp"

#include <fstream>

#include "cmfd/errors.hpp"

namespace cmfd {

using nlohmann::json;

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("expected a 3-vector, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

namespace {

json incidence_to_json(const IncidenceMatrix& m) {
  json entries = json::array();
  for (Index r = 0; r < m.outerSize(); ++r)
    for (IncidenceMatrix::InnerIterator it(m, r); it; ++it)
      entries.push_back(json::array({it.row(), it.col(), it.value()}));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

void check_incidence(const json& doc, const char* key, const IncidenceMatrix& expected) {
  if (!doc.contains(key)) return;
  const json stored = doc.at(key);
  if (stored != incidence_to_json(expected)) {
    throw StructuralError(std::string("mesh file: stored incidence matrix ") + key +
                          " disagrees with the entity lists");
  }
}

}  // namespace

json mesh_to_json(const CurvedGrid& grid) {
  json doc;
  doc["format_version"] = kMeshFormatVersion;
  json nodes = json::array();
  for (const auto& p : grid.nodes()) nodes.push_back(to_json(p));
  doc["nodes"] = std::move(nodes);

  json edges = json::array();
  for (const auto& e : grid.edges()) {
    json samples = json::array();
    for (const auto& p : e.samples) samples.push_back(to_json(p));
    edges.push_back({{"tail", e.tail}, {"head", e.head}, {"samples", std::move(samples)}});
  }
  doc["edges"] = std::move(edges);

  json faces = json::array();
  for (const auto& f : grid.faces()) {
    json loop = json::array();
    for (const auto& oe : f.loop) loop.push_back(json::array({oe.edge, oe.sign}));
    faces.push_back({{"loop", std::move(loop)}});
  }
  doc["faces"] = std::move(faces);

  json cells = json::array();
  for (const auto& c : grid.cells()) {
    json fl = json::array();
    for (const auto& cf : c.faces) fl.push_back(json::array({cf.face, cf.sign}));
    cells.push_back({{"faces", std::move(fl)}});
  }
  doc["cells"] = std::move(cells);

  json tags = json::array();
  for (Index f = 0; f < grid.num_faces(); ++f) {
    const BoundaryTag& t = grid.tag(f);
    if (t.kind == BoundaryKind::neumann) {
      tags.push_back({{"face", f}, {"kind", "neumann"}});
    } else if (t.kind == BoundaryKind::electrode) {
      tags.push_back({{"face", f}, {"kind", "electrode"}, {"electrode", t.electrode}});
    }
  }
  doc["boundary_tags"] = std::move(tags);
  doc["G"] = incidence_to_json(grid.G());
  doc["C"] = incidence_to_json(grid.C());
  doc["D"] = incidence_to_json(grid.D());
  return doc;
}

CurvedGrid mesh_from_json(const json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kMeshFormatVersion)
      throw InvalidArgument("unsupported mesh format_version " + std::to_string(version));

    std::vector<Vec3> nodes;
    for (const auto& p : doc.at("nodes")) nodes.push_back(vec3_from_json(p));

    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      Edge edge;
      edge.tail = e.at("tail").get<Index>();
      edge.head = e.at("head").get<Index>();
      for (const auto& p : e.at("samples")) edge.samples.push_back(vec3_from_json(p));
      edges.push_back(std::move(edge));
    }

    std::vector<Face> faces;
    for (const auto& f : doc.at("faces")) {
      Face face;
      for (const auto& oe : f.at("loop")) face.loop.push_back({oe.at(0).get<Index>(), oe.at(1).get<int>()});
      faces.push_back(std::move(face));
    }

    std::vector<Cell> cells;
    for (const auto& c : doc.at("cells")) {
      Cell cell;
      for (const auto& cf : c.at("faces")) cell.faces.push_back({cf.at(0).get<Index>(), cf.at(1).get<int>()});
      cells.push_back(std::move(cell));
    }

    std::vector<BoundaryTag> tags(faces.size(), BoundaryTag::interior());
    for (const auto& t : doc.value("boundary_tags", json::array())) {
      const auto f = t.at("face").get<Index>();
      if (f < 0 || f >= static_cast<Index>(faces.size()))
        throw StructuralError("boundary tag references face " + std::to_string(f));
      const std::string kind = t.at("kind").get<std::string>();
      if (kind == "neumann") {
        tags[static_cast<std::size_t>(f)] = BoundaryTag::neumann();
      } else if (kind == "electrode") {
        tags[static_cast<std::size_t>(f)] = BoundaryTag::electrode_tag(t.at("electrode").get<int>());
      } else if (kind != "interior") {
        throw InvalidArgument("unknown boundary tag kind '" + kind + "'");
      }
    }

    CurvedGrid grid(std::move(nodes), std::move(edges), std::move(faces), std::move(cells),
                    std::move(tags));
    check_incidence(doc, "G", grid.G());
    check_incidence(doc, "C", grid.C());
    check_incidence(doc, "D", grid.D());
    return grid;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed mesh document: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

void write_mesh(const CurvedGrid& grid, const std::filesystem::path& path) {
  write_json_file(mesh_to_json(grid), path);
}

CurvedGrid read_mesh(const std::filesystem::path& path) { return mesh_from_json(read_json_file(path)); }

}  // namespace cmfd
