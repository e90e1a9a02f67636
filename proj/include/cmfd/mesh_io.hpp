#pragma once

#include <filesystem>

#include <json.hpp>

#include "cmfd/grid.hpp"

namespace cmfd {

inline constexpr int kMeshFormatVersion = 1;

/// JSON document mirroring CurvedGrid:
///
///   format_version : 1
///   nodes          : [[x, y, z], ...]
///   edges          : [{"tail": i, "head": j, "samples": [[x, y, z], ...]}, ...]
///   faces          : [{"loop": [[edge, sign], ...]}, ...]
///   cells          : [{"faces": [[face, sign], ...]}, ...]
///   boundary_tags  : [{"face": f, "kind": "neumann" | "electrode", "electrode": i}, ...]
///   G, C, D        : {"rows": r, "cols": c, "entries": [[row, col, value], ...]}
///
/// Faces absent from boundary_tags are interior. The incidence matrices are
/// derived data; on read they are checked against the entity lists.
nlohmann::json mesh_to_json(const CurvedGrid& grid);
CurvedGrid mesh_from_json(const nlohmann::json& doc);

void write_mesh(const CurvedGrid& grid, const std::filesystem::path& path);
CurvedGrid read_mesh(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

nlohmann::json to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j);

}  // namespace cmfd
