#include "cmfd/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "cmfd/errors.hpp"

namespace cmfd {

namespace {

using Hex = std::array<Index, 8>;
using EdgeSampler = std::function<std::vector<Vec3>(Index tail, Index head)>;
using HexFaceTagger = std::function<BoundaryTag(const std::array<Index, 4>& nodes, Index cell)>;

// Local hexahedron faces as outward loops. Local node order:
// 0:(0,0,0) 1:(1,0,0) 2:(1,1,0) 3:(0,1,0) 4:(0,0,1) 5:(1,0,1) 6:(1,1,1) 7:(0,1,1).
// Odd entries are the "positive" face of each logical axis.
constexpr std::array<std::array<int, 4>, 6> kHexFaces{{
    {0, 4, 7, 3},  // -x
    {1, 2, 6, 5},  // +x
    {0, 1, 5, 4},  // -y
    {3, 7, 6, 2},  // +y
    {0, 3, 2, 1},  // -z
    {4, 5, 6, 7},  // +z
}};

/// Builds a CurvedGrid from hexahedra given by node ids, deduplicating edges
/// and faces. Faces are oriented along the positive logical axis of the cell
/// that creates them.
CurvedGrid assemble_hexes(std::vector<Vec3> nodes, const std::vector<Hex>& hexes,
                         const EdgeSampler& sampler, const HexFaceTagger& tagger) {
  std::vector<Edge> edges;
  std::vector<Face> faces;
  std::vector<Cell> cells(hexes.size());
  std::map<std::pair<Index, Index>, Index> edge_ids;
  std::map<std::array<Index, 4>, Index> face_ids;
  std::vector<std::array<Index, 4>> face_loops;

  auto edge_between = [&](Index a, Index b) -> OrientedEdge {
    const auto key = std::minmax(a, b);
    auto [it, inserted] = edge_ids.try_emplace({key.first, key.second}, static_cast<Index>(edges.size()));
    if (inserted) {
      Edge e;
      e.tail = key.first;
      e.head = key.second;
      e.samples = sampler(e.tail, e.head);
      e.samples.front() = nodes[static_cast<std::size_t>(e.tail)];
      e.samples.back() = nodes[static_cast<std::size_t>(e.head)];
      edges.push_back(std::move(e));
    }
    return {it->second, a == key.first ? 1 : -1};
  };

  for (std::size_t c = 0; c < hexes.size(); ++c) {
    const Hex& hex = hexes[c];
    for (int lf = 0; lf < 6; ++lf) {
      std::array<Index, 4> outward;
      for (int k = 0; k < 4; ++k) outward[k] = hex[static_cast<std::size_t>(kHexFaces[lf][k])];
      std::array<Index, 4> key = outward;
      std::sort(key.begin(), key.end());
      auto it = face_ids.find(key);
      if (it == face_ids.end()) {
        const bool positive = (lf % 2) == 1;
        std::array<Index, 4> loop = outward;
        if (!positive) std::reverse(loop.begin(), loop.end());
        std::rotate(loop.begin(), std::min_element(loop.begin(), loop.end()), loop.end());
        Face face;
        for (int k = 0; k < 4; ++k) face.loop.push_back(edge_between(loop[k], loop[(k + 1) % 4]));
        const Index id = static_cast<Index>(faces.size());
        faces.push_back(std::move(face));
        face_loops.push_back(loop);
        face_ids.emplace(key, id);
        cells[c].faces.push_back({id, positive ? 1 : -1});
      } else {
        const auto& loop = face_loops[static_cast<std::size_t>(it->second)];
        const auto pos = std::find(outward.begin(), outward.end(), loop[0]) - outward.begin();
        const bool same = outward[static_cast<std::size_t>((pos + 1) % 4)] == loop[1];
        cells[c].faces.push_back({it->second, same ? 1 : -1});
      }
    }
  }

  std::vector<int> owner_count(faces.size(), 0);
  std::vector<Index> owner(faces.size(), -1);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (const auto& cf : cells[c].faces) {
      ++owner_count[static_cast<std::size_t>(cf.face)];
      owner[static_cast<std::size_t>(cf.face)] = static_cast<Index>(c);
    }
  }
  std::vector<BoundaryTag> tags(faces.size(), BoundaryTag::interior());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (owner_count[f] == 1) tags[f] = tagger(face_loops[f], owner[f]);
  }
  return CurvedGrid(std::move(nodes), std::move(edges), std::move(faces), std::move(cells),
                    std::move(tags));
}

std::vector<Vec3> straight(const Vec3& a, const Vec3& b) { return {a, b}; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Vec3 slerp(const Vec3& a, const Vec3& b, double u) {
  if (u <= 0.0) return a;
  if (u >= 1.0) return b;
  const double omega = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
  const double s = std::sin(omega);
  return (std::sin((1.0 - u) * omega) / s) * a + (std::sin(u * omega) / s) * b;
}

bool is_multiple(double length, double h, long* count) {
  const double q = length / h;
  const double r = std::round(q);
  *count = static_cast<long>(r);
  return r >= 1.0 && std::abs(q - r) <= 1e-9 * std::max(1.0, q);
}

}  // namespace

CurvedGrid build_cubic_grid(int n, double h, const FaceTagger& tagger) {
  if (n < 1) throw InvalidArgument("build_cubic_grid: n must be >= 1");
  if (!(h > 0.0)) throw InvalidArgument("build_cubic_grid: h must be > 0");
  const Index m = n + 1;
  auto id = [m](Index i, Index j, Index k) { return i + m * (j + m * k); };
  std::vector<Vec3> nodes(static_cast<std::size_t>(m * m * m));
  for (Index k = 0; k < m; ++k)
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < m; ++i)
        nodes[static_cast<std::size_t>(id(i, j, k))] =
            Vec3(static_cast<double>(i) * h, static_cast<double>(j) * h, static_cast<double>(k) * h);

  std::vector<Hex> hexes;
  hexes.reserve(static_cast<std::size_t>(n) * n * n);
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        hexes.push_back({id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k),
                         id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1),
                         id(i, j + 1, k + 1)});

  const auto& pts = nodes;
  EdgeSampler sampler = [&pts](Index a, Index b) {
    return straight(pts[static_cast<std::size_t>(a)], pts[static_cast<std::size_t>(b)]);
  };
  HexFaceTagger hex_tagger = [&](const std::array<Index, 4>& fn, Index) {
    if (!tagger) return BoundaryTag::electrode_tag(0);
    Vec3 center = Vec3::Zero();
    for (Index v : fn) center += pts[static_cast<std::size_t>(v)];
    return tagger(center / 4.0);
  };
  return assemble_hexes(nodes, hexes, sampler, hex_tagger);
}

Vec3 node_jitter(std::uint64_t seed, Index index) {
  std::uint64_t state = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
  Vec3 out;
  for (int d = 0; d < 3; ++d) {
    state = splitmix64(state + static_cast<std::uint64_t>(d));
    const double u = static_cast<double>(state >> 11) * 0x1.0p-53;  // [0, 1)
    out[d] = 2.0 * u - 1.0;
  }
  return out;
}

CurvedGrid perturb_grid(const CurvedGrid& grid, double amplitude, std::uint64_t seed) {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& e : grid.edges())
    h = std::min(h, (grid.nodes()[static_cast<std::size_t>(e.head)] -
                     grid.nodes()[static_cast<std::size_t>(e.tail)])
                        .norm());
  if (!std::isfinite(h)) h = 0.0;
  return perturb_grid(grid, amplitude, seed, h);
}

CurvedGrid perturb_grid(const CurvedGrid& grid, double amplitude, std::uint64_t seed, double h) {
  if (!(amplitude >= 0.0) || amplitude >= 0.5) {
    throw InvalidArgument("perturb_grid: amplitude must lie in [0, 0.5), got " +
                          std::to_string(amplitude));
  }
  if (amplitude == 0.0) return grid;
  std::vector<Vec3> nodes = grid.nodes();
  const auto& boundary = grid.boundary_nodes();
  for (Index v = 0; v < grid.num_nodes(); ++v) {
    if (boundary[static_cast<std::size_t>(v)]) continue;
    nodes[static_cast<std::size_t>(v)] += (amplitude * h) * node_jitter(seed, v);
  }
  std::vector<Edge> edges = grid.edges();
  for (auto& e : edges)
    e.samples = straight(nodes[static_cast<std::size_t>(e.tail)], nodes[static_cast<std::size_t>(e.head)]);
  return CurvedGrid(std::move(nodes), std::move(edges), grid.faces(), grid.cells(),
                    grid.boundary_tags());
}

Vec3 octant_direction(double s, double t) {
  const Vec3 a(1, 0, 0);
  const Vec3 b(0, 1, 0);
  const Vec3 c(0, 0, 1);
  const Vec3 d = Vec3(1, 0, 1).normalized();
  // Corners: (0,0)->a, (1,0)->b, (1,1)->c, (0,1)->d; boundary curves are great-circle arcs.
  if (t <= 0.0) return slerp(a, b, s);
  if (t >= 1.0) return slerp(d, c, s);
  if (s <= 0.0) return slerp(a, d, t);
  if (s >= 1.0) return slerp(b, c, t);
  const Vec3 coons = (1 - t) * slerp(a, b, s) + t * slerp(d, c, s) + (1 - s) * slerp(a, d, t) +
                     s * slerp(b, c, t) -
                     ((1 - s) * (1 - t) * a + s * (1 - t) * b + (1 - s) * t * d + s * t * c);
  return coons.normalized();
}

CurvedGrid build_spherical_octant_grid(const SphereOctantParams& p) {
  if (p.n_r < 1 || p.n_theta < 1 || p.n_phi < 1)
    throw InvalidArgument("build_spherical_octant_grid: cell counts must be >= 1");
  if (!(p.r_in > 0.0) || !(p.r_out > p.r_in))
    throw InvalidArgument("build_spherical_octant_grid: need 0 < r_in < r_out");
  if (p.samples_per_edge < 2)
    throw InvalidArgument("build_spherical_octant_grid: samples_per_edge must be >= 2");

  const Index mr = p.n_r + 1, ms = p.n_theta + 1, mt = p.n_phi + 1;
  auto id = [&](Index i, Index j, Index k) { return i + mr * (j + ms * k); };
  auto position = [&](double i, double j, double k) {
    const double r = p.r_in + (p.r_out - p.r_in) * i / p.n_r;
    return Vec3(r * octant_direction(j / p.n_theta, k / p.n_phi));
  };

  std::vector<Vec3> nodes(static_cast<std::size_t>(mr * ms * mt));
  std::vector<std::array<Index, 3>> logical(nodes.size());
  for (Index k = 0; k < mt; ++k)
    for (Index j = 0; j < ms; ++j)
      for (Index i = 0; i < mr; ++i) {
        const auto v = static_cast<std::size_t>(id(i, j, k));
        nodes[v] = position(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
        logical[v] = {i, j, k};
      }

  std::vector<Hex> hexes;
  for (Index k = 0; k < p.n_phi; ++k)
    for (Index j = 0; j < p.n_theta; ++j)
      for (Index i = 0; i < p.n_r; ++i)
        hexes.push_back({id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k),
                         id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1),
                         id(i, j + 1, k + 1)});

  EdgeSampler sampler = [&](Index a, Index b) {
    const auto& la = logical[static_cast<std::size_t>(a)];
    const auto& lb = logical[static_cast<std::size_t>(b)];
    if (la[1] == lb[1] && la[2] == lb[2]) {
      return straight(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)]);
    }
    std::vector<Vec3> pts;
    const int m = p.samples_per_edge;
    for (int q = 0; q < m; ++q) {
      const double u = static_cast<double>(q) / (m - 1);
      pts.push_back(position(la[0] + u * static_cast<double>(lb[0] - la[0]),
                             la[1] + u * static_cast<double>(lb[1] - la[1]),
                             la[2] + u * static_cast<double>(lb[2] - la[2])));
    }
    return pts;
  };
  HexFaceTagger tagger = [&](const std::array<Index, 4>& fn, Index) {
    auto all_at_radius = [&](Index level) {
      return std::all_of(fn.begin(), fn.end(), [&](Index v) {
        return logical[static_cast<std::size_t>(v)][0] == level;
      });
    };
    if (all_at_radius(0)) return BoundaryTag::electrode_tag(0);
    if (all_at_radius(p.n_r)) return BoundaryTag::electrode_tag(1);
    return BoundaryTag::neumann();
  };
  return assemble_hexes(nodes, hexes, sampler, tagger);
}

CurvedGrid build_square_torus_grid(const SquareTorusParams& p, SquareTorusInfo* info) {
  const Box& o = p.outer;
  const Box& hb = p.hole;
  if (p.n < 1) throw InvalidArgument("build_square_torus_grid: n must be >= 1");
  if ((o.hi - o.lo).minCoeff() <= 0.0 || (hb.hi - hb.lo).minCoeff() <= 0.0)
    throw InvalidArgument("build_square_torus_grid: degenerate box extents");
  if (!(hb.lo.x() > o.lo.x() && hb.hi.x() < o.hi.x() && hb.lo.y() > o.lo.y() &&
        hb.hi.y() < o.hi.y()))
    throw InvalidArgument("build_square_torus_grid: hole must lie strictly inside the outer footprint");
  if (hb.lo.z() != o.lo.z() || hb.hi.z() != o.hi.z())
    throw InvalidArgument("build_square_torus_grid: hole and outer box must share the z-extent");

  const double h = (hb.lo.y() - o.lo.y()) / p.n;
  long nx, ny, nz, hx0, hx1, hy0, hy1;
  bool ok = is_multiple(o.hi.x() - o.lo.x(), h, &nx) && is_multiple(o.hi.y() - o.lo.y(), h, &ny) &&
            is_multiple(o.hi.z() - o.lo.z(), h, &nz) && is_multiple(hb.lo.x() - o.lo.x(), h, &hx0) &&
            is_multiple(hb.hi.x() - o.lo.x(), h, &hx1) && is_multiple(hb.lo.y() - o.lo.y(), h, &hy0) &&
            is_multiple(hb.hi.y() - o.lo.y(), h, &hy1);
  if (!ok)
    throw InvalidArgument("build_square_torus_grid: box extents are not multiples of the cell size " +
                          std::to_string(h));
  const long icut = std::lround(0.5 * (hx0 + hx1));
  if (icut <= hx0 || icut >= hx1)
    throw InvalidArgument("build_square_torus_grid: hole too narrow to place the cut");

  const Index mx = nx + 1, my = ny + 1;
  auto base_id = [&](Index i, Index j, Index k) { return i + mx * (j + my * k); };
  const Index n_base = mx * my * (nz + 1);
  // Nodes on the cut plane inside the lower arm are duplicated for the cells at x > cut_x.
  auto on_cut = [&](Index i, Index j) { return i == icut && j <= hy0; };
  auto dup_id = [&](Index j, Index k) { return n_base + j + (hy0 + 1) * k; };
  const Index n_total = n_base + (hy0 + 1) * (nz + 1);

  std::vector<Vec3> all_nodes(static_cast<std::size_t>(n_total));
  std::vector<std::array<Index, 3>> all_logical(all_nodes.size());
  for (Index k = 0; k <= nz; ++k)
    for (Index j = 0; j <= ny; ++j)
      for (Index i = 0; i <= nx; ++i) {
        const Vec3 x = o.lo + h * Vec3(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
        all_nodes[static_cast<std::size_t>(base_id(i, j, k))] = x;
        all_logical[static_cast<std::size_t>(base_id(i, j, k))] = {i, j, k};
        if (on_cut(i, j)) {
          all_nodes[static_cast<std::size_t>(dup_id(j, k))] = x;
          all_logical[static_cast<std::size_t>(dup_id(j, k))] = {i, j, k};
        }
      }

  std::vector<Hex> hexes;
  std::vector<Index> cell_i;
  for (Index k = 0; k < nz; ++k)
    for (Index j = 0; j < ny; ++j)
      for (Index i = 0; i < nx; ++i) {
        if (i >= hx0 && i < hx1 && j >= hy0 && j < hy1) continue;
        auto node = [&](Index ii, Index jj, Index kk) {
          if (i == icut && ii == icut && on_cut(ii, jj)) return dup_id(jj, kk);
          return base_id(ii, jj, kk);
        };
        hexes.push_back({node(i, j, k), node(i + 1, j, k), node(i + 1, j + 1, k), node(i, j + 1, k),
                         node(i, j, k + 1), node(i + 1, j, k + 1), node(i + 1, j + 1, k + 1),
                         node(i, j + 1, k + 1)});
        cell_i.push_back(i);
      }

  // Compact away nodes inside the hole.
  std::vector<Index> remap(all_nodes.size(), -1);
  for (const auto& hex : hexes)
    for (Index v : hex) remap[static_cast<std::size_t>(v)] = 0;
  std::vector<Vec3> nodes;
  std::vector<std::array<Index, 3>> logical;
  for (std::size_t v = 0; v < all_nodes.size(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = static_cast<Index>(nodes.size());
    nodes.push_back(all_nodes[v]);
    logical.push_back(all_logical[v]);
  }
  for (auto& hex : hexes)
    for (Index& v : hex) v = remap[static_cast<std::size_t>(v)];

  EdgeSampler sampler = [&](Index a, Index b) {
    return straight(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)]);
  };
  HexFaceTagger tagger = [&](const std::array<Index, 4>& fn, Index cell) {
    const bool cut = std::all_of(fn.begin(), fn.end(), [&](Index v) {
      const auto& l = logical[static_cast<std::size_t>(v)];
      return on_cut(l[0], l[1]);
    });
    if (cut) return BoundaryTag::electrode_tag(cell_i[static_cast<std::size_t>(cell)] < icut ? 0 : 1);
    return BoundaryTag::neumann();
  };
  CurvedGrid grid = assemble_hexes(nodes, hexes, sampler, tagger);
  if (info) {
    info->h = h;
    info->cut_x = o.lo.x() + h * static_cast<double>(icut);
    info->n_radial = static_cast<int>(hy0);
    info->n_z = static_cast<int>(nz);
  }
  return perturb_grid(grid, p.amplitude, p.seed, h);
}

}  // namespace cmfd
