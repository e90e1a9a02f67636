#pragma once

#include <cstdint>
#include <functional>

#include "cmfd/grid.hpp"

namespace cmfd {

/// Receives the mean of a boundary face's corner nodes.
using FaceTagger = std::function<BoundaryTag(const Vec3& face_center)>;

/// Axis-aligned n x n x n hexahedral grid on [0, n*h]^3 with straight edges.
/// Boundary faces default to electrode(0).
CurvedGrid build_cubic_grid(int n, double h, const FaceTagger& tagger = {});

/// Moves every internal node by a displacement drawn uniformly from
/// [-amplitude*h, amplitude*h]^3, where h is the shortest edge of the input.
/// Each displacement depends only on (seed, node index). Edges become
/// straight segments between the moved endpoints.
CurvedGrid perturb_grid(const CurvedGrid& grid, double amplitude, std::uint64_t seed);
CurvedGrid perturb_grid(const CurvedGrid& grid, double amplitude, std::uint64_t seed, double h);

/// Displacement applied to node `index` by perturb_grid, in units of amplitude*h.
Vec3 node_jitter(std::uint64_t seed, Index index);

struct SphereOctantParams {
  int n_r = 1;
  int n_theta = 1;
  int n_phi = 1;
  double r_in = 1.0;
  double r_out = 2.0;
  int samples_per_edge = 8;
};

/// Shell octant r_in <= |x| <= r_out, x, y, z >= 0, meshed with structured hex
/// topology (radius x two angular parameters). Tangential edges are sampled
/// on their spheres. Inner sphere: electrode(0); outer sphere: electrode(1);
/// symmetry planes: neumann.
CurvedGrid build_spherical_octant_grid(const SphereOctantParams& params);

/// Unit direction in the positive octant for angular parameters s, t in [0, 1].
/// (0,0)->e_x, (1,0)->e_y, (1,1)->e_z, (0,1)->(e_x+e_z)/sqrt(2); edges follow great circles.
Vec3 octant_direction(double s, double t);

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();
  double volume() const { return (hi - lo).prod(); }
};

struct SquareTorusParams {
  Box outer{Vec3(0, 0, 0), Vec3(3, 3, 1)};
  Box hole{Vec3(1, 1, 0), Vec3(2, 2, 1)};
  int n = 4;  // cells across the arm that carries the cut (y from outer.lo to hole.lo)
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

struct SquareTorusInfo {
  double h = 0.0;
  double cut_x = 0.0;
  int n_radial = 0;  // cells across the cut arm
  int n_z = 0;
};

/// Square annulus prism (outer box minus hole box) with one planar cut at
/// x = cut_x through the arm below the hole. The faces on the two sides of the
/// cut are electrode(0) (side x < cut_x) and electrode(1); the rest of the
/// boundary is neumann. Internal nodes are perturbed as in perturb_grid.
CurvedGrid build_square_torus_grid(const SquareTorusParams& params, SquareTorusInfo* info = nullptr);

}  // namespace cmfd
