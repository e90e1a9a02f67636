#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Geometry>

#include "cmfd/discretization.hpp"
#include "cmfd/generators.hpp"
#include "cmfd/geometry.hpp"
#include "cmfd/grid.hpp"
#include "cmfd/reconstruction.hpp"
#include "cmfd/solver.hpp"

namespace test {

using namespace cmfd;

inline CurvedGrid perturbed_cube(int n, double amplitude, std::uint64_t seed, const FaceTagger& tagger = {}) {
  const double h = 1.0 / n;
  return perturb_grid(build_cubic_grid(n, h, tagger), amplitude, seed, h);
}

/// Uniformly distributed rotation from a normalized Gaussian quaternion.
inline Eigen::Matrix3d random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_vector(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

/// Every grid produced by the generators, in a few sizes.
inline std::vector<CurvedGrid> generated_grids() {
  std::vector<CurvedGrid> out;
  for (int n = 1; n <= 3; ++n) out.push_back(build_cubic_grid(n, 1.0 / n));
  out.push_back(perturbed_cube(3, 0.3, 7));
  out.push_back(perturbed_cube(4, 0.4, 42));
  out.push_back(build_spherical_octant_grid({1, 1, 1, 1.0, 2.0, 8}));
  out.push_back(build_spherical_octant_grid({3, 2, 4, 1.0, 2.0, 5}));
  out.push_back(build_square_torus_grid({}));
  SquareTorusParams tp;
  tp.n = 2;
  tp.amplitude = 0.3;
  tp.seed = 3;
  out.push_back(build_square_torus_grid(tp));
  out.push_back(flatten_grid(perturbed_cube(2, 0.3, 5)));
  return out;
}

inline std::set<Index> node_set(const CurvedGrid& grid, Index f) {
  const auto nodes = grid.face_nodes(f);
  return {nodes.begin(), nodes.end()};
}

/// Faces of `grid` whose corner nodes lie on the plane coord == value.
inline std::vector<Index> faces_on_plane(const CurvedGrid& grid, int coord, double value, double tol = 1e-12) {
  std::vector<Index> out;
  for (Index f = 0; f < grid.num_faces(); ++f) {
    bool on = true;
    for (Index v : grid.face_nodes(f)) on = on && std::abs(grid.nodes()[static_cast<std::size_t>(v)][coord] - value) <= tol;
    if (on) out.push_back(f);
  }
  return out;
}

inline double max_abs_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace test
