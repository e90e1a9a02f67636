#include <doctest.h>

#include <filesystem>

#include "cmfd/errors.hpp"
#include "cmfd/mesh_io.hpp"
#include "helpers.hpp"

using namespace cmfd;

TEST_SUITE("grid") {
  TEST_CASE("unit cube combinatorics") {
    const CurvedGrid g = build_cubic_grid(1, 1.0);
    CHECK(g.num_nodes() == 8);
    CHECK(g.num_edges() == 12);
    CHECK(g.num_faces() == 6);
    CHECK(g.num_cells() == 1);
    CHECK(g.G().rows() == 12);
    CHECK(g.G().cols() == 8);
    CHECK(g.C().rows() == 6);
    CHECK(g.D().rows() == 1);
  }

  TEST_CASE("structured face counts") {
    const CurvedGrid g = build_cubic_grid(2, 0.5);
    CHECK(g.num_cells() == 8);
    CHECK(g.num_faces() == 36);
    for (int n = 1; n <= 4; ++n) {
      const CurvedGrid h = build_cubic_grid(n, 1.0);
      CHECK(h.num_faces() == 3 * n * n * (n + 1));
      CHECK(h.num_nodes() == (n + 1) * (n + 1) * (n + 1));
    }
  }

  TEST_CASE("generated grids are valid cell complexes") {
    for (const CurvedGrid& g : test::generated_grids()) {
      const ValidationReport rep = validate_complex(g);
      CHECK(rep.pass());
      CHECK(rep.dc_zero);
      CHECK(rep.cg_zero);
      CHECK(rep.violations.empty());
      CHECK(g.num_faces() >= 3 * g.num_cells());
    }
  }

  TEST_CASE("boundary tags partition the boundary faces") {
    for (const CurvedGrid& g : test::generated_grids()) {
      for (Index f = 0; f < g.num_faces(); ++f) {
        const auto cells = g.face_cells(f);
        REQUIRE((cells.size() == 1 || cells.size() == 2));
        if (cells.size() == 2) {
          CHECK(g.tag(f).kind == BoundaryKind::interior);
          CHECK(cells[0].sign == -cells[1].sign);
        } else {
          CHECK(g.tag(f).kind != BoundaryKind::interior);
        }
      }
    }
  }

  TEST_CASE("flipped D sign is reported") {
    const CurvedGrid g = build_cubic_grid(2, 1.0);
    std::vector<Cell> cells = g.cells();
    cells[3].faces[1].sign *= -1;
    const CurvedGrid bad(g.nodes(), g.edges(), g.faces(), cells, g.boundary_tags());
    const ValidationReport rep = validate_complex(bad);
    CHECK_FALSE(rep.pass());
    CHECK_FALSE(rep.dc_zero);
    REQUIRE_FALSE(rep.violations.empty());
    CHECK(rep.violations.front().find("D·C ≠ 0 at (cell 3") != std::string::npos);
  }

  TEST_CASE("open face loop is reported") {
    const CurvedGrid g = build_cubic_grid(1, 1.0);
    std::vector<Face> faces = g.faces();
    faces[2].loop.pop_back();
    const CurvedGrid bad(g.nodes(), g.edges(), faces, g.cells(), g.boundary_tags());
    const ValidationReport rep = validate_complex(bad);
    CHECK_FALSE(rep.pass());
    CHECK_FALSE(rep.loops_closed);
    bool found = false;
    for (const auto& v : rep.violations) found = found || v.find("loop closure") != std::string::npos;
    CHECK(found);
  }

  TEST_CASE("polyline endpoint mismatch is reported") {
    const CurvedGrid g = build_cubic_grid(1, 1.0);
    std::vector<Edge> edges = g.edges();
    edges[0].samples.front() += Vec3(1e-3, 0, 0);
    const CurvedGrid bad(g.nodes(), edges, g.faces(), g.cells(), g.boundary_tags());
    CHECK_FALSE(validate_complex(bad).polyline_endpoints);
  }

  TEST_CASE("out of range ids are rejected on construction") {
    const CurvedGrid g = build_cubic_grid(1, 1.0);
    std::vector<Cell> cells = g.cells();
    cells[0].faces[0].face = 99;
    CHECK_THROWS_AS(CurvedGrid(g.nodes(), g.edges(), g.faces(), cells, g.boundary_tags()), StructuralError);
  }

  TEST_CASE("perturbation with zero amplitude is the identity") {
    const CurvedGrid g = build_cubic_grid(3, 0.5);
    const CurvedGrid p = perturb_grid(g, 0.0, 42);
    CHECK(p.nodes() == g.nodes());
  }

  TEST_CASE("perturbation is deterministic and per-node") {
    const CurvedGrid g = build_cubic_grid(4, 0.25);
    const CurvedGrid a = perturb_grid(g, 0.3, 99);
    const CurvedGrid b = perturb_grid(g, 0.3, 99);
    const CurvedGrid c = perturb_grid(g, 0.3, 100);
    CHECK(a.nodes() == b.nodes());
    CHECK(a.nodes() != c.nodes());
    for (Index v = 0; v < g.num_nodes(); ++v) {
      const Vec3 d = a.nodes()[static_cast<std::size_t>(v)] - g.nodes()[static_cast<std::size_t>(v)];
      if (g.boundary_nodes()[static_cast<std::size_t>(v)]) {
        CHECK(d.isZero(0.0));
      } else {
        CHECK(d.cwiseAbs().maxCoeff() <= 0.3 * 0.25);
        // The displacement is a function of (seed, node index) only.
        CHECK((d - 0.3 * 0.25 * node_jitter(99, v)).norm() <= 1e-15);
      }
    }
    CHECK(validate_complex(a).pass());
    for (const auto& e : a.edges()) CHECK(e.samples.size() == 2);
  }

  TEST_CASE("perturbation makes faces non-planar") {
    const CurvedGrid p = test::perturbed_cube(4, 0.3, 42);
    double worst = 0.0;
    for (Index f = 0; f < p.num_faces(); ++f) worst = std::max(worst, face_planarity(p, f));
    CHECK(worst > 1e-3);
  }

  TEST_CASE("perturbation amplitude range") {
    const CurvedGrid g = build_cubic_grid(2, 1.0);
    CHECK_THROWS_AS(perturb_grid(g, 0.5, 1), InvalidArgument);
    CHECK_THROWS_AS(perturb_grid(g, -0.1, 1), InvalidArgument);
    CHECK_NOTHROW(perturb_grid(g, 0.49, 1));
  }

  TEST_CASE("jitter components are uniform on [-1, 1]") {
    double mean = 0.0, lo = 1.0, hi = -1.0;
    const int count = 20000;
    for (Index i = 0; i < count; ++i) {
      const Vec3 j = node_jitter(5, i);
      mean += j.sum() / 3.0;
      lo = std::min(lo, j.minCoeff());
      hi = std::max(hi, j.maxCoeff());
    }
    CHECK(std::abs(mean / count) < 0.02);
    CHECK(lo >= -1.0);
    CHECK(hi < 1.0);
    CHECK(lo < -0.99);
    CHECK(hi > 0.99);
  }

  TEST_CASE("single-cell shell octant") {
    const CurvedGrid g = build_spherical_octant_grid({1, 1, 1, 1.0, 2.0, 8});
    CHECK(g.num_cells() == 1);
    CHECK(g.num_faces() == 6);
    int inner = 0, outer = 0, sym = 0;
    for (Index f = 0; f < g.num_faces(); ++f) {
      const BoundaryTag& t = g.tag(f);
      if (t == BoundaryTag::electrode_tag(0)) {
        ++inner;
        CHECK(face_planarity(g, f) > 1e-3);
      } else if (t == BoundaryTag::electrode_tag(1)) {
        ++outer;
        CHECK(face_planarity(g, f) > 1e-3);
      } else {
        CHECK(t == BoundaryTag::neumann());
        CHECK(face_planarity(g, f) <= 1e-12);
        ++sym;
      }
    }
    CHECK(inner == 1);
    CHECK(outer == 1);
    CHECK(sym == 4);  // the y = 0 plane carries two sides of the angular square
  }

  TEST_CASE("shell octant nodes and samples lie on their spheres") {
    const CurvedGrid g = build_spherical_octant_grid({2, 3, 3, 1.0, 2.0, 6});
    for (const auto& e : g.edges()) {
      const double rt = e.samples.front().norm(), rh = e.samples.back().norm();
      if (std::abs(rt - rh) < 1e-12) {
        CHECK(e.samples.size() == 6);
        for (const auto& p : e.samples) CHECK(p.norm() == doctest::Approx(rt).epsilon(1e-14));
      }
      for (const auto& p : e.samples) CHECK(p.minCoeff() >= -1e-15);
    }
  }

  TEST_CASE("symmetry-plane face vectors are axis aligned") {
    const CurvedGrid g = build_spherical_octant_grid({3, 3, 3, 1.0, 2.0, 8});
    const auto faces = test::faces_on_plane(g, 2, 0.0);
    REQUIRE(faces.size() == 9);
    for (Index f : faces) {
      const Vec3 v = face_vector(g, f);
      CHECK(std::abs(v.x()) <= 1e-14 * v.norm());
      CHECK(std::abs(v.y()) <= 1e-14 * v.norm());
    }
  }

  TEST_CASE("square torus") {
    SquareTorusParams p;
    p.n = 3;
    SquareTorusInfo info;
    const CurvedGrid g = build_square_torus_grid(p, &info);
    CHECK(info.n_radial == 3);
    CHECK(validate_complex(g).pass());
    int cut0 = 0, cut1 = 0;
    for (Index f = 0; f < g.num_faces(); ++f) {
      if (g.tag(f) == BoundaryTag::electrode_tag(0)) ++cut0;
      if (g.tag(f) == BoundaryTag::electrode_tag(1)) ++cut1;
      CHECK(face_planarity(g, f) <= 1e-12);
    }
    CHECK(cut0 == info.n_z * info.n_radial);
    CHECK(cut1 == info.n_z * info.n_radial);

    const GridGeometry geom = compute_geometry(g);
    double vol = 0.0;
    for (const auto& c : geom.cells) vol += c.volume;
    CHECK(vol == doctest::Approx(p.outer.volume() - p.hole.volume()).epsilon(1e-12));
  }

  TEST_CASE("square torus rejects bad extents") {
    SquareTorusParams p;
    p.hole = Box{Vec3(0, 1, 0), Vec3(2, 2, 1)};
    CHECK_THROWS_AS(build_square_torus_grid(p), InvalidArgument);
    p.hole = Box{Vec3(1, 1, 0), Vec3(2, 2, 0.5)};
    CHECK_THROWS_AS(build_square_torus_grid(p), InvalidArgument);
    p = {};
    p.outer.hi.x() = p.outer.lo.x();
    CHECK_THROWS_AS(build_square_torus_grid(p), InvalidArgument);
  }

  TEST_CASE("mesh file round trip") {
    const CurvedGrid g = build_spherical_octant_grid({2, 2, 2, 1.0, 2.0, 4});
    const auto path = std::filesystem::temp_directory_path() / "cmfd_mesh_roundtrip.json";
    write_mesh(g, path);
    const CurvedGrid r = read_mesh(path);
    std::filesystem::remove(path);
    CHECK(r.nodes() == g.nodes());
    REQUIRE(r.num_edges() == g.num_edges());
    for (Index e = 0; e < g.num_edges(); ++e)
      CHECK(r.edges()[static_cast<std::size_t>(e)].samples == g.edges()[static_cast<std::size_t>(e)].samples);
    CHECK(r.num_faces() == g.num_faces());
    CHECK(r.num_cells() == g.num_cells());
    CHECK(r.boundary_tags() == g.boundary_tags());
    CHECK(validate_complex(r).pass());
  }

  TEST_CASE("mesh reader rejects bad documents") {
    nlohmann::json doc = mesh_to_json(build_cubic_grid(1, 1.0));
    CHECK(doc.at("format_version") == kMeshFormatVersion);
    nlohmann::json wrong_version = doc;
    wrong_version["format_version"] = 2;
    CHECK_THROWS(mesh_from_json(wrong_version));
    nlohmann::json tampered = doc;
    tampered["D"]["entries"][0][2] = -tampered["D"]["entries"][0][2].get<int>();
    CHECK_THROWS(mesh_from_json(tampered));
  }
}
