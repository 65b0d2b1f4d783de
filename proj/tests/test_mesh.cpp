#include <cmath>
#include <array>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dgflow/error.hpp"
#include "dgflow/mesh.hpp"

using namespace dgflow;

namespace {

Mesh parse(const std::string& text) {
  std::istringstream in(text);
  return parse_mesh(in);
}

const char* kReferenceTriangle = R"(# reference triangle
3 1 3 0
0 0
1 0
0 1
0 1 2
0 1 bottom
1 2 hyp
2 0 left
)";

const char* kUnitSquare = R"(4 2 4 0
0 0
1 0
1 1
0 1
0 1 2
0 2 3
0 1 bottom
1 2 right
2 3 top
3 0 left
)";

const char* kPeriodicSquare = R"(4 2 0 2
0 0
1 0
1 1
0 1
0 1 2
0 2 3
0 3 1 2 1 0   # left -> right
0 1 3 2 0 1   # bottom -> top
)";

}  // namespace

TEST_CASE("single reference triangle") {
  const Mesh mesh = parse(kReferenceTriangle);
  CHECK(mesh.num_elements() == 1);
  const FacetTopology topo = build_facets(mesh);
  CHECK(topo.num_boundary == 3);
  CHECK(topo.num_interior == 0);
  CHECK(topo.facets[0].label == "hyp");
}

TEST_CASE("two-triangle unit square") {
  const Mesh mesh = parse(kUnitSquare);
  const FacetTopology topo = build_facets(mesh);
  CHECK(topo.num_interior == 1);
  CHECK(topo.num_boundary == 4);
}

TEST_CASE("two-triangle periodic square merges boundary pairs") {
  const Mesh mesh = parse(kPeriodicSquare);
  const FacetTopology topo = build_facets(mesh);
  CHECK(topo.num_boundary == 0);
  CHECK(topo.num_interior == 3);
  CHECK(topo.num_facets() == 3);
}

TEST_CASE("fully periodic N x N square has 3N^2 facets") {
  for (int n : {1, 2, 3, 5, 8}) {
    SquareMeshSpec spec;
    spec.nx = spec.ny = n;
    spec.periodic_x = spec.periodic_y = true;
    const Mesh mesh = generate_square(spec);
    // Oracle: enumerate edges as (anchor grid cell modulo n, direction).
    std::set<std::array<int, 3>> edges;
    for (const auto& t : mesh.triangles)
      for (int j = 0; j < 3; ++j) {
        const int a = t[j], b = t[(j + 1) % 3];
        const int ia = a % (n + 1), ja = a / (n + 1), ib = b % (n + 1), jb = b / (n + 1);
        const int dir = ja == jb ? 0 : (ia == ib ? 1 : 2);
        edges.insert({std::min(ia, ib) % n, std::min(ja, jb) % n, dir});
      }
    const FacetTopology topo = build_facets(mesh);
    CHECK(topo.num_facets() == static_cast<int>(edges.size()));
    CHECK(topo.num_facets() == 3 * n * n);
    CHECK(topo.num_boundary == 0);
  }
}

TEST_CASE("clockwise triangles are reoriented") {
  const Mesh mesh = parse("3 1 0 0\n0 0\n1 0\n0 1\n0 2 1\n");
  CHECK(element_area(mesh, 0) == doctest::Approx(0.5));
}

TEST_CASE("load errors") {
  SUBCASE("malformed line") { CHECK_THROWS_AS(parse("3 1 0 0\n0 0\n1 zero\n0 1\n0 1 2\n"), ParseError); }
  SUBCASE("missing records") { CHECK_THROWS_AS(parse("3 1 0 0\n0 0\n1 0\n"), ParseError); }
  SUBCASE("index out of range") { CHECK_THROWS_AS(parse("3 1 0 0\n0 0\n1 0\n0 1\n0 1 3\n"), ParseError); }
  SUBCASE("degenerate triangle") {
    CHECK_THROWS_AS(parse("3 1 0 0\n0 0\n1 0\n2 1e-15\n0 1 2\n"), GeometryError);
  }
  SUBCASE("non-manifold edge") {
    const Mesh mesh = parse("5 3 0 0\n0 0\n1 0\n0 1\n0 -1\n1 1\n0 1 2\n0 3 1\n1 4 0\n");
    CHECK_THROWS_AS(build_facets(mesh), TopologyError);
  }
  SUBCASE("periodic translation mismatch") {
    CHECK_THROWS_AS(parse("4 2 0 1\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n0 3 1 2 1.1 0\n"), GeometryError);
  }
  SUBCASE("periodic length mismatch") {
    const char* text = "6 4 0 1\n0 0\n1 0\n1 1\n0 1\n2 0\n2 2\n0 1 2\n0 2 3\n1 4 5\n1 5 2\n0 3 4 5 2 0\n";
    CHECK_THROWS(parse(text));
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_mesh("/nonexistent/mesh.txt"), IOError); }
}

TEST_CASE("affine maps") {
  SUBCASE("reference element") {
    const AffineMap map = affine_map(parse(kReferenceTriangle), 0);
    CHECK((map.jacobian - Mat2::Identity()).norm() == 0.0);
    CHECK(map.offset.norm() == 0.0);
  }
  SUBCASE("scaled by 2") {
    const AffineMap map = affine_map(parse("3 1 0 0\n0 0\n2 0\n0 2\n0 1 2\n"), 0);
    CHECK(map.det == doctest::Approx(4.0));
  }
  SUBCASE("arbitrary triangles reproduce their vertices") {
    SquareMeshSpec spec;
    spec.nx = spec.ny = 5;
    spec.jitter = 0.2;
    spec.x1 = 2.5;
    const Mesh mesh = generate_square(spec);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const AffineMap map = affine_map(mesh, e);
      CHECK(map.det > 0);
      for (int i = 0; i < 3; ++i) {
        const Vec2 ref = i == 0 ? Vec2(0, 0) : (i == 1 ? Vec2(1, 0) : Vec2(0, 1));
        CHECK((map(ref) - mesh.vertices[mesh.triangles[e][i]]).norm() < 1e-13);
      }
      CHECK((map.jacobian * map.inverse - Mat2::Identity()).norm() < 1e-13);
    }
  }
}

TEST_CASE("jittered meshes: area, normals, determinism") {
  SquareMeshSpec spec;
  spec.nx = 7;
  spec.ny = 6;
  spec.x1 = 3.0;
  spec.y1 = 2.0;
  spec.jitter = 0.2;
  spec.periodic_x = true;
  const Mesh mesh = generate_square(spec);
  double area = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) area += affine_map(mesh, e).det / 2;
  CHECK(std::abs(area - 6.0) < 1e-12 * 6.0);

  const Mesh again = generate_square(spec);
  for (int v = 0; v < mesh.num_vertices(); ++v) CHECK(mesh.vertices[v] == again.vertices[v]);

  const FacetTopology topo = build_facets(mesh);
  CHECK(topo.num_boundary == 2 * spec.nx);
  auto centroid = [&](int e) {
    Vec2 c = Vec2::Zero();
    for (int v : mesh.triangles[e]) c += mesh.vertices[v] / 3.0;
    return c;
  };
  for (const Facet& f : topo.facets) {
    CHECK(std::abs(f.normal.norm() - 1.0) < 1e-14);
    const auto lv = local_edge_vertices(mesh, f.left, f.left_edge);
    const Vec2 mid = 0.5 * (mesh.vertices[lv[0]] + mesh.vertices[lv[1]]);
    CHECK(f.normal.dot(mid - centroid(f.left)) > 0);  // outward from left
    if (!f.is_boundary() && !f.periodic) CHECK(f.normal.dot(centroid(f.right) - mid) > 0);
    if (f.periodic) {
      const auto rv = local_edge_vertices(mesh, f.right, f.right_edge);
      const Vec2 rmid = 0.5 * (mesh.vertices[rv[0]] + mesh.vertices[rv[1]]);
      CHECK(f.normal.dot(centroid(f.right) - rmid) > 0);  // still points into the right element
    }
  }
}

TEST_CASE("write/parse round trip") {
  SquareMeshSpec spec;
  spec.nx = 3;
  spec.ny = 2;
  spec.periodic_y = true;
  spec.jitter = 0.1;
  const Mesh mesh = generate_square(spec);
  std::stringstream ss;
  write_mesh(mesh, ss);
  const Mesh back = parse_mesh(ss);
  CHECK(back.num_elements() == mesh.num_elements());
  CHECK(back.periodic_pairs.size() == mesh.periodic_pairs.size());
  CHECK(back.boundary_markers == mesh.boundary_markers);
  for (int v = 0; v < mesh.num_vertices(); ++v) CHECK((back.vertices[v] - mesh.vertices[v]).norm() == 0.0);
}

TEST_CASE("offset-row meshes") {
  SquareMeshSpec spec;
  spec.pattern = SquarePattern::Offset;
  spec.nx = 5;
  spec.ny = 4;
  spec.x1 = 2.0;
  spec.y1 = 1.5;

  SUBCASE("periodic: area, closed surface, edge lengths") {
    spec.periodic_x = spec.periodic_y = true;
    spec.jitter = 0.1;
    const Mesh mesh = generate_square(spec);
    double area = 0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      CHECK(affine_map(mesh, e).det > 0);
      area += affine_map(mesh, e).det / 2;
    }
    CHECK(std::abs(area - 3.0) < 1e-12 * 3.0);
    const FacetTopology topo = build_facets(mesh);
    CHECK(topo.num_boundary == 0);
    CHECK(2 * topo.num_facets() == 3 * mesh.num_elements());  // every facet has two sides
    // odd rows carry one extra (split) cell: 2 nx + 1 triangles per strip
    CHECK(mesh.num_elements() == (2 * spec.nx + 1) * spec.ny);
  }

  SUBCASE("walls: boundary facets on all four sides") {
    const Mesh mesh = generate_square(spec);
    const FacetTopology topo = build_facets(mesh);
    std::map<std::string, int> count;
    for (const Facet& f : topo.facets)
      if (f.is_boundary()) ++count[f.label];
    CHECK(count["bottom"] == spec.nx);
    CHECK(count["top"] == spec.nx);
    CHECK(count["left"] == spec.ny);
    CHECK(count["right"] == spec.ny);
  }

  SUBCASE("periodic in y needs an even row count") {
    spec.periodic_y = true;
    spec.ny = 3;
    CHECK_THROWS_AS(generate_square(spec), ConfigError);
  }
}
