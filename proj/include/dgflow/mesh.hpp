#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dgflow/types.hpp"

namespace dgflow {

struct PeriodicPair {
  /// Vertex indices of the master and slave edges; slave[i] = master[i] + translation.
  std::array<int, 2> master{};
  std::array<int, 2> slave{};
  Vec2 translation = Vec2::Zero();
};

/// Conforming triangulation with boundary labels and periodic edge pairs.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  /// Keyed by the sorted vertex pair of a boundary edge.
  std::map<std::pair<int, int>, std::string> boundary_markers;
  std::vector<PeriodicPair> periodic_pairs;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_elements() const { return static_cast<int>(triangles.size()); }
};

/// x = B xhat + b, mapping the reference triangle onto an element.
struct AffineMap {
  Mat2 jacobian = Mat2::Identity();
  Vec2 offset = Vec2::Zero();
  double det = 1.0;
  Mat2 inverse = Mat2::Identity();

  Vec2 operator()(const Vec2& ref) const { return jacobian * ref + offset; }
  Vec2 to_reference(const Vec2& x) const { return inverse * (x - offset); }
};

AffineMap affine_map(const Mesh& mesh, int element);

inline constexpr int kBoundary = -1;

struct Facet {
  /// Canonical direction: lower to higher global vertex index (master
  /// vertices for periodic facets). The facet parameter s in [0,1] runs
  /// along this direction.
  std::array<int, 2> vertices{};
  int left = kBoundary;
  int right = kBoundary;
  int left_edge = -1;
  int right_edge = -1;
  /// True when the element's local edge runs against the canonical direction.
  bool left_reversed = false;
  bool right_reversed = false;
  /// Unit normal, outward from the left element.
  Vec2 normal = Vec2::Zero();
  double length = 0.0;
  /// Boundary label; empty for interior facets.
  std::string label;
  bool periodic = false;

  bool is_boundary() const { return right == kBoundary; }
};

struct FacetTopology {
  std::vector<Facet> facets;
  /// Facet index of each local edge of each element.
  std::vector<std::array<int, 3>> element_facets;
  /// Whether each local edge is the left side of its facet.
  std::vector<std::array<bool, 3>> element_is_left;
  int num_interior = 0;
  int num_boundary = 0;

  int num_facets() const { return static_cast<int>(facets.size()); }
  bool reversed(int element, int edge) const {
    const Facet& f = facets[element_facets[element][edge]];
    return element_is_left[element][edge] ? f.left_reversed : f.right_reversed;
  }
};

/// Parse the ASCII mesh format:
///   nv nt nbf np
///   nv lines `x y`, nt lines `v0 v1 v2`, nbf lines `v0 v1 label`,
///   np lines `mv0 mv1 sv0 sv1 tx ty`.
/// `#` starts a comment. Triangles are reoriented counter-clockwise.
Mesh parse_mesh(std::istream& in);
Mesh load_mesh(const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& out);

/// Checks orientation, degeneracy and periodic geometry; flips clockwise
/// triangles in place.
void validate_mesh(Mesh& mesh);

/// Facets with periodic pairs merged into interior facets.
FacetTopology build_facets(const Mesh& mesh);

/// Local edge j runs from local vertex (j+1)%3 to (j+2)%3.
std::array<int, 2> local_edge_vertices(const Mesh& mesh, int element, int edge);

double element_area(const Mesh& mesh, int element);
/// Longest edge of the element.
double element_diameter(const Mesh& mesh, int element);

/// Diagonal: nx x ny cells, each split along its lower-left/upper-right
/// diagonal. Offset: ny rows of spacing hy; odd rows are shifted by half a
/// cell (with half-width cells at the sides), giving near-equilateral
/// triangles when hy ~ (sqrt(3)/2) hx. Periodic y requires even ny there.
enum class SquarePattern { Diagonal, Offset };

/// Structured triangulation of [x0,x1]x[y0,y1]. Boundary labels: left, right,
/// bottom, top. Interior vertices are displaced by up to `jitter` times the
/// local spacing (clamped to 0.2) using a fixed-seed generator.
struct SquareMeshSpec {
  int nx = 4;
  int ny = 4;
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  bool periodic_x = false;
  bool periodic_y = false;
  double jitter = 0.0;
  std::uint64_t seed = 20180601;
  SquarePattern pattern = SquarePattern::Diagonal;
};

Mesh generate_square(const SquareMeshSpec& spec);

}  // namespace dgflow
