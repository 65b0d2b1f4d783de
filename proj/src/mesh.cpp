#include "dgflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "dgflow/error.hpp"

namespace dgflow {

namespace {

std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

struct LineReader {
  std::istream& in;
  int line_no = 0;

  // Next non-empty line with comments stripped; false at end of input.
  bool next(std::istringstream& out) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.clear();
      out.str(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("mesh line " + std::to_string(line_no) + ": " + what);
  }
};

template <typename... Ts>
void read_fields(LineReader& reader, const char* what, Ts&... fields) {
  std::istringstream ls;
  if (!reader.next(ls)) reader.fail(std::string("unexpected end of file, expected ") + what);
  ((ls >> fields), ...);
  if (ls.fail()) reader.fail(std::string("malformed ") + what);
  std::string extra;
  if (ls >> extra) reader.fail(std::string("trailing data after ") + what);
}

}  // namespace

Mesh parse_mesh(std::istream& in) {
  LineReader reader{in};
  int nv = 0, nt = 0, nbf = 0, np = 0;
  read_fields(reader, "header `nv nt nbf np`", nv, nt, nbf, np);
  if (nv < 3 || nt < 1 || nbf < 0 || np < 0) reader.fail("invalid counts in header");

  Mesh mesh;
  mesh.vertices.reserve(nv);
  for (int i = 0; i < nv; ++i) {
    double x = 0, y = 0;
    read_fields(reader, "vertex `x y`", x, y);
    mesh.vertices.emplace_back(x, y);
  }
  auto check_index = [&](int v) {
    if (v < 0 || v >= nv) reader.fail("vertex index " + std::to_string(v) + " out of range");
  };
  for (int i = 0; i < nt; ++i) {
    std::array<int, 3> t{};
    read_fields(reader, "triangle `v0 v1 v2`", t[0], t[1], t[2]);
    for (int v : t) check_index(v);
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) reader.fail("repeated vertex in triangle");
    mesh.triangles.push_back(t);
  }
  for (int i = 0; i < nbf; ++i) {
    int a = 0, b = 0;
    std::string label;
    read_fields(reader, "boundary facet `v0 v1 label`", a, b, label);
    check_index(a);
    check_index(b);
    mesh.boundary_markers[edge_key(a, b)] = label;
  }
  for (int i = 0; i < np; ++i) {
    PeriodicPair p;
    double tx = 0, ty = 0;
    read_fields(reader, "periodic pair `mv0 mv1 sv0 sv1 tx ty`", p.master[0], p.master[1],
                p.slave[0], p.slave[1], tx, ty);
    for (int v : p.master) check_index(v);
    for (int v : p.slave) check_index(v);
    p.translation = Vec2(tx, ty);
    mesh.periodic_pairs.push_back(p);
  }
  std::istringstream ls;
  if (reader.next(ls)) reader.fail("unexpected data after last record");

  validate_mesh(mesh);
  return mesh;
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open mesh file '" + path + "'");
  try {
    return parse_mesh(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out.precision(17);
  out << "# nv nt nbf np\n";
  out << mesh.vertices.size() << ' ' << mesh.triangles.size() << ' '
      << mesh.boundary_markers.size() << ' ' << mesh.periodic_pairs.size() << '\n';
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& [key, label] : mesh.boundary_markers)
    out << key.first << ' ' << key.second << ' ' << label << '\n';
  for (const auto& p : mesh.periodic_pairs)
    out << p.master[0] << ' ' << p.master[1] << ' ' << p.slave[0] << ' ' << p.slave[1] << ' '
        << p.translation.x() << ' ' << p.translation.y() << '\n';
}

void validate_mesh(Mesh& mesh) {
  for (int e = 0; e < mesh.num_elements(); ++e) {
    auto& t = mesh.triangles[e];
    for (int v : t)
      if (v < 0 || v >= mesh.num_vertices())
        throw TopologyError("element " + std::to_string(e) + " references a missing vertex");
    double area = signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    if (area < 0) {
      std::swap(t[1], t[2]);
      area = -area;
    }
    const double h = element_diameter(mesh, e);
    if (!(area >= 1e-14 * h * h))
      throw GeometryError("degenerate triangle " + std::to_string(e));
  }
  for (const auto& p : mesh.periodic_pairs) {
    for (int i = 0; i < 2; ++i) {
      const Vec2 shifted = mesh.vertices[p.master[i]] + p.translation;
      if ((shifted - mesh.vertices[p.slave[i]]).lpNorm<Eigen::Infinity>() > 1e-12)
        throw GeometryError("periodic slave vertex " + std::to_string(p.slave[i]) +
                            " is not its master translated");
    }
  }
}

std::array<int, 2> local_edge_vertices(const Mesh& mesh, int element, int edge) {
  const auto& t = mesh.triangles[element];
  return {t[(edge + 1) % 3], t[(edge + 2) % 3]};
}

double element_area(const Mesh& mesh, int element) {
  const auto& t = mesh.triangles[element];
  return signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
}

double element_diameter(const Mesh& mesh, int element) {
  const auto& t = mesh.triangles[element];
  double h = 0;
  for (int j = 0; j < 3; ++j)
    h = std::max(h, (mesh.vertices[t[(j + 1) % 3]] - mesh.vertices[t[(j + 2) % 3]]).norm());
  return h;
}

AffineMap affine_map(const Mesh& mesh, int element) {
  if (element < 0 || element >= mesh.num_elements())
    throw Error("affine_map: element index out of range");
  const auto& t = mesh.triangles[element];
  const Vec2& p0 = mesh.vertices[t[0]];
  AffineMap map;
  map.jacobian.col(0) = mesh.vertices[t[1]] - p0;
  map.jacobian.col(1) = mesh.vertices[t[2]] - p0;
  map.offset = p0;
  map.det = map.jacobian.determinant();
  map.inverse = map.jacobian.inverse();
  return map;
}

FacetTopology build_facets(const Mesh& mesh) {
  struct Incidence {
    int element;
    int edge;
  };
  std::map<std::pair<int, int>, std::vector<Incidence>> incidences;
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int j = 0; j < 3; ++j) {
      const auto v = local_edge_vertices(mesh, e, j);
      incidences[edge_key(v[0], v[1])].push_back({e, j});
    }
  for (const auto& [key, list] : incidences)
    if (list.size() > 2)
      throw TopologyError("non-manifold edge (" + std::to_string(key.first) + "," +
                          std::to_string(key.second) + ")");

  // slave edge key -> index into periodic_pairs
  std::map<std::pair<int, int>, int> slave_of;
  std::map<std::pair<int, int>, int> master_of;
  for (int i = 0; i < static_cast<int>(mesh.periodic_pairs.size()); ++i) {
    const auto& p = mesh.periodic_pairs[i];
    const auto mk = edge_key(p.master[0], p.master[1]);
    const auto sk = edge_key(p.slave[0], p.slave[1]);
    auto mit = incidences.find(mk);
    auto sit = incidences.find(sk);
    if (mit == incidences.end() || sit == incidences.end() || mit->second.size() != 1 ||
        sit->second.size() != 1)
      throw TopologyError("periodic pair " + std::to_string(i) +
                          " does not connect two boundary edges");
    const double lm = (mesh.vertices[p.master[0]] - mesh.vertices[p.master[1]]).norm();
    const double ls = (mesh.vertices[p.slave[0]] - mesh.vertices[p.slave[1]]).norm();
    if (std::abs(lm - ls) > 1e-12)
      throw GeometryError("periodic pair " + std::to_string(i) + " has mismatched lengths");
    if (!slave_of.emplace(sk, i).second || !master_of.emplace(mk, i).second ||
        slave_of.count(mk) || master_of.count(sk))
      throw TopologyError("edge used in more than one periodic pair");
  }

  FacetTopology topo;
  const int nt = mesh.num_elements();
  topo.element_facets.assign(nt, {-1, -1, -1});
  topo.element_is_left.assign(nt, {true, true, true});

  auto outward = [&](int e, int j) {
    const auto v = local_edge_vertices(mesh, e, j);
    const Vec2 t = mesh.vertices[v[1]] - mesh.vertices[v[0]];
    return Vec2(t.y(), -t.x()).normalized();
  };

  for (int e = 0; e < nt; ++e) {
    for (int j = 0; j < 3; ++j) {
      if (topo.element_facets[e][j] >= 0) continue;
      const auto v = local_edge_vertices(mesh, e, j);
      const auto key = edge_key(v[0], v[1]);
      const auto& list = incidences[key];

      Facet f;
      const int index = topo.num_facets();
      if (auto sit = slave_of.find(key); sit != slave_of.end()) {
        continue;  // created together with its master edge
      } else if (auto mit = master_of.find(key); mit != master_of.end()) {
        const auto& p = mesh.periodic_pairs[mit->second];
        const auto& slave = incidences[edge_key(p.slave[0], p.slave[1])].front();
        f.vertices = {key.first, key.second};
        f.left = e;
        f.left_edge = j;
        f.left_reversed = v[0] != f.vertices[0];
        f.right = slave.element;
        f.right_edge = slave.edge;
        const auto sv = local_edge_vertices(mesh, slave.element, slave.edge);
        const int start = sv[0] == p.slave[0] ? p.master[0] : p.master[1];
        f.right_reversed = start != f.vertices[0];
        f.periodic = true;
        topo.element_facets[slave.element][slave.edge] = index;
        topo.element_is_left[slave.element][slave.edge] = false;
      } else {
        f.vertices = {key.first, key.second};
        f.left = e;
        f.left_edge = j;
        f.left_reversed = v[0] != f.vertices[0];
        if (list.size() == 2) {
          const auto& other = list[0].element == e && list[0].edge == j ? list[1] : list[0];
          f.right = other.element;
          f.right_edge = other.edge;
          f.right_reversed = local_edge_vertices(mesh, other.element, other.edge)[0] != f.vertices[0];
          topo.element_facets[other.element][other.edge] = index;
          topo.element_is_left[other.element][other.edge] = false;
        } else {
          auto lit = mesh.boundary_markers.find(key);
          f.label = lit == mesh.boundary_markers.end() ? "boundary" : lit->second;
        }
      }
      f.normal = outward(e, j);
      f.length = (mesh.vertices[v[1]] - mesh.vertices[v[0]]).norm();
      topo.element_facets[e][j] = index;
      topo.element_is_left[e][j] = true;
      if (f.is_boundary())
        ++topo.num_boundary;
      else
        ++topo.num_interior;
      topo.facets.push_back(std::move(f));
    }
  }
  // Slave edges seen before their master are picked up in the loop above once
  // the master is reached; any left unassigned means the pair was inconsistent.
  for (int e = 0; e < nt; ++e)
    for (int j = 0; j < 3; ++j)
      if (topo.element_facets[e][j] < 0) throw TopologyError("unassigned element edge");
  return topo;
}

namespace {

Mesh generate_offset(const SquareMeshSpec& spec) {
  const int nx = spec.nx, ny = spec.ny;
  if (spec.periodic_y && ny % 2 != 0) throw ConfigError("generate_square: offset rows need even ny when periodic in y");
  const double hx = (spec.x1 - spec.x0) / nx, hy = (spec.y1 - spec.y0) / ny;
  const double jitter = std::clamp(spec.jitter, 0.0, 0.2);
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };

  Mesh mesh;
  std::vector<std::vector<int>> rows(ny + 1);
  for (int j = 0; j <= ny; ++j) {
    const double y = j == ny ? spec.y1 : spec.y0 + j * hy;
    std::vector<double> xs;
    if (j % 2 == 0) {
      for (int i = 0; i <= nx; ++i) xs.push_back(i == nx ? spec.x1 : spec.x0 + i * hx);
    } else {
      xs.push_back(spec.x0);
      for (int i = 0; i < nx; ++i) xs.push_back(spec.x0 + (i + 0.5) * hx);
      xs.push_back(spec.x1);
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      Vec2 p(xs[i], y);
      if (i > 0 && i + 1 < xs.size() && j > 0 && j < ny && jitter > 0) {
        p.x() += jitter * hx * uniform();
        p.y() += jitter * hy * uniform();
      }
      rows[j].push_back(mesh.num_vertices());
      mesh.vertices.push_back(p);
    }
  }
  // zip each strip, always advancing the row whose next vertex is further left
  for (int j = 0; j < ny; ++j) {
    const auto &lo = rows[j], &up = rows[j + 1];
    std::size_t a = 0, b = 0;
    while (a + 1 < lo.size() || b + 1 < up.size()) {
      const bool lower = b + 1 == up.size() ||
                         (a + 1 < lo.size() && mesh.vertices[lo[a + 1]].x() < mesh.vertices[up[b + 1]].x());
      if (lower) {
        mesh.triangles.push_back({lo[a], lo[a + 1], up[b]});
        ++a;
      } else {
        mesh.triangles.push_back({lo[a], up[b + 1], up[b]});
        ++b;
      }
    }
  }
  for (std::size_t i = 0; i + 1 < rows[0].size(); ++i) {
    mesh.boundary_markers[edge_key(rows[0][i], rows[0][i + 1])] = "bottom";
    mesh.boundary_markers[edge_key(rows[ny][i], rows[ny][i + 1])] = "top";
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_markers[edge_key(rows[j].front(), rows[j + 1].front())] = "left";
    mesh.boundary_markers[edge_key(rows[j].back(), rows[j + 1].back())] = "right";
  }
  if (spec.periodic_x)
    for (int j = 0; j < ny; ++j)
      mesh.periodic_pairs.push_back({{rows[j].front(), rows[j + 1].front()},
                                     {rows[j].back(), rows[j + 1].back()},
                                     Vec2(spec.x1 - spec.x0, 0.0)});
  if (spec.periodic_y)
    for (std::size_t i = 0; i + 1 < rows[0].size(); ++i)
      mesh.periodic_pairs.push_back({{rows[0][i], rows[0][i + 1]},
                                     {rows[ny][i], rows[ny][i + 1]},
                                     Vec2(0.0, spec.y1 - spec.y0)});
  validate_mesh(mesh);
  return mesh;
}

}  // namespace

Mesh generate_square(const SquareMeshSpec& spec) {
  if (spec.nx < 1 || spec.ny < 1) throw Error("generate_square: nx, ny must be >= 1");
  if (spec.pattern == SquarePattern::Offset) return generate_offset(spec);
  const int nx = spec.nx, ny = spec.ny;
  const double hx = (spec.x1 - spec.x0) / nx, hy = (spec.y1 - spec.y0) / ny;
  const double jitter = std::clamp(spec.jitter, 0.0, 0.2);
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };

  std::mt19937_64 rng(spec.seed);
  auto uniform = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };

  Mesh mesh;
  mesh.vertices.resize((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      double x = i == nx ? spec.x1 : spec.x0 + i * hx;
      double y = j == ny ? spec.y1 : spec.y0 + j * hy;
      if (i > 0 && i < nx && j > 0 && j < ny && jitter > 0) {
        x += jitter * hx * uniform();
        y += jitter * hy * uniform();
      }
      mesh.vertices[id(i, j)] = Vec2(x, y);
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  for (int i = 0; i < nx; ++i) {
    mesh.boundary_markers[edge_key(id(i, 0), id(i + 1, 0))] = "bottom";
    mesh.boundary_markers[edge_key(id(i, ny), id(i + 1, ny))] = "top";
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_markers[edge_key(id(0, j), id(0, j + 1))] = "left";
    mesh.boundary_markers[edge_key(id(nx, j), id(nx, j + 1))] = "right";
  }
  if (spec.periodic_x)
    for (int j = 0; j < ny; ++j)
      mesh.periodic_pairs.push_back({{id(0, j), id(0, j + 1)},
                                     {id(nx, j), id(nx, j + 1)},
                                     Vec2(spec.x1 - spec.x0, 0.0)});
  if (spec.periodic_y)
    for (int i = 0; i < nx; ++i)
      mesh.periodic_pairs.push_back({{id(i, 0), id(i + 1, 0)},
                                     {id(i, ny), id(i + 1, ny)},
                                     Vec2(0.0, spec.y1 - spec.y0)});
  validate_mesh(mesh);
  return mesh;
}

}  // namespace dgflow
