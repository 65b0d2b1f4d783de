#include "dgflow/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "dgflow/diagnostics.hpp"
#include "dgflow/error.hpp"

namespace dgflow {

namespace {

std::string field(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::string field(const std::optional<double>& v) { return v ? field(*v) : std::string(); }

std::string csv_line(const DiagnosticsRow& r) {
  return field(r.t) + ',' + field(r.energy) + ',' + field(r.enstrophy) + ',' + field(r.div_norm) + ',' +
         field(r.l2_error) + ',' + field(r.vmax) + ',' + field(r.dt);
}

double to_double(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw ParseError("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path);
  if (!out) throw IOError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

DiagnosticsRow sample_diagnostics(const StateVector& u, const VectorField& exact, std::optional<double> dt) {
  DiagnosticsRow r;
  r.t = u.time;
  r.energy = energy(u);
  r.enstrophy = enstrophy(u);
  r.div_norm = divergence_report(u).l2;
  if (exact) r.l2_error = l2_error(u, exact, u.time);
  r.vmax = max_velocity(u);
  r.dt = dt;
  return r;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path), out_(open_out(path)) {
  out_ << kCsvHeader << '\n' << std::flush;
}

void CsvWriter::append(const DiagnosticsRow& row) {
  out_ << csv_line(row) << '\n' << std::flush;
  if (!out_) throw IOError("write to '" + path_ + "' failed");
}

void write_csv(const std::vector<DiagnosticsRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) out << csv_line(r) << '\n';
}

void write_csv(const std::vector<DiagnosticsRow>& rows, const std::string& path) {
  std::ofstream out = open_out(path);
  write_csv(rows, out);
  if (!out) throw IOError("write to '" + path + "' failed");
}

std::vector<DiagnosticsRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("csv: missing or unexpected header");
  std::vector<DiagnosticsRow> rows;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 7) throw ParseError("csv line " + std::to_string(n) + ": expected 7 fields");
    DiagnosticsRow r;
    r.t = to_double(cells[0], n);
    r.energy = to_double(cells[1], n);
    r.enstrophy = to_double(cells[2], n);
    r.div_norm = to_double(cells[3], n);
    if (!cells[4].empty()) r.l2_error = to_double(cells[4], n);
    r.vmax = to_double(cells[5], n);
    if (!cells[6].empty()) r.dt = to_double(cells[6], n);
    rows.push_back(r);
  }
  return rows;
}

std::vector<DiagnosticsRow> read_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_csv(in);
}

Eigen::VectorXd cell_pressure(const Space& sp, const Eigen::VectorXd& pressure) {
  const int nt = sp.num_elements();
  if (nt == 0 || pressure.size() % nt != 0) throw ConfigError("cell_pressure: size does not match the mesh");
  const int nz = static_cast<int>(pressure.size() / nt);
  // the constant orthonormal function on the reference triangle is sqrt(2)
  Eigen::VectorXd p(nt);
  for (int e = 0; e < nt; ++e) p[e] = std::sqrt(2.0) * pressure[e * nz];
  return p;
}

void write_vtk(const StateVector& u, const Eigen::VectorXd* cell_p, std::ostream& out) {
  const Space& sp = *u.space;
  const Mesh& mesh = sp.mesh();
  const int nt = sp.num_elements();
  if (cell_p && cell_p->size() != nt) throw ConfigError("write_vtk: pressure has wrong size");
  static const Vec2 corners[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  char buf[96];
  out << "# vtk DataFile Version 3.0\ndgflow t=" << field(u.time) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 3 * nt << " double\n";
  for (int e = 0; e < nt; ++e)
    for (int v : mesh.triangles[e]) {
      std::snprintf(buf, sizeof buf, "%.10g %.10g 0\n", mesh.vertices[v].x(), mesh.vertices[v].y());
      out << buf;
    }
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (int e = 0; e < nt; ++e) out << "3 " << 3 * e << ' ' << 3 * e + 1 << ' ' << 3 * e + 2 << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (int e = 0; e < nt; ++e) out << "5\n";
  out << "POINT_DATA " << 3 * nt << "\nVECTORS velocity double\n";
  for (int e = 0; e < nt; ++e)
    for (const Vec2& c : corners) {
      const Vec2 v = sp.value(u.coeffs, e, c);
      std::snprintf(buf, sizeof buf, "%.10g %.10g 0\n", v.x(), v.y());
      out << buf;
    }
  out << "CELL_DATA " << nt << "\nSCALARS vorticity double 1\nLOOKUP_TABLE default\n";
  const Eigen::VectorXd w = cell_vorticity(u);
  for (int e = 0; e < nt; ++e) out << field(w[e]) << '\n';
  if (cell_p) {
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (int e = 0; e < nt; ++e) out << field((*cell_p)[e]) << '\n';
  }
}

void write_vtk(const StateVector& u, const Eigen::VectorXd* cell_p, const std::string& path) {
  std::ofstream out = open_out(path);
  write_vtk(u, cell_p, out);
  if (!out) throw IOError("write to '" + path + "' failed");
}

VtkSummary validate_vtk(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# vtk DataFile Version", 0) != 0) throw ParseError("vtk: bad header");
  std::getline(in, line);  // title
  std::string token;
  auto expect = [&](const std::string& want) {
    if (!(in >> token) || token != want) throw ParseError("vtk: expected '" + want + "', got '" + token + "'");
  };
  auto count = [&](const char* what) {
    long n = -1;
    if (!(in >> n) || n < 0) throw ParseError(std::string("vtk: bad count for ") + what);
    return n;
  };
  auto values = [&](long n, const char* what) {
    double x;
    for (long i = 0; i < n; ++i)
      if (!(in >> x)) throw ParseError(std::string("vtk: truncated ") + what);
  };
  expect("ASCII");
  expect("DATASET");
  expect("UNSTRUCTURED_GRID");
  VtkSummary s;
  expect("POINTS");
  s.points = static_cast<int>(count("POINTS"));
  in >> token;
  values(3L * s.points, "POINTS");
  expect("CELLS");
  s.cells = static_cast<int>(count("CELLS"));
  const long size = count("CELLS size");
  long seen = 0;
  for (int c = 0; c < s.cells; ++c) {
    long nv = 0;
    if (!(in >> nv) || nv < 1) throw ParseError("vtk: bad cell");
    for (long i = 0; i < nv; ++i) {
      long id = -1;
      if (!(in >> id) || id < 0 || id >= s.points) throw ParseError("vtk: cell refers to a missing point");
    }
    seen += nv + 1;
  }
  if (seen != size) throw ParseError("vtk: CELLS size mismatch");
  expect("CELL_TYPES");
  if (count("CELL_TYPES") != s.cells) throw ParseError("vtk: CELL_TYPES count mismatch");
  values(s.cells, "CELL_TYPES");
  std::vector<std::string>* fields = nullptr;
  long n = 0;
  while (in >> token) {
    if (token == "POINT_DATA" || token == "CELL_DATA") {
      n = count(token.c_str());
      const bool pts = token == "POINT_DATA";
      if (n != (pts ? s.points : s.cells)) throw ParseError("vtk: " + token + " count mismatch");
      fields = pts ? &s.point_fields : &s.cell_fields;
    } else if (token == "VECTORS" || token == "SCALARS") {
      if (!fields) throw ParseError("vtk: data block before POINT_DATA/CELL_DATA");
      const bool vec = token == "VECTORS";
      std::string name, type;
      in >> name >> type;
      if (!vec) {
        long comps = 1;
        const auto pos = in.tellg();
        if (!(in >> comps)) {
          in.clear();
          in.seekg(pos);
          comps = 1;
        }
        expect("LOOKUP_TABLE");
        in >> token;
        values(n * comps, name.c_str());
      } else {
        values(3 * n, name.c_str());
      }
      fields->push_back(name);
    } else {
      throw ParseError("vtk: unexpected token '" + token + "'");
    }
  }
  return s;
}

}  // namespace dgflow
