#pragma once

#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dgflow/space.hpp"

namespace dgflow {

/// One diagnostics sample. energy = ||u||^2 and enstrophy = ||curl_h u||^2.
struct DiagnosticsRow {
  double t = 0;
  double energy = 0;
  double enstrophy = 0;
  double div_norm = 0;
  std::optional<double> l2_error;
  double vmax = 0;
  std::optional<double> dt;  // empty for the initial sample

  bool operator==(const DiagnosticsRow&) const = default;
};

/// Evaluates all observables; l2_error only when `exact` is set.
DiagnosticsRow sample_diagnostics(const StateVector& u, const VectorField& exact, std::optional<double> dt);

inline constexpr const char* kCsvHeader = "t,energy,enstrophy,div_norm,l2_error,vmax,dt";

/// Streaming CSV output (%.12e, empty fields for missing values), flushed
/// after every row so an aborted run keeps its history.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void append(const DiagnosticsRow& row);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

void write_csv(const std::vector<DiagnosticsRow>& rows, std::ostream& out);
void write_csv(const std::vector<DiagnosticsRow>& rows, const std::string& path);
std::vector<DiagnosticsRow> read_csv(std::istream& in);
std::vector<DiagnosticsRow> read_csv(const std::string& path);

/// Legacy ASCII unstructured grid: velocity sampled at the three vertices of
/// every element (points are not shared, the field is discontinuous), cell
/// data vorticity (element mean) and, when given, pressure (element mean).
void write_vtk(const StateVector& u, const Eigen::VectorXd* cell_pressure, std::ostream& out);
void write_vtk(const StateVector& u, const Eigen::VectorXd* cell_pressure, const std::string& path);

/// Structural check of a file written by write_vtk: header, section tokens,
/// counts and the number of values in every block.
struct VtkSummary {
  int points = 0;
  int cells = 0;
  std::vector<std::string> point_fields;
  std::vector<std::string> cell_fields;
};
VtkSummary validate_vtk(std::istream& in);  // throws ParseError

/// Element means of w/dt pressure coefficients (Q(k-1) layout).
Eigen::VectorXd cell_pressure(const Space& sp, const Eigen::VectorXd& pressure);

}  // namespace dgflow
