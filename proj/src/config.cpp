#include "dgflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "dgflow/error.hpp"

namespace dgflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int parse_int(const std::string& text, const std::string& what) {
  const double v = evaluate_expression(text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(what + ": expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

// Recursive descent over: expr = term {(+|-) term}; term = power {(*|/) power};
// power = unary [^ power]; unary = [-|+] unary | atom; atom = number | pi | (expr)
class ExpressionParser {
 public:
  explicit ExpressionParser(const std::string& text) : s_(text) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + s_.substr(pos_) + "'");
    return v;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("bad number '" + s_ + "': " + why);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+'))
        v += term();
      else if (eat('-'))
        v -= term();
      else
        return v;
    }
  }
  double term() {
    double v = power();
    for (;;) {
      if (eat('*'))
        v *= power();
      else if (eat('/'))
        v /= power();
      else
        return v;
    }
  }
  double power() {
    const double b = unary();
    return eat('^') ? std::pow(b, power()) : b;
  }
  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return atom();
  }
  double atom() {
    skip();
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (s_.compare(pos_, 2, "pi") == 0) {
      pos_ += 2;
      return M_PI;
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail(pos_ < s_.size() ? "unexpected '" + s_.substr(pos_) + "'" : "missing value");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }
};

struct Entry {
  std::string section, key, value;
  int line;
};

std::vector<Entry> read_entries(std::istream& in) {
  std::vector<Entry> entries;
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("line " + std::to_string(line) + ": malformed section header");
      section = trim(text.substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    entries.push_back({section, trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line});
  }
  return entries;
}

void apply(RunConfig& c, const Entry& e) {
  const std::string where = "line " + std::to_string(e.line) + " [" + e.section + "] " + e.key;
  auto num = [&] { return evaluate_expression(e.value); };
  const std::string& s = e.section;
  const std::string& k = e.key;
  if (s == "run" && k == "preset") {
    // handled before the other entries
  } else if (s == "mesh" && k == "source") {
    c.mesh = e.value;
  } else if (s == "mesh" && k == "degree") {
    c.degree = parse_int(e.value, where);
  } else if (s == "mesh" && k == "sizes") {
    c.mesh_sizes.clear();
    if (!e.value.empty())
      for (const auto& item : split(e.value, ',')) c.mesh_sizes.push_back(parse_int(item, where));
  } else if (s == "problem" && k == "flow") {
    c.flow = e.value;
  } else if (s == "problem" && k == "nu") {
    c.nu = num();
  } else if (s == "problem" && k == "alpha") {
    c.alpha = num();
  } else if (s == "problem" && k == "penalty") {
    c.penalty = parse_penalty_scale(e.value);
  } else if (s == "problem" && k == "rho") {
    c.rho = num();
  } else if (s == "problem" && k == "delta") {
    c.delta = num();
  } else if (s == "boundary") {
    c.boundaries[k] = parse_bc_kind(e.value);
  } else if (s == "time" && k == "integrator") {
    c.integrator = parse_integrator(e.value);
  } else if (s == "time" && k == "t_end") {
    c.t_end = num();
  } else if (s == "time" && k == "dt") {
    c.dt = num();
  } else if (s == "time" && k == "c_conv") {
    c.c_conv = num();
  } else if (s == "time" && k == "c_visc") {
    c.c_visc = num();
  } else if (s == "time" && k == "dt_list") {
    c.dt_list.clear();
    if (!e.value.empty())
      for (const auto& item : split(e.value, ',')) c.dt_list.push_back(evaluate_expression(item));
  } else if (s == "output" && k == "csv") {
    c.output.csv = e.value;
  } else if (s == "output" && k == "vtk") {
    c.output.vtk_dir = e.value;
  } else if (s == "output" && k == "every") {
    c.output.every = parse_int(e.value, where);
  } else {
    throw ConfigError(where + ": unknown key");
  }
}

// Generated-mesh source: kind, positional size and key[=value] options.
struct GeneratorSpec {
  std::string kind;
  std::string size;
  std::map<std::string, std::string> options;
};

GeneratorSpec parse_generator(const std::string& source) {
  const auto colon = source.find(':');
  GeneratorSpec g;
  g.kind = source.substr(0, colon);
  const auto parts = split(source.substr(colon + 1), ',');
  if (parts.empty() || parts[0].empty()) throw ConfigError("mesh '" + source + "': missing size");
  g.size = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    g.options[trim(parts[i].substr(0, eq))] = eq == std::string::npos ? "" : trim(parts[i].substr(eq + 1));
  }
  return g;
}

bool is_generator(const std::string& source) {
  return source.rfind("box:", 0) == 0 || source.rfind("square:", 0) == 0;
}

}  // namespace

double evaluate_expression(const std::string& text) {
  const double v = ExpressionParser(text).parse();
  if (!std::isfinite(v)) throw ConfigError("bad number '" + text + "': not finite");
  return v;
}

std::string to_string(BCKind kind) {
  switch (kind) {
    case BCKind::NoFlow: return "noflow";
    case BCKind::WallNoSlip: return "noslip";
    case BCKind::Inflow: return "inflow";
    case BCKind::Outflow: return "outflow";
  }
  return "?";
}

std::string to_string(PenaltyScale scale) {
  return scale == PenaltyScale::FacetLength ? "facet_length" : "trace_inverse";
}

PenaltyScale parse_penalty_scale(const std::string& name) {
  if (name == "trace_inverse") return PenaltyScale::TraceInverse;
  if (name == "facet_length") return PenaltyScale::FacetLength;
  throw ConfigError("unknown penalty scale '" + name + "' (trace_inverse | facet_length)");
}

BCKind parse_bc_kind(const std::string& name) {
  for (BCKind k : {BCKind::NoFlow, BCKind::WallNoSlip, BCKind::Inflow, BCKind::Outflow})
    if (name == to_string(k)) return k;
  throw ConfigError("unknown boundary condition '" + name + "' (noflow, noslip, inflow, outflow)");
}

void RunConfig::validate() const {
  if (degree < 1 || degree > 6) throw ConfigError("degree must be in [1, 6]");
  if (!(t_end > 0)) throw ConfigError("t_end must be positive");
  if (!(dt >= 0)) throw ConfigError("dt must be >= 0");
  for (double d : dt_list)
    if (!(d > 0)) throw ConfigError("dt_list entries must be positive");
  for (int n : mesh_sizes)
    if (n < 1) throw ConfigError("mesh sizes must be positive");
  if (output.every < 1) throw ConfigError("output.every must be >= 1");
  if (!preset.empty()) {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), preset) == names.end())
      throw ConfigError("unknown preset '" + preset + "'");
  }
  make_flow();
  problem_data().validate();
  if (is_generator(mesh)) {
    build_mesh(with_cells(mesh, 1));  // syntax only
    if (!mesh_sizes.empty()) with_cells(mesh, mesh_sizes.front());
  }
}

Flow RunConfig::make_flow() const { return dgflow::make_flow(flow, nu, rho, delta); }

ProblemData RunConfig::problem_data() const {
  const Flow f = make_flow();
  ProblemData d;
  d.nu = nu;
  d.alpha = alpha;
  d.penalty = penalty;
  d.source = f.source;
  for (const auto& [label, kind] : boundaries) {
    BoundaryCondition bc{kind, {}};
    // inflow data come from the flow's exact solution (or its initial field)
    if (kind == BCKind::Inflow) bc.datum = f.exact ? f.exact : f.initial;
    d.bcs[label] = bc;
  }
  return d;
}

StepControl RunConfig::step_control() const {
  StepControl c;
  c.fixed = dt > 0;
  c.dt = dt;
  c.c_conv = c_conv;
  c.c_visc = c_visc;
  c.t_end = t_end;
  return c;
}

RunConfig parse_config(std::istream& in) {
  const std::vector<Entry> entries = read_entries(in);
  RunConfig c;
  for (const Entry& e : entries)
    if (e.section == "run" && e.key == "preset") {
      c = preset(e.value);
      break;
    }
  for (const Entry& e : entries) apply(c, e);
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open config '" + path + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string serialize_config(const RunConfig& c) {
  auto join_d = [](const std::vector<double>& v) {
    std::string s;
    for (double d : v) s += (s.empty() ? "" : ", ") + number(d);
    return s;
  };
  std::ostringstream out;
  if (!c.preset.empty()) out << "[run]\npreset = " << c.preset << "\n\n";
  out << "[mesh]\nsource = " << c.mesh << "\ndegree = " << c.degree << "\nsizes = ";
  for (std::size_t i = 0; i < c.mesh_sizes.size(); ++i) out << (i ? ", " : "") << c.mesh_sizes[i];
  out << "\n\n[problem]\nflow = " << c.flow << "\nnu = " << number(c.nu) << "\nalpha = " << number(c.alpha) << "\npenalty = " << to_string(c.penalty)
      << "\nrho = " << number(c.rho) << "\ndelta = " << number(c.delta) << "\n";
  if (!c.boundaries.empty()) {
    out << "\n[boundary]\n";
    for (const auto& [label, kind] : c.boundaries) out << label << " = " << to_string(kind) << "\n";
  }
  out << "\n[time]\nintegrator = " << to_string(c.integrator) << "\nt_end = " << number(c.t_end)
      << "\ndt = " << number(c.dt) << "\nc_conv = " << number(c.c_conv) << "\nc_visc = " << number(c.c_visc)
      << "\ndt_list = " << join_d(c.dt_list) << "\n";
  out << "\n[output]\ncsv = " << c.output.csv << "\nvtk = " << c.output.vtk_dir << "\nevery = " << c.output.every
      << "\n";
  return out.str();
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"taylor_green_euler", "taylor_green_ns",    "temporal_rk3",
                                                 "temporal_rk4",       "shear_layer_coarse", "shear_layer_fine"};
  return names;
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "taylor_green_euler" || name == "taylor_green_ns") {
    c.mesh = "box:8";
    c.mesh_sizes = {8, 16, 32, 64};
    c.degree = 3;
    c.flow = "taylor_green";
    c.nu = name == "taylor_green_ns" ? 0.01 : 0.0;
    c.t_end = 1.0;
  } else if (name == "temporal_rk3" || name == "temporal_rk4") {
    c.mesh = "box:32";
    c.degree = 6;
    c.flow = "temporal";
    c.nu = 1.0 / 4000;
    c.integrator = name == "temporal_rk3" ? IntegratorKind::TVDRK3 : IntegratorKind::RK4;
    c.t_end = 0.1;
    c.dt_list = {0.1 / 4, 0.1 / 8, 0.1 / 16, 0.1 / 32};
    c.penalty = PenaltyScale::FacetLength;  // the step list is sized for it
    c.dt = c.dt_list.back();
  } else if (name == "shear_layer_coarse" || name == "shear_layer_fine") {
    c.mesh = name == "shear_layer_coarse" ? "box:40" : "box:80";
    c.degree = 3;
    c.flow = "shear_layer";
    c.nu = 0.0;
    c.rho = M_PI / 15;
    c.delta = 0.05;
    c.t_end = 8.0;
    c.output.every = 20;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

Mesh build_mesh(const std::string& source) {
  if (!is_generator(source)) {
    const std::string path = source.rfind("file:", 0) == 0 ? source.substr(5) : source;
    return load_mesh(path);
  }
  const GeneratorSpec g = parse_generator(source);
  auto opt = [&](const std::string& key, double fallback) {
    auto it = g.options.find(key);
    return it == g.options.end() ? fallback : evaluate_expression(it->second);
  };
  for (const auto& [key, value] : g.options)
    if (key != "jitter" && key != "seed" && key != "periodic" && key != "length")
      throw ConfigError("mesh '" + source + "': unknown option '" + key + "'");
  SquareMeshSpec spec;
  if (g.kind == "box") {
    if (g.options.count("periodic") || g.options.count("length"))
      throw ConfigError("mesh '" + source + "': box is always the periodic [0,2pi]^2");
    spec = periodic_box(parse_int(g.size, "mesh size"), opt("jitter", kBoxJitter));
  } else {
    const auto x = g.size.find('x');
    spec.nx = parse_int(g.size.substr(0, x), "mesh size");
    spec.ny = x == std::string::npos ? spec.nx : parse_int(g.size.substr(x + 1), "mesh size");
    spec.x1 = spec.y1 = opt("length", 1.0);
    spec.periodic_x = spec.periodic_y = g.options.count("periodic") > 0;
    spec.jitter = opt("jitter", 0.0);
  }
  if (g.options.count("seed")) spec.seed = static_cast<std::uint64_t>(parse_int(g.options.at("seed"), "seed"));
  if (spec.nx < 1 || spec.ny < 1) throw ConfigError("mesh '" + source + "': sizes must be positive");
  return generate_square(spec);
}

std::string with_cells(const std::string& source, int n) {
  if (!is_generator(source)) throw ConfigError("mesh '" + source + "' is a file; sizes need a generated mesh");
  const auto colon = source.find(':');
  const auto comma = source.find(',', colon);
  const std::string rest = comma == std::string::npos ? "" : source.substr(comma);
  return source.substr(0, colon + 1) + std::to_string(n) + rest;
}

}  // namespace dgflow
