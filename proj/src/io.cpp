// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "chainfield/errors.hpp"
#include "chainfield/mesh_gen.hpp"

namespace chainfield {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

namespace {

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError("cannot open '" + p.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + p.string() + "' failed");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s, std::size_t line, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, what + ": not a number: '" + s + "'");
  }
}

// Line-oriented token reader that remembers where it is.
class MeshLexer {
 public:
  explicit MeshLexer(std::istream& in) : in_(in) {}

  bool next_line() {
    while (std::getline(in_, cur_)) {
      ++line_;
      cur_ = trim(cur_);
      if (!cur_.empty()) {
        ls_.clear();
        ls_.str(cur_);
        return true;
      }
    }
    return false;
  }
  std::vector<std::string> tokens() {
    std::vector<std::string> t;
    std::string w;
    while (ls_ >> w) t.push_back(w);
    return t;
  }
  std::size_t line() const { return line_; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, msg); }

  long integer(const std::string& s) const {
    try {
      std::size_t used = 0;
      const long v = std::stol(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail("not an integer: '" + s + "'");
    }
  }

 private:
  std::istream& in_;
  std::string cur_;
  std::istringstream ls_;
  std::size_t line_ = 0;
};

}  // namespace

Mesh parse_mesh(std::istream& in) {
  MeshLexer lx(in);
  Mesh m;
  if (!lx.next_line() || lx.tokens() != std::vector<std::string>{"polyfem-mesh", "1"})
    lx.fail("expected header 'polyfem-mesh 1'");

  if (!lx.next_line()) lx.fail("expected 'nodes <N>'");
  auto t = lx.tokens();
  if (t.size() != 2 || t[0] != "nodes") lx.fail("expected 'nodes <N>'");
  const long nn = lx.integer(t[1]);
  if (nn < 0) lx.fail("negative node count");
  m.nodes.reserve(static_cast<std::size_t>(nn));
  for (long i = 0; i < nn; ++i) {
    if (!lx.next_line()) lx.fail("unexpected end of file in node block");
    t = lx.tokens();
    if (t.size() != 3) lx.fail("node line needs 3 coordinates");
    m.nodes.emplace_back(to_double(t[0], lx.line(), "x"), to_double(t[1], lx.line(), "y"),
                         to_double(t[2], lx.line(), "z"));
  }

  if (!lx.next_line()) lx.fail("expected 'elements <M> <kind>'");
  t = lx.tokens();
  if (t.size() != 3 || t[0] != "elements") lx.fail("expected 'elements <M> <kind>'");
  const long ne = lx.integer(t[1]);
  if (ne < 0) lx.fail("negative element count");
  if (t[2] == "hex8") {
    m.kind = ElementKind::hex8;
  } else if (t[2] == "quad4") {
    m.kind = ElementKind::quad4;
  } else {
    lx.fail("unknown element kind '" + t[2] + "'");
  }
  const int npe = m.nodes_per_element();
  for (long e = 0; e < ne; ++e) {
    if (!lx.next_line()) lx.fail("unexpected end of file in element block");
    t = lx.tokens();
    if (static_cast<int>(t.size()) != npe) lx.fail("element line needs " + std::to_string(npe) + " node indices");
    for (const auto& s : t) m.connectivity.push_back(static_cast<int>(lx.integer(s)));
  }

  while (lx.next_line()) {
    t = lx.tokens();
    if (t.size() != 3 || t[0] != "nodeset") lx.fail("expected 'nodeset <name> <count>'");
    const long count = lx.integer(t[2]);
    if (count < 0) lx.fail("negative node set size");
    if (m.node_sets.count(t[1])) lx.fail("duplicate node set '" + t[1] + "'");
    auto& ids = m.node_sets[t[1]];
    while (static_cast<long>(ids.size()) < count) {
      if (!lx.next_line()) lx.fail("unexpected end of file in node set '" + t[1] + "'");
      for (const auto& s : lx.tokens()) ids.push_back(static_cast<int>(lx.integer(s)));
    }
    if (static_cast<long>(ids.size()) != count) lx.fail("node set '" + t[1] + "' has extra indices");
  }
  m.validate();
  return m;
}

Mesh read_mesh(const fs::path& path) {
  auto in = open_in(path);
  return parse_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "polyfem-mesh 1\n";
  out << "nodes " << mesh.num_nodes() << '\n';
  for (const auto& x : mesh.nodes)
    out << format_number(x.x()) << ' ' << format_number(x.y()) << ' ' << format_number(x.z()) << '\n';
  out << "elements " << mesh.num_elements() << ' ' << to_string(mesh.kind) << '\n';
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto c = mesh.element(e);
    for (std::size_t a = 0; a < c.size(); ++a) out << (a ? " " : "") << c[a];
    out << '\n';
  }
  for (const auto& [name, ids] : mesh.node_sets) {
    out << "nodeset " << name << ' ' << ids.size() << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ((i + 1) % 16 == 0 || i + 1 == ids.size() ? "\n" : " ");
  }
}

void write_mesh(const Mesh& mesh, const fs::path& path) {
  auto out = open_out(path);
  write_mesh(mesh, out);
  finish(out, path);
}

// ---------------------------------------------------------------------------

void write_vtk(const Model& model, const SystemState& state, std::ostream& out) {
  const Mesh& m = model.mesh;
  const int dim = m.dim();
  const Vector sn = nodal_stress_norm(model, state);
  out << "# vtk DataFile Version 3.0\n";
  out << "chainfield t=" << format_number(state.t) << '\n';
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << m.num_nodes() << " double\n";
  for (const auto& x : m.nodes)
    out << format_number(x.x()) << ' ' << format_number(x.y()) << ' ' << format_number(dim == 3 ? x.z() : 0.0)
        << '\n';
  const int npe = m.nodes_per_element();
  out << "CELLS " << m.num_elements() << ' ' << m.num_elements() * static_cast<std::size_t>(npe + 1) << '\n';
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    out << npe;
    for (int a : m.element(e)) out << ' ' << a;
    out << '\n';
  }
  out << "CELL_TYPES " << m.num_elements() << '\n';
  const int cell_type = m.kind == ElementKind::hex8 ? 12 : 9;
  for (std::size_t e = 0; e < m.num_elements(); ++e) out << cell_type << '\n';

  out << "POINT_DATA " << m.num_nodes() << '\n';
  out << "VECTORS displacement double\n";
  for (std::size_t n = 0; n < m.num_nodes(); ++n) {
    for (int c = 0; c < 3; ++c) {
      const double v = c < dim ? state.u[static_cast<Eigen::Index>(n) * dim + c] : 0.0;
      out << (c ? " " : "") << format_number(v);
    }
    out << '\n';
  }
  out << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index n = 0; n < state.phi.size(); ++n) out << format_number(state.phi[n]) << '\n';
  out << "SCALARS stress_norm double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index n = 0; n < sn.size(); ++n) out << format_number(sn[n]) << '\n';
}

void write_vtk(const Model& model, const SystemState& state, const fs::path& path) {
  auto out = open_out(path);
  write_vtk(model, state, out);
  finish(out, path);
}

std::string vtk_file_name(const std::string& prefix, int step) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%05d.vtk", step);
  return prefix + buf;
}

// ---------------------------------------------------------------------------

void write_series_csv(const std::vector<SeriesRow>& rows, std::ostream& out) {
  out << "time_s,displacement_mm,force_N\n";
  for (const auto& r : rows)
    out << format_number(r.time) << ',' << format_number(r.displacement) << ',' << format_number(r.force) << '\n';
}

void write_series_csv(const std::vector<SeriesRow>& rows, const fs::path& path) {
  auto out = open_out(path);
  write_series_csv(rows, out);
  finish(out, path);
}

std::vector<SeriesRow> read_series_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "time_s,displacement_mm,force_N")
    throw ParseError(1, "expected header time_s,displacement_mm,force_N");
  std::vector<SeriesRow> rows;
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) throw ParseError(ln, "expected 3 columns");
    rows.push_back({to_double(f[0], ln, "time"), to_double(f[1], ln, "displacement"), to_double(f[2], ln, "force")});
  }
  return rows;
}

std::vector<SeriesRow> series_rows(const std::vector<SolveResult>& results) {
  std::vector<SeriesRow> rows;
  for (const auto& r : results) rows.push_back({r.t, r.displacement, r.force});
  return rows;
}

std::vector<FitSample> read_fit_data(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t ln = 0;
  bool header = false, weighted = false;
  std::vector<FitSample> out;
  while (std::getline(in, line)) {
    ++ln;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, ',');
    if (!header) {
      if (f.size() == 2 && f[0] == "stretch" && f[1] == "stress_MPa") {
        weighted = false;
      } else if (f.size() == 3 && f[0] == "stretch" && f[1] == "stress_MPa" && f[2] == "weight") {
        weighted = true;
      } else {
        throw ParseError(ln, "expected header stretch,stress_MPa[,weight]");
      }
      header = true;
      continue;
    }
    if (f.size() != (weighted ? 3u : 2u)) throw ParseError(ln, "wrong number of columns");
    out.push_back({to_double(f[0], ln, "stretch"), to_double(f[1], ln, "stress"),
                   weighted ? to_double(f[2], ln, "weight") : 1.0});
  }
  if (!header) throw ParseError(ln, "missing header");
  return out;
}

void write_fit_data(const std::vector<FitSample>& data, const fs::path& path, const std::string& comment) {
  auto out = open_out(path);
  if (!comment.empty())
    for (const auto& l : split(comment, '\n')) out << "# " << l << '\n';
  out << "stretch,stress_MPa,weight\n";
  for (const auto& s : data)
    out << format_number(s.stretch) << ',' << format_number(s.stress) << ',' << format_number(s.weight) << '\n';
  finish(out, path);
}

void write_fit_report(const FitProblem& problem, const FitResult& result, double rate, std::ostream& out) {
  out << "# chainfield fit report\n";
  out << "rate_per_s " << format_number(rate) << '\n';
  out << "evaluations " << result.evaluations << '\n';
  out << "converged " << (result.converged ? "yes" : "no") << " (" << result.message << ")\n";
  out << "objective_initial " << format_number(result.initial_objective) << '\n';
  out << "objective_final " << format_number(result.objective) << '\n';
  out << "\n[free parameters]\n";
  for (const auto& f : problem.free)
    out << f.name() << ' ' << format_number(get_parameter(result.params, f)) << "  bounds " << format_number(f.lower)
        << ' ' << format_number(f.upper) << '\n';
  out << "\n[material]\n";
  out << "c10 = " << format_number(result.params.c10) << '\n';
  out << "branches =";
  for (std::size_t j = 0; j < result.params.branches.size(); ++j)
    out << (j ? ", " : " ") << format_number(result.params.branches[j].modulus) << ':'
        << format_number(result.params.branches[j].tau);
  out << '\n';
  out << "D = " << format_number(result.params.D) << '\n';
  if (result.params.survival_iso.enabled()) {
    out << "Q = " << format_number(result.params.survival_iso.params().Q) << '\n';
    out << "lambda_M = " << format_number(result.params.survival_iso.params().lambda_M) << '\n';
  }
  out << "\n[residuals]\nstretch,stress_data_MPa,stress_model_MPa,residual_MPa\n";
  for (std::size_t i = 0; i < result.residuals.size(); ++i)
    out << format_number(problem.data[i].stretch) << ',' << format_number(problem.data[i].stress) << ','
        << format_number(result.model_stress[i]) << ',' << format_number(result.residuals[i]) << '\n';
}

// ---------------------------------------------------------------------------
// configuration

namespace pt = boost::property_tree;

namespace {

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }
  std::string str(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    used_.insert(key);
    return trim(tree_->get<std::string>(pt::ptree::path_type(key, '\0')));
  }
  std::string str(const std::string& key) const {
    if (!has(key)) throw ValidationError("config: [" + name_ + "] needs '" + key + "'");
    return str(key, "");
  }
  double num(const std::string& key, double def) const { return has(key) ? num(key) : def; }
  double num(const std::string& key) const {
    const std::string s = str(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config: [" + name_ + "] " + key + " is not a number: '" + s + "'");
    }
  }
  int integer(const std::string& key, int def) const {
    const double v = num(key, def);
    if (v != std::floor(v)) throw ValidationError("config: [" + name_ + "] " + key + " must be an integer");
    return static_cast<int>(v);
  }
  bool flag(const std::string& key, bool def) const {
    const std::string s = str(key, def ? "true" : "false");
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ValidationError("config: [" + name_ + "] " + key + " must be true or false");
  }
  // Unknown keys are configuration mistakes, not silently ignored extras.
  void reject_unused() const {
    if (!tree_) return;
    for (const auto& [k, v] : *tree_)
      if (!used_.count(k)) throw ValidationError("config: [" + name_ + "] unknown key '" + k + "'");
  }
  void mark_all_used() const {
    if (tree_)
      for (const auto& [k, v] : *tree_) used_.insert(k);
  }
  const pt::ptree* tree() const { return tree_; }

 private:
  const pt::ptree* tree_;
  std::string name_;
  mutable std::set<std::string> used_;
};

Section section(const pt::ptree& root, const std::string& name) {
  const auto it = root.find(name);
  return {it == root.not_found() ? nullptr : &it->second, name};
}

template <class E>
E pick(const Section& s, const std::string& key, const std::string& def,
       std::initializer_list<std::pair<const char*, E>> options) {
  const std::string v = s.str(key, def);
  std::string known;
  for (const auto& [name, e] : options) {
    if (v == name) return e;
    known += std::string(known.empty() ? "" : ", ") + name;
  }
  throw ValidationError("config: " + key + " must be one of " + known + ", got '" + v + "'");
}

std::vector<double> numbers(const std::string& s, const std::string& what) {
  std::vector<double> v;
  std::istringstream is(s);
  std::string w;
  while (is >> w) v.push_back(to_double(w, 0, what));
  return v;
}

Mesh build_mesh(const Section& s, const fs::path& base) {
  if (s.has("file")) {
    const fs::path p = s.str("file");
    return read_mesh(p.is_absolute() ? p : base / p);
  }
  const std::string gen = s.str("generator", "");
  if (gen == "angle_specimen") {
    AngleSpecimenOptions o;
    o.free_length = s.num("free_length", o.free_length);
    o.width = s.num("width", o.width);
    o.notch_depth = s.num("notch_depth", o.notch_depth);
    o.h_notch = s.num("h_notch", o.h_notch);
    o.h_far = s.num("h_far", o.h_far);
    o.refined_half_width = s.num("refined_half_width", o.refined_half_width);
    o.rows = s.integer("rows", o.rows);
    o.nick_length = s.num("nick_length", o.nick_length);
    o.zone_radius = s.num("zone_radius", o.zone_radius);
    return angle_specimen_mesh(o);
  }
  if (gen == "box") {
    const auto size = numbers(s.str("size"), "size");
    const auto div = numbers(s.str("divisions"), "divisions");
    if (size.size() != 3 || div.size() != 3) throw ValidationError("config: box needs 3 sizes and 3 divisions");
    return box_mesh(size[0], size[1], size[2], static_cast<int>(div[0]), static_cast<int>(div[1]),
                    static_cast<int>(div[2]));
  }
  if (gen == "strip") return strip_mesh(s.num("length"), s.integer("elements", 10));
  throw ValidationError("config: [mesh] needs 'file' or generator = angle_specimen | box | strip");
}

MaterialParams build_material(const Section& s, std::vector<std::string>& warnings) {
  MaterialParams p;
  const std::string preset = s.str("preset", "reference_adhesive");
  if (preset == "reference_adhesive") {
    p = MaterialParams::reference_adhesive();
  } else if (preset != "none") {
    throw ValidationError("config: [material] preset must be reference_adhesive or none");
  }
  p.c10 = s.num("c10", p.c10);
  if (s.has("branches")) {
    p.branches.clear();
    const std::string b = s.str("branches");
    if (b != "none")
      for (const auto& item : split(b, ',')) {
        const auto mt = split(item, ':');
        if (mt.size() != 2) throw ValidationError("config: branch '" + item + "' is not modulus:tau");
        p.branches.push_back({to_double(mt[0], 0, "branch modulus"), to_double(mt[1], 0, "branch tau")});
      }
    p.canonicalize();
  }
  if (s.has("D") && s.has("poisson")) throw ValidationError("config: give either D or poisson, not both");
  if (s.has("D")) p.D = s.num("D");
  if (s.has("poisson")) p.D = MaterialParams::penalty_for_poisson(p.c10, s.num("poisson"));
  if (preset == "none" && !s.has("D") && !s.has("poisson"))
    throw ValidationError("config: [material] needs D or poisson");

  auto survival = [&](const std::string& sfx, const ChainSurvival& base) {
    const std::string mode = s.str("survival" + sfx, base.enabled() ? "wesslau" : "none");
    if (mode == "none") return ChainSurvival::none();
    if (mode != "wesslau") throw ValidationError("config: survival" + sfx + " must be wesslau or none");
    const double Q = s.num("Q" + sfx, base.enabled() ? base.params().Q : 0.0);
    const double lm = s.num("lambda_M" + sfx, base.enabled() ? base.params().lambda_M : 0.0);
    const auto w = WesslauParams::derive(Q, lm);
    if (std::abs(w.total_mass() - 1.0) > 1e-3)
      warnings.push_back("chain distribution mass 2C = " + format_number(w.total_mass()) + " differs from 1");
    return ChainSurvival(w);
  };
  p.survival_iso = survival("", p.survival_iso);
  // the volumetric set follows the isochoric one unless given separately
  const bool separate = s.has("survival_vol") || s.has("Q_vol") || s.has("lambda_M_vol");
  p.survival_vol = separate ? survival("_vol", p.survival_iso) : p.survival_iso;
  p.validate();
  return p;
}

}  // namespace

int parse_component(const std::string& s) {
  if (s == "x" || s == "0") return 0;
  if (s == "y" || s == "1") return 1;
  if (s == "z" || s == "2") return 2;
  if (s == "phi" || s == "3") return DofMap::kPhaseField;
  throw ValidationError("unknown component '" + s + "' (x, y, z or phi)");
}

TimeFunction parse_time_function(const std::string& s) {
  std::istringstream is(s);
  std::string kind;
  is >> kind;
  std::vector<std::string> rest;
  for (std::string w; is >> w;) rest.push_back(w);
  if (kind == "constant" && rest.size() == 1) return TimeFunction::constant(to_double(rest[0], 0, "value"));
  if (kind == "ramp" && rest.size() == 1) return TimeFunction::ramp(to_double(rest[0], 0, "rate"));
  if (kind == "table" && !rest.empty()) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rest) {
      const auto tv = split(r, ':');
      if (tv.size() != 2) throw ValidationError("table entry '" + r + "' is not t:value");
      pts.emplace_back(to_double(tv[0], 0, "time"), to_double(tv[1], 0, "value"));
      if (pts.size() > 1 && !(pts.back().first > pts[pts.size() - 2].first))
        throw ValidationError("table times must increase strictly");
    }
    return TimeFunction::table(std::move(pts));
  }
  throw ValidationError("time function '" + s + "': expected constant <v>, ramp <rate> or table <t>:<v> ...");
}

void RunConfig::validate() const {
  model.validate();
  solver.validate();
  for (const auto& c : program.conditions) {
    model.mesh.node_set(c.node_set);
    if (c.component != DofMap::kPhaseField && c.component >= model.mesh.dim())
      throw ValidationError("condition on '" + c.node_set + "': component beyond mesh dimension");
    const auto& pts = c.value.points();
    if (!c.value.is_ramp() && pts.size() > 1 && (pts.front().first > 0.0 || pts.back().first < solver.t_end))
      throw ValidationError("table on '" + c.node_set + "' does not cover [0, t_end]");
  }
  if (!program.reaction_set.empty()) model.mesh.node_set(program.reaction_set);
  if (!program.crack_set.empty()) model.mesh.node_set(program.crack_set);
  if (output.vtk_stride < 0) throw ValidationError("output stride must be >= 0");
}

RunConfig parse_config(std::istream& in, const fs::path& base_dir) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }
  for (const auto& [name, sub] : root) {
    static const std::set<std::string> known{"mesh", "material", "fracture", "solver", "boundary", "output"};
    if (!known.count(name)) throw ValidationError("config: unknown section [" + name + "]");
  }

  RunConfig rc;
  const Section ms = section(root, "mesh");
  rc.model.mesh = build_mesh(ms, base_dir);
  rc.model.thickness = ms.num("thickness", 1.0);
  ms.reject_unused();

  const Section mat = section(root, "material");
  rc.model.material = build_material(mat, rc.warnings);
  mat.reject_unused();

  const Section fr = section(root, "fracture");
  auto& f = rc.model.fracture;
  f.g_c = fr.num("g_c", f.g_c);
  f.ell_f = fr.num("ell_f", f.ell_f);
  f.zeta = fr.num("zeta", f.zeta);
  f.viscosity = fr.num("viscosity", f.viscosity);
  f.ec_mode = pick<CriticalEnergyMode>(fr, "critical_energy", "constant",
                                       {{"constant", CriticalEnergyMode::constant},
                                        {"survival_scaled", CriticalEnergyMode::survival_scaled}});
  fr.reject_unused();

  const Section so = section(root, "solver");
  auto& c = rc.solver;
  c.dt = so.num("dt", c.dt);
  c.t_end = so.num("t_end", c.t_end);
  c.newton_tol = so.num("newton_tol", c.newton_tol);
  c.newton_max = so.integer("newton_max", c.newton_max);
  c.max_halvings = so.integer("max_halvings", c.max_halvings);
  c.clamp_irreversibility = so.flag("clamp_irreversibility", c.clamp_irreversibility);
  c.linear_solver = pick<LinearSolverKind>(so, "linear_solver", "direct",
                                           {{"direct", LinearSolverKind::direct_sparse},
                                            {"iterative", LinearSolverKind::preconditioned_iterative}});
  c.tangent = pick<TangentKind>(so, "tangent", "consistent",
                                {{"consistent", TangentKind::consistent},
                                 {"continuum", TangentKind::continuum},
                                 {"numerical", TangentKind::numerical}});
  so.reject_unused();

  const Section bc = section(root, "boundary");
  if (bc.tree()) {
    for (const auto& [key, v] : *bc.tree()) {
      const std::string val = trim(v.data());
      std::istringstream is(val);
      std::string set, comp;
      is >> set >> comp;
      if (key == "reaction") {
        rc.program.reaction_set = set;
        rc.program.reaction_component = parse_component(comp);
        if (rc.program.reaction_component == DofMap::kPhaseField)
          throw ValidationError("reaction component must be a displacement");
      } else if (key == "crack") {
        rc.program.crack_set = set;
        rc.program.initial_crack_length = to_double(comp, 0, "crack length");
      } else {
        std::string rest;
        std::getline(is, rest);
        rc.program.conditions.push_back({set, parse_component(comp), parse_time_function(trim(rest))});
      }
    }
  }

  const Section out = section(root, "output");
  rc.output.directory = out.str("directory", rc.output.directory.string());
  if (rc.output.directory.is_relative()) rc.output.directory = base_dir / rc.output.directory;
  rc.output.prefix = out.str("prefix", rc.output.prefix);
  rc.output.vtk_stride = out.integer("vtk_stride", rc.output.vtk_stride);
  out.reject_unused();

  rc.validate();
  return rc;
}

MaterialParams read_material(const fs::path& path, std::vector<std::string>* warnings) {
  auto in = open_in(path);
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }
  std::vector<std::string> w;
  const Section mat = section(root, "material");
  if (!mat.tree()) throw ValidationError("'" + path.string() + "' has no [material] section");
  MaterialParams p = build_material(mat, w);
  mat.reject_unused();
  if (warnings) *warnings = std::move(w);
  return p;
}

RunConfig read_config(const fs::path& path) {
  auto in = open_in(path);
  return parse_config(in, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

}  // namespace chainfield
