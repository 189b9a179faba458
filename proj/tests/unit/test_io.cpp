// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "chainfield/benchmarks.hpp"
#include "chainfield/errors.hpp"
#include "chainfield/io.hpp"
#include "chainfield/mesh_gen.hpp"

using namespace chainfield;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = CHAINFIELD_SOURCE_DIR;

fs::path scratch_root() { return fs::temp_directory_path() / ("chainfield_io_" + std::to_string(::getpid())); }

struct ScratchCleanup : ::testing::Environment {
  void TearDown() override { fs::remove_all(scratch_root()); }
};
const auto* const kCleanup = ::testing::AddGlobalTestEnvironment(new ScratchCleanup);

fs::path scratch(const std::string& name) {
  const fs::path d = scratch_root() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run(const std::string& cmd) {
  const int st = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string cli() { return std::string("\"") + CHAINFIELD_CLI + "\""; }

const char* kUnitCube =
    "polyfem-mesh 1\n"
    "nodes 8\n"
    "0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n"
    "elements 1 hex8\n"
    "0 1 2 3 4 5 6 7\n";

const char* kSmallRun =
    "[mesh]\n"
    "generator = box\n"
    "size = 2 1 0\n"
    "divisions = 4 2 0\n"
    "[material]\n"
    "preset = reference_adhesive\n"
    "[solver]\n"
    "dt = 0.5\n"
    "t_end = 2\n"
    "[boundary]\n"
    "fix_x = xmin x constant 0\n"
    "fix_y = ymin y constant 0\n"
    "pull = xmax x ramp 0.02\n"
    "reaction = xmax x\n"
    "[output]\n"
    "prefix = small\n"
    "vtk_stride = 2\n";

}  // namespace

TEST(Mesh, UnitCube) {
  std::istringstream in(kUnitCube);
  const Mesh m = parse_mesh(in);
  EXPECT_EQ(m.num_nodes(), 8u);
  EXPECT_EQ(m.num_elements(), 1u);
  EXPECT_EQ(m.kind, ElementKind::hex8);
}

TEST(Mesh, InvertedElementIsNamed) {
  std::string text = kUnitCube;
  text.replace(text.find("0 1 2 3 4 5 6 7"), 15, "0 3 2 1 4 7 6 5");
  std::istringstream in(text);
  try {
    parse_mesh(in);
    FAIL() << "inverted element accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("element 0"), std::string::npos) << e.what();
  }
}

TEST(Mesh, SyntaxErrorCarriesLine) {
  std::string text = kUnitCube;
  text.replace(text.find("1 1 0"), 5, "1 x 0");
  std::istringstream in(text);
  try {
    parse_mesh(in);
    FAIL() << "bad number accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
}

TEST(Mesh, RoundTripIsExact) {
  const Mesh m = angle_specimen_mesh();
  std::stringstream a;
  write_mesh(m, a);
  const Mesh back = parse_mesh(a);
  std::stringstream b;
  write_mesh(back, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(back.connectivity, m.connectivity);
  EXPECT_EQ(back.node_sets, m.node_sets);
  // 9 significant digits
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    EXPECT_LT((back.nodes[i] - m.nodes[i]).norm(), 1e-8 * (1.0 + m.nodes[i].norm()));
}

TEST(Mesh, ShippedSpecimenMatchesManifest) {
  const Mesh m = read_mesh(kSource / "tests/data/angle_specimen.mesh");
  std::ifstream man(kSource / "tests/data/angle_specimen.manifest");
  std::string line;
  std::map<std::string, std::size_t> counts;
  while (std::getline(man, line)) {
    std::istringstream ls(line);
    std::string key;
    std::size_t n;
    while (ls >> key >> n) counts[key] = n;
  }
  ASSERT_FALSE(counts.empty());
  EXPECT_EQ(counts.at("nodes"), m.num_nodes());
  EXPECT_EQ(counts.at("elements"), m.num_elements());
  const Mesh g = angle_specimen_mesh();
  EXPECT_EQ(m.num_nodes(), g.num_nodes());
  EXPECT_EQ(m.connectivity, g.connectivity);
  for (const auto& [name, nodes] : g.node_sets) EXPECT_EQ(m.node_set(name), nodes) << name;
  // plane strain, h at the notch below the paper's 1.23 mm
  EXPECT_EQ(m.kind, ElementKind::quad4);
  EXPECT_LE(max_element_size_near(m, m.node_set("notch_zone")), 1.23 * std::sqrt(2.0));
}

TEST(Vtk, UndeformedGolden) {
  Model m;
  m.mesh = box_mesh(1, 1, 1, 1, 1, 1);
  m.material = MaterialParams::reference_adhesive();
  const SystemState s = SystemState::initial(m);
  std::ostringstream out;
  write_vtk(m, s, out);
  EXPECT_EQ(out.str(), slurp(kSource / "tests/data/golden/unit_cube_undeformed.vtk"));
}

TEST(Vtk, FileNames) {
  EXPECT_EQ(vtk_file_name("tear", 0), "tear_00000.vtk");
  EXPECT_EQ(vtk_file_name("step", 123), "step_00123.vtk");
}

TEST(Vtk, DeterministicAndReadableByThirdParty) {
  Model m;
  m.mesh = box_mesh(3, 2, 0, 6, 4, 0);
  m.material = MaterialParams::reference_adhesive();
  SystemState s = SystemState::initial(m);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < s.phi.size(); ++i) s.phi[i] = u(rng);
  for (Eigen::Index i = 0; i < s.u.size(); ++i) s.u[i] = 0.01 * (u(rng) - 0.5);
  const fs::path dir = scratch("vtk");
  write_vtk(m, s, dir / "a.vtk");
  write_vtk(m, s, dir / "b.vtk");
  EXPECT_EQ(slurp(dir / "a.vtk"), slurp(dir / "b.vtk"));

  const std::string cmd = std::string(CHAINFIELD_PYTHON) + " " + (kSource / "tests/oracles/read_vtk.py").string() +
                          " " + (dir / "a.vtk").string() + " > " + (dir / "phi.txt").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0) << "needs python3 with meshio";
  std::ifstream in(dir / "phi.txt");
  std::size_t points = 0, cells = 0;
  in >> points >> cells;
  EXPECT_EQ(points, m.mesh.num_nodes());
  EXPECT_EQ(cells, m.mesh.num_elements());
  for (Eigen::Index i = 0; i < s.phi.size(); ++i) {
    double v = -1;
    in >> v;
    EXPECT_NEAR(v, s.phi[i], 5e-9 * std::abs(s.phi[i]) + 1e-300) << i;
  }
}

TEST(Series, HeaderOnlyForZeroSteps) {
  std::ostringstream out;
  write_series_csv({}, out);
  EXPECT_EQ(out.str(), "time_s,displacement_mm,force_N\n");
}

TEST(Series, RoundTripIsExact) {
  std::vector<SeriesRow> rows;
  for (int i = 0; i < 20; ++i) rows.push_back({0.5 * i, 0.0475 * i, std::sin(0.3 * i) * 80.0});
  const fs::path p = scratch("series") / "s.csv";
  write_series_csv(rows, p);
  const auto back = read_series_csv(p);
  ASSERT_EQ(back.size(), rows.size());
  // the file is the reference: writing what was read gives the same bytes
  write_series_csv(back, p.parent_path() / "t.csv");
  EXPECT_EQ(slurp(p), slurp(p.parent_path() / "t.csv"));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(back[i].time, rows[i].time, 1e-8 * std::abs(rows[i].time));
    EXPECT_NEAR(back[i].force, rows[i].force, 1e-8 * std::abs(rows[i].force));
  }
}

TEST(Series, RejectsWrongHeader) {
  const fs::path p = scratch("badseries") / "s.csv";
  put(p, "t,u,f\n1,2,3\n");
  EXPECT_THROW(read_series_csv(p), ParseError);
}

TEST(FitData, RoundTripAndComments) {
  const fs::path p = scratch("fitdata") / "d.csv";
  const std::vector<FitSample> data{{1.1, 2.0, 1.0}, {1.2, 3.5, 2.0}};
  write_fit_data(data, p, "generated");
  EXPECT_EQ(slurp(p).substr(0, 2), "# ");
  const auto back = read_fit_data(p);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].weight, 2.0);
  put(p, "stretch,stress_MPa\n1.1,2\n1.2\n");
  EXPECT_THROW(read_fit_data(p), ParseError);
}

TEST(Config, ShippedTearTestMatchesBuiltIn) {
  const RunConfig a = read_config(kSource / "tools/tear_test.ini");
  const RunConfig b = tear_test_config();
  EXPECT_TRUE(a.warnings.empty());
  EXPECT_EQ(a.model.mesh.connectivity, b.model.mesh.connectivity);
  EXPECT_EQ(a.model.thickness, b.model.thickness);
  EXPECT_EQ(a.model.fracture.viscosity, b.model.fracture.viscosity);
  EXPECT_EQ(a.model.fracture.g_c, b.model.fracture.g_c);
  EXPECT_EQ(a.model.material.D, b.model.material.D);
  EXPECT_EQ(a.solver.dt, b.solver.dt);
  EXPECT_EQ(a.solver.t_end, b.solver.t_end);
  EXPECT_EQ(a.solver.newton_tol, b.solver.newton_tol);
  ASSERT_EQ(a.program.conditions.size(), b.program.conditions.size());
  for (std::size_t i = 0; i < a.program.conditions.size(); ++i) {
    EXPECT_EQ(a.program.conditions[i].node_set, b.program.conditions[i].node_set);
    EXPECT_EQ(a.program.conditions[i].component, b.program.conditions[i].component);
    for (double t : {0.0, 10.0, 29.5}) EXPECT_EQ(a.program.conditions[i].value(t), b.program.conditions[i].value(t));
  }
  EXPECT_EQ(a.program.reaction_set, "clamp_right");
  EXPECT_EQ(a.program.crack_set, "notch");
}

TEST(Config, ParsesPiecesAndRejectsUnknownKeys) {
  EXPECT_EQ(parse_component("phi"), DofMap::kPhaseField);
  EXPECT_EQ(parse_component("y"), 1);
  EXPECT_THROW(parse_component("w"), ValidationError);
  const TimeFunction t = parse_time_function("table 0:0 10:1 20:1");
  EXPECT_DOUBLE_EQ(t(5.0), 0.5);
  EXPECT_DOUBLE_EQ(t(30.0), 1.0);
  EXPECT_DOUBLE_EQ(parse_time_function("ramp 0.1")(3.0), 0.3);
  EXPECT_THROW(parse_time_function("table 0:0 0:1"), ValidationError);

  std::istringstream ok(kSmallRun);
  const RunConfig rc = parse_config(ok);
  EXPECT_EQ(rc.model.mesh.num_elements(), 8u);
  EXPECT_EQ(rc.program.conditions.size(), 3u);
  EXPECT_EQ(rc.output.vtk_stride, 2);

  std::istringstream typo(std::string(kSmallRun) + "[solver]\nnewton_tolerance = 1e-9\n");
  EXPECT_THROW(parse_config(typo), ValidationError);
  std::istringstream section(std::string(kSmallRun) + "[plasticity]\nyield = 3\n");
  EXPECT_THROW(parse_config(section), ValidationError);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  EXPECT_EQ(run(cli() + " --no-such-flag"), 64);
  EXPECT_EQ(run(cli() + " point-test --bogus 1"), 64);
  EXPECT_EQ(run(cli() + " point-test --stretch 1.3 --output " + (dir / "pt.csv").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "pt.csv"));

  put(dir / "bad.ini", std::string(kSmallRun) + "[fracture]\ng_c = -1\n");
  EXPECT_EQ(run(cli() + " simulate " + (dir / "bad.ini").string()), 2);
  EXPECT_EQ(run(cli() + " simulate " + (dir / "missing.ini").string()), 2);
  // one Newton iteration and no halving cannot reach the tolerance
  std::string stiff = kSmallRun;
  stiff.replace(stiff.find("t_end = 2\n"), 10, "t_end = 2\nnewton_max = 1\nmax_halvings = 0\n");
  put(dir / "stiff.ini", stiff);
  EXPECT_EQ(run(cli() + " simulate " + (dir / "stiff.ini").string() + " --output-dir " + (dir / "stiff").string()), 3);
  EXPECT_EQ(run(cli() + " check"), 0);
}

TEST(Cli, SimulationOutputIsByteStable) {
  const fs::path dir = scratch("det");
  put(dir / "run.ini", kSmallRun);
  ASSERT_EQ(run(cli() + " simulate " + (dir / "run.ini").string() + " --quiet --output-dir " + (dir / "a").string()), 0);
  ASSERT_EQ(run(cli() + " simulate " + (dir / "run.ini").string() + " --quiet --output-dir " + (dir / "b").string()), 0);
  const auto rows = read_series_csv(dir / "a/small_series.csv");
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].time, rows[i - 1].time);
    EXPECT_GT(rows[i].force, rows[i - 1].force);
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
  }
  EXPECT_GE(files, 3);
  EXPECT_TRUE(fs::exists(dir / "a" / vtk_file_name("small", 2)));
}
