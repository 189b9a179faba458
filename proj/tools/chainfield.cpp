// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// chainfield command line: point-test, profile1d, simulate, fit, check, plus
// helpers to generate meshes and synthetic fit data.
//
// Exit codes: 0 success, 2 invalid input, 3 solver failure, 64 usage.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "chainfield/benchmarks.hpp"
#include "chainfield/errors.hpp"
#include "chainfield/identification.hpp"
#include "chainfield/io.hpp"
#include "chainfield/mesh_gen.hpp"
#include "chainfield/point_driver.hpp"
#include "chainfield/verify.hpp"

namespace fs = std::filesystem;
using namespace chainfield;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitSolver = 3;
constexpr int kExitUsage = 64;

MaterialParams material_from(const std::string& path) {
  if (path.empty()) return MaterialParams::reference_adhesive();
  std::vector<std::string> warnings;
  MaterialParams p = read_material(path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return p;
}

// ---------------------------------------------------------------------------

struct PointTestArgs {
  std::string mode = "uniaxial";
  double stretch = 1.65;
  double rate = 0.01;
  double step = 0.01;
  double hold = 0.0;
  int hold_steps = 50;
  std::string material;
  std::string output;
};

int run_point_test(const PointTestArgs& a) {
  const MaterialParams params = material_from(a.material);
  LoadMode mode = LoadMode::uniaxial_stress;
  if (a.mode == "shear") mode = LoadMode::simple_shear;
  else if (a.mode == "relaxation") mode = LoadMode::relaxation;
  else if (a.mode != "uniaxial") throw ValidationError("mode must be uniaxial, shear or relaxation");

  std::vector<HistoryPoint> h;
  if (mode == LoadMode::relaxation) {
    if (!(a.hold > 0.0)) throw ValidationError("relaxation needs --hold > 0");
    h.push_back({0.0, 1.0});
    h.push_back({1e-9, a.stretch});
  } else {
    h = ramp_history(a.stretch, a.rate, a.step);
  }
  if (a.hold > 0.0) {
    const double t0 = h.back().t;
    for (int k = 1; k <= a.hold_steps; ++k) h.push_back({t0 + a.hold * k / a.hold_steps, a.stretch});
  }
  const auto out = point_driver(h, mode, params);

  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + a.output);
  }
  std::ostream& os = a.output.empty() ? std::cout : file;
  os << "time_s,stretch,stress_MPa\n";
  for (const auto& s : out)
    os << format_number(s.t) << ',' << format_number(s.stretch) << ',' << format_number(s.stress) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

int run_profile(double ell, int per_ell, double tolerance) {
  const auto r = phase_field_profile(per_ell, ell);
  std::printf("elements %d h %s l2_error %s surface_energy %s newton %d\n", r.elements, format_number(r.h).c_str(),
              format_number(r.l2_error).c_str(), format_number(r.surface_energy).c_str(), r.iterations);
  return r.l2_error < tolerance ? 0 : kExitSolver;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  bool tear_test = false;
  double t_end = -1.0;
  bool quiet = false;
  std::string output_dir;
};

int run_simulate(const SimulateArgs& a) {
  RunConfig rc;
  if (a.tear_test) {
    rc = tear_test_config();
    rc.output.directory = "tear_test";
  } else {
    rc = read_config(a.config);
  }
  if (!a.output_dir.empty()) rc.output.directory = a.output_dir;
  if (a.t_end >= 0.0) rc.solver.t_end = a.t_end;
  for (const auto& w : rc.warnings) std::cerr << "warning: " << w << '\n';

  fs::create_directories(rc.output.directory);
  SystemState state = SystemState::initial(rc.model);
  TearTestMonitor monitor(rc.model, rc.program);
  int step = 0;
  std::vector<SeriesRow> rows;
  const fs::path csv = rc.output.directory / (rc.output.prefix + "_series.csv");
  auto write_vtk_step = [&](const SystemState& s) {
    if (rc.output.vtk_stride > 0 && step % rc.output.vtk_stride == 0)
      write_vtk(rc.model, s, rc.output.directory / vtk_file_name(rc.output.prefix, step));
  };
  write_vtk_step(state);

  SimulationCallbacks cb;
  cb.keep_fields = false;
  cb.warn = [](const std::string& w) { std::cerr << "warning: " << w << '\n'; };
  const auto t0 = std::chrono::steady_clock::now();
  cb.on_step = [&](const SystemState& s, const SolveResult& r) {
    ++step;
    monitor.on_step(s, r);
    rows.push_back({r.t, r.displacement, r.force});
    write_vtk_step(s);
    if (!a.quiet)
      std::printf("step %4d t %s u %s F %s newton %d [%.1f s]\n", step, format_number(r.t).c_str(),
                  format_number(r.displacement).c_str(), format_number(r.force).c_str(), r.newton_iterations,
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };
  int code = 0;
  try {
    run_simulation(rc.model, rc.solver, rc.program, state, cb);
  } catch (const ConvergenceError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    code = kExitSolver;
  }
  write_series_csv(rows, csv);
  std::printf("peak force %s N at t = %s s, final force %s N at t = %s s\n", format_number(monitor.peak_force()).c_str(),
              format_number(monitor.peak_time()).c_str(), format_number(monitor.final_force()).c_str(),
              format_number(monitor.final_time()).c_str());
  if (monitor.initiation_time() >= 0.0)
    std::printf("crack initiation (phi < 0.05 off the seed) at t = %s s, node %d\n",
                format_number(monitor.initiation_time()).c_str(), monitor.initiation_node());
  std::printf("series written to %s\n", csv.string().c_str());
  return code;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string data;
  double rate = 0.05;
  std::vector<std::string> free{"c10", "c10_1", "c10_2", "c10_3"};
  std::string material;
  std::string report;
  double perturb = 0.0;
  unsigned long seed = 1;
};

FreeParameter free_parameter(const std::string& name, const MaterialParams& p) {
  FreeParameter f;
  if (name == "c10") {
    f.kind = ParameterKind::c10;
  } else if (name.rfind("c10_", 0) == 0) {
    f.kind = ParameterKind::branch_modulus;
    const std::string j = name.substr(4);
    if (j.empty() || j.find_first_not_of("0123456789") != std::string::npos)
      throw ValidationError("bad branch parameter '" + name + "'");
    f.branch = std::stoi(j) - 1;
  } else if (name == "Q") {
    f.kind = ParameterKind::Q;
  } else if (name == "lambda_M") {
    f.kind = ParameterKind::lambda_M;
  } else if (name == "D") {
    f.kind = ParameterKind::D;
  } else {
    throw ValidationError("unknown parameter '" + name + "' (c10, c10_<j>, Q, lambda_M, D)");
  }
  if (f.kind == ParameterKind::branch_modulus && (f.branch < 0 || f.branch >= static_cast<int>(p.branches.size())))
    throw ValidationError("no branch " + name.substr(4));
  // generous default box: a decade either way; Q and λ_M stay above 1
  const double v = get_parameter(p, f);
  if (f.kind == ParameterKind::Q || f.kind == ParameterKind::lambda_M) {
    f.lower = 1.0 + (v - 1.0) / 10.0;
    f.upper = 1.0 + (v - 1.0) * 10.0;
  } else {
    f.lower = v / 10.0;
    f.upper = v * 10.0;
  }
  return f;
}

int run_fit(const FitArgs& a) {
  MaterialParams p0 = material_from(a.material);
  FitProblem pb;
  pb.data = read_fit_data(a.data);
  for (const auto& n : a.free) pb.free.push_back(free_parameter(n, p0));
  if (a.perturb > 0.0) {
    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> u(-a.perturb, a.perturb);
    for (const auto& f : pb.free) set_parameter(p0, f, get_parameter(p0, f) * (1.0 + u(rng)));
  }
  const FitResult r = fit(pb, p0, a.rate);
  if (a.report.empty()) {
    write_fit_report(pb, r, a.rate, std::cout);
  } else {
    std::ofstream out(a.report, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + a.report);
    write_fit_report(pb, r, a.rate, out);
    std::printf("objective %s after %d evaluations, report in %s\n", format_number(r.objective).c_str(),
                r.evaluations, a.report.c_str());
  }
  return r.converged ? 0 : kExitSolver;
}

int run_synthesize(double rate, double max_stretch, int samples, const std::string& material,
                   const std::string& output) {
  const MaterialParams p = material_from(material);
  const auto data = synthesize(p, rate, max_stretch, samples);
  std::ostringstream note;
  note << "SYNTHETIC data generated by `chainfield synthesize` (not measured).\n"
       << "uniaxial ramp at " << format_number(rate) << " 1/s, " << (material.empty() ? "reference adhesive" : material)
       << " parameters";
  write_fit_data(data, output, note.str());
  std::printf("%zu samples written to %s\n", data.size(), output.c_str());
  return 0;
}

// ---------------------------------------------------------------------------

int run_check(unsigned long seed) {
  bool ok = true;
  for (const auto& r : run_all_checks(seed)) {
    std::printf("%-4s %-42s max rel error %s (tol %s, %d samples) %s\n", r.pass() ? "ok" : "FAIL", r.name.c_str(),
                format_number(r.error).c_str(), format_number(r.tolerance).c_str(), r.samples, r.detail.c_str());
    ok = ok && r.pass();
  }
  const auto prof = phase_field_profile(10);
  const bool prof_ok = prof.l2_error < 0.01;
  std::printf("%-4s %-42s L2 error %s at h = l/10\n", prof_ok ? "ok" : "FAIL", "phase-field profile",
              format_number(prof.l2_error).c_str());
  Mat3 H;
  H << 0.3, 0.1, 0.0, 0.05, -0.1, 0.02, 0.0, 0.0, 0.05;
  const auto hom = homogeneous_patch(H);
  const double hom_err = std::max(std::abs(hom.phi_min - hom.expected), std::abs(hom.phi_max - hom.expected));
  const bool hom_ok = hom_err < 1e-8;
  std::printf("%-4s %-42s |phi - phi*| %s\n", hom_ok ? "ok" : "FAIL", "homogeneous damage equilibrium",
              format_number(hom_err).c_str());
  return ok && prof_ok && hom_ok ? 0 : kExitSolver;
}

int run_mesh(const std::string& kind, const std::string& output, const AngleSpecimenOptions& o) {
  Mesh m;
  if (kind == "angle-specimen") {
    m = angle_specimen_mesh(o);
  } else {
    throw ValidationError("unknown mesh kind '" + kind + "'");
  }
  write_mesh(m, fs::path(output));
  std::printf("nodes %zu elements %zu kind %s\n", m.num_nodes(), m.num_elements(), to_string(m.kind));
  for (const auto& [name, ids] : m.node_sets) std::printf("nodeset %s %zu\n", name.c_str(), ids.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chainfield: chain-statistics phase-field fracture of a viscoelastic adhesive"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "chainfield 0.1.0");

  PointTestArgs pta;
  auto* pt = app.add_subcommand("point-test", "homogeneous material-point test, CSV to stdout or --output");
  pt->add_option("--mode", pta.mode, "uniaxial | shear | relaxation")->capture_default_str();
  pt->add_option("--stretch", pta.stretch, "final stretch")->capture_default_str();
  pt->add_option("--rate", pta.rate, "stretch rate [1/s]")->capture_default_str();
  pt->add_option("--step", pta.step, "stretch increment")->capture_default_str();
  pt->add_option("--hold", pta.hold, "hold time after loading [s]")->capture_default_str();
  pt->add_option("--hold-steps", pta.hold_steps, "steps during the hold")->capture_default_str();
  pt->add_option("--material", pta.material, "config file with a [material] section");
  pt->add_option("--output", pta.output, "CSV file");

  double p_ell = 2.0, p_tol = 0.01;
  int p_per = 10;
  auto* pr = app.add_subcommand("profile1d", "1D phase-field profile against 1 - exp(-x/l)");
  pr->add_option("--ell", p_ell, "regularisation length [mm]")->capture_default_str();
  pr->add_option("--per-ell", p_per, "elements per regularisation length")->capture_default_str();
  pr->add_option("--tolerance", p_tol, "exit 3 if the L2 error exceeds this")->capture_default_str();

  SimulateArgs sa;
  auto* si = app.add_subcommand("simulate", "run a configured simulation");
  si->add_option("config", sa.config, "run configuration (.ini)");
  si->add_option("--output-dir", sa.output_dir, "override the output directory");
  si->add_flag("--tear-test", sa.tear_test, "built-in calibrated angle-specimen tear test");
  si->add_option("--t-end", sa.t_end, "override the end time [s]");
  si->add_flag("--quiet", sa.quiet, "no per-step lines");

  FitArgs fa;
  auto* fi = app.add_subcommand("fit", "Nelder-Mead identification from stress-stretch data");
  fi->add_option("data", fa.data, "CSV: stretch,stress_MPa[,weight]")->required();
  fi->add_option("--rate", fa.rate, "stretch rate of the test [1/s]")->capture_default_str();
  fi->add_option("--free", fa.free, "free parameters: c10 c10_<j> Q lambda_M D")->capture_default_str();
  fi->add_option("--material", fa.material, "start parameters ([material] section)");
  fi->add_option("--report", fa.report, "report file (default stdout)");
  fi->add_option("--perturb", fa.perturb, "random relative perturbation of the start values")->capture_default_str();
  fi->add_option("--seed", fa.seed, "seed for --perturb")->capture_default_str();

  double sy_rate = 0.05, sy_max = 1.8;
  int sy_n = 40;
  std::string sy_mat, sy_out;
  auto* sy = app.add_subcommand("synthesize", "synthetic uniaxial data for fit round trips");
  sy->add_option("--rate", sy_rate, "stretch rate [1/s]")->capture_default_str();
  sy->add_option("--max-stretch", sy_max, "last stretch")->capture_default_str();
  sy->add_option("--samples", sy_n, "number of samples")->capture_default_str();
  sy->add_option("--material", sy_mat, "parameters ([material] section)");
  sy->add_option("--output", sy_out, "CSV file")->required();

  unsigned long ch_seed = 20240611;
  auto* ch = app.add_subcommand("check", "run the built-in oracles");
  ch->add_option("--seed", ch_seed, "seed of the random sample points")->capture_default_str();

  std::string me_kind = "angle-specimen", me_out;
  AngleSpecimenOptions me_opt;
  auto* me = app.add_subcommand("mesh", "write a generated mesh");
  me->add_option("kind", me_kind, "angle-specimen")->capture_default_str();
  me->add_option("--output", me_out, "mesh file")->required();
  me->add_option("--h-notch", me_opt.h_notch, "element size at the notch [mm]")->capture_default_str();
  me->add_option("--h-far", me_opt.h_far, "element size at the clamps [mm]")->capture_default_str();
  me->add_option("--rows", me_opt.rows, "elements across the ligament")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*pt) return run_point_test(pta);
    if (*pr) return run_profile(p_ell, p_per, p_tol);
    if (*si) {
      if (sa.config.empty() && !sa.tear_test) throw ValidationError("simulate needs a config file or --tear-test");
      return run_simulate(sa);
    }
    if (*fi) return run_fit(fa);
    if (*sy) return run_synthesize(sy_rate, sy_max, sy_n, sy_mat, sy_out);
    if (*ch) return run_check(ch_seed);
    if (*me) return run_mesh(me_kind, me_out, me_opt);
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ConvergenceError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const SingularDeformationError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ElementInversionError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
