// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// File formats. Every emitted number goes through format_number, so output is
// byte-stable for identical inputs.
//
// Mesh (ASCII):
//   polyfem-mesh 1
//   nodes <N>
//   <x> <y> <z>                      N lines
//   elements <M> <hex8|quad4>
//   <i0> ... <ik>                    M lines, 0-based
//   nodeset <name> <count>           zero or more blocks,
//   <index> ...                      whitespace separated, any line breaks

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "chainfield/fem.hpp"
#include "chainfield/identification.hpp"

namespace chainfield {

/// Scientific notation, 9 significant digits.
std::string format_number(double v);

Mesh parse_mesh(std::istream& in);
/// Throws ParseError (with line) for syntax, ValidationError for invariants.
Mesh read_mesh(const std::filesystem::path& path);
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh(const Mesh& mesh, const std::filesystem::path& path);

/// Legacy ASCII unstructured grid with point data displacement, phi and
/// stress_norm. Quad4 meshes are written as VTK_QUAD (z = 0).
void write_vtk(const Model& model, const SystemState& state, std::ostream& out);
void write_vtk(const Model& model, const SystemState& state, const std::filesystem::path& path);
/// <prefix>_<step:05>.vtk
std::string vtk_file_name(const std::string& prefix, int step);

struct SeriesRow {
  double time{};
  double displacement{};
  double force{};
};

void write_series_csv(const std::vector<SeriesRow>& rows, std::ostream& out);
void write_series_csv(const std::vector<SeriesRow>& rows, const std::filesystem::path& path);
std::vector<SeriesRow> read_series_csv(const std::filesystem::path& path);
std::vector<SeriesRow> series_rows(const std::vector<SolveResult>& results);

/// Stress–stretch data: header `stretch,stress_MPa` with an optional third
/// column `weight`; '#' lines are comments.
std::vector<FitSample> read_fit_data(const std::filesystem::path& path);
void write_fit_data(const std::vector<FitSample>& data, const std::filesystem::path& path,
                    const std::string& comment = {});

void write_fit_report(const FitProblem& problem, const FitResult& result, double rate, std::ostream& out);

// ---------------------------------------------------------------------------
// Run configuration: `[section]` headers and `key = value` lines, ';' or '#'
// comments. Sections: mesh, material, fracture, solver, boundary, output.

struct OutputConfig {
  std::filesystem::path directory = "output";
  std::string prefix = "step";
  int vtk_stride = 1;  // 0 disables VTK
};

struct RunConfig {
  Model model;
  SolveConfig solver;
  BoundaryProgram program;
  OutputConfig output;
  std::vector<std::string> warnings;

  /// Node sets exist, tables cover [0, t_end], every block validates.
  void validate() const;
};

/// Relative mesh paths are resolved against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
RunConfig read_config(const std::filesystem::path& path);

/// Only the [material] section of a config file; other sections are ignored.
MaterialParams read_material(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// "x", "y", "z", "phi" or a number.
int parse_component(const std::string& s);
/// "constant <v>", "ramp <rate>", "table <t>:<v> ...".
TimeFunction parse_time_function(const std::string& s);

}  // namespace chainfield
