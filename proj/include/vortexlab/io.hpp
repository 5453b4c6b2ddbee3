#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/hamiltonian.hpp"
#include "vortexlab/pde.hpp"

namespace vortexlab {

/// Validated run configuration. The JSON schema is documented in README.md; every field except
/// `seed` and `shape` has a default.
struct RunConfig {
  std::uint64_t seed = 0;
  DomainShape shape = DomainShape::disk({0.0, 0.0}, 1.0);

  int n = 257;                      // grid.n
  double bubble_resolution = 16.0;  // grid.bubble_resolution
  double growth = 0.1;              // grid.growth
  bool auto_refine = true;          // grid.auto_refine: graded grids; false keeps a uniform n-grid

  GreenOptions green;

  std::vector<double> rhos{0.01};    // params.rho or params.rho_schedule
  std::vector<double> gammas{1.0};   // params.gamma or params.gamma_schedule
  double tau = 1.0;

  std::optional<VortexConfig> xi;    // config.xi1 / config.xi2; otherwise found by multistart
  SearchOptions search;
  std::string select = "maximum";    // search.select: maximum | saddle | any

  ProjectionMode projection = ProjectionMode::Exact;
  NewtonOptions newton;

  std::string output_dir = ".";

  /// Canonical JSON of the parsed configuration with defaults filled in.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;
};

/// Strict parser: unknown fields raise SchemaError with their path, out-of-range values RangeError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Re-validates after command-line overrides.
void validate(const RunConfig& cfg);

/// Comma-separated list of numbers ("1,2,4").
std::vector<double> parse_list(const std::string& text, const std::string& field);

/// Field text format: optional '#' comment lines, header `nx ny x0 y0 hx hy`, for graded grids
/// (hx = hy = 0) one line of nx x-coordinates and one of ny y-coordinates, then nx * ny values
/// row by row (x fastest). Exterior nodes are written as `nan`.
std::string format_field(const GridField& f, const std::string& comment = "");
/// Without a shape the grid gets a bounding disk of the coordinate box; the mask always comes
/// from the `nan` pattern. Throws FormatError.
GridField parse_field(const std::string& text, const DomainShape* shape = nullptr);
void write_field(const GridField& f, const std::string& path, const std::string& comment = "");
GridField read_field(const std::string& path, const DomainShape* shape = nullptr);

/// Temp file plus rename; throws IOError.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// gamma,xi1x,xi1y,xi2x,xi2y,dist_boundary,dist_argmax,nu_gap
std::string sweep_csv(const BranchReport& report);

}  // namespace vortexlab
