#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fpa/grid.hpp"
#include "fpa/models.hpp"
#include "fpa/particles.hpp"
#include "fpa/solver.hpp"

namespace fpa {

/// Parse or validation failure; line is 0 when the problem is not tied to one line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct ModelSection {
  ModelKind kind = ModelKind::CS;
  double beta = 1.0;
  KernelShape kernel = KernelShape::bump;
  double kernel_radius = 0.0;  ///< 0 = shape default (0.35 L bump, 0.25 L bochner)
  double r0 = 0.0;             ///< 0 = 0.175 L
  /// "default", "full-support", or explicit bumps "center:radius, center:radius, ..."
  std::string partition = "default";
  bool operator==(const ModelSection&) const = default;
};

struct GridSection {
  double L = 1.0;
  int nx = 64;
  double vmax = 8.0;
  int nv = 257;
  bool operator==(const GridSection&) const = default;
};

struct SimSection {
  double sigma = 1.0;
  double dt = 1e-3;
  double t_end = 5.0;
  Splitting splitting = Splitting::strang;
  bool operator==(const SimSection&) const = default;
};

struct InitSection {
  std::string preset = "bimodal";
  double ubar = 0.25;       ///< bulk velocity (shifted-maxwellian, bimodal)
  double u0 = 1.5;          ///< half-separation of the bimodal peaks
  double amplitude = 0.3;   ///< spatial modulation of the bimodal peaks
  double v_radius = 3.0;    ///< velocity support radius of vacuous-half-torus
  std::string file;
  bool operator==(const InitSection&) const = default;
};

struct ParticlesSection {
  int n = 2000;
  std::uint64_t seed = 1;
  bool enabled = true;
  double dt = 1e-2;
  bool operator==(const ParticlesSection&) const = default;
};

struct OutputSection {
  std::string directory = "out";
  int snapshot_every = 0;
  int series_every = 10;
  bool operator==(const OutputSection&) const = default;
};

struct RunConfig {
  ModelSection model;
  GridSection grid;
  SimSection sim;
  InitSection init;
  ParticlesSection particles;
  OutputSection output;
  bool operator==(const RunConfig&) const = default;
};

/// [section] headers with key = value lines; "section.key = value" is accepted
/// anywhere. '#' and ';' start comments. Every key is optional.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

std::pair<PeriodicGrid, VelocityGrid> make_grids(const RunConfig& config);
ModelSpec make_model(const RunConfig& config);
SolverConfig solver_config(const RunConfig& config);

/// Initial data by preset name, normalized to unit mass.
KineticState init_preset(const InitSection& init, const PeriodicGrid& xg, const VelocityGrid& vg, double sigma);

/// One-line JSON header {"Nx","Nv","L","vmax","sigma","t"} followed by Nx*Nv
/// little-endian doubles, x outer.
void write_snapshot(std::ostream& out, const KineticState& state, double sigma);
void write_snapshot(const std::filesystem::path& path, const KineticState& state, double sigma);

struct Snapshot {
  KineticState state;
  double sigma = 0.0;
};

/// Throws std::runtime_error on a malformed header, a shape mismatch or a truncated payload.
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace fpa
