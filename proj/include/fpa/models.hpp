#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fpa/grid.hpp"

namespace fpa {

enum class ModelKind { CS, MT, Mbeta, Mphi, Mseg };
enum class KernelShape { bump, bochner, constant };

std::string_view to_string(ModelKind kind);
std::string_view to_string(KernelShape shape);
ModelKind parse_model_kind(std::string_view name);
KernelShape parse_kernel_shape(std::string_view name);

/// Communication kernel phi sampled on the torus, normalized to unit discrete mass.
struct KernelSpec {
  KernelShape shape = KernelShape::bump;
  /// bump: support radius r1; bochner: radius of the factor psi; constant: unused.
  double radius = 0.35;
  Field samples;
  /// Normalization of the closed-form bump, so that value() matches samples at nodes.
  double bump_scale = 1.0;
  /// Min of phi over |x| < r0 at construction, the locality constant c0.
  double c0 = 0.0;

  /// phi at an arbitrary periodic offset (closed form for bump and constant,
  /// periodic linear interpolation of the samples for bochner).
  double value(const PeriodicGrid& grid, double offset) const;
  double sup() const { return samples.maxCoeff(); }
};

KernelSpec make_kernel(KernelShape shape, double radius, const PeriodicGrid& grid, double r0);

/// One bump of a partition of unity before normalization.
struct PartitionBump {
  double center = 0.0;
  double radius = 0.0;
};

/// Two overlapping bumps whose supports jointly cover the torus.
std::vector<PartitionBump> default_partition(const PeriodicGrid& grid);
/// Two bumps of radius 0.75 L, each positive on the whole torus.
std::vector<PartitionBump> full_support_partition(const PeriodicGrid& grid);

/// An environmental-averaging model bound to a spatial grid.
struct ModelSpec {
  ModelKind kind = ModelKind::CS;
  double beta = 1.0;
  KernelSpec kernel;
  std::vector<PartitionBump> partition;
  /// g_l sampled on the grid, sum_l g_l == 1.
  std::vector<Field> partition_fields;
  double r0 = 0.175;
  PeriodicGrid grid;
  PeriodicConvolver convolver;

  bool symmetric() const { return kind == ModelKind::CS || kind == ModelKind::Mphi || kind == ModelKind::Mseg; }
  bool conservative() const { return symmetric(); }
  Field convolve(const Field& g) const { return convolver.apply(g); }
};

struct ModelOptions {
  ModelKind kind = ModelKind::CS;
  double beta = 1.0;
  KernelShape kernel = KernelShape::bump;
  /// <= 0 selects the shape default (0.35 L bump, 0.25 L bochner).
  double kernel_radius = 0.0;
  /// <= 0 selects 0.175 L.
  double r0 = 0.0;
  std::vector<PartitionBump> partition;  // empty selects default_partition
};

ModelSpec make_model(const ModelOptions& options, const PeriodicGrid& grid);

/// Floor 1e-12 * (mass / L) applied to averaging denominators.
double denominator_floor(const PeriodicGrid& grid, const Field& rho);

struct MacroFields {
  Field rho, m, s, w, avg, theta;
  double theta_min = 0.0;
  Mask unconstrained;
};

Field strength(const ModelSpec& model, const Field& rho);

struct KernelMatrix {
  Matrix values;
  /// Mseg terms with vanishing int rho g_l were dropped (0/0 convention).
  bool dropped_terms = false;
};

/// Dense phi_rho(x_i, y_k); analysis and test artifact only.
KernelMatrix kernel_phi_rho(const ModelSpec& model, const Field& rho);

/// w_rho(u) assembled from the momentum m = rho u through convolutions.
Field weighted_average(const ModelSpec& model, const Field& rho, const Field& m);

/// Mseg partition terms whose denominator vanished for this rho.
bool dropped_partition_terms(const ModelSpec& model, const Field& rho);

struct Average {
  Field values;
  /// Nodes where the strength is below the denominator floor.
  Mask unconstrained;
};

/// <u>_rho = w / max(s, eps).
Average average(const ModelSpec& model, const Field& rho, const Field& m);

struct Thickness {
  Field theta;
  double min = 0.0;
};

Thickness thickness(const PeriodicGrid& grid, const Field& rho, double r0);

MacroFields macro_fields(const ModelSpec& model, const Field& rho, const Field& m);

struct SchurConstants {
  double row = 0.0;     ///< max_x sum_y phi_rho(x,y) rho(y) dy
  double column = 0.0;  ///< max_y sum_x phi_rho(x,y) rho(x) dx
};

SchurConstants schur_constants(const ModelSpec& model, const Field& rho);

/// ||w||_{L2 rho} / (sqrt(Sr S) ||u||_{L2 rho}) on supp rho; 0 for zero momentum.
double energy_bound_check(const ModelSpec& model, const Field& rho, const Field& m);

/// 1 - sup of the kappa-weighted Rayleigh quotient of <.>_rho over rho-mean-zero
/// velocities, from a dense symmetric eigensolve. Throws std::domain_error when
/// fewer than two nodes carry kappa = s rho above the floor.
double spectral_gap(const ModelSpec& model, const Field& rho);

/// max_y |int phi_rho(x,y) rho(x) dx - s_rho(y)|.
double conservative_residual(const ModelSpec& model, const Field& rho);

/// max_x (sum_y phi_rho(x,y)^2 rho(y) dy)^{1/2}.
double l2_linf_constant(const ModelSpec& model, const Field& rho);

/// (u, <u>)_kappa and (u, u)_kappa for a velocity field u.
struct QuadraticForms {
  double cross = 0.0;
  double norm = 0.0;
};
QuadraticForms kappa_forms(const ModelSpec& model, const Field& rho, const Field& u);

/// max_x ((rho / (rho*phi)^{1-beta}) * phi)(x) / (rho*phi)^beta(x).
double kmt_ratio(const ModelSpec& model, const Field& rho, double beta);

/// int rho / theta(rho, .) dx over nodes with theta above the floor.
double covering_integral(const PeriodicGrid& grid, const Field& rho, double r0);

/// min over nodes with theta above the floor of s_rho / theta(rho, .), the
/// empirical constant c in s_rho >= c theta.
double strength_thickness_ratio(const ModelSpec& model, const Field& rho);

}  // namespace fpa
