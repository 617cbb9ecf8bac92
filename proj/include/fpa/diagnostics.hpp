#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fpa/grid.hpp"
#include "fpa/models.hpp"

namespace fpa {

/// Cells with f at or below this value are treated as vacuum by the
/// entropy and Fisher integrands.
inline constexpr double kVacuumFloor = 1e-30;

struct DiagnosticsOptions {
  /// Weight exponent q of the h^{k,l}_{q-2k-l} seminorms.
  double seminorm_q = 4.0;
};

/// One row of tracked functionals.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double momentum = 0.0;
  double energy = 0.0;           ///< E = 1/2 int |v|^2 f
  double entropy_b = 0.0;        ///< H_B = int f log f
  double entropy = 0.0;          ///< H = H_B + E
  double entropy_sigma = 0.0;    ///< H_sigma = sigma H_B + E
  double fisher_vv = 0.0;
  double fisher_xx = 0.0;
  double theta_min = 0.0;
  double dist_maxwellian = 0.0;
  double m2 = 0.0, m4 = 0.0, m8 = 0.0;
  double dissipation = 0.0;      ///< int s |sigma grad_v f + v f|^2 / f
  double alignment_term = 0.0;   ///< (w_rho(u), u)_rho
  double energy_source = 0.0;    ///< right-hand side of the energy law
  double entropy_residual = 0.0;
  double energy_residual = 0.0;
  double h00 = 0.0, h01 = 0.0, h02 = 0.0, h10 = 0.0;
  double min_f = 0.0;
  double relative_entropy = 0.0;  ///< KL(f | mu_{sigma, ubar(t)})
};

/// int f log f with 0 log 0 = 0.
double entropy(const KineticState& state);

/// Kinetic energy 1/2 int |v|^2 f.
double kinetic_energy(const KineticState& state);

/// Total momentum int v f.
double total_momentum(const KineticState& state);

/// int |sigma grad_v f + v f|^2 / f, via central differences of log f.
double fisher_vv(const KineticState& state, double sigma);

/// sigma int |grad_x f|^2 / f.
double fisher_xx(const KineticState& state, double sigma);

/// int s_rho(x) |sigma grad_v f + v f|^2 / f.
double dissipation(const KineticState& state, const Field& s, double sigma);

/// Maxwellian mu_{sigma, ubar(t)} with the state's mass and mean velocity.
KineticState matching_maxwellian(const KineticState& state, double sigma);

/// || f - mu_{sigma, ubar(t)} ||_1.
double dist_to_maxwellian(const KineticState& state, double sigma);

/// KL(f | mu_{sigma, ubar(t)}).
double relative_entropy_to_maxwellian(const KineticState& state, double sigma);

struct RateFit {
  double rate = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Least-squares slope of log y against t on [t_min, t_max]; rate = -slope.
/// Throws std::invalid_argument for fewer than 10 points or y <= 0 in the window.
RateFit rate_fit(const std::vector<double>& t, const std::vector<double>& y, double t_min, double t_max);

struct TailFit {
  bool success = false;
  double a = 0.0;
  double b = 0.0;
  double min_margin = 0.0;
};

/// Lower Gaussian bound f >= b exp(-a v^2) on |v| <= v_fit from the x-minimum
/// profile; a from a least-squares fit of its logarithm, b the fitted intercept
/// capped at the largest value the data admits for that a.
TailFit gaussian_tail_fit(const KineticState& state, double v_fit);

/// <v>^q <v/R>^{-(q+3)}.
double tapered_weight(double v, double q, double R);

/// int omega_{q,R} f.
double tapered_moment(const KineticState& state, double q, double R);

/// int <v>^q f.
double velocity_moment(const KineticState& state, double q);

/// int <v>^{q-2k-l} |d_x^k d_v^l f|^2 for 2k + l <= 2.
double sobolev_seminorm(const KineticState& state, int k, int l, double q);

DiagnosticsRecord record(const KineticState& state, const ModelSpec& model, double sigma,
                         const DiagnosticsOptions& options = {});

/// Fills entropy_residual and energy_residual by trapezoid time integration:
///   H_sigma(t) - H_sigma(0) + int D - int A,
///   E(t) - E(0) - int energy_source.
void balance_residuals(std::vector<DiagnosticsRecord>& series);

inline constexpr const char* kSeriesSchema = "fpa-series/1";

/// Documented column order of the time-series CSV.
const std::vector<std::string>& series_columns();

void write_series_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& series);

}  // namespace fpa
