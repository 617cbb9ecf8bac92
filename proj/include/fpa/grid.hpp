#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "fpa/types.hpp"

namespace fpa {

/// Uniform periodic grid on the torus [0, L) with nodes x_i = i*dx.
struct PeriodicGrid {
  double L = 1.0;
  int nx = 64;

  double dx() const { return L / nx; }
  double node(int i) const { return i * dx(); }
  Field nodes() const;
  /// Periodic distance |x - y| on the torus, in [0, L/2].
  double distance(double x, double y) const;
  int wrap(int i) const { return ((i % nx) + nx) % nx; }
  double wrap(double x) const;
};

/// Symmetric truncated velocity grid v_j = -vmax + j*dv, j = 0..nv-1.
struct VelocityGrid {
  double vmax = 8.0;
  int nv = 257;

  double dv() const { return 2.0 * vmax / (nv - 1); }
  double node(int j) const { return -vmax + j * dv(); }
  Field nodes() const;
  /// Trapezoid weights (dv inside, dv/2 at the two end nodes).
  Field weights() const;
};

/// Phase-space density on a PeriodicGrid x VelocityGrid, plus the clock.
struct KineticState {
  PeriodicGrid xgrid;
  VelocityGrid vgrid;
  PhaseArray f;
  double t = 0.0;

  KineticState() = default;
  KineticState(const PeriodicGrid& xg, const VelocityGrid& vg)
      : xgrid(xg), vgrid(vg), f(PhaseArray::Zero(xg.nx, vg.nv)) {}

  /// Midpoint in x, trapezoid in v.
  double mass() const;
};

struct MacroMoments {
  Field rho;
  Field m;
};

/// P(|V| > vmax) for V ~ N(0, sigma).
double maxwellian_tail_mass(double vmax, double sigma);

/// Validated grid pair; throws std::invalid_argument on a bad size or when the
/// Maxwellian tail mass beyond vmax exceeds 1e-10.
std::pair<PeriodicGrid, VelocityGrid> make_grids(double L, int nx, double vmax, int nv, double sigma);

/// Unit-mass bump c*exp(-1/(1-y^2)) supported on [-1, 1].
template <typename Scalar>
Scalar mollifier_chi(Scalar y) {
  // 1 / int_{-1}^{1} exp(-1/(1-y^2)) dy
  constexpr Scalar kNorm = Scalar(1) / Scalar(0.443993816168079437823);
  const Scalar y2 = y * y;
  if (y2 >= Scalar(1)) return Scalar(0);
  return kNorm * std::exp(-Scalar(1) / (Scalar(1) - y2));
}

/// Samples of the mollifier rescaled to radius r, chi(d/r)/r, at periodic offsets
/// of the grid nodes, renormalized to unit discrete mass (sum * dx = 1).
Field rescaled_mollifier(const PeriodicGrid& grid, double radius);

/// Periodic convolution (g*phi)(x_i) = sum_k g_k phi(x_i - x_k) dx through a
/// cached real FFT of the kernel samples.
class PeriodicConvolver {
 public:
  PeriodicConvolver() = default;
  PeriodicConvolver(const Field& kernel, double dx);

  Field apply(const Field& g) const;
  int size() const { return static_cast<int>(kernel_.size()); }
  const Field& kernel() const { return kernel_; }
  /// Discrete Fourier coefficients sum_i phi_i dx e^{-2 pi i k j / N}.
  const std::vector<std::complex<double>>& spectrum() const { return spectrum_; }

 private:
  Field kernel_;
  double dx_ = 0.0;
  std::vector<std::complex<double>> spectrum_;
};

/// One-shot periodic convolution; throws std::invalid_argument on length mismatch.
Field periodic_convolve(const Field& g, const Field& kernel, double dx);

/// rho = int f dv, m = int v f dv (trapezoid).
MacroMoments moments(const KineticState& state);

/// Trapezoid velocity integral of one row.
double integrate_v(const VelocityGrid& vgrid, const Eigen::Ref<const Field>& row);

/// Gaussian exp(-(v-ubar)^2/(2 sigma)) / sqrt(2 pi sigma) sampled on the grid.
Field gaussian_profile(const VelocityGrid& vgrid, double sigma, double ubar);

/// Global Maxwellian mu_{sigma,ubar} scaled to total mass `mass`.
KineticState global_maxwellian(const PeriodicGrid& xg, const VelocityGrid& vg, double sigma,
                               double ubar, double mass = 1.0);

}  // namespace fpa
