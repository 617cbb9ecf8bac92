#include "fpa/grid.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/FFT>

namespace fpa {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Field PeriodicGrid::nodes() const {
  Field x(nx);
  for (int i = 0; i < nx; ++i) x[i] = node(i);
  return x;
}

double PeriodicGrid::distance(double x, double y) const {
  double d = std::fmod(std::abs(x - y), L);
  return std::min(d, L - d);
}

double PeriodicGrid::wrap(double x) const {
  double r = std::fmod(x, L);
  if (r < 0.0) r += L;
  if (r >= L) r -= L;
  return r;
}

Field VelocityGrid::nodes() const {
  Field v(nv);
  for (int j = 0; j < nv; ++j) v[j] = node(j);
  // exact mirror symmetry
  for (int j = 0; j < nv / 2; ++j) v[nv - 1 - j] = -v[j];
  if (nv % 2 == 1) v[nv / 2] = 0.0;
  return v;
}

Field VelocityGrid::weights() const {
  Field w = Field::Constant(nv, dv());
  w[0] *= 0.5;
  w[nv - 1] *= 0.5;
  return w;
}

double KineticState::mass() const {
  const Field w = vgrid.weights();
  return (f.matrix() * w.matrix()).sum() * xgrid.dx();
}

double maxwellian_tail_mass(double vmax, double sigma) {
  return std::erfc(vmax / std::sqrt(2.0 * sigma));
}

std::pair<PeriodicGrid, VelocityGrid> make_grids(double L, int nx, double vmax, int nv, double sigma) {
  if (!(L > 0.0)) throw std::invalid_argument("grid: L must be positive");
  if (nx < 8 || !is_power_of_two(nx))
    throw std::invalid_argument("grid: Nx must be a power of two >= 8, got " + std::to_string(nx));
  if (nv < 16) throw std::invalid_argument("grid: Nv must be >= 16, got " + std::to_string(nv));
  if (!(vmax > 0.0)) throw std::invalid_argument("grid: vmax must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("grid: sigma must be positive");
  const double tail = maxwellian_tail_mass(vmax, sigma);
  if (tail > 1e-10)
    throw std::invalid_argument("grid: vmax too small for sigma, Maxwellian tail mass " +
                                std::to_string(tail) + " > 1e-10");
  return {PeriodicGrid{L, nx}, VelocityGrid{vmax, nv}};
}

Field rescaled_mollifier(const PeriodicGrid& grid, double radius) {
  Field k(grid.nx);
  for (int i = 0; i < grid.nx; ++i) {
    const double d = grid.distance(grid.node(i), 0.0);
    k[i] = mollifier_chi(d / radius) / radius;
  }
  const double mass = k.sum() * grid.dx();
  if (!(mass > 0.0)) throw std::invalid_argument("mollifier radius below grid resolution");
  return k / mass;
}

PeriodicConvolver::PeriodicConvolver(const Field& kernel, double dx) : kernel_(kernel), dx_(dx) {
  Eigen::FFT<double> fft;
  std::vector<double> in(kernel.data(), kernel.data() + kernel.size());
  fft.fwd(spectrum_, in);
  for (auto& c : spectrum_) c *= dx;
}

Field PeriodicConvolver::apply(const Field& g) const {
  if (g.size() != kernel_.size())
    throw std::invalid_argument("periodic_convolve: length mismatch");
  Eigen::FFT<double> fft;
  std::vector<double> in(g.data(), g.data() + g.size());
  std::vector<std::complex<double>> gh;
  fft.fwd(gh, in);
  for (std::size_t k = 0; k < gh.size(); ++k) gh[k] *= spectrum_[k];
  std::vector<double> out;
  fft.inv(out, gh);
  return Eigen::Map<const Field>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Field periodic_convolve(const Field& g, const Field& kernel, double dx) {
  if (g.size() != kernel.size()) throw std::invalid_argument("periodic_convolve: length mismatch");
  return PeriodicConvolver(kernel, dx).apply(g);
}

double integrate_v(const VelocityGrid& vgrid, const Eigen::Ref<const Field>& row) {
  const double dv = vgrid.dv();
  return dv * (row.sum() - 0.5 * (row[0] + row[row.size() - 1]));
}

MacroMoments moments(const KineticState& state) {
  const Field w = state.vgrid.weights();
  const Field vw = w * state.vgrid.nodes();
  MacroMoments out;
  out.rho = (state.f.matrix() * w.matrix()).array();
  out.m = (state.f.matrix() * vw.matrix()).array();
  return out;
}

Field gaussian_profile(const VelocityGrid& vgrid, double sigma, double ubar) {
  const Field v = vgrid.nodes();
  return (-(v - ubar).square() / (2.0 * sigma)).exp() / std::sqrt(2.0 * std::numbers::pi * sigma);
}

KineticState global_maxwellian(const PeriodicGrid& xg, const VelocityGrid& vg, double sigma, double ubar,
                               double mass) {
  KineticState s(xg, vg);
  const Field g = gaussian_profile(vg, sigma, ubar) * (mass / xg.L);
  for (int i = 0; i < xg.nx; ++i) s.f.row(i) = g.transpose();
  return s;
}

}  // namespace fpa
