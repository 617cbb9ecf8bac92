#include "fpa/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fpa {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::CS: return "CS";
    case ModelKind::MT: return "MT";
    case ModelKind::Mbeta: return "Mbeta";
    case ModelKind::Mphi: return "Mphi";
    case ModelKind::Mseg: return "Mseg";
  }
  return "?";
}

std::string_view to_string(KernelShape shape) {
  switch (shape) {
    case KernelShape::bump: return "bump";
    case KernelShape::bochner: return "bochner";
    case KernelShape::constant: return "constant";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::CS, ModelKind::MT, ModelKind::Mbeta, ModelKind::Mphi, ModelKind::Mseg})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

KernelShape parse_kernel_shape(std::string_view name) {
  for (auto k : {KernelShape::bump, KernelShape::bochner, KernelShape::constant})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown kernel shape '" + std::string(name) + "'");
}

double KernelSpec::value(const PeriodicGrid& grid, double offset) const {
  switch (shape) {
    case KernelShape::constant:
      return 1.0 / grid.L;
    case KernelShape::bump:
      return bump_scale * mollifier_chi(grid.distance(offset, 0.0) / radius);
    case KernelShape::bochner: {
      const double y = grid.wrap(offset) / grid.dx();
      const int i0 = static_cast<int>(std::floor(y));
      const double a = y - i0;
      return (1.0 - a) * samples[grid.wrap(i0)] + a * samples[grid.wrap(i0 + 1)];
    }
  }
  return 0.0;
}

KernelSpec make_kernel(KernelShape shape, double radius, const PeriodicGrid& grid, double r0) {
  KernelSpec k;
  k.shape = shape;
  k.radius = radius;
  const int n = grid.nx;
  const double dx = grid.dx();
  switch (shape) {
    case KernelShape::constant:
      k.samples = Field::Constant(n, 1.0 / grid.L);
      break;
    case KernelShape::bump: {
      if (!(radius > 0.0)) throw std::invalid_argument("kernel: bump radius must be positive");
      Field raw(n);
      for (int i = 0; i < n; ++i) raw[i] = mollifier_chi(grid.distance(grid.node(i), 0.0) / radius);
      const double mass = raw.sum() * dx;
      if (!(mass > 0.0)) throw std::invalid_argument("kernel: bump radius below grid resolution");
      k.bump_scale = 1.0 / mass;
      k.samples = raw * k.bump_scale;
      break;
    }
    case KernelShape::bochner: {
      if (!(radius > 0.0)) throw std::invalid_argument("kernel: bochner radius must be positive");
      const Field psi = rescaled_mollifier(grid, radius);
      // direct self-convolution keeps phi >= 0 exactly
      k.samples = Field::Zero(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) k.samples[i] += psi[j] * psi[grid.wrap(i - j)] * dx;
      break;
    }
  }
  for (int i = 1; i < n; ++i) k.samples[n - i] = k.samples[i] = 0.5 * (k.samples[i] + k.samples[n - i]);

  double c0 = k.samples.maxCoeff();
  for (int i = 0; i < n; ++i)
    if (grid.distance(grid.node(i), 0.0) < r0) c0 = std::min(c0, k.samples[i]);
  k.c0 = c0;
  return k;
}

std::vector<PartitionBump> default_partition(const PeriodicGrid& grid) {
  return {{0.25 * grid.L, 0.4 * grid.L}, {0.75 * grid.L, 0.4 * grid.L}};
}

std::vector<PartitionBump> full_support_partition(const PeriodicGrid& grid) {
  return {{0.25 * grid.L, 0.75 * grid.L}, {0.75 * grid.L, 0.75 * grid.L}};
}

ModelSpec make_model(const ModelOptions& options, const PeriodicGrid& grid) {
  ModelSpec model;
  model.kind = options.kind;
  model.grid = grid;
  model.beta = options.kind == ModelKind::Mbeta ? options.beta
               : options.kind == ModelKind::CS  ? 1.0
                                                : 0.0;
  if (options.kind == ModelKind::Mbeta && !(options.beta >= 0.0 && options.beta <= 1.0))
    throw std::invalid_argument("model: beta must lie in [0, 1]");
  model.r0 = options.r0 > 0.0 ? options.r0 : 0.175 * grid.L;
  if (!(model.r0 < 0.5 * grid.L)) throw std::invalid_argument("model: r0 must lie in (0, L/2)");
  double radius = options.kernel_radius;
  if (radius <= 0.0) radius = options.kernel == KernelShape::bochner ? 0.25 * grid.L : 0.35 * grid.L;
  model.kernel = make_kernel(options.kernel, radius, grid, model.r0);
  model.convolver = PeriodicConvolver(model.kernel.samples, grid.dx());

  if (options.kind == ModelKind::Mseg) {
    model.partition = options.partition.empty() ? default_partition(grid) : options.partition;
    std::vector<Field> bumps;
    Field total = Field::Zero(grid.nx);
    for (const auto& b : model.partition) {
      if (!(b.radius > 0.0)) throw std::invalid_argument("model: partition radius must be positive");
      Field g(grid.nx);
      for (int i = 0; i < grid.nx; ++i) g[i] = mollifier_chi(grid.distance(grid.node(i), b.center) / b.radius);
      total += g;
      bumps.push_back(std::move(g));
    }
    if (!(total.minCoeff() > 0.0)) throw std::invalid_argument("model: partition does not cover the torus");
    for (auto& g : bumps) model.partition_fields.push_back(g / total);
  }
  return model;
}

double denominator_floor(const PeriodicGrid& grid, const Field& rho) {
  const double mass = rho.sum() * grid.dx();
  return std::max(1e-12 * mass / grid.L, 1e-300);
}

namespace {

Field smoothed_density(const ModelSpec& model, const Field& rho) {
  return model.convolve(rho).max(0.0);
}

// Per-partition integrals int g_l h dx.
std::vector<double> partition_integrals(const ModelSpec& model, const Field& h) {
  std::vector<double> out;
  out.reserve(model.partition_fields.size());
  for (const auto& g : model.partition_fields) out.push_back((g * h).sum() * model.grid.dx());
  return out;
}

}  // namespace

Field strength(const ModelSpec& model, const Field& rho) {
  switch (model.kind) {
    case ModelKind::CS:
      return smoothed_density(model, rho);
    case ModelKind::Mbeta:
      return smoothed_density(model, rho).pow(model.beta);
    case ModelKind::MT:
    case ModelKind::Mphi:
    case ModelKind::Mseg:
      return Field::Ones(rho.size());
  }
  return {};
}

Field weighted_average(const ModelSpec& model, const Field& rho, const Field& m) {
  const double eps = denominator_floor(model.grid, rho);
  switch (model.kind) {
    case ModelKind::CS:
      return model.convolve(m);
    case ModelKind::MT:
      return model.convolve(m) / smoothed_density(model, rho).max(eps);
    case ModelKind::Mbeta:
      return model.convolve(m) / smoothed_density(model, rho).max(eps).pow(1.0 - model.beta);
    case ModelKind::Mphi:
      return model.convolve(model.convolve(m) / smoothed_density(model, rho).max(eps));
    case ModelKind::Mseg: {
      const auto num = partition_integrals(model, m);
      const auto den = partition_integrals(model, rho);
      Field w = Field::Zero(rho.size());
      for (std::size_t l = 0; l < den.size(); ++l)
        if (den[l] > eps) w += model.partition_fields[l] * (num[l] / den[l]);
      return w;
    }
  }
  return {};
}

bool dropped_partition_terms(const ModelSpec& model, const Field& rho) {
  if (model.kind != ModelKind::Mseg) return false;
  const double eps = denominator_floor(model.grid, rho);
  for (double d : partition_integrals(model, rho))
    if (!(d > eps)) return true;
  return false;
}

Average average(const ModelSpec& model, const Field& rho, const Field& m) {
  const double eps = denominator_floor(model.grid, rho);
  const Field s = strength(model, rho);
  Average out;
  out.values = weighted_average(model, rho, m) / s.max(eps);
  if (model.kind == ModelKind::Mseg) {
    const auto den = partition_integrals(model, rho);
    Field covered = Field::Zero(rho.size());
    for (std::size_t l = 0; l < den.size(); ++l)
      if (den[l] > eps) covered += model.partition_fields[l];
    out.unconstrained = covered < 1.0 - 1e-12;
  } else {
    out.unconstrained = smoothed_density(model, rho) < eps;
  }
  return out;
}

Thickness thickness(const PeriodicGrid& grid, const Field& rho, double r0) {
  if (!(r0 > 0.0 && r0 < 0.5 * grid.L)) throw std::invalid_argument("thickness: r0 must lie in (0, L/2)");
  const Field chi = rescaled_mollifier(grid, r0);
  const int n = grid.nx;
  std::vector<int> support;
  for (int k = 0; k < n; ++k)
    if (chi[k] > 0.0) support.push_back(k);
  Thickness out;
  out.theta = Field::Zero(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k : support) acc += rho[grid.wrap(i - k)] * chi[k];
    out.theta[i] = acc * grid.dx();
  }
  out.min = out.theta.minCoeff();
  return out;
}

MacroFields macro_fields(const ModelSpec& model, const Field& rho, const Field& m) {
  MacroFields f;
  f.rho = rho;
  f.m = m;
  f.s = strength(model, rho);
  f.w = weighted_average(model, rho, m);
  auto avg = average(model, rho, m);
  f.avg = std::move(avg.values);
  f.unconstrained = std::move(avg.unconstrained);
  auto th = thickness(model.grid, rho, model.r0);
  f.theta = std::move(th.theta);
  f.theta_min = th.min;
  return f;
}

KernelMatrix kernel_phi_rho(const ModelSpec& model, const Field& rho) {
  const PeriodicGrid& grid = model.grid;
  const int n = grid.nx;
  const double dx = grid.dx();
  const double eps = denominator_floor(grid, rho);
  const Field& phi = model.kernel.samples;
  auto kern = [&](int i, int k) { return phi[grid.wrap(i - k)]; };

  // rho*phi by direct summation, independent of the FFT path
  Field smooth = Field::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) smooth[i] += kern(i, k) * rho[k] * dx;
  smooth = smooth.max(0.0);

  KernelMatrix out;
  out.values.resize(n, n);
  switch (model.kind) {
    case ModelKind::CS:
    case ModelKind::MT:
    case ModelKind::Mbeta: {
      const double power = model.kind == ModelKind::CS ? 0.0 : 1.0 - model.beta;
      for (int i = 0; i < n; ++i) {
        const double den = model.kind == ModelKind::CS ? 1.0 : std::pow(std::max(smooth[i], eps), power);
        for (int k = 0; k < n; ++k) out.values(i, k) = kern(i, k) / den;
      }
      break;
    }
    case ModelKind::Mphi: {
      Matrix left(n, n);
      for (int i = 0; i < n; ++i)
        for (int z = 0; z < n; ++z) left(i, z) = kern(i, z) * dx / std::max(smooth[z], eps);
      Matrix right(n, n);
      for (int z = 0; z < n; ++z)
        for (int k = 0; k < n; ++k) right(z, k) = kern(k, z);
      out.values = left * right;
      break;
    }
    case ModelKind::Mseg: {
      out.values.setZero();
      for (const auto& g : model.partition_fields) {
        const double den = (g * rho).sum() * dx;
        if (!(den > eps)) {
          out.dropped_terms = true;
          continue;
        }
        out.values += (g.matrix() * g.matrix().transpose()) / den;
      }
      break;
    }
  }
  return out;
}

SchurConstants schur_constants(const ModelSpec& model, const Field& rho) {
  const Matrix phi = kernel_phi_rho(model, rho).values;
  const double dx = model.grid.dx();
  const Vector r = rho.matrix();
  SchurConstants c;
  c.row = (phi * r).maxCoeff() * dx;
  c.column = (phi.transpose() * r).maxCoeff() * dx;
  return c;
}

double energy_bound_check(const ModelSpec& model, const Field& rho, const Field& m) {
  const double eps = denominator_floor(model.grid, rho);
  const Field w = weighted_average(model, rho, m);
  double wnorm = 0.0, unorm = 0.0;
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > eps)) continue;
    wnorm += w[i] * w[i] * rho[i];
    unorm += m[i] * m[i] / rho[i];
  }
  if (unorm == 0.0) return 0.0;
  const auto c = schur_constants(model, rho);
  return std::sqrt(wnorm / unorm / (c.row * c.column));
}

double spectral_gap(const ModelSpec& model, const Field& rho) {
  const double dx = model.grid.dx();
  const double eps = denominator_floor(model.grid, rho);
  const Field kappa = strength(model, rho) * rho;
  std::vector<int> nodes;
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    if (kappa[i] > eps) nodes.push_back(static_cast<int>(i));
  const int n = static_cast<int>(nodes.size());
  if (n < 2) throw std::domain_error("spectral_gap: kappa_rho supported on fewer than two nodes");

  const Matrix phi = kernel_phi_rho(model, rho).values;
  Matrix form(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) form(a, b) = rho[nodes[a]] * phi(nodes[a], nodes[b]) * rho[nodes[b]] * dx * dx;
  form = 0.5 * (form + form.transpose()).eval();

  Vector inv_sqrt_k(n), constraint(n);
  for (int a = 0; a < n; ++a) {
    inv_sqrt_k[a] = 1.0 / std::sqrt(kappa[nodes[a]] * dx);
    constraint[a] = rho[nodes[a]] * dx * inv_sqrt_k[a];
  }
  const Matrix scaled = inv_sqrt_k.asDiagonal() * form * inv_sqrt_k.asDiagonal();
  constraint.normalize();
  const Eigen::HouseholderQR<Matrix> qr(constraint);
  const Matrix q = qr.householderQ();
  const Matrix basis = q.rightCols(n - 1);
  const Matrix reduced = basis.transpose() * scaled * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced, Eigen::EigenvaluesOnly);
  return 1.0 - eig.eigenvalues().maxCoeff();
}

double conservative_residual(const ModelSpec& model, const Field& rho) {
  const Matrix phi = kernel_phi_rho(model, rho).values;
  const Vector column = phi.transpose() * rho.matrix() * model.grid.dx();
  return (column.array() - strength(model, rho)).abs().maxCoeff();
}

double l2_linf_constant(const ModelSpec& model, const Field& rho) {
  const Matrix phi = kernel_phi_rho(model, rho).values;
  const Vector rows = phi.array().square().matrix() * rho.matrix() * model.grid.dx();
  return std::sqrt(rows.maxCoeff());
}

QuadraticForms kappa_forms(const ModelSpec& model, const Field& rho, const Field& u) {
  const double dx = model.grid.dx();
  const Field m = u * rho;
  const Field kappa = strength(model, rho) * rho;
  const Field avg = average(model, rho, m).values;
  return {(kappa * u * avg).sum() * dx, (kappa * u * u).sum() * dx};
}

double kmt_ratio(const ModelSpec& model, const Field& rho, double beta) {
  const double eps = denominator_floor(model.grid, rho);
  const Field smooth = smoothed_density(model, rho).max(eps);
  const Field lhs = model.convolve(rho / smooth.pow(1.0 - beta));
  return (lhs / smooth.pow(beta)).maxCoeff();
}

double covering_integral(const PeriodicGrid& grid, const Field& rho, double r0) {
  const double eps = denominator_floor(grid, rho);
  const Field theta = thickness(grid, rho, r0).theta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    if (theta[i] > eps) acc += rho[i] / theta[i];
  return acc * grid.dx();
}

double strength_thickness_ratio(const ModelSpec& model, const Field& rho) {
  const double eps = denominator_floor(model.grid, rho);
  const Field theta = thickness(model.grid, rho, model.r0).theta;
  const Field s = strength(model, rho);
  double c = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    if (theta[i] > eps) c = std::min(c, s[i] / theta[i]);
  return c;
}

}  // namespace fpa
