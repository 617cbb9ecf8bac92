#include "fpa/particles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace fpa {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t step, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ step) ^ index);
}

// Streams reserved for initial sampling, disjoint from the per-step noise.
constexpr std::uint64_t kSamplingStream = 0x8000000000000000ULL;

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("FPA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double counter_uniform(std::uint64_t seed, std::uint64_t step, std::uint64_t index) {
  // 53 random bits in (0, 1)
  return (static_cast<double>(counter_hash(seed, step, index) >> 11) + 0.5) * 0x1.0p-53;
}

double counter_normal(std::uint64_t seed, std::uint64_t step, std::uint64_t index) {
  const double u1 = counter_uniform(seed, step, 2 * index);
  const double u2 = counter_uniform(seed, step, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

KernelTable::KernelTable(const KernelSpec& kernel, const PeriodicGrid& grid, int samples)
    : table_(static_cast<std::size_t>(samples) + 2), L_(grid.L), scale_(samples / (0.5 * grid.L)) {
  for (int k = 0; k <= samples + 1; ++k) table_[k] = kernel.value(grid, std::min(k / scale_, 0.5 * grid.L));
  int last = samples + 1;
  while (last > 0 && table_[last] == 0.0) --last;
  support_ = std::min((last + 1) / scale_, 0.5 * grid.L);
}

double KernelTable::at_distance(double d) const {
  const double y = d * scale_;
  const auto k = static_cast<std::size_t>(y);
  const double a = y - static_cast<double>(k);
  return (1.0 - a) * table_[k] + a * table_[k + 1];
}

double KernelTable::operator()(double xi, double xj) const {
  double d = std::abs(xi - xj);
  d = std::min(d, L_ - d);
  return at_distance(d);
}

double interpolate(const PeriodicGrid& grid, const Field& field, double x) {
  const double y = grid.wrap(x) / grid.dx();
  const int i = std::min(static_cast<int>(y), grid.nx - 1);
  const double a = y - i;
  return (1.0 - a) * field[i] + a * field[grid.wrap(i + 1)];
}

MacroMoments empirical_macro(const ParticleEnsemble& ens, const PeriodicGrid& grid) {
  MacroMoments out{Field::Zero(grid.nx), Field::Zero(grid.nx)};
  const double inv_dx = 1.0 / grid.dx();
  for (int p = 0; p < ens.size(); ++p) {
    const double y = grid.wrap(ens.x[p]) * inv_dx;
    const int i = std::min(static_cast<int>(y), grid.nx - 1);
    const double a = y - i;
    const int k = grid.wrap(i + 1);
    const double mp = ens.mass[p] * inv_dx;
    out.rho[i] += (1.0 - a) * mp;
    out.rho[k] += a * mp;
    out.m[i] += (1.0 - a) * mp * ens.v[p];
    out.m[k] += a * mp * ens.v[p];
  }
  return out;
}

AlignmentField empirical_alignment(const ParticleEnsemble& ens, const ModelSpec& model, const KernelTable& table) {
  const int n = ens.size();
  AlignmentField field{Field::Zero(n), Field::Zero(n)};
  if (model.kind == ModelKind::Mphi || model.kind == ModelKind::Mseg) {
    const MacroMoments mac = empirical_macro(ens, model.grid);
    const Field s = strength(model, mac.rho);
    const Field avg = average(model, mac.rho, mac.m).values;
    for (int i = 0; i < n; ++i) {
      field.s[i] = interpolate(model.grid, s, ens.x[i]);
      field.drift[i] = field.s[i] * (interpolate(model.grid, avg, ens.x[i]) - ens.v[i]);
    }
    return field;
  }

  // Pair sums over x-sorted agents; only pairs closer than the kernel support
  // are visited: j in (i, a) directly and j in [b, n) across the periodic seam.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ens.x[a] < ens.x[b]; });
  Field x(n), v(n), m(n);
  for (int k = 0; k < n; ++k) {
    x[k] = ens.x[order[k]];
    v[k] = ens.v[order[k]];
    m[k] = ens.mass[order[k]];
  }
  Field dens = Field::Zero(n), exch = Field::Zero(n);
  const double self = table.at_distance(0.0);
  const double L = ens.L, r = table.support();
  const int workers = std::min(worker_count(), std::max(1, n / 256));
  if (workers == 1) {
    int a = 0, b = 0;
    for (int i = 0; i < n; ++i) {
      a = std::max(a, i + 1);
      while (a < n && x[a] - x[i] < r) ++a;
      b = std::max(b, a);
      while (b < n && x[b] < x[i] + L - r) ++b;
      double di = m[i] * self, ei = 0.0;
      auto visit = [&](int j) {
        const double d = x[j] - x[i];
        const double phi = table.at_distance(std::min(d, L - d));
        const double dv = v[j] - v[i];
        di += m[j] * phi;
        ei += m[j] * phi * dv;
        dens[j] += m[i] * phi;
        exch[j] -= m[i] * phi * dv;
      };
      for (int j = i + 1; j < a; ++j) visit(j);
      for (int j = b; j < n; ++j) visit(j);
      dens[i] += di;
      exch[i] += ei;
    }
  } else {
    // each worker owns a block of agents and visits all their neighbours
    auto block = [&](int lo, int hi) {
      for (int i = lo; i < hi; ++i) {
        double di = 0.0, ei = 0.0;
        for (int j = 0; j < n; ++j) {
          double d = std::abs(x[j] - x[i]);
          d = std::min(d, L - d);
          if (d >= r) continue;
          const double phi = table.at_distance(d);
          di += m[j] * phi;
          ei += m[j] * phi * (v[j] - v[i]);
        }
        dens[i] = di;
        exch[i] = ei;
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(block, n * w / workers, n * (w + 1) / workers);
    for (auto& t : pool) t.join();
  }
  Field sorted_dens = dens, sorted_exch = exch;
  for (int k = 0; k < n; ++k) {
    dens[order[k]] = sorted_dens[k];
    exch[order[k]] = sorted_exch[k];
  }
  const double eps = 1e-300;
  switch (model.kind) {
    case ModelKind::CS:
      field.s = dens;
      field.drift = exch;
      break;
    case ModelKind::MT:
      field.s.setOnes();
      field.drift = exch / dens.max(eps);
      break;
    case ModelKind::Mbeta:
      field.s = dens.pow(model.beta);
      field.drift = exch / dens.max(eps).pow(1.0 - model.beta);
      break;
    default:
      break;
  }
  return field;
}

void em_step(ParticleEnsemble& ens, const AlignmentField& field, double sigma, double dt) {
  const int n = ens.size();
  for (int i = 0; i < n; ++i) {
    const double noise = sigma > 0.0 ? std::sqrt(2.0 * sigma * field.s[i] * dt) *
                                           counter_normal(ens.seed, ens.step, static_cast<std::uint64_t>(i))
                                     : 0.0;
    double x = ens.x[i] + ens.v[i] * dt;
    x = std::fmod(x, ens.L);
    if (x < 0.0) x += ens.L;
    if (x >= ens.L) x -= ens.L;
    ens.x[i] = x;
    ens.v[i] += field.drift[i] * dt + noise;
  }
  ++ens.step;
}

void em_step(ParticleEnsemble& ens, const ModelSpec& model, const KernelTable& table, double sigma, double dt) {
  const AlignmentField field = empirical_alignment(ens, model, table);
  if (!(dt * field.s.maxCoeff() < 1.0)) throw std::invalid_argument("em_step: dt * max s must be < 1");
  em_step(ens, field, sigma, dt);
}

ParticleEnsemble sample_ensemble(const KineticState& state, int n, std::uint64_t seed) {
  const int nx = state.xgrid.nx, nv = state.vgrid.nv;
  const Field w = state.vgrid.weights();
  std::vector<double> cdf(static_cast<std::size_t>(nx) * nv);
  double acc = 0.0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nv; ++j) cdf[static_cast<std::size_t>(i) * nv + j] = acc += state.f(i, j) * w[j];
  if (!(acc > 0.0)) throw std::invalid_argument("sample_ensemble: empty density");

  ParticleEnsemble ens;
  ens.L = state.xgrid.L;
  ens.seed = seed;
  ens.x.resize(n);
  ens.v.resize(n);
  ens.mass = Field::Constant(n, 1.0 / n);
  const double dx = state.xgrid.dx(), dv = state.vgrid.dv(), vmax = state.vgrid.vmax;
  for (int p = 0; p < n; ++p) {
    const auto k = static_cast<std::uint64_t>(p);
    const double u = counter_uniform(seed, kSamplingStream, 3 * k) * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const auto cell = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
    const int i = cell / nv, j = cell % nv;
    ens.x[p] = state.xgrid.wrap(state.xgrid.node(i) + (counter_uniform(seed, kSamplingStream, 3 * k + 1) - 0.5) * dx);
    const double vj = state.vgrid.node(j) + (counter_uniform(seed, kSamplingStream, 3 * k + 2) - 0.5) * dv;
    ens.v[p] = std::clamp(vj, -vmax, vmax);
  }
  return ens;
}

EnsembleStats ensemble_stats(const ParticleEnsemble& ens, double t) {
  EnsembleStats s;
  s.t = t;
  const double total = ens.mass.sum();
  s.mean_velocity = ens.momentum() / total;
  s.velocity_variance = (ens.mass * (ens.v - s.mean_velocity).square()).sum() / total;
  s.max_deviation = (ens.v - s.mean_velocity).abs().maxCoeff();
  s.energy = 0.5 * (ens.mass * ens.v.square()).sum();
  return s;
}

ParticleRunResult run_particles(ParticleEnsemble ens, const ModelSpec& model, const ParticleRunConfig& config) {
  const KernelTable table(model.kernel, model.grid);
  ParticleRunResult result;
  const long steps = config.t_end > 0.0 ? std::lround(config.t_end / config.dt) : 0;
  const int every = std::max(config.stats_every, 1);
  result.stats.push_back(ensemble_stats(ens, 0.0));
  for (long n = 1; n <= steps; ++n) {
    em_step(ens, model, table, config.sigma, config.dt);
    if (n % every == 0 || n == steps) result.stats.push_back(ensemble_stats(ens, n * config.dt));
  }
  result.final_ensemble = std::move(ens);
  return result;
}

LockedStateReport locked_state_demo(const LockedStateConfig& c) {
  // two unit-half-mass agents on T^2 with a radial bump kernel of radius r1
  using Vec2 = std::array<double, 2>;
  std::array<Vec2, 2> x{Vec2{0.0, 0.25 * c.L}, Vec2{0.5 * c.L, 0.25 * c.L + c.separation}};
  std::array<Vec2, 2> v{Vec2{c.v_a, 0.0}, Vec2{c.v_b, 0.0}};
  const double m = 0.5;
  auto wrapped = [&](double d) {
    d = std::fmod(std::abs(d), c.L);
    return std::min(d, c.L - d);
  };
  auto phi = [&](const Vec2& a, const Vec2& b) {
    const double dx = wrapped(a[0] - b[0]), dy = wrapped(a[1] - b[1]);
    return mollifier_chi(std::sqrt(dx * dx + dy * dy) / c.r1);
  };
  auto gap = [&] { return std::hypot(v[0][0] - v[1][0], v[0][1] - v[1][1]); };

  LockedStateReport report;
  report.initial_gap = gap();
  const double self = mollifier_chi(0.0);
  const long steps = std::lround(c.t_end / c.dt);
  for (long n = 1; n <= steps; ++n) {
    const double p = phi(x[0], x[1]);
    if (p > 0.0) report.interacted = true;
    std::array<Vec2, 2> force{};
    std::array<double, 2> s{};
    for (int a = 0; a < 2; ++a) {
      s[a] = m * self + m * p;
      for (int d = 0; d < 2; ++d) force[a][d] = m * p * (v[1 - a][d] - v[a][d]);
    }
    for (int a = 0; a < 2; ++a)
      for (int d = 0; d < 2; ++d) {
        x[a][d] = std::fmod(x[a][d] + v[a][d] * c.dt + c.L, c.L);
        const double noise = c.sigma > 0.0
                                 ? std::sqrt(2.0 * c.sigma * s[a] * c.dt) *
                                       counter_normal(c.seed, static_cast<std::uint64_t>(n), 2 * a + d)
                                 : 0.0;
        v[a][d] += force[a][d] * c.dt + noise;
      }
    const double g = gap();
    report.max_gap_drift = std::max(report.max_gap_drift, std::abs(g - report.initial_gap));
    if (report.hit_time < 0.0 && g < c.gap_threshold) report.hit_time = n * c.dt;
  }
  report.final_gap = gap();
  return report;
}

}  // namespace fpa
