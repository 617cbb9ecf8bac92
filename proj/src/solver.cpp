#include "fpa/solver.hpp"

#include <cmath>
#include <sstream>

namespace fpa {

void transport_step(KineticState& state, double dt) {
  const auto& grid = state.xgrid;
  const int nx = grid.nx;
  const Field v = state.vgrid.nodes();
  Field row(nx);
  for (int j = 0; j < state.vgrid.nv; ++j) {
    const double shift = v[j] * dt / grid.dx();
    const double whole = std::floor(shift);
    const double a = shift - whole;
    const int k = static_cast<int>(std::fmod(whole, static_cast<double>(nx)));
    if (a == 0.0 && k == 0) continue;
    for (int i = 0; i < nx; ++i)
      row[i] = (1.0 - a) * state.f(grid.wrap(i - k), j) + a * state.f(grid.wrap(i - k - 1), j);
    state.f.col(j) = row;
  }
}

Field fp_velocity_step(const Field& column, double s, double ubar, double sigma, double dt,
                       const VelocityGrid& vgrid) {
  const int n = vgrid.nv;
  const double tau = s * dt;
  if (tau == 0.0) return column;
  const double h = vgrid.dv();
  const Field v = vgrid.nodes();
  const Field w = vgrid.weights();

  // F_{j+1/2} = up[j] g_{j+1} - down[j] g_j
  Field up(n - 1), down(n - 1);
  for (int j = 0; j + 1 < n; ++j) {
    const double drift = 0.5 * (v[j] + v[j + 1]) - ubar;
    if (sigma > 0.0) {
      const double z = drift * h / sigma;
      up[j] = sigma / h * bernoulli_weight(-z);
      down[j] = sigma / h * bernoulli_weight(z);
    } else {
      up[j] = std::max(drift, 0.0);
      down[j] = std::max(-drift, 0.0);
    }
  }

  Field lower = Field::Zero(n), diag(n), upper = Field::Zero(n);
  for (int j = 0; j < n; ++j) {
    diag[j] = w[j];
    if (j + 1 < n) {
      diag[j] += tau * down[j];
      upper[j] = -tau * up[j];
    }
    if (j > 0) {
      diag[j] += tau * up[j - 1];
      lower[j] = -tau * down[j - 1];
    }
  }
  Field rhs = w * column;
  solve_tridiagonal<double>(lower, diag, upper, rhs);
  return rhs;
}

namespace {

void check_finite(const KineticState& state) {
  if (state.f.allFinite()) return;
  std::ostringstream msg;
  msg << "non-finite density at t = " << state.t;
  for (int i = 0; i < state.f.rows(); ++i)
    for (int j = 0; j < state.f.cols(); ++j)
      if (!std::isfinite(state.f(i, j))) {
        msg << " (first at x index " << i << ", v index " << j << ")";
        throw SolverError(msg.str());
      }
  throw SolverError(msg.str());
}

// Velocity sweep over all columns with fixed s and <u>.
PhaseArray velocity_sweep(const KineticState& state, const Field& s, const Field& avg, double sigma,
                          double dt) {
  PhaseArray out(state.f.rows(), state.f.cols());
  for (int i = 0; i < state.f.rows(); ++i) {
    const Field column = state.f.row(i).transpose();
    out.row(i) = fp_velocity_step(column, s[i], avg[i], sigma, dt, state.vgrid).transpose();
  }
  return out;
}

}  // namespace

StepInfo step(KineticState& state, const ModelSpec& model, const SolverConfig& config) {
  const double dt = config.dt;
  const bool strang = config.splitting == Splitting::strang;
  transport_step(state, strang ? 0.5 * dt : dt);

  const MacroMoments mom = moments(state);
  StepInfo info;
  info.s = strength(model, mom.rho);
  const double smax = info.s.maxCoeff();
  if (dt * smax > 0.1 + 1e-12) {
    std::ostringstream msg;
    msg << "time step too large: dt * max s = " << dt * smax << " > 0.1";
    throw SolverError(msg.str());
  }
  info.avg = average(model, mom.rho, mom.m).values;

  PhaseArray next = velocity_sweep(state, info.s, info.avg, config.sigma, dt);
  info.alignment_iterations = 1;
  if (config.implicit_alignment) {
    const Field vw = state.vgrid.weights() * state.vgrid.nodes();
    for (int it = 1; it < config.max_alignment_iterations; ++it) {
      const Field m_next = (next.matrix() * vw.matrix()).array();
      Field avg_next = average(model, mom.rho, m_next).values;
      const double change = (avg_next - info.avg).abs().maxCoeff();
      const double scale = 1.0 + info.avg.abs().maxCoeff();
      if (change <= 1e-14 * scale) break;
      info.avg = std::move(avg_next);
      next = velocity_sweep(state, info.s, info.avg, config.sigma, dt);
      ++info.alignment_iterations;
    }
  }
  state.f = std::move(next);

  if (strang) transport_step(state, 0.5 * dt);
  state.t += dt;
  check_finite(state);
  return info;
}

RunResult run(const KineticState& initial, const ModelSpec& model, const SolverConfig& config,
              const SnapshotSink& sink) {
  RunResult result;
  result.final_state = initial;
  KineticState& state = result.final_state;
  const long steps = config.t_end > 0.0 ? std::lround(config.t_end / config.dt) : 0;
  const int series_every = std::max(config.series_every, 1);

  auto emit_snapshot = [&](const KineticState& s) {
    if (sink)
      sink(s);
    else
      result.snapshots.push_back(s);
  };

  const double t0 = initial.t;
  result.series.push_back(record(state, model, config.sigma, config.diagnostics));
  if (config.snapshot_every > 0) emit_snapshot(state);
  for (long n = 1; n <= steps; ++n) {
    step(state, model, config);
    state.t = t0 + n * config.dt;
    if (n % series_every == 0 || n == steps)
      result.series.push_back(record(state, model, config.sigma, config.diagnostics));
    if (config.snapshot_every > 0 && n % config.snapshot_every == 0) emit_snapshot(state);
  }
  balance_residuals(result.series);
  return result;
}

}  // namespace fpa
