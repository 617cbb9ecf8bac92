#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpa/diagnostics.hpp"
#include "fpa/grid.hpp"
#include "fpa/models.hpp"

namespace fpa {

enum class Splitting { strang, lie };

struct SolverConfig {
  double sigma = 1.0;
  double dt = 1e-3;
  double t_end = 5.0;
  Splitting splitting = Splitting::strang;
  /// Re-evaluate <u>_rho from the post-step momentum until it is self-consistent
  /// (backward Euler in the alignment); false freezes it at the pre-step state.
  bool implicit_alignment = true;
  int max_alignment_iterations = 12;
  /// 0 disables snapshots.
  int snapshot_every = 0;
  int series_every = 1;
  DiagnosticsOptions diagnostics;
};

/// Raised when a step produces non-finite values.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scharfetter-Gummel / Chang-Cooper weight z / (e^z - 1).
template <typename Scalar>
Scalar bernoulli_weight(Scalar z) {
  if (std::abs(z) < Scalar(1e-8)) return Scalar(1) - z / Scalar(2);
  return z / std::expm1(z);
}

/// Solves a tridiagonal system in place (Thomas algorithm, no pivoting).
/// lower[0] and upper[n-1] are ignored. Intended for M-matrices, where every
/// intermediate quantity stays nonnegative for a nonnegative right-hand side.
template <typename Scalar>
void solve_tridiagonal(const FieldT<Scalar>& lower, FieldT<Scalar> diag, const FieldT<Scalar>& upper,
                       FieldT<Scalar>& rhs) {
  const Eigen::Index n = diag.size();
  FieldT<Scalar> c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar denom = i == 0 ? diag[0] : diag[i] - lower[i] * c[i - 1];
    if (!(denom > Scalar(0))) throw SolverError("tridiagonal solve: non-positive pivot");
    c[i] = i + 1 < n ? upper[i] / denom : Scalar(0);
    rhs[i] = (i == 0 ? rhs[0] : rhs[i] - lower[i] * rhs[i - 1]) / denom;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) rhs[i] -= c[i] * rhs[i + 1];
}

/// Free transport over dt: each velocity row shifted by v_j dt with periodic
/// linear interpolation.
void transport_step(KineticState& state, double dt);

/// One implicit Chang-Cooper step of g_t = s [sigma g_vv + ((v - ubar) g)_v] with
/// no-flux ends, conserving the trapezoid mass of the column.
Field fp_velocity_step(const Field& column, double s, double ubar, double sigma, double dt,
                       const VelocityGrid& vgrid);

/// Coefficients (s, <u>) used by the last velocity sweep, plus iteration count.
struct StepInfo {
  Field s;
  Field avg;
  int alignment_iterations = 0;
};

/// Strang (or Lie) step: transport, velocity Fokker-Planck with alignment, transport.
StepInfo step(KineticState& state, const ModelSpec& model, const SolverConfig& config);

struct RunResult {
  KineticState final_state;
  std::vector<DiagnosticsRecord> series;
  std::vector<KineticState> snapshots;
};

using SnapshotSink = std::function<void(const KineticState&)>;

/// Steps to t_end; diagnostics every series_every steps (plus t = 0 and the
/// final state) and snapshots every snapshot_every steps. Balance residuals are
/// filled in on the returned series.
RunResult run(const KineticState& initial, const ModelSpec& model, const SolverConfig& config,
              const SnapshotSink& sink = {});

}  // namespace fpa
