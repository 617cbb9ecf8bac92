#pragma once

#include <cstdint>
#include <vector>

#include "fpa/grid.hpp"
#include "fpa/models.hpp"

namespace fpa {

/// N weighted agents on the torus with a counter-based noise stream.
struct ParticleEnsemble {
  double L = 1.0;
  Field x;
  Field v;
  Field mass;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;

  int size() const { return static_cast<int>(x.size()); }
  double momentum() const { return (mass * v).sum(); }
  double mean_velocity() const { return momentum() / mass.sum(); }
};

/// Stateless normal variates keyed by (seed, step, index); reproducible
/// regardless of evaluation order.
double counter_normal(std::uint64_t seed, std::uint64_t step, std::uint64_t index);
double counter_uniform(std::uint64_t seed, std::uint64_t step, std::uint64_t index);

/// Kernel phi tabulated on periodic distances [0, L/2] for pair sums.
class KernelTable {
 public:
  KernelTable() = default;
  KernelTable(const KernelSpec& kernel, const PeriodicGrid& grid, int samples = 1 << 14);
  /// phi at the periodic distance of two positions, symmetric in its arguments.
  double operator()(double xi, double xj) const;
  double at_distance(double d) const;
  /// Smallest distance beyond which phi vanishes (L/2 for kernels of full support).
  double support() const { return support_; }

 private:
  std::vector<double> table_;
  double support_ = 0.0;
  double L_ = 1.0;
  double scale_ = 0.0;
};

/// Worker threads for pair sums: FPA_THREADS if set and positive, otherwise the
/// hardware concurrency (FPA_THREADS=0 or unset).
int worker_count();

/// Strength s_i and alignment drift s_i (<v>_i - v_i) per agent.
struct AlignmentField {
  Field s;
  Field drift;
};

/// Empirical alignment. CS/MT/Mbeta use direct pair sums
/// sum_j m_j phi_ij (v_j - v_i); Mphi and Mseg go through the grid: deposit,
/// apply the model, interpolate <u> back to the agents. With more than one worker
/// the pair sums are split over agents; results then agree with the serial
/// path to rounding.
AlignmentField empirical_alignment(const ParticleEnsemble& ens, const ModelSpec& model, const KernelTable& table);

/// Euler-Maruyama update with a precomputed alignment field:
/// x += v dt; v += drift dt + sqrt(2 sigma s dt) xi. Positions wrap onto [0, L).
void em_step(ParticleEnsemble& ens, const AlignmentField& field, double sigma, double dt);

/// Throws std::invalid_argument if dt * max s >= 1.
void em_step(ParticleEnsemble& ens, const ModelSpec& model, const KernelTable& table, double sigma, double dt);

/// Cloud-in-cell deposition of masses and momenta, normalized by dx.
MacroMoments empirical_macro(const ParticleEnsemble& ens, const PeriodicGrid& grid);

/// Linear interpolation of a grid field at position x (adjoint of the deposition).
double interpolate(const PeriodicGrid& grid, const Field& field, double x);

/// N equal-mass agents drawn from the density f (cell choice by inverse CDF,
/// uniform jitter within the cell).
ParticleEnsemble sample_ensemble(const KineticState& state, int n, std::uint64_t seed);

struct EnsembleStats {
  double t = 0.0;
  double mean_velocity = 0.0;
  double velocity_variance = 0.0;
  double max_deviation = 0.0;
  double energy = 0.0;
};

EnsembleStats ensemble_stats(const ParticleEnsemble& ens, double t);

struct ParticleRunConfig {
  double sigma = 1.0;
  double dt = 1e-2;
  double t_end = 1.0;
  int stats_every = 1;
};

struct ParticleRunResult {
  ParticleEnsemble final_ensemble;
  std::vector<EnsembleStats> stats;
};

ParticleRunResult run_particles(ParticleEnsemble ens, const ModelSpec& model, const ParticleRunConfig& config);

/// Two agents on the 2-D torus moving along parallel horizontal orbits.
struct LockedStateConfig {
  double L = 1.0;
  double r1 = 0.2;            ///< bump kernel radius
  double separation = 0.5;    ///< vertical distance between the orbits
  double v_a = 1.0, v_b = 0.3;
  double sigma = 0.0;
  double dt = 1e-3;
  double t_end = 100.0;
  double gap_threshold = 0.1;
  std::uint64_t seed = 1;
};

struct LockedStateReport {
  double initial_gap = 0.0;
  double final_gap = 0.0;
  double max_gap_drift = 0.0;     ///< max_t | gap(t) - gap(0) |
  double hit_time = -1.0;         ///< first time the gap falls below the threshold, -1 if never
  bool interacted = false;        ///< the agents came within r1 of each other
};

LockedStateReport locked_state_demo(const LockedStateConfig& config);

}  // namespace fpa
