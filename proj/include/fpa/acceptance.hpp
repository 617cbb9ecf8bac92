#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fpa/io.hpp"

namespace fpa {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// The acceptance criteria, run against a base configuration that supplies the
/// grid, time step and (for structure preservation) the initial data. Each
/// criterion overrides model, data and sigma where its definition fixes them.
class AcceptanceSuite {
 public:
  static constexpr int kCriteria = 11;

  explicit AcceptanceSuite(RunConfig base);

  CriterionResult run(int id);
  /// Criteria in order; the moment criterion reuses every kinetic run made before it.
  std::vector<CriterionResult> run_all(const std::vector<int>& ids,
                                       const std::function<void(const CriterionResult&)>& report = {});

 private:
  struct MomentLog {
    std::string label;
    std::vector<double> t, m8;
    KineticState initial, final_state;
  };

  RunResult kinetic(const std::string& label, const KineticState& init, const ModelSpec& model,
                    const SolverConfig& config, const SnapshotSink& sink = {});

  CriterionResult structure_preservation();
  CriterionResult maxwellian_fixed_point();
  CriterionResult entropy_equality();
  CriterionResult exponential_relaxation();
  CriterionResult gaussian_tails();
  CriterionResult operator_properties();
  CriterionResult spectral_gap_checks();
  CriterionResult mean_field();
  CriterionResult deterministic_alignment();
  CriterionResult velocity_oracle();
  CriterionResult moment_propagation();

  RunConfig base_;
  std::vector<MomentLog> moments_;
};

std::string format_result(const CriterionResult& result);

}  // namespace fpa
