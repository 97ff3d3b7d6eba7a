#pragma once

#include "meris/config.hpp"
#include "meris/metrics.hpp"
#include "meris/power.hpp"
#include "meris/rng.hpp"

#include <string>
#include <vector>

namespace meris {

struct TrialReport {
  std::vector<double> ee_per_iteration;  // index 0 = initialization
  int iterations_used = 0;
  int channel_redraws = 0;
  int postcoder_updates = 0;
  int dinkelbach_iterations = 0;
  int phase_iterations = 0;
  int position_iterations = 0;
  double wall_time_s = 0.0;
  std::vector<DinkelbachTrace> dinkelbach;  // one trace per power-block call
  ConstraintAudit final_audit;
  std::string termination;  // "converged", "max_iterations", "infeasible"
  bool feasible = false;
};

struct TrialRun {
  SolutionState state;
  TrialGeometry geometry;
  TrialReport report;
};

// Draws channels and builds a feasible starting point (positions by rejection
// sampling or the grid baseline, random phases, presolved powers, MMSE
// postcoders). Redraws channels up to cfg.init_retries times before declaring
// the trial infeasible.
struct InitResult {
  bool feasible = false;
  SolutionState state;
  TrialGeometry geometry;
  int redraws = 0;
};
InitResult initialize(const SystemConfig& cfg, Rng& rng);

// Full alternating-optimization driver: cycles postcoders, powers, phases,
// BS antenna positions and RIS element positions until the EE improvement
// drops below ao_eps or n_max_ao rounds elapse. Every block update is
// accepted only if the EE does not decrease.
TrialRun run_trial(const SystemConfig& cfg, Rng& rng);

} // namespace meris
