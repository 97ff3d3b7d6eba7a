#pragma once

#include "meris/metrics.hpp"
#include "meris/phase.hpp"

namespace meris {

enum class ArraySide { kBsAntennas, kRisElements };

// Analytic derivatives of the per-user rates and SINRs w.r.t. the stacked
// 2-D coordinates (x1, y1, x2, y2, ...) of the chosen array.
struct PositionGradients {
  Mat rate;   // 2*count x K
  Mat sinr;   // 2*count x K
  Vec summed; // 2*count
  Vec gamma;  // K
};

PositionGradients rate_gradient_positions(const SolutionState& state,
                                          const SystemConfig& cfg,
                                          const TrialGeometry& geom,
                                          ArraySide which);

struct PositionStepResult {
  PositionSet positions;
  TrustRegionState tr;
  bool accepted = false;
  double rate_improvement = 0.0;
};

// One trust-region SCA step over the positions of one array: linear surrogate
// objective under linearized SINR half-spaces, region box, linearized pairwise
// spacing (a convex inner approximation of the true spacing constraint) and
// the trust ball. Acceptance is judged on the true rate and true constraints.
PositionStepResult position_sca_step(const SolutionState& state,
                                     const SystemConfig& cfg,
                                     const TrialGeometry& geom, ArraySide which,
                                     const TrustRegionState& tr);

struct PositionOptResult {
  int iterations = 0;
  double rate_gain = 0.0;
};

// Iterates position_sca_step to convergence, updating state (positions and
// cached channels) in place. Identity when the scheme pins this array.
PositionOptResult optimize_positions(SolutionState& state, const SystemConfig& cfg,
                                     const TrialGeometry& geom, ArraySide which);

} // namespace meris
