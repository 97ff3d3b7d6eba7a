#pragma once

#include "meris/metrics.hpp"

namespace meris {

// Adaptive step-radius state shared by the phase and position optimizers.
struct TrustRegionState {
  double radius = 0.25;
  double last_ratio = 0.0;
};

// Analytic derivatives of the per-user rates and SINRs w.r.t. the phase
// vector theta.
struct PhaseGradients {
  Mat rate;  // N x K, column k = d R_k / d theta
  Mat sinr;  // N x K, column k = d gamma_k / d theta
  Vec summed;  // N, sum over users of the rate columns
  Vec gamma;   // K, current SINR values
};

PhaseGradients rate_gradient_phases(const SolutionState& state,
                                    const SystemConfig& cfg);

struct PhaseStepResult {
  Vec theta;
  TrustRegionState tr;
  bool accepted = false;
  double rate_improvement = 0.0;
};

// One trust-region SCA step: linear surrogate objective under linearized SINR
// half-spaces, the [0, 2pi] box and the trust ball. Acceptance is judged on
// the true sum rate and true QoS.
PhaseStepResult phase_sca_step(const SolutionState& state, const SystemConfig& cfg,
                               const TrustRegionState& tr);

struct PhaseOptResult {
  int iterations = 0;
  double rate_gain = 0.0;
};

// Iterates phase_sca_step to convergence, updating state.theta in place.
PhaseOptResult optimize_phases(SolutionState& state, const SystemConfig& cfg);

} // namespace meris
