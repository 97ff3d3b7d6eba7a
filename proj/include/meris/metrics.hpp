#pragma once

#include "meris/channel.hpp"
#include "meris/config.hpp"

#include <vector>

namespace meris {

// The full variable set of one optimization instance together with the cached
// channels it was evaluated on.
struct SolutionState {
  MatC V;       // M x K, unit-norm postcoder columns
  Vec p;        // K, watts
  Vec theta;    // N, radians in [0, 2pi]
  PositionSet U;
  PositionSet T;
  ChannelSet ch;
  bool channels_fresh = false;
  double ee = 0.0;
};

// Recompute the cached ChannelSet from the geometry and current positions.
void refresh_channels(SolutionState& state, const TrialGeometry& geom);

// diag entries e^{j theta_n}.
VecC phase_vector(const Vec& theta);

// a_k = h_k + H diag(e^{j theta}) g_k.
VecC effective_channel(const SolutionState& state, int k);
std::vector<VecC> effective_channels(const SolutionState& state);

double sinr(const SolutionState& state, const SystemConfig& cfg, int k);
double user_rate(const SolutionState& state, const SystemConfig& cfg, int k);
double sum_rate(const SolutionState& state, const SystemConfig& cfg);
double total_power(const SolutionState& state, const SystemConfig& cfg);
double energy_efficiency(const SolutionState& state, const SystemConfig& cfg);

// Worst signed residual per constraint of the master problem; <= 0 means the
// constraint holds (residual = required - achieved).
struct ConstraintAudit {
  double c1_rate_qos = 0.0;
  double c2_power_box = 0.0;
  double c3_postcoder_norm = 0.0;
  double c4_unit_modulus = 0.0;
  double c5_bs_region = 0.0;
  double c6_ris_region = 0.0;
  double c7_bs_spacing = 0.0;
  double c8_ris_spacing = 0.0;

  double worst() const;
  bool feasible(double eps) const { return worst() <= eps; }
};

ConstraintAudit audit(const SolutionState& state, const SystemConfig& cfg);

} // namespace meris
