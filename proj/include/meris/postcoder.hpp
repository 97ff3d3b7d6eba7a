#pragma once

#include "meris/metrics.hpp"

#include <vector>

namespace meris {

// MMSE-style combiner: v* = (B_k + sigma^2 I)^{-1} a_k, normalized, where
// B_k = sum_{j != k} p_j a_j a_j^H. Maximizes user k's SINR over unit vectors.
VecC optimal_postcoder(const SolutionState& state, const SystemConfig& cfg, int k);

struct PostcoderUpdate {
  MatC V;                      // accepted postcoders
  std::vector<bool> accepted;  // per user: false when the QoS guard rolled back
};

// Per-user independent update with the rate-threshold rollback guard: the new
// vector is kept only if the user's rate stays at or above R_th.
PostcoderUpdate update_all_postcoders(const SolutionState& state,
                                      const SystemConfig& cfg);

} // namespace meris
