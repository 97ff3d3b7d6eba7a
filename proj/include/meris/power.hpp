#pragma once

#include "meris/config.hpp"
#include "meris/metrics.hpp"

#include <optional>
#include <vector>

namespace meris {

// Cross-gain table A[k][j] = |v_k^H a_j|^2 plus the noise power; everything
// the power subproblem needs from the rest of the state.
struct GainTable {
  Mat A;         // K x K, row k: gains seen through postcoder v_k
  double noise = 0.0;

  int num_users() const { return static_cast<int>(A.rows()); }
};

GainTable make_gain_table(const SolutionState& state, const SystemConfig& cfg);

double rate_from_gains(const GainTable& gains, const Vec& p, int k);
double sum_rate_from_gains(const GainTable& gains, const Vec& p);
double ee_from_gains(const GainTable& gains, const Vec& p, const SystemConfig& cfg);

// Componentwise-minimal power vector meeting the SINR targets inside the box,
// or nothing when the QoS set is empty.
std::optional<Vec> feasibility_presolve(const GainTable& gains,
                                        const SystemConfig& cfg);

struct ScaStepResult {
  Vec p;
  bool converged_inner = true;  // false when the subproblem solver hit its cap
};

// One convex surrogate step of the DC rate decomposition at fixed Dinkelbach
// multiplier lambda, under the exact linear SINR constraints and the box.
ScaStepResult sca_power_step(const GainTable& gains, const Vec& p_current,
                             double lambda, const SystemConfig& cfg);

struct DinkelbachTrace {
  std::vector<double> lambda;       // per outer iteration
  std::vector<double> subtractive;  // F(lambda) at the inner solution
  int inner_iterations = 0;
};

struct PowerResult {
  Vec p;
  DinkelbachTrace trace;
};

// Dinkelbach outer loop around the SCA inner loop; p_init must satisfy the
// QoS and box constraints.
PowerResult optimize_powers(const GainTable& gains, const Vec& p_init,
                            const SystemConfig& cfg);

} // namespace meris
