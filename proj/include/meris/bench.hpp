#pragma once

#include "meris/ao.hpp"
#include "meris/config.hpp"

#include <string>
#include <vector>

namespace meris {

// One (scheme, sweep value) cell of a Monte Carlo sweep.
struct SweepCell {
  double sweep_value = 0.0;
  std::string scheme;
  double mean_ee = 0.0;
  double stderr_ee = 0.0;
  int outages = 0;
  int trials = 0;
  std::vector<double> trial_ee;  // per successful trial, ordered by trial index
  std::vector<int> trial_index;
};

struct SweepSpec {
  std::string variable;  // "pmax_dbm" | "num_ris_elements" | "num_bs_antennas"
                         // | "num_users" | "none"
  std::vector<double> values;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepCell> cells;  // ordered by (value, scheme)
};

SystemConfig apply_sweep_value(const SystemConfig& base, const std::string& variable,
                               double value);

// Runs trials for every (sweep value, scheme) cell. Trial seeds depend only on
// (seed, trial index), so cells are paired: the same channel realizations are
// reused across schemes and sweep values. `threads` <= 0 picks the hardware
// concurrency.
SweepResult run_sweep(const SystemConfig& base, const SweepSpec& spec,
                      const std::vector<SchemeFlags>& schemes, int trials,
                      std::uint64_t seed, int threads = 0);

// Convergence experiment: per-AO-iteration EE traces for a list of RIS sizes.
struct ConvergenceRow {
  int iteration;
  double ee;
  int trial;
  int num_ris_elements;
};
std::vector<ConvergenceRow> run_convergence(const SystemConfig& base,
                                            const std::vector<int>& ris_sizes,
                                            int trials, std::uint64_t seed,
                                            int threads = 0);

// CSV emission. Every file starts with a single timestamp comment line
// (excluded from determinism guarantees); all data rows are deterministic for
// a fixed seed. Throws std::runtime_error on I/O failure or empty input.
void emit_sweep_csv(const SweepResult& result, const std::string& path);
void emit_convergence_csv(const std::vector<ConvergenceRow>& rows,
                          const std::string& path);

// JSON run manifest: config hash, seed, library version.
void emit_manifest(const SystemConfig& cfg, std::uint64_t seed,
                   const std::string& path);

} // namespace meris
