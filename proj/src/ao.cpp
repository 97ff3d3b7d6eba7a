#include "meris/ao.hpp"

#include "meris/phase.hpp"
#include "meris/position.hpp"
#include "meris/postcoder.hpp"
#include "meris/power.hpp"

#include <chrono>
#include <cmath>

namespace meris {

namespace {

MatC matched_filter_postcoders(const SolutionState& state) {
  const auto a = effective_channels(state);
  const int K = static_cast<int>(a.size());
  const int M = static_cast<int>(a[0].size());
  MatC V(M, K);
  for (int k = 0; k < K; ++k) {
    const double n = a[k].norm();
    V.col(k) = n > 0 ? (a[k] / n).eval() : VecC::Unit(M, 0);
  }
  return V;
}

} // namespace

InitResult initialize(const SystemConfig& cfg, Rng& rng) {
  InitResult out;
  Rng geom_rng = rng.derive(0);
  Rng var_rng = rng.derive(1);

  for (int attempt = 0; attempt <= cfg.init_retries; ++attempt) {
    TrialGeometry geom = sample_trial_geometry(cfg, geom_rng);

    SolutionState st;
    st.U = cfg.scheme.bs_movable
               ? sample_positions(cfg.num_bs_antennas, cfg, var_rng)
               : grid_positions(cfg.num_bs_antennas, cfg);
    st.T = cfg.scheme.ris_movable
               ? sample_positions(cfg.num_ris_elements, cfg, var_rng)
               : grid_positions(cfg.num_ris_elements, cfg);
    st.theta.resize(cfg.num_ris_elements);
    for (int n = 0; n < cfg.num_ris_elements; ++n)
      st.theta[n] = var_rng.uniform(0.0, kTwoPi);
    st.p = Vec::Constant(cfg.num_users, cfg.pmax_watt);
    refresh_channels(st, geom);

    // Matched filters bootstrap the gain table; the presolve then pins the
    // minimum QoS-feasible powers, and the MMSE update (which can only raise
    // each SINR at fixed p) preserves feasibility.
    st.V = matched_filter_postcoders(st);
    const GainTable gains = make_gain_table(st, cfg);
    const auto p = feasibility_presolve(gains, cfg);
    if (!p) {
      if (attempt < cfg.init_retries) ++out.redraws;
      continue;
    }
    st.p = p->cwiseMax(0.0).cwiseMin(cfg.pmax_watt);
    st.V = update_all_postcoders(st, cfg).V;
    st.ee = energy_efficiency(st, cfg);

    if (!audit(st, cfg).feasible(cfg.tol.kkt_eps)) {
      if (attempt < cfg.init_retries) ++out.redraws;
      continue;
    }
    out.feasible = true;
    out.state = std::move(st);
    out.geometry = std::move(geom);
    return out;
  }
  return out;
}

TrialRun run_trial(const SystemConfig& cfg, Rng& rng) {
  const auto t_start = std::chrono::steady_clock::now();
  TrialRun run;

  InitResult init = initialize(cfg, rng);
  run.report.channel_redraws = init.redraws;
  if (!init.feasible) {
    run.report.termination = "infeasible";
    return run;
  }
  run.state = std::move(init.state);
  run.geometry = std::move(init.geometry);
  SolutionState& st = run.state;
  const TrialGeometry& geom = run.geometry;

  double ee = energy_efficiency(st, cfg);
  st.ee = ee;
  run.report.ee_per_iteration.push_back(ee);
  run.report.feasible = true;
  run.report.termination = "max_iterations";

  // Each block keeps the EE non-decreasing on its own; the rollback wrapper
  // additionally guards against numerical regressions.
  auto guarded = [&](auto&& update) {
    SolutionState backup = st;
    update();
    const double ee_new = energy_efficiency(st, cfg);
    if (ee_new >= ee - 1e-12) {
      ee = std::max(ee, ee_new);
      st.ee = ee_new;
    } else {
      st = std::move(backup);
    }
  };

  for (int n = 0; n < cfg.tol.n_max_ao; ++n) {
    const double ee_prev = ee;

    guarded([&] {
      st.V = update_all_postcoders(st, cfg).V;
      ++run.report.postcoder_updates;
    });

    guarded([&] {
      const GainTable gains = make_gain_table(st, cfg);
      Vec p_start = st.p;
      // Warm start only if the current p is still QoS-feasible under the new
      // gains; otherwise fall back to the presolve point.
      bool ok = true;
      for (int k = 0; k < gains.num_users() && ok; ++k)
        ok = rate_from_gains(gains, p_start, k) >=
             cfg.rate_threshold_bpshz - cfg.tol.kkt_eps;
      if (!ok) {
        const auto p = feasibility_presolve(gains, cfg);
        if (!p) return;  // leave powers unchanged this round
        p_start = *p;
      }
      PowerResult pr = optimize_powers(gains, p_start, cfg);
      st.p = pr.p;
      run.report.dinkelbach_iterations +=
          static_cast<int>(pr.trace.lambda.size());
      run.report.dinkelbach.push_back(std::move(pr.trace));
    });

    guarded([&] {
      run.report.phase_iterations += optimize_phases(st, cfg).iterations;
    });

    guarded([&] {
      run.report.position_iterations +=
          optimize_positions(st, cfg, geom, ArraySide::kBsAntennas).iterations;
    });

    guarded([&] {
      run.report.position_iterations +=
          optimize_positions(st, cfg, geom, ArraySide::kRisElements).iterations;
    });

    run.report.ee_per_iteration.push_back(ee);
    run.report.iterations_used = n + 1;
    if (ee - ee_prev <= cfg.tol.ao_eps) {
      run.report.termination = "converged";
      break;
    }
  }

  st.ee = energy_efficiency(st, cfg);
  run.report.final_audit = audit(st, cfg);
  run.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return run;
}

} // namespace meris
