#include <doctest.h>

#include "test_util.hpp"

#include "meris/phase.hpp"

#include <cmath>

using namespace meris;
using meris::testutil::small_config;
using meris::testutil::synthetic_trial;

namespace {

double sum_rate_at(SolutionState st, const SystemConfig& cfg, const Vec& theta) {
  st.theta = theta;
  return sum_rate(st, cfg);
}

} // namespace

TEST_CASE("phase gradient") {
  SUBCASE("vanishes without a reflected path") {
    const SystemConfig cfg = small_config(3, 5, 2, 2);
    Rng rng(3);
    auto trial = synthetic_trial(cfg, rng);
    for (auto& g : trial.state.ch.g) g.setZero();
    const PhaseGradients gr = rate_gradient_phases(trial.state, cfg);
    CHECK(gr.rate.norm() == doctest::Approx(0.0));
    CHECK(gr.summed.norm() == doctest::Approx(0.0));
  }

  SUBCASE("matches central finite differences") {
    const SystemConfig cfg = small_config(4, 8, 3, 3);
    Rng rng(5);
    for (int inst = 0; inst < 10; ++inst) {
      const auto trial = synthetic_trial(cfg, rng);
      const PhaseGradients gr = rate_gradient_phases(trial.state, cfg);
      const double step = 1e-6;
      for (int n = 0; n < 8; ++n) {
        for (int k = 0; k < 3; ++k) {
          Vec tp = trial.state.theta, tm = trial.state.theta;
          tp[n] += step;
          tm[n] -= step;
          SolutionState sp = trial.state, sm = trial.state;
          sp.theta = tp;
          sm.theta = tm;
          const double fd =
              (user_rate(sp, cfg, k) - user_rate(sm, cfg, k)) / (2 * step);
          CHECK(std::abs(fd - gr.rate(n, k)) <=
                1e-5 * std::max(1.0, std::abs(fd)));
        }
      }
    }
  }

  SUBCASE("2pi shifts change nothing") {
    const SystemConfig cfg = small_config(3, 6, 2, 2);
    Rng rng(7);
    auto trial = synthetic_trial(cfg, rng);
    const PhaseGradients g0 = rate_gradient_phases(trial.state, cfg);
    const double r0 = sum_rate(trial.state, cfg);
    trial.state.theta[2] += kTwoPi;
    const PhaseGradients g1 = rate_gradient_phases(trial.state, cfg);
    CHECK(sum_rate(trial.state, cfg) == doctest::Approx(r0).epsilon(1e-12));
    CHECK((g0.rate - g1.rate).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("phase sca step") {
  SUBCASE("zero gradient keeps the incumbent") {
    const SystemConfig cfg = small_config(3, 5, 2, 2);
    Rng rng(11);
    auto trial = synthetic_trial(cfg, rng);
    for (auto& g : trial.state.ch.g) g.setZero();  // rate independent of theta
    TrustRegionState tr;
    const PhaseStepResult r = phase_sca_step(trial.state, cfg, tr);
    CHECK((r.theta - trial.state.theta).norm() == doctest::Approx(0.0));
  }

  SUBCASE("degenerate trust ball keeps the incumbent") {
    const SystemConfig cfg = small_config(3, 5, 2, 2);
    Rng rng(13);
    const auto trial = synthetic_trial(cfg, rng);
    TrustRegionState tr;
    tr.radius = 1e-12;
    const PhaseStepResult r = phase_sca_step(trial.state, cfg, tr);
    CHECK((r.theta - trial.state.theta).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("single element aligns reflected and direct paths") {
    // N=1, K=1: a = h + c g e^{j theta}; the optimum has closed form
    // theta* = arg(v^H h) - arg(v^H c g)  (mod 2pi).
    SystemConfig cfg = small_config(3, 1, 1, 2);
    cfg.rate_threshold_bpshz = 0.0;
    Rng rng(17);
    auto trial = synthetic_trial(cfg, rng);
    // make the reflected path comparable to the direct one so alignment matters
    trial.state.ch.g[0] *= trial.state.ch.h[0].norm() /
                           (trial.state.ch.H.col(0).norm() *
                            std::abs(trial.state.ch.g[0][0]));
    trial.state.V.col(0) = effective_channel(trial.state, 0).normalized();
    optimize_phases(trial.state, cfg);
    const std::complex<double> vh = trial.state.V.col(0).dot(trial.state.ch.h[0]);
    const std::complex<double> vcg =
        trial.state.V.col(0).dot(trial.state.ch.H.col(0)) *
        trial.state.ch.g[0][0];
    double expect = std::arg(vh) - std::arg(vcg);
    expect = expect - kTwoPi * std::floor(expect / kTwoPi);
    double got = trial.state.theta[0];
    got = got - kTwoPi * std::floor(got / kTwoPi);
    double diff = std::abs(got - expect);
    diff = std::min(diff, kTwoPi - diff);
    CHECK(diff < 5e-3);
    // and the achieved rate matches the analytic optimum
    Vec best(1);
    best << expect;
    CHECK(sum_rate(trial.state, cfg) >=
          sum_rate_at(trial.state, cfg, best) - 1e-6);
  }
}

TEST_CASE("optimize phases") {
  SUBCASE("stationary start returns immediately") {
    const SystemConfig cfg = small_config(3, 5, 2, 2);
    Rng rng(19);
    auto trial = synthetic_trial(cfg, rng);
    for (auto& g : trial.state.ch.g) g.setZero();
    const PhaseOptResult r = optimize_phases(trial.state, cfg);
    CHECK(r.iterations <= 1);
    CHECK(r.rate_gain == doctest::Approx(0.0));
  }

  SUBCASE("monotone true objective and feasible output") {
    SystemConfig cfg = small_config(4, 8, 3, 3);
    cfg.rate_threshold_bpshz = 0.0;
    Rng rng(23);
    auto trial = synthetic_trial(cfg, rng);
    const double before = sum_rate(trial.state, cfg);
    optimize_phases(trial.state, cfg);
    CHECK(sum_rate(trial.state, cfg) >= before - 1e-12);
    const ConstraintAudit a = audit(trial.state, cfg);
    CHECK(a.c4_unit_modulus == 0.0);
    CHECK(a.c1_rate_qos <= cfg.tol.kkt_eps);
  }

  SUBCASE("near-exhaustive oracle at N=4") {
    SystemConfig cfg = small_config(2, 4, 2, 2);
    cfg.rate_threshold_bpshz = 0.0;
    Rng rng(29);
    auto trial = synthetic_trial(cfg, rng);
    optimize_phases(trial.state, cfg);
    const double got = sum_rate(trial.state, cfg);

    // oracle: 64 points per element exhaustively, then local refinement
    const int P = 64;
    Vec best = trial.state.theta;
    double best_rate = -1.0;
    Vec cand(4);
    for (int i0 = 0; i0 < P; ++i0)
      for (int i1 = 0; i1 < P; ++i1)
        for (int i2 = 0; i2 < P; ++i2)
          for (int i3 = 0; i3 < P; ++i3) {
            cand << i0 * kTwoPi / P, i1 * kTwoPi / P, i2 * kTwoPi / P,
                i3 * kTwoPi / P;
            const double r = sum_rate_at(trial.state, cfg, cand);
            if (r > best_rate) {
              best_rate = r;
              best = cand;
            }
          }
    // refine the best grid point by cyclic 1-D golden-section passes
    for (int pass = 0; pass < 30; ++pass) {
      for (int n = 0; n < 4; ++n) {
        double lo = best[n] - kTwoPi / P, hi = best[n] + kTwoPi / P;
        for (int it = 0; it < 60; ++it) {
          const double m1 = lo + 0.382 * (hi - lo);
          const double m2 = lo + 0.618 * (hi - lo);
          Vec c1 = best, c2 = best;
          c1[n] = m1;
          c2[n] = m2;
          if (sum_rate_at(trial.state, cfg, c1) <
              sum_rate_at(trial.state, cfg, c2))
            lo = m1;
          else
            hi = m2;
        }
        best[n] = 0.5 * (lo + hi);
      }
    }
    best_rate = sum_rate_at(trial.state, cfg, best);
    CHECK(got >= best_rate - 1e-3);
  }
}
