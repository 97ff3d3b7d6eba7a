#include <doctest.h>

#include "meris/power.hpp"
#include "meris/rng.hpp"

#include <cmath>

using namespace meris;

namespace {

SystemConfig power_config(int K, double pmax, double noise, double rth) {
  SystemConfig cfg;
  cfg.num_users = K;
  cfg.num_bs_antennas = 2;
  cfg.num_ris_elements = 2;
  cfg.pmax_watt = pmax;
  cfg.noise_watt = noise;
  cfg.rate_threshold_bpshz = rth;
  cfg.validate();
  return cfg;
}

GainTable random_gains(int K, Rng& rng, double diag_boost = 20.0) {
  GainTable g;
  g.A = Mat(K, K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j)
      g.A(k, j) = rng.uniform(0.05, 1.0) * (k == j ? diag_boost : 1.0);
  g.noise = 1.0;
  return g;
}

double gamma_th(const SystemConfig& cfg) {
  return std::pow(2.0, cfg.rate_threshold_bpshz) - 1.0;
}

} // namespace

TEST_CASE("presolve solves the single-user case in closed form") {
  // K=1, A=1, sigma^2=1, gamma_th=1 (R_th=1), P_max=2  ->  p = 1
  const SystemConfig cfg = power_config(1, 2.0, 1.0, 1.0);
  GainTable g;
  g.A = Mat::Ones(1, 1);
  g.noise = 1.0;
  const auto p = feasibility_presolve(g, cfg);
  REQUIRE(p.has_value());
  CHECK((*p)[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("presolve detects an empty box") {
  const SystemConfig cfg = power_config(1, 2.0, 1.0, 2.0);  // gamma_th = 3 > 2
  GainTable g;
  g.A = Mat::Ones(1, 1);
  g.noise = 1.0;
  CHECK_FALSE(feasibility_presolve(g, cfg).has_value());
}

TEST_CASE("zero rate threshold presolves to zero power") {
  const SystemConfig cfg = power_config(3, 1.0, 1.0, 0.0);
  Rng rng(3);
  const GainTable g = random_gains(3, rng);
  const auto p = feasibility_presolve(g, cfg);
  REQUIRE(p.has_value());
  CHECK(p->norm() == 0.0);
}

TEST_CASE("presolve matches the power-control fixed point") {
  const SystemConfig cfg = power_config(3, 50.0, 1.0, 1.0);
  Rng rng(5);
  const double gth = gamma_th(cfg);
  int verified = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const GainTable g = random_gains(3, rng);
    const auto p = feasibility_presolve(g, cfg);

    // independent oracle: standard interference-function iteration
    Vec q = Vec::Zero(3);
    bool converged = false;
    for (int it = 0; it < 100000; ++it) {
      Vec next(3);
      for (int k = 0; k < 3; ++k) {
        double interf = g.noise;
        for (int j = 0; j < 3; ++j)
          if (j != k) interf += q[j] * g.A(k, j);
        next[k] = gth * interf / g.A(k, k);
      }
      if ((next - q).cwiseAbs().maxCoeff() < 1e-12) {
        q = next;
        converged = true;
        break;
      }
      q = next;
      if (q.maxCoeff() > 10.0 * cfg.pmax_watt) break;  // diverging
    }
    if (converged && q.maxCoeff() <= cfg.pmax_watt) {
      REQUIRE(p.has_value());
      CHECK((*p - q).cwiseAbs().maxCoeff() < 1e-8);
      ++verified;
    } else {
      CHECK_FALSE(p.has_value());
    }
  }
  CHECK(verified >= 25);  // the instance generator keeps most cases feasible
}

TEST_CASE("sca step solves the 1-D concave problem exactly") {
  const SystemConfig cfg = power_config(1, 0.1, 1e-6, 0.5);
  Rng rng(7);
  for (int inst = 0; inst < 25; ++inst) {
    GainTable g;
    g.A = Mat::Constant(1, 1, rng.uniform(1e-4, 1e-2));
    g.noise = 1e-6;
    const double lambda = rng.uniform(1.0, 200.0);
    const double qos_min = gamma_th(cfg) * g.noise / g.A(0, 0);
    if (qos_min > cfg.pmax_watt) continue;
    Vec p0(1);
    p0 << std::min(cfg.pmax_watt, std::max(qos_min, 0.05));
    const ScaStepResult r = sca_power_step(g, p0, lambda, cfg);
    const double unclamped =
        cfg.amp_efficiency / (lambda * std::log(2.0)) - g.noise / g.A(0, 0);
    const double expect =
        std::min(cfg.pmax_watt, std::max(qos_min, unclamped));
    CHECK(r.p[0] == doctest::Approx(expect).epsilon(1e-5));
  }
}

TEST_CASE("lambda zero pushes a single user to full power") {
  const SystemConfig cfg = power_config(1, 0.1, 1e-6, 0.0);
  GainTable g;
  g.A = Mat::Constant(1, 1, 1e-3);
  g.noise = 1e-6;
  Vec p0(1);
  p0 << 0.01;
  const ScaStepResult r = sca_power_step(g, p0, 0.0, cfg);
  CHECK(r.p[0] == doctest::Approx(cfg.pmax_watt).epsilon(1e-6));
}

TEST_CASE("sca step output is a fixed point of itself") {
  const SystemConfig cfg = power_config(3, 0.1, 1e-3, 0.3);
  Rng rng(11);
  const GainTable g = random_gains(3, rng, 50.0);
  const auto p0 = feasibility_presolve(g, cfg);
  REQUIRE(p0.has_value());
  Vec p = *p0;
  const double lambda = 1.0;
  for (int it = 0; it < 60; ++it) p = sca_power_step(g, p, lambda, cfg).p;
  const Vec p_next = sca_power_step(g, p, lambda, cfg).p;
  CHECK((p_next - p).cwiseAbs().maxCoeff() < cfg.tol.sca_eps);
}

TEST_CASE("QoS pinning at the box corner") {
  // gamma_th * sigma^2 / A exactly P_max: the feasible set is the singleton.
  const SystemConfig cfg = power_config(1, 0.1, 1.0, 1.0);
  GainTable g;
  g.A = Mat::Constant(1, 1, gamma_th(cfg) * 1.0 / 0.1);
  g.noise = 1.0;
  Vec p0(1);
  p0 << cfg.pmax_watt;
  const PowerResult r = optimize_powers(g, p0, cfg);
  CHECK(r.p[0] == doctest::Approx(cfg.pmax_watt).epsilon(1e-6));
  CHECK(ee_from_gains(g, r.p, cfg) ==
        doctest::Approx(ee_from_gains(g, p0, cfg)).epsilon(1e-9));
}

TEST_CASE("single-user Dinkelbach matches a dense grid search") {
  const SystemConfig cfg = power_config(1, 0.1, 1e-9, 0.5);
  Rng rng(13);
  for (int inst = 0; inst < 50; ++inst) {
    GainTable g;
    g.A = Mat::Constant(1, 1, rng.uniform(1e-8, 1e-6));
    g.noise = 1e-9;
    const double pmin = gamma_th(cfg) * g.noise / g.A(0, 0);
    if (pmin > cfg.pmax_watt) continue;
    Vec p0(1);
    p0 << pmin;
    const PowerResult r = optimize_powers(g, p0, cfg);
    const double got = ee_from_gains(g, r.p, cfg);

    double best = 0.0;
    const int grid = 1000000;
    for (int i = 0; i <= grid; ++i) {
      Vec q(1);
      q << pmin + (cfg.pmax_watt - pmin) * i / grid;
      best = std::max(best, ee_from_gains(g, q, cfg));
    }
    CHECK(got == doctest::Approx(best).epsilon(1e-4));
  }
}

TEST_CASE("two decoupled users match a 2-D grid search") {
  const SystemConfig cfg = power_config(2, 0.1, 1e-9, 0.5);
  Rng rng(17);
  for (int inst = 0; inst < 5; ++inst) {
    GainTable g;
    g.A = Mat::Zero(2, 2);
    g.A(0, 0) = rng.uniform(1e-8, 1e-6);
    g.A(1, 1) = rng.uniform(1e-8, 1e-6);
    g.noise = 1e-9;
    Vec pmin(2);
    pmin << gamma_th(cfg) * g.noise / g.A(0, 0),
        gamma_th(cfg) * g.noise / g.A(1, 1);
    if (pmin.maxCoeff() > cfg.pmax_watt) continue;
    const PowerResult r = optimize_powers(g, pmin, cfg);
    const double got = ee_from_gains(g, r.p, cfg);

    double best = 0.0;
    const int grid = 1000;
    for (int i = 0; i <= grid; ++i)
      for (int j = 0; j <= grid; ++j) {
        Vec q(2);
        q << pmin[0] + (cfg.pmax_watt - pmin[0]) * i / grid,
            pmin[1] + (cfg.pmax_watt - pmin[1]) * j / grid;
        best = std::max(best, ee_from_gains(g, q, cfg));
      }
    CHECK(got == doctest::Approx(best).epsilon(1e-3));
  }
}

TEST_CASE("Dinkelbach trace properties") {
  const SystemConfig cfg = power_config(3, 0.1, 1e-9, 0.5);
  Rng rng(19);
  for (int inst = 0; inst < 20; ++inst) {
    GainTable g;
    for (g.A = Mat(3, 3);;) {
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
          g.A(k, j) = rng.uniform(1e-9, 1e-6) * (k == j ? 100.0 : 1.0);
      break;
    }
    g.noise = 1e-9;
    const auto p0 = feasibility_presolve(g, cfg);
    if (!p0) continue;
    const PowerResult r = optimize_powers(g, *p0, cfg);
    const DinkelbachTrace& tr = r.trace;
    REQUIRE(!tr.lambda.empty());
    for (size_t i = 1; i < tr.lambda.size(); ++i)
      CHECK(tr.lambda[i] >= tr.lambda[i - 1] - cfg.tol.dinkelbach_eps);
    CHECK(std::abs(tr.subtractive.back()) <= cfg.tol.dinkelbach_eps);
    // true EE never drops below the starting point's
    CHECK(ee_from_gains(g, r.p, cfg) >= ee_from_gains(g, *p0, cfg) - 1e-9);
    // output feasible: QoS and box
    const double gth = gamma_th(cfg);
    for (int k = 0; k < 3; ++k) {
      double interf = g.noise;
      for (int j = 0; j < 3; ++j)
        if (j != k) interf += r.p[j] * g.A(k, j);
      CHECK(r.p[k] * g.A(k, k) >= gth * interf * (1.0 - 1e-7));
      CHECK(r.p[k] <= cfg.pmax_watt + 1e-12);
      CHECK(r.p[k] >= -1e-15);
    }
  }
}
