#include "meris/phase.hpp"

#include "meris/cvxcore.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace meris {

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double kMinRadius = 1e-6;
} // namespace

PhaseGradients rate_gradient_phases(const SolutionState& state,
                                    const SystemConfig& cfg) {
  const auto a = effective_channels(state);
  const int K = static_cast<int>(a.size());
  const int N = static_cast<int>(state.theta.size());
  const VecC phi = phase_vector(state.theta);

  PhaseGradients out;
  out.rate = Mat::Zero(N, K);
  out.sinr = Mat::Zero(N, K);
  out.summed = Vec::Zero(N);
  out.gamma.resize(K);

  // c_{kj} = v_k^H a_j;  d c_{kj} / d theta_n = j e^{j theta_n} w_k[n]* g_j[n]
  // with w_k = H^H v_k.
  MatC C(K, K);
  std::vector<VecC> w(K);
  for (int k = 0; k < K; ++k) {
    w[k] = state.ch.H.adjoint() * state.V.col(k);
    for (int j = 0; j < K; ++j) C(k, j) = state.V.col(k).dot(a[j]);
  }

  for (int k = 0; k < K; ++k) {
    double denom = cfg.noise_watt * state.V.col(k).squaredNorm();
    for (int j = 0; j < K; ++j)
      if (j != k) denom += state.p[j] * std::norm(C(k, j));
    const double signal = state.p[k] * std::norm(C(k, k));
    out.gamma[k] = signal / denom;

    for (int n = 0; n < N; ++n) {
      // d|c_{kj}|^2/d theta_n for all j.
      auto dmag2 = [&](int j) {
        const Complex dc =
            kJ * phi[n] * std::conj(w[k][n]) * state.ch.g[j][n];
        return 2.0 * std::real(std::conj(C(k, j)) * dc);
      };
      const double dsig = state.p[k] * dmag2(k);
      double dden = 0.0;
      for (int j = 0; j < K; ++j)
        if (j != k) dden += state.p[j] * dmag2(j);
      const double dgamma = (dsig * denom - signal * dden) / (denom * denom);
      out.sinr(n, k) = dgamma;
      out.rate(n, k) = dgamma / ((1.0 + out.gamma[k]) * kLn2);
    }
    out.summed += out.rate.col(k);
  }
  return out;
}

PhaseStepResult phase_sca_step(const SolutionState& state, const SystemConfig& cfg,
                               const TrustRegionState& tr) {
  PhaseStepResult res;
  res.theta = state.theta;
  res.tr = tr;

  const PhaseGradients grad = rate_gradient_phases(state, cfg);
  if (grad.summed.cwiseAbs().maxCoeff() < 1e-12) {
    res.accepted = true;  // stationary; the incumbent solves the surrogate
    return res;
  }

  const int N = static_cast<int>(state.theta.size());
  const int K = static_cast<int>(grad.gamma.size());
  const double gamma_th = std::exp2(cfg.rate_threshold_bpshz) - 1.0;

  cvx::Problem prob;
  prob.obj = cvx::Objective::linear(grad.summed);
  if (gamma_th > 0.0) {
    prob.G.resize(K, N);
    prob.h.resize(K);
    for (int k = 0; k < K; ++k) {
      prob.G.row(k) = -grad.sinr.col(k).transpose();
      prob.h[k] = grad.gamma[k] - gamma_th - grad.sinr.col(k).dot(state.theta);
    }
  } else {
    prob.G.resize(0, N);
    prob.h.resize(0);
  }
  prob.lower = Vec::Zero(N);
  prob.upper = Vec::Constant(N, kTwoPi);
  prob.has_ball = true;
  prob.ball_center = state.theta;
  prob.ball_radius = tr.radius;

  const cvx::Solution sol = cvx::solve(prob, 1e-8, &state.theta);
  if (sol.status == cvx::Status::kInfeasible ||
      sol.status == cvx::Status::kDegenerate) {
    res.tr.radius = std::max(kMinRadius, tr.radius * cfg.tol.trust_shrink);
    return res;
  }

  // Judge the candidate on the true objective and true QoS.
  SolutionState trial = state;
  trial.theta = sol.x;
  const double rate_old = sum_rate(state, cfg);
  const double rate_new = sum_rate(trial, cfg);
  bool qos_ok = true;
  if (cfg.rate_threshold_bpshz > 0.0) {
    for (int k = 0; k < K && qos_ok; ++k)
      qos_ok = user_rate(trial, cfg, k) >=
               cfg.rate_threshold_bpshz - cfg.tol.kkt_eps;
  }

  const double predicted = grad.summed.dot(sol.x - state.theta);
  const double actual = rate_new - rate_old;
  if (actual >= -1e-12 && qos_ok) {
    res.theta = sol.x;
    res.accepted = true;
    res.rate_improvement = actual;
    res.tr.last_ratio = actual / std::max(predicted, 1e-300);
    if (res.tr.last_ratio > cfg.tol.trust_accept_ratio)
      res.tr.radius = std::min(tr.radius * cfg.tol.trust_grow, kPi);
  } else {
    res.tr.radius = std::max(kMinRadius, tr.radius * cfg.tol.trust_shrink);
  }
  return res;
}

namespace {

// Cyclic exact 1-D search over the per-element phases: for each element, scan
// a dense candidate grid with incremental cross-gain updates and keep the best
// QoS-feasible phase. Escapes the poor local basins that a purely local step
// cannot leave; the SCA loop afterwards polishes to a stationary point.
double element_scan_passes(SolutionState& state, const SystemConfig& cfg) {
  const int N = static_cast<int>(state.theta.size());
  const int K = static_cast<int>(state.p.size());
  constexpr int kCandidates = 64;
  const double gamma_th = std::exp2(cfg.rate_threshold_bpshz) - 1.0;

  // cross-gain state: C(k, j) = v_k^H a_j, updated per accepted move.
  auto a = effective_channels(state);
  MatC C(K, K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) C(k, j) = state.V.col(k).dot(a[j]);
  Vec vnorm2(K);
  for (int k = 0; k < K; ++k) vnorm2[k] = state.V.col(k).squaredNorm();

  auto sum_rate_of = [&](const MatC& X, double* min_gamma) {
    double r = 0.0;
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      double denom = cfg.noise_watt * vnorm2[k];
      for (int j = 0; j < K; ++j)
        if (j != k) denom += state.p[j] * std::norm(X(k, j));
      const double gamma = state.p[k] * std::norm(X(k, k)) / denom;
      worst = std::min(worst, gamma);
      r += std::log2(1.0 + gamma);
    }
    if (min_gamma) *min_gamma = worst;
    return r;
  };

  double rate = sum_rate_of(C, nullptr);
  const double rate_start = rate;

  // v_k^H H[:, n], reused by every candidate of element n.
  MatC vH(K, N);
  for (int k = 0; k < K; ++k)
    vH.row(k) = (state.V.col(k).adjoint() * state.ch.H);

  for (int pass = 0; pass < 4; ++pass) {
    double pass_gain = 0.0;
    for (int n = 0; n < N; ++n) {
      const Complex old_phase = std::exp(kJ * state.theta[n]);
      double best_rate = rate;
      double best_theta = state.theta[n];
      MatC best_C = C;
      for (int c = 0; c < kCandidates; ++c) {
        const double cand = kTwoPi * c / kCandidates;
        const Complex shift = std::exp(kJ * cand) - old_phase;
        MatC X = C;
        for (int k = 0; k < K; ++k)
          for (int j = 0; j < K; ++j)
            X(k, j) += shift * vH(k, n) * state.ch.g[j][n];
        double min_gamma = 0.0;
        const double r = sum_rate_of(X, &min_gamma);
        if (r > best_rate && (gamma_th <= 0.0 || min_gamma >= gamma_th))
          best_rate = r, best_theta = cand, best_C = X;
      }
      if (best_rate > rate) {
        pass_gain += best_rate - rate;
        rate = best_rate;
        state.theta[n] = best_theta;
        C = best_C;
      }
    }
    if (pass_gain < cfg.tol.sca_eps) break;
  }
  return rate - rate_start;
}

} // namespace

PhaseOptResult optimize_phases(SolutionState& state, const SystemConfig& cfg) {
  PhaseOptResult out;
  TrustRegionState tr{cfg.tol.trust_radius_phase, 0.0};

  out.rate_gain += element_scan_passes(state, cfg);

  for (int it = 0; it < cfg.tol.n_max_inner; ++it) {
    const PhaseStepResult step = phase_sca_step(state, cfg, tr);
    ++out.iterations;
    tr = step.tr;
    if (step.accepted) {
      state.theta = step.theta;
      out.rate_gain += step.rate_improvement;
      if (step.rate_improvement < cfg.tol.sca_eps) break;
    } else if (tr.radius <= kMinRadius) {
      break;
    }
  }
  return out;
}

} // namespace meris
