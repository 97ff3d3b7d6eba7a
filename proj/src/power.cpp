#include "meris/power.hpp"

#include "meris/cvxcore.hpp"

#include <cmath>
#include <stdexcept>

namespace meris {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

GainTable make_gain_table(const SolutionState& state, const SystemConfig& cfg) {
  const auto a = effective_channels(state);
  const int K = static_cast<int>(a.size());
  GainTable gt;
  gt.A.resize(K, K);
  gt.noise = cfg.noise_watt;
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j)
      gt.A(k, j) = std::norm(state.V.col(k).dot(a[j]));
  return gt;
}

double rate_from_gains(const GainTable& gains, const Vec& p, int k) {
  const int K = gains.num_users();
  double interference = 0.0;
  for (int j = 0; j < K; ++j)
    if (j != k) interference += p[j] * gains.A(k, j);
  return std::log2(1.0 + p[k] * gains.A(k, k) / (gains.noise + interference));
}

double sum_rate_from_gains(const GainTable& gains, const Vec& p) {
  double r = 0.0;
  for (int k = 0; k < gains.num_users(); ++k) r += rate_from_gains(gains, p, k);
  return r;
}

double ee_from_gains(const GainTable& gains, const Vec& p, const SystemConfig& cfg) {
  return sum_rate_from_gains(gains, p) /
         (p.sum() / cfg.amp_efficiency + cfg.circuit_power_watt);
}

std::optional<Vec> feasibility_presolve(const GainTable& gains,
                                        const SystemConfig& cfg) {
  const int K = gains.num_users();
  const double gamma_th = std::exp2(cfg.rate_threshold_bpshz) - 1.0;
  if (gamma_th <= 0.0) return Vec::Zero(K);

  for (int k = 0; k < K; ++k)
    if (!(gains.A(k, k) > 0.0)) return std::nullopt;

  // p = gamma_th (sigma^2 + F p) componentwise; the minimal solution is the
  // fixed point of the standard power-control iteration, which exists inside
  // the box iff rho(gamma_th F) < 1.
  Mat F = Mat::Zero(K, K);
  Vec u(K);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j)
      if (j != k) F(k, j) = gamma_th * gains.A(k, j) / gains.A(k, k);
    u[k] = gamma_th * gains.noise / gains.A(k, k);
  }

  if (K > 1) {
    const Eigen::EigenSolver<Mat> es(F, false);
    if (es.eigenvalues().cwiseAbs().maxCoeff() >= 1.0 - 1e-12) return std::nullopt;
  }

  Vec p = (Mat::Identity(K, K) - F).partialPivLu().solve(u);
  if ((p.array() < -1e-12).any()) return std::nullopt;
  if ((p.array() > cfg.pmax_watt * (1.0 + 1e-12)).any()) return std::nullopt;
  return p.cwiseMax(0.0).cwiseMin(cfg.pmax_watt);
}

namespace {

// Exact linear SINR constraints (QoS in half-space form) for cvxcore.
void qos_half_spaces(const GainTable& gains, const SystemConfig& cfg, Mat& G,
                     Vec& h) {
  const int K = gains.num_users();
  const double gamma_th = std::exp2(cfg.rate_threshold_bpshz) - 1.0;
  if (gamma_th <= 0.0) {
    G.resize(0, K);
    h.resize(0);
    return;
  }
  G.resize(K, K);
  h.resize(K);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j)
      G(k, j) = (j == k) ? -gains.A(k, k) : gamma_th * gains.A(k, j);
    h[k] = -gamma_th * gains.noise;
  }
}

// Concave surrogate of R_sum - lambda * P_tot around p_ref: the interference
// log terms are replaced by their first-order expansion.
cvx::Objective surrogate_objective(const GainTable& gains, const Vec& p_ref,
                                   double lambda, const SystemConfig& cfg) {
  const int K = gains.num_users();
  // Row k of A without the diagonal = interference gains of user k.
  Vec interf_ref(K), lin_const(K);
  Mat W = Mat::Zero(K, K);  // linearization weights (nats -> bits inside)
  for (int k = 0; k < K; ++k) {
    double s = gains.noise;
    for (int j = 0; j < K; ++j)
      if (j != k) s += p_ref[j] * gains.A(k, j);
    interf_ref[k] = s;
    lin_const[k] = std::log2(s);
    for (int j = 0; j < K; ++j)
      if (j != k) W(k, j) = gains.A(k, j) / (kLn2 * s);
  }

  auto value = [=, &gains, &cfg](const Vec& p) {
    double f = 0.0;
    for (int k = 0; k < K; ++k) {
      double tot = gains.noise;
      for (int j = 0; j < K; ++j) tot += p[j] * gains.A(k, j);
      f += std::log2(tot) - lin_const[k];
      for (int j = 0; j < K; ++j)
        if (j != k) f -= W(k, j) * (p[j] - p_ref[j]);
    }
    return f - lambda * (p.sum() / cfg.amp_efficiency + cfg.circuit_power_watt);
  };
  auto gradient = [=, &gains, &cfg](const Vec& p) {
    Vec grad = Vec::Constant(K, -lambda / cfg.amp_efficiency);
    for (int k = 0; k < K; ++k) {
      double tot = gains.noise;
      for (int j = 0; j < K; ++j) tot += p[j] * gains.A(k, j);
      grad += gains.A.row(k).transpose() / (kLn2 * tot);
      for (int j = 0; j < K; ++j)
        if (j != k) grad[j] -= W(k, j);
    }
    return grad;
  };
  auto hessian = [=, &gains](const Vec& p) {
    Mat H = Mat::Zero(K, K);
    for (int k = 0; k < K; ++k) {
      double tot = gains.noise;
      for (int j = 0; j < K; ++j) tot += p[j] * gains.A(k, j);
      H.noalias() -= gains.A.row(k).transpose() * gains.A.row(k) /
                     (kLn2 * tot * tot);
    }
    return H;
  };

  cvx::Objective obj;
  obj.value = value;
  obj.gradient = gradient;
  obj.hessian = hessian;
  return obj;
}

} // namespace

ScaStepResult sca_power_step(const GainTable& gains, const Vec& p_current,
                             double lambda, const SystemConfig& cfg) {
  const int K = gains.num_users();

  cvx::Problem prob;
  prob.obj = surrogate_objective(gains, p_current, lambda, cfg);
  qos_half_spaces(gains, cfg, prob.G, prob.h);
  prob.lower = Vec::Zero(K);
  prob.upper = Vec::Constant(K, cfg.pmax_watt);

  const cvx::Solution sol = cvx::solve(prob, 1e-10, &p_current);

  ScaStepResult out;
  out.converged_inner = sol.status != cvx::Status::kMaxIterations;
  if (sol.status == cvx::Status::kInfeasible) {
    out.p = p_current;
    out.converged_inner = false;
    return out;
  }
  // Ascent guard against solver round-off.
  out.p = (prob.obj.value(sol.x) >= prob.obj.value(p_current)) ? sol.x : p_current;
  return out;
}

PowerResult optimize_powers(const GainTable& gains, const Vec& p_init,
                            const SystemConfig& cfg) {
  PowerResult res;
  Vec p = p_init;
  double lambda = ee_from_gains(gains, p, cfg);

  auto subtractive = [&](const Vec& q, double lam) {
    return sum_rate_from_gains(gains, q) -
           lam * (q.sum() / cfg.amp_efficiency + cfg.circuit_power_watt);
  };

  const int max_outer = 50;
  for (int outer = 0; outer < max_outer; ++outer) {
    // Inner SCA on the DC decomposition at fixed lambda.
    double prev = subtractive(p, lambda);
    for (int inner = 0; inner < cfg.tol.n_max_inner; ++inner) {
      p = sca_power_step(gains, p, lambda, cfg).p;
      ++res.trace.inner_iterations;
      const double cur = subtractive(p, lambda);
      if (cur - prev < cfg.tol.sca_eps) {
        prev = cur;
        break;
      }
      prev = cur;
    }

    const double F = subtractive(p, lambda);
    res.trace.lambda.push_back(lambda);
    res.trace.subtractive.push_back(F);
    if (std::abs(F) <= cfg.tol.dinkelbach_eps) break;
    lambda = ee_from_gains(gains, p, cfg);
  }

  res.p = p;
  return res;
}

} // namespace meris
