#include "meris/position.hpp"

#include "meris/cvxcore.hpp"

#include <cmath>
#include <vector>

namespace meris {

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double kMinRadius = 1e-9;

const PositionSet& side_positions(const SolutionState& state, ArraySide which) {
  return which == ArraySide::kBsAntennas ? state.U : state.T;
}

// d c_{kj} = v_k^H (d a_j) for a unit move of one coordinate; returns the
// 2*count x K x K tensor flattened as per-variable complex derivatives.
std::vector<MatC> effective_channel_derivatives(const SolutionState& state,
                                                const TrialGeometry& geom,
                                                ArraySide which) {
  const auto a = effective_channels(state);
  const int K = static_cast<int>(a.size());
  const VecC phi = phase_vector(state.theta);
  const int cnt = side_positions(state, which).count();

  // dC[v](k, j) = d c_{kj} / d variable v, variables stacked (x_i, y_i).
  std::vector<MatC> dC(2 * cnt, MatC::Zero(K, K));

  if (which == ArraySide::kBsAntennas) {
    for (int m = 0; m < cnt; ++m) {
      const AntennaJacobian jac =
          antenna_position_jacobian(geom, state.U, state.T, m);
      for (int axis = 0; axis < 2; ++axis) {
        for (int j = 0; j < K; ++j) {
          const Complex da_jm =
              jac.dh(axis, j) + jac.dH_row.row(axis)
                                    .transpose()
                                    .cwiseProduct(phi.cwiseProduct(state.ch.g[j]))
                                    .sum();
          for (int k = 0; k < K; ++k)
            dC[2 * m + axis](k, j) = std::conj(state.V(m, k)) * da_jm;
        }
      }
    }
  } else {
    for (int n = 0; n < cnt; ++n) {
      const ElementJacobian jac =
          element_position_jacobian(geom, state.U, state.T, n);
      for (int axis = 0; axis < 2; ++axis) {
        for (int k = 0; k < K; ++k) {
          const Complex vH_dHcol =
              state.V.col(k).dot(jac.dH_col.row(axis).transpose());
          const Complex vH_Hcol = state.V.col(k).dot(state.ch.H.col(n));
          for (int j = 0; j < K; ++j)
            dC[2 * n + axis](k, j) =
                phi[n] * (state.ch.g[j][n] * vH_dHcol + jac.dg(axis, j) * vH_Hcol);
        }
      }
    }
  }
  return dC;
}

} // namespace

PositionGradients rate_gradient_positions(const SolutionState& state,
                                          const SystemConfig& cfg,
                                          const TrialGeometry& geom,
                                          ArraySide which) {
  const auto a = effective_channels(state);
  const int K = static_cast<int>(a.size());
  const int dim = 2 * side_positions(state, which).count();

  MatC C(K, K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) C(k, j) = state.V.col(k).dot(a[j]);

  const std::vector<MatC> dC = effective_channel_derivatives(state, geom, which);

  PositionGradients out;
  out.rate = Mat::Zero(dim, K);
  out.sinr = Mat::Zero(dim, K);
  out.summed = Vec::Zero(dim);
  out.gamma.resize(K);

  for (int k = 0; k < K; ++k) {
    double denom = cfg.noise_watt * state.V.col(k).squaredNorm();
    for (int j = 0; j < K; ++j)
      if (j != k) denom += state.p[j] * std::norm(C(k, j));
    const double signal = state.p[k] * std::norm(C(k, k));
    out.gamma[k] = signal / denom;

    for (int v = 0; v < dim; ++v) {
      auto dmag2 = [&](int j) {
        return 2.0 * std::real(std::conj(C(k, j)) * dC[v](k, j));
      };
      const double dsig = state.p[k] * dmag2(k);
      double dden = 0.0;
      for (int j = 0; j < K; ++j)
        if (j != k) dden += state.p[j] * dmag2(j);
      const double dgamma = (dsig * denom - signal * dden) / (denom * denom);
      out.sinr(v, k) = dgamma;
      out.rate(v, k) = dgamma / ((1.0 + out.gamma[k]) * kLn2);
    }
    out.summed += out.rate.col(k);
  }
  return out;
}

PositionStepResult position_sca_step(const SolutionState& state,
                                     const SystemConfig& cfg,
                                     const TrialGeometry& geom, ArraySide which,
                                     const TrustRegionState& tr) {
  const PositionSet& ps = side_positions(state, which);
  const int cnt = ps.count();
  const int dim = 2 * cnt;

  PositionStepResult res;
  res.positions = ps;
  res.tr = tr;

  const PositionGradients grad = rate_gradient_positions(state, cfg, geom, which);
  if (grad.summed.cwiseAbs().maxCoeff() < 1e-14) {
    res.accepted = true;
    return res;
  }

  const Vec x0 = Eigen::Map<const Vec>(ps.coords.data(), dim);
  const int K = static_cast<int>(grad.gamma.size());
  const double gamma_th = std::exp2(cfg.rate_threshold_bpshz) - 1.0;

  // Half-spaces: linearized SINR plus linearized spacing for pairs close
  // enough to interact within the trust ball (farther pairs cannot reach d0).
  std::vector<Vec> rows;
  std::vector<double> rhs;
  if (gamma_th > 0.0) {
    for (int k = 0; k < K; ++k) {
      Vec row = -grad.sinr.col(k);
      rhs.push_back(grad.gamma[k] - gamma_th - grad.sinr.col(k).dot(x0));
      rows.push_back(std::move(row));
    }
  }
  const double reach = ps.min_spacing + 2.0 * tr.radius;
  for (int i = 0; i < cnt; ++i) {
    for (int j = i + 1; j < cnt; ++j) {
      const Vec2 d = ps.coords.col(i) - ps.coords.col(j);
      const double dist = d.norm();
      if (dist >= reach) continue;
      const Vec2 u = d / dist;  // dist >= d0 > 0 from a feasible iterate
      Vec row = Vec::Zero(dim);
      row.segment<2>(2 * i) = -u;
      row.segment<2>(2 * j) = u;
      rows.push_back(std::move(row));
      rhs.push_back(-ps.min_spacing);
    }
  }

  cvx::Problem prob;
  prob.obj = cvx::Objective::linear(grad.summed);
  prob.G.resize(static_cast<int>(rows.size()), dim);
  prob.h.resize(static_cast<int>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    prob.G.row(static_cast<int>(r)) = rows[r].transpose();
    prob.h[static_cast<int>(r)] = rhs[r];
  }
  prob.lower = Vec::Zero(dim);
  prob.upper = Vec::Constant(dim, ps.region_side);
  prob.has_ball = true;
  prob.ball_center = x0;
  prob.ball_radius = tr.radius;

  const cvx::Solution sol = cvx::solve(prob, 1e-8, &x0);
  if (sol.status == cvx::Status::kInfeasible ||
      sol.status == cvx::Status::kDegenerate) {
    res.tr.radius = std::max(kMinRadius, tr.radius * cfg.tol.trust_shrink);
    return res;
  }

  PositionSet cand = ps;
  cand.coords = Eigen::Map<const Mat>(sol.x.data(), 2, cnt);

  SolutionState trial = state;
  if (which == ArraySide::kBsAntennas) trial.U = cand;
  else trial.T = cand;
  refresh_channels(trial, geom);

  const double rate_old = sum_rate(state, cfg);
  const double rate_new = sum_rate(trial, cfg);
  bool ok = cand.inside_region(cfg.tol.kkt_eps) &&
            (cnt < 2 || cand.min_pairwise_distance() >= ps.min_spacing - cfg.tol.kkt_eps);
  if (ok && cfg.rate_threshold_bpshz > 0.0) {
    for (int k = 0; k < K && ok; ++k)
      ok = user_rate(trial, cfg, k) >= cfg.rate_threshold_bpshz - cfg.tol.kkt_eps;
  }

  const double predicted = grad.summed.dot(sol.x - x0);
  const double actual = rate_new - rate_old;
  if (ok && actual >= -1e-12) {
    res.positions = cand;
    res.accepted = true;
    res.rate_improvement = actual;
    res.tr.last_ratio = actual / std::max(predicted, 1e-300);
    if (res.tr.last_ratio > cfg.tol.trust_accept_ratio)
      res.tr.radius = std::min(tr.radius * cfg.tol.trust_grow, ps.region_side);
  } else {
    res.tr.radius = std::max(kMinRadius, tr.radius * cfg.tol.trust_shrink);
  }
  return res;
}

PositionOptResult optimize_positions(SolutionState& state, const SystemConfig& cfg,
                                     const TrialGeometry& geom, ArraySide which) {
  PositionOptResult out;
  const bool movable = which == ArraySide::kBsAntennas ? cfg.scheme.bs_movable
                                                       : cfg.scheme.ris_movable;
  if (!movable) return out;

  TrustRegionState tr{cfg.trust_radius_pos_m(), 0.0};
  for (int it = 0; it < cfg.tol.n_max_inner; ++it) {
    const PositionStepResult step = position_sca_step(state, cfg, geom, which, tr);
    ++out.iterations;
    tr = step.tr;
    if (step.accepted) {
      if (which == ArraySide::kBsAntennas) state.U = step.positions;
      else state.T = step.positions;
      refresh_channels(state, geom);
      out.rate_gain += step.rate_improvement;
      if (step.rate_improvement < cfg.tol.sca_eps) break;
    } else if (tr.radius <= kMinRadius) {
      break;
    }
  }
  return out;
}

} // namespace meris
