#include "meris/postcoder.hpp"

#include <stdexcept>

namespace meris {

VecC optimal_postcoder(const SolutionState& state, const SystemConfig& cfg, int k) {
  const auto a = effective_channels(state);
  const int M = static_cast<int>(a[k].size());
  const int K = static_cast<int>(a.size());

  // Interference-plus-noise covariance, power-weighted as in the SINR quotient.
  MatC B = cfg.noise_watt * MatC::Identity(M, M);
  for (int j = 0; j < K; ++j)
    if (j != k) B.noalias() += state.p[j] * (a[j] * a[j].adjoint());

  Eigen::LLT<MatC> llt(B);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("optimal_postcoder: covariance not positive definite "
                             "(noise power misconfigured?)");
  VecC v = llt.solve(a[k]);
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::runtime_error("optimal_postcoder: numerically singular system");
  return v / n;
}

PostcoderUpdate update_all_postcoders(const SolutionState& state,
                                      const SystemConfig& cfg) {
  const int K = static_cast<int>(state.p.size());
  PostcoderUpdate out;
  out.V = state.V;
  out.accepted.assign(K, false);

  // Users decouple: v_k only enters user k's own SINR, so each candidate is
  // judged in isolation against the QoS threshold.
  SolutionState trial = state;
  for (int k = 0; k < K; ++k) {
    const VecC v = optimal_postcoder(state, cfg, k);
    trial.V = state.V;
    trial.V.col(k) = v;
    if (user_rate(trial, cfg, k) >= cfg.rate_threshold_bpshz - cfg.tol.kkt_eps) {
      out.V.col(k) = v;
      out.accepted[k] = true;
    }
  }
  return out;
}

} // namespace meris
