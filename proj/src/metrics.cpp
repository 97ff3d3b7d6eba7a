#include "meris/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace meris {

void refresh_channels(SolutionState& state, const TrialGeometry& geom) {
  state.ch = assemble_channels(geom, state.U, state.T);
  state.channels_fresh = true;
}

VecC phase_vector(const Vec& theta) {
  VecC e(theta.size());
  for (Eigen::Index n = 0; n < theta.size(); ++n) e[n] = std::polar(1.0, theta[n]);
  return e;
}

namespace {

void require_fresh(const SolutionState& state) {
  if (!state.channels_fresh)
    throw std::logic_error("metrics: cached channels are stale; call refresh_channels");
}

} // namespace

VecC effective_channel(const SolutionState& state, int k) {
  require_fresh(state);
  const VecC phi = phase_vector(state.theta);
  return state.ch.h[k] + state.ch.H * phi.cwiseProduct(state.ch.g[k]);
}

std::vector<VecC> effective_channels(const SolutionState& state) {
  require_fresh(state);
  const int K = static_cast<int>(state.ch.h.size());
  const VecC phi = phase_vector(state.theta);
  std::vector<VecC> a(K);
  for (int k = 0; k < K; ++k)
    a[k] = state.ch.h[k] + state.ch.H * phi.cwiseProduct(state.ch.g[k]);
  return a;
}

double sinr(const SolutionState& state, const SystemConfig& cfg, int k) {
  const auto a = effective_channels(state);
  const int K = static_cast<int>(a.size());
  const VecC& v = state.V.col(k);
  // Eigen's dot conjugates the first argument, so v.dot(a) = v^H a.
  const double signal = state.p[k] * std::norm(v.dot(a[k]));
  double denom = 0.0;
  for (int j = 0; j < K; ++j)
    if (j != k) denom += state.p[j] * std::norm(v.dot(a[j]));
  // The sigma^2 ||v||^2 term is kept even though C3 pins ||v|| = 1, so the
  // quotient stays correct for unnormalized intermediate vectors.
  denom += cfg.noise_watt * v.squaredNorm();
  return signal / denom;
}

double user_rate(const SolutionState& state, const SystemConfig& cfg, int k) {
  return std::log2(1.0 + sinr(state, cfg, k));
}

double sum_rate(const SolutionState& state, const SystemConfig& cfg) {
  double r = 0.0;
  for (int k = 0; k < state.V.cols(); ++k) r += user_rate(state, cfg, k);
  return r;
}

double total_power(const SolutionState& state, const SystemConfig& cfg) {
  return state.p.sum() / cfg.amp_efficiency + cfg.circuit_power_watt;
}

double energy_efficiency(const SolutionState& state, const SystemConfig& cfg) {
  return sum_rate(state, cfg) / total_power(state, cfg);
}

double ConstraintAudit::worst() const {
  return std::max({c1_rate_qos, c2_power_box, c3_postcoder_norm, c4_unit_modulus,
                   c5_bs_region, c6_ris_region, c7_bs_spacing, c8_ris_spacing});
}

ConstraintAudit audit(const SolutionState& state, const SystemConfig& cfg) {
  ConstraintAudit out;
  const int K = static_cast<int>(state.p.size());

  double worst_rate = 0.0;
  if (cfg.rate_threshold_bpshz > 0.0) {
    worst_rate = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k)
      worst_rate =
          std::max(worst_rate, cfg.rate_threshold_bpshz - user_rate(state, cfg, k));
  }
  out.c1_rate_qos = worst_rate;

  double box = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k)
    box = std::max({box, -state.p[k], state.p[k] - cfg.pmax_watt});
  out.c2_power_box = box;

  double vnorm = 0.0;
  for (int k = 0; k < K; ++k)
    vnorm = std::max(vnorm, std::abs(state.V.col(k).norm() - 1.0));
  out.c3_postcoder_norm = vnorm;

  // Phases parameterize the diagonal directly, so |e^{j theta}| - 1 = 0.
  out.c4_unit_modulus = 0.0;

  auto region_residual = [](const PositionSet& ps) {
    double r = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < ps.count(); ++i) {
      const Vec2 x = ps.coords.col(i);
      r = std::max({r, -x[0], x[0] - ps.region_side, -x[1], x[1] - ps.region_side});
    }
    return r;
  };
  out.c5_bs_region = region_residual(state.U);
  out.c6_ris_region = region_residual(state.T);

  out.c7_bs_spacing = state.U.count() > 1
                          ? state.U.min_spacing - state.U.min_pairwise_distance()
                          : 0.0;
  out.c8_ris_spacing = state.T.count() > 1
                           ? state.T.min_spacing - state.T.min_pairwise_distance()
                           : 0.0;
  return out;
}

} // namespace meris
