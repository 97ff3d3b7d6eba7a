#include "meris/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace meris {

PathGeometry make_path_geometry(const Vec& elevation, const Vec& azimuth,
                                double wavelength_m) {
  if (elevation.size() != azimuth.size())
    throw std::invalid_argument("path geometry: angle vectors differ in length");
  PathGeometry g;
  g.elevation = elevation;
  g.azimuth = azimuth;
  const int L = static_cast<int>(elevation.size());
  g.wave_vectors.resize(2, L);
  const double k0 = kTwoPi / wavelength_m;
  for (int l = 0; l < L; ++l) {
    const double st = std::sin(elevation[l]);
    g.wave_vectors(0, l) = k0 * st * std::cos(azimuth[l]);
    g.wave_vectors(1, l) = k0 * st * std::sin(azimuth[l]);
  }
  return g;
}

bool PositionSet::inside_region(double tol) const {
  return (coords.array() >= -tol).all() &&
         (coords.array() <= region_side + tol).all();
}

double PositionSet::min_pairwise_distance() const {
  const int n = count();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      best = std::min(best, (coords.col(i) - coords.col(j)).norm());
  return best;
}

namespace {

PathGeometry draw_geometry(int L, double wavelength_m, Rng& rng) {
  Vec el(L), az(L);
  for (int l = 0; l < L; ++l) {
    el[l] = std::asin(rng.uniform());  // sin(theta) ~ U[0,1]
    az[l] = rng.uniform(0.0, kTwoPi);
  }
  return make_path_geometry(el, az, wavelength_m);
}

VecC draw_responses(int L, double beta0, double d, double alpha, Rng& rng) {
  const double var = beta0 * std::pow(d, -alpha) / static_cast<double>(L);
  VecC zeta(L);
  for (int l = 0; l < L; ++l) zeta[l] = rng.cnormal(var);
  return zeta;
}

} // namespace

TrialGeometry sample_trial_geometry(const SystemConfig& cfg, Rng& rng) {
  TrialGeometry geom;
  const double lambda = cfg.wavelength_m;

  // RIS-BS link: receive side at the BS (depends on U), transmit side at the
  // RIS (depends on T).
  const double d_rb = (cfg.bs_pos - cfg.ris_pos).norm();
  geom.ris_bs.rx_geometry = draw_geometry(cfg.num_paths_rb, lambda, rng);
  geom.ris_bs.tx_geometry = draw_geometry(cfg.num_paths_rb, lambda, rng);
  geom.ris_bs.link_distance_m = d_rb;
  geom.ris_bs.path_loss_exponent = cfg.alpha_ris_bs;
  geom.ris_bs.path_response =
      draw_responses(cfg.num_paths_rb, cfg.ref_gain_beta0, d_rb, cfg.alpha_ris_bs, rng);

  geom.user_bs.resize(cfg.num_users);
  geom.user_ris.resize(cfg.num_users);
  geom.user_pos.resize(cfg.num_users);
  for (int k = 0; k < cfg.num_users; ++k) {
    // Area-uniform drop in the annulus around the RIS.
    const double r2min = cfg.user_ring_min_m * cfg.user_ring_min_m;
    const double r2max = cfg.user_ring_max_m * cfg.user_ring_max_m;
    const double r = std::sqrt(rng.uniform(r2min, r2max));
    const double ang = rng.uniform(0.0, kTwoPi);
    geom.user_pos[k] = Eigen::Vector3d(cfg.ris_pos.x() + r * std::cos(ang),
                                       cfg.ris_pos.y() + r * std::sin(ang),
                                       cfg.user_height_m);

    LinkPaths& bu = geom.user_bs[k];
    bu.rx_geometry = draw_geometry(cfg.num_paths_bu, lambda, rng);
    bu.link_distance_m = (geom.user_pos[k] - cfg.bs_pos).norm();
    bu.path_loss_exponent = cfg.alpha_direct;
    bu.path_response = draw_responses(cfg.num_paths_bu, cfg.ref_gain_beta0,
                                      bu.link_distance_m, cfg.alpha_direct, rng);

    LinkPaths& ru = geom.user_ris[k];
    ru.rx_geometry = draw_geometry(cfg.num_paths_ru, lambda, rng);
    ru.link_distance_m = (geom.user_pos[k] - cfg.ris_pos).norm();
    ru.path_loss_exponent = cfg.alpha_user_ris;
    ru.path_response = draw_responses(cfg.num_paths_ru, cfg.ref_gain_beta0,
                                      ru.link_distance_m, cfg.alpha_user_ris, rng);
  }
  return geom;
}

MatC field_response_matrix(const PositionSet& positions, const PathGeometry& geometry) {
  const int L = geometry.num_paths();
  const int n = positions.count();
  MatC fr(L, n);
  for (int i = 0; i < n; ++i) {
    const Vec2 x = positions.coords.col(i);
    for (int l = 0; l < L; ++l) {
      const double phase = geometry.wave_vectors.col(l).dot(x);
      fr(l, i) = std::polar(1.0, phase);
    }
  }
  return fr;
}

ChannelSet assemble_channels(const TrialGeometry& geom, const PositionSet& U,
                             const PositionSet& T) {
  const int K = static_cast<int>(geom.user_bs.size());
  if (geom.user_ris.size() != geom.user_bs.size())
    throw std::invalid_argument("assemble_channels: user link count mismatch");

  ChannelSet ch;
  const MatC F_rb = field_response_matrix(U, geom.ris_bs.rx_geometry);
  const MatC E_rb = field_response_matrix(T, geom.ris_bs.tx_geometry);
  ch.H = F_rb.adjoint() * geom.ris_bs.path_response.asDiagonal() * E_rb;

  ch.h.resize(K);
  ch.g.resize(K);
  for (int k = 0; k < K; ++k) {
    const MatC F_bu = field_response_matrix(U, geom.user_bs[k].rx_geometry);
    ch.h[k] = F_bu.adjoint() * geom.user_bs[k].path_response;
    const MatC E_ru = field_response_matrix(T, geom.user_ris[k].rx_geometry);
    ch.g[k] = E_ru.adjoint() * geom.user_ris[k].path_response;
  }
  return ch;
}

AntennaJacobian antenna_position_jacobian(const TrialGeometry& geom,
                                          const PositionSet& U,
                                          const PositionSet& T, int m) {
  if (m < 0 || m >= U.count())
    throw std::out_of_range("antenna_position_jacobian: antenna index");
  const int N = T.count();
  const int K = static_cast<int>(geom.user_bs.size());
  const Vec2 u = U.coords.col(m);

  AntennaJacobian jac;
  jac.dH_row = MatC::Zero(2, N);
  jac.dh = MatC::Zero(2, K);

  // d/du of conj(exp(j kappa.u)) = -j kappa conj(exp(j kappa.u))
  {
    const PathGeometry& rx = geom.ris_bs.rx_geometry;
    const MatC E_rb = field_response_matrix(T, geom.ris_bs.tx_geometry);
    for (int l = 0; l < rx.num_paths(); ++l) {
      const Complex fconj = std::polar(1.0, -rx.wave_vectors.col(l).dot(u));
      const Complex w = fconj * geom.ris_bs.path_response[l];
      for (int axis = 0; axis < 2; ++axis) {
        const Complex coeff = -kJ * rx.wave_vectors(axis, l) * w;
        jac.dH_row.row(axis) += coeff * E_rb.row(l);
      }
    }
  }
  for (int k = 0; k < K; ++k) {
    const PathGeometry& rx = geom.user_bs[k].rx_geometry;
    for (int l = 0; l < rx.num_paths(); ++l) {
      const Complex fconj = std::polar(1.0, -rx.wave_vectors.col(l).dot(u));
      const Complex w = fconj * geom.user_bs[k].path_response[l];
      for (int axis = 0; axis < 2; ++axis)
        jac.dh(axis, k) += -kJ * rx.wave_vectors(axis, l) * w;
    }
  }
  return jac;
}

ElementJacobian element_position_jacobian(const TrialGeometry& geom,
                                          const PositionSet& U,
                                          const PositionSet& T, int n) {
  if (n < 0 || n >= T.count())
    throw std::out_of_range("element_position_jacobian: element index");
  const int M = U.count();
  const int K = static_cast<int>(geom.user_ris.size());
  const Vec2 t = T.coords.col(n);

  ElementJacobian jac;
  jac.dH_col = MatC::Zero(2, M);
  jac.dg = MatC::Zero(2, K);

  {
    const PathGeometry& tx = geom.ris_bs.tx_geometry;
    const MatC F_rb = field_response_matrix(U, geom.ris_bs.rx_geometry);
    for (int l = 0; l < tx.num_paths(); ++l) {
      const Complex e = std::polar(1.0, tx.wave_vectors.col(l).dot(t));
      const Complex w = geom.ris_bs.path_response[l] * e;
      for (int axis = 0; axis < 2; ++axis) {
        const Complex coeff = kJ * tx.wave_vectors(axis, l) * w;
        jac.dH_col.row(axis) += coeff * F_rb.row(l).conjugate();
      }
    }
  }
  for (int k = 0; k < K; ++k) {
    const PathGeometry& rx = geom.user_ris[k].rx_geometry;
    for (int l = 0; l < rx.num_paths(); ++l) {
      const Complex econj = std::polar(1.0, -rx.wave_vectors.col(l).dot(t));
      const Complex w = econj * geom.user_ris[k].path_response[l];
      for (int axis = 0; axis < 2; ++axis)
        jac.dg(axis, k) += -kJ * rx.wave_vectors(axis, l) * w;
    }
  }
  return jac;
}

PositionSet grid_positions(int count, const SystemConfig& cfg) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  double spacing = 0.5 * cfg.wavelength_m;
  if (cols > 1 && spacing * (cols - 1) > cfg.region_side_m)
    spacing = cfg.region_side_m / (cols - 1);
  if (count > 1 && spacing < cfg.min_spacing_m)
    throw std::runtime_error("grid_positions: region cannot hold the array at d0 spacing");

  const double extent = spacing * (cols - 1);
  const double off = 0.5 * (cfg.region_side_m - extent);
  PositionSet ps;
  ps.region_side = cfg.region_side_m;
  ps.min_spacing = cfg.min_spacing_m;
  ps.coords.resize(2, count);
  for (int i = 0; i < count; ++i) {
    ps.coords(0, i) = off + spacing * (i % cols);
    ps.coords(1, i) = off + spacing * (i / cols);
  }
  return ps;
}

PositionSet sample_positions(int count, const SystemConfig& cfg, Rng& rng) {
  PositionSet ps;
  ps.region_side = cfg.region_side_m;
  ps.min_spacing = cfg.min_spacing_m;
  ps.coords.resize(2, count);

  int rejections = 0;
  for (int i = 0; i < count;) {
    const Vec2 cand(rng.uniform(0.0, cfg.region_side_m),
                    rng.uniform(0.0, cfg.region_side_m));
    bool ok = true;
    for (int j = 0; j < i; ++j) {
      if ((cand - ps.coords.col(j).eval()).norm() < cfg.min_spacing_m) {
        ok = false;
        break;
      }
    }
    if (ok) {
      ps.coords.col(i) = cand;
      ++i;
    } else if (++rejections >= 10000) {
      return grid_positions(count, cfg);
    }
  }
  return ps;
}

} // namespace meris
