#pragma once

#include "meris/config.hpp"
#include "meris/rng.hpp"
#include "meris/types.hpp"

#include <vector>

namespace meris {

// Per-path angles at one array side, plus the derived planar wave vectors
// kappa_l = (2*pi/lambda) [sin(theta) cos(phi), sin(theta) sin(phi)].
struct PathGeometry {
  Vec elevation;  // L, radians
  Vec azimuth;    // L, radians
  Mat wave_vectors;  // 2 x L, rad/m

  int num_paths() const { return static_cast<int>(elevation.size()); }
};

PathGeometry make_path_geometry(const Vec& elevation, const Vec& azimuth,
                                double wavelength_m);

// Multipath description of one link: far-field angles at each end and the
// complex per-path response (the diagonal of Sigma).
struct LinkPaths {
  PathGeometry tx_geometry;   // side whose field response multiplies from the right
  PathGeometry rx_geometry;   // side whose field response is conjugated
  VecC path_response;         // L
  double link_distance_m = 0.0;
  double path_loss_exponent = 0.0;
};

// Stacked planar coordinates of the BS antennas (U) or RIS elements (T).
struct PositionSet {
  Mat coords;          // 2 x count, meters, inside [0, A]^2
  double region_side = 0.0;  // A
  double min_spacing = 0.0;  // d0

  int count() const { return static_cast<int>(coords.cols()); }
  bool inside_region(double tol = 0.0) const;
  double min_pairwise_distance() const;
};

struct ChannelSet {
  MatC H;                // M x N
  std::vector<VecC> h;   // K vectors, length M
  std::vector<VecC> g;   // K vectors, length N
};

// One Monte Carlo draw of the random propagation geometry.
struct TrialGeometry {
  LinkPaths ris_bs;               // H
  std::vector<LinkPaths> user_bs;  // h_k
  std::vector<LinkPaths> user_ris; // g_k
  std::vector<Eigen::Vector3d> user_pos;
};

// Draws path angles (sin(theta) uniform on [0,1], phi uniform on [0,2pi)),
// user drops area-uniform in the configured annulus around the RIS, and
// CN(0, beta0 d^-alpha / L) path responses.
TrialGeometry sample_trial_geometry(const SystemConfig& cfg, Rng& rng);

// Field-response matrix: entry (l, i) = exp(j kappa_l . x_i), size L x count.
MatC field_response_matrix(const PositionSet& positions, const PathGeometry& geometry);

// H = F_RB(U)^H diag(Sigma_RB) E_RB(T); h_k = F_Bu,k(U)^H sigma_Bu,k;
// g_k = E_Ru,k(T)^H sigma_Ru,k.
ChannelSet assemble_channels(const TrialGeometry& geom, const PositionSet& U,
                             const PositionSet& T);

// Partial derivatives of the channel entries affected by one movable
// BS antenna: row m of H and entry m of every h_k, w.r.t. (x, y) of u_m.
struct AntennaJacobian {
  MatC dH_row;  // 2 x N (rows: d/dx, d/dy)
  MatC dh;      // 2 x K, column k is d h_k[m] / d(x, y)
};
AntennaJacobian antenna_position_jacobian(const TrialGeometry& geom,
                                          const PositionSet& U,
                                          const PositionSet& T, int m);

// Same for one RIS element: column n of H and entry n of every g_k.
struct ElementJacobian {
  MatC dH_col;  // 2 x M
  MatC dg;      // 2 x K
};
ElementJacobian element_position_jacobian(const TrialGeometry& geom,
                                          const PositionSet& U,
                                          const PositionSet& T, int n);

// Sequential rejection sampling uniform in [0, A]^2 with spacing d0, falling
// back to a deterministic half-wavelength grid after too many rejections.
PositionSet sample_positions(int count, const SystemConfig& cfg, Rng& rng);

// Deterministic half-wavelength grid placement (fixed-array baseline).
PositionSet grid_positions(int count, const SystemConfig& cfg);

} // namespace meris
