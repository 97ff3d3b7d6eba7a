#pragma once

#include "meris/types.hpp"

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace meris {

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

// Mobility of the BS array and the RIS element grid. The four combinations
// correspond to the MA-ME / MA-FE / FA-ME / FA-FE benchmark schemes.
struct SchemeFlags {
  bool bs_movable = true;
  bool ris_movable = true;

  std::string name() const;
  static SchemeFlags parse(const std::string& name);
  bool operator==(const SchemeFlags&) const = default;
};

struct ToleranceSet {
  double ao_eps = 1e-4;         // absolute EE improvement stopping threshold
  double dinkelbach_eps = 1e-6;
  double sca_eps = 1e-5;
  double kkt_eps = 1e-7;
  int n_max_ao = 50;
  int n_max_inner = 100;
  double trust_radius_phase = 0.25;       // radians
  double trust_radius_pos_wl = 0.1;       // in wavelengths
  double trust_shrink = 0.5;
  double trust_grow = 2.0;
  double trust_accept_ratio = 0.25;

  bool operator==(const ToleranceSet&) const = default;
};

// Full scenario description. Immutable after load_config(); all powers are in
// linear watts internally, dBm appears only in the config file / CLI.
struct SystemConfig {
  int num_bs_antennas = 8;    // M
  int num_ris_elements = 49;  // N
  int num_users = 4;          // K
  int num_paths = 4;          // shared L; per-link overrides below
  int num_paths_rb = 4;
  int num_paths_bu = 4;
  int num_paths_ru = 4;

  double carrier_freq_hz = 3e9;
  double wavelength_m = kSpeedOfLight / 3e9;
  double region_side_m = 4.0 * kSpeedOfLight / 3e9;  // A, default 4 lambda
  double min_spacing_m = 0.5 * kSpeedOfLight / 3e9;  // d0, default lambda/2

  double pmax_watt = dbm_to_watt(20.0);
  double noise_watt = dbm_to_watt(-90.0);
  double circuit_power_watt = dbm_to_watt(20.0);
  double amp_efficiency = 0.3;
  double rate_threshold_bpshz = 1.5;

  double alpha_direct = 3.9;   // user-BS (h_k)
  double alpha_ris_bs = 2.0;   // RIS-BS (H)
  double alpha_user_ris = 2.2; // user-RIS (g_k)
  double ref_gain_beta0 = 1e-3;

  Eigen::Vector3d bs_pos{0.0, 0.0, 15.0};
  Eigen::Vector3d ris_pos{10.0, 10.0, 10.0};
  double user_ring_min_m = 50.0;
  double user_ring_max_m = 70.0;
  double user_height_m = 1.5;

  SchemeFlags scheme;
  ToleranceSet tol;
  std::uint64_t seed = 1;
  int init_retries = 20;  // channel redraws before a trial counts as outage

  double trust_radius_pos_m() const { return tol.trust_radius_pos_wl * wavelength_m; }

  // Throws std::invalid_argument naming the violated field and constraint.
  void validate() const;
};

// Parse (with defaults for missing keys) and validate.
SystemConfig load_config(const nlohmann::json& doc);
SystemConfig load_config_file(const std::string& path);
nlohmann::json to_json(const SystemConfig& cfg);

bool operator==(const SystemConfig& a, const SystemConfig& b);

} // namespace meris
