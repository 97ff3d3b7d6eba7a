#include "meris/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace meris {

using nlohmann::json;

std::string SchemeFlags::name() const {
  std::string s = bs_movable ? "ma" : "fa";
  s += ris_movable ? "-me" : "-fe";
  return s;
}

SchemeFlags SchemeFlags::parse(const std::string& name) {
  if (name == "ma-me") return {true, true};
  if (name == "ma-fe") return {true, false};
  if (name == "fa-me") return {false, true};
  if (name == "fa-fe") return {false, false};
  throw std::invalid_argument("scheme: unknown name '" + name +
                              "' (expected ma-me|ma-fe|fa-me|fa-fe)");
}

namespace {

[[noreturn]] void reject(const std::string& field, double value,
                         const std::string& constraint) {
  std::ostringstream os;
  os << "config: field '" << field << "' = " << value
     << " violates constraint: " << constraint;
  throw std::invalid_argument(os.str());
}

void require_positive(const std::string& field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) reject(field, v, "> 0 and finite");
}

} // namespace

void SystemConfig::validate() const {
  if (num_bs_antennas < 1) reject("num_bs_antennas", num_bs_antennas, ">= 1");
  if (num_ris_elements < 1) reject("num_ris_elements", num_ris_elements, ">= 1");
  if (num_users < 1) reject("num_users", num_users, ">= 1");
  if (num_paths < 1) reject("num_paths", num_paths, ">= 1");
  if (num_paths_rb < 1 || num_paths_bu < 1 || num_paths_ru < 1)
    reject("num_paths_*", std::min({num_paths_rb, num_paths_bu, num_paths_ru}), ">= 1");

  require_positive("carrier_freq_hz", carrier_freq_hz);
  const double lambda = kSpeedOfLight / carrier_freq_hz;
  if (std::abs(wavelength_m - lambda) > 1e-9 * lambda)
    reject("wavelength_m", wavelength_m, "wavelength_m = c / carrier_freq_hz");
  require_positive("region_side_m", region_side_m);
  require_positive("min_spacing_m", min_spacing_m);
  if (min_spacing_m > region_side_m)
    reject("min_spacing_m", min_spacing_m, "d0 <= A (region_side_m)");

  require_positive("pmax_watt", pmax_watt);
  require_positive("noise_watt", noise_watt);
  require_positive("circuit_power_watt", circuit_power_watt);
  if (!(amp_efficiency > 0.0 && amp_efficiency <= 1.0))
    reject("amp_efficiency", amp_efficiency, "in (0, 1]");
  if (rate_threshold_bpshz < 0.0)
    reject("rate_threshold_bpshz", rate_threshold_bpshz, ">= 0");

  require_positive("alpha_direct", alpha_direct);
  require_positive("alpha_ris_bs", alpha_ris_bs);
  require_positive("alpha_user_ris", alpha_user_ris);
  require_positive("ref_gain_beta0", ref_gain_beta0);

  if (!(user_ring_min_m < user_ring_max_m))
    reject("user_ring_min_m", user_ring_min_m, "user_ring_min_m < user_ring_max_m");

  const auto& t = tol;
  const std::pair<const char*, double> tol_fields[] = {
      {"ao_eps", t.ao_eps},
      {"dinkelbach_eps", t.dinkelbach_eps},
      {"sca_eps", t.sca_eps},
      {"kkt_eps", t.kkt_eps},
      {"trust_radius_phase", t.trust_radius_phase},
      {"trust_radius_pos_wl", t.trust_radius_pos_wl}};
  for (auto [n, v] : tol_fields) require_positive(n, v);
  if (!(t.trust_shrink > 0.0 && t.trust_shrink < 1.0 && t.trust_grow > 1.0))
    reject("trust_shrink/trust_grow", t.trust_shrink,
           "0 < trust_shrink < 1 < trust_grow");
  if (t.n_max_ao < 0) reject("n_max_ao", t.n_max_ao, ">= 0");
  if (t.n_max_inner < 1) reject("n_max_inner", t.n_max_inner, ">= 1");
}

namespace {

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) return it->get<T>();
  return fallback;
}

Eigen::Vector3d get_vec3(const json& j, const std::string& key,
                         const Eigen::Vector3d& fallback) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    auto v = it->get<std::vector<double>>();
    if (v.size() != 3) throw std::invalid_argument("config: '" + key + "' must have 3 entries");
    return Eigen::Vector3d(v[0], v[1], v[2]);
  }
  return fallback;
}

} // namespace

SystemConfig load_config(const json& doc) {
  SystemConfig c;

  c.num_bs_antennas = get_or(doc, "num_bs_antennas", c.num_bs_antennas);
  c.num_ris_elements = get_or(doc, "num_ris_elements", c.num_ris_elements);
  c.num_users = get_or(doc, "num_users", c.num_users);
  c.num_paths = get_or(doc, "num_paths", c.num_paths);
  c.num_paths_rb = get_or(doc, "num_paths_rb", c.num_paths);
  c.num_paths_bu = get_or(doc, "num_paths_bu", c.num_paths);
  c.num_paths_ru = get_or(doc, "num_paths_ru", c.num_paths);

  c.carrier_freq_hz = get_or(doc, "carrier_freq_hz", c.carrier_freq_hz);
  c.wavelength_m = kSpeedOfLight / c.carrier_freq_hz;
  c.region_side_m = get_or(doc, "region_side_m", 4.0 * c.wavelength_m);
  c.min_spacing_m = get_or(doc, "min_spacing_m", 0.5 * c.wavelength_m);

  c.pmax_watt = doc.contains("pmax_watt") ? doc["pmax_watt"].get<double>()
                                          : dbm_to_watt(get_or(doc, "pmax_dbm", 20.0));
  c.noise_watt = doc.contains("noise_watt") ? doc["noise_watt"].get<double>()
                                            : dbm_to_watt(get_or(doc, "noise_dbm", -90.0));
  c.circuit_power_watt = doc.contains("circuit_power_watt")
                             ? doc["circuit_power_watt"].get<double>()
                             : dbm_to_watt(get_or(doc, "circuit_power_dbm", 20.0));
  c.amp_efficiency = get_or(doc, "amp_efficiency", c.amp_efficiency);
  c.rate_threshold_bpshz = get_or(doc, "rate_threshold_bpshz", c.rate_threshold_bpshz);

  c.alpha_direct = get_or(doc, "alpha_direct", c.alpha_direct);
  c.alpha_ris_bs = get_or(doc, "alpha_ris_bs", c.alpha_ris_bs);
  c.alpha_user_ris = get_or(doc, "alpha_user_ris", c.alpha_user_ris);
  c.ref_gain_beta0 = get_or(doc, "ref_gain_beta0", c.ref_gain_beta0);

  c.bs_pos = get_vec3(doc, "bs_pos", c.bs_pos);
  c.ris_pos = get_vec3(doc, "ris_pos", c.ris_pos);
  c.user_ring_min_m = get_or(doc, "user_ring_min_m", c.user_ring_min_m);
  c.user_ring_max_m = get_or(doc, "user_ring_max_m", c.user_ring_max_m);
  c.user_height_m = get_or(doc, "user_height_m", c.user_height_m);

  if (doc.contains("scheme")) {
    if (doc["scheme"].is_string()) {
      c.scheme = SchemeFlags::parse(doc["scheme"].get<std::string>());
    } else {
      c.scheme.bs_movable = get_or(doc["scheme"], "bs_movable", true);
      c.scheme.ris_movable = get_or(doc["scheme"], "ris_movable", true);
    }
  }

  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    c.tol.ao_eps = get_or(t, "ao_eps", c.tol.ao_eps);
    c.tol.dinkelbach_eps = get_or(t, "dinkelbach_eps", c.tol.dinkelbach_eps);
    c.tol.sca_eps = get_or(t, "sca_eps", c.tol.sca_eps);
    c.tol.kkt_eps = get_or(t, "kkt_eps", c.tol.kkt_eps);
    c.tol.n_max_ao = get_or(t, "n_max_ao", c.tol.n_max_ao);
    c.tol.n_max_inner = get_or(t, "n_max_inner", c.tol.n_max_inner);
    c.tol.trust_radius_phase = get_or(t, "trust_radius_phase", c.tol.trust_radius_phase);
    c.tol.trust_radius_pos_wl = get_or(t, "trust_radius_pos_wl", c.tol.trust_radius_pos_wl);
    c.tol.trust_shrink = get_or(t, "trust_shrink", c.tol.trust_shrink);
    c.tol.trust_grow = get_or(t, "trust_grow", c.tol.trust_grow);
    c.tol.trust_accept_ratio = get_or(t, "trust_accept_ratio", c.tol.trust_accept_ratio);
  }

  c.seed = get_or(doc, "seed", c.seed);
  c.init_retries = get_or(doc, "init_retries", c.init_retries);

  c.validate();
  return c;
}

SystemConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open file: " + path);
  json doc = json::parse(in);
  return load_config(doc);
}

json to_json(const SystemConfig& c) {
  json t{{"ao_eps", c.tol.ao_eps},
         {"dinkelbach_eps", c.tol.dinkelbach_eps},
         {"sca_eps", c.tol.sca_eps},
         {"kkt_eps", c.tol.kkt_eps},
         {"n_max_ao", c.tol.n_max_ao},
         {"n_max_inner", c.tol.n_max_inner},
         {"trust_radius_phase", c.tol.trust_radius_phase},
         {"trust_radius_pos_wl", c.tol.trust_radius_pos_wl},
         {"trust_shrink", c.tol.trust_shrink},
         {"trust_grow", c.tol.trust_grow},
         {"trust_accept_ratio", c.tol.trust_accept_ratio}};
  return json{
      {"num_bs_antennas", c.num_bs_antennas},
      {"num_ris_elements", c.num_ris_elements},
      {"num_users", c.num_users},
      {"num_paths", c.num_paths},
      {"num_paths_rb", c.num_paths_rb},
      {"num_paths_bu", c.num_paths_bu},
      {"num_paths_ru", c.num_paths_ru},
      {"carrier_freq_hz", c.carrier_freq_hz},
      {"region_side_m", c.region_side_m},
      {"min_spacing_m", c.min_spacing_m},
      {"pmax_watt", c.pmax_watt},
      {"noise_watt", c.noise_watt},
      {"circuit_power_watt", c.circuit_power_watt},
      {"amp_efficiency", c.amp_efficiency},
      {"rate_threshold_bpshz", c.rate_threshold_bpshz},
      {"alpha_direct", c.alpha_direct},
      {"alpha_ris_bs", c.alpha_ris_bs},
      {"alpha_user_ris", c.alpha_user_ris},
      {"ref_gain_beta0", c.ref_gain_beta0},
      {"bs_pos", {c.bs_pos.x(), c.bs_pos.y(), c.bs_pos.z()}},
      {"ris_pos", {c.ris_pos.x(), c.ris_pos.y(), c.ris_pos.z()}},
      {"user_ring_min_m", c.user_ring_min_m},
      {"user_ring_max_m", c.user_ring_max_m},
      {"user_height_m", c.user_height_m},
      {"scheme", c.scheme.name()},
      {"tolerances", t},
      {"seed", c.seed},
      {"init_retries", c.init_retries},
  };
}

bool operator==(const SystemConfig& a, const SystemConfig& b) {
  return to_json(a) == to_json(b);
}

} // namespace meris
