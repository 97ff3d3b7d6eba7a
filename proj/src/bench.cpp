#include "meris/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace meris {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string timestamp_line() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return std::string("# generated ") + buf + "\n";
}

// Fixed-size worker pool over trial indices; results land in index-addressed
// slots so aggregation order never depends on scheduling.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, count));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

} // namespace

SystemConfig apply_sweep_value(const SystemConfig& base, const std::string& variable,
                               double value) {
  SystemConfig cfg = base;
  if (variable == "pmax_dbm") cfg.pmax_watt = dbm_to_watt(value);
  else if (variable == "num_ris_elements") cfg.num_ris_elements = static_cast<int>(value);
  else if (variable == "num_bs_antennas") cfg.num_bs_antennas = static_cast<int>(value);
  else if (variable == "num_users") cfg.num_users = static_cast<int>(value);
  else if (variable != "none")
    throw std::invalid_argument("run_sweep: unknown sweep variable '" + variable + "'");
  cfg.validate();
  return cfg;
}

SweepResult run_sweep(const SystemConfig& base, const SweepSpec& spec,
                      const std::vector<SchemeFlags>& schemes, int trials,
                      std::uint64_t seed, int threads) {
  if (trials < 1) throw std::invalid_argument("run_sweep: trials must be >= 1");
  SweepResult result;
  result.spec = spec;

  const std::vector<double> values =
      spec.values.empty() ? std::vector<double>{0.0} : spec.values;

  for (double value : values) {
    const SystemConfig swept = apply_sweep_value(base, spec.variable, value);
    for (const SchemeFlags& scheme : schemes) {
      SystemConfig cfg = swept;
      cfg.scheme = scheme;

      std::vector<double> ee(trials, std::numeric_limits<double>::quiet_NaN());
      parallel_for(trials, threads, [&](int t) {
        // Trial streams keyed by (seed, trial) only: paired channels across
        // schemes and sweep values.
        Rng rng = Rng(seed).derive(static_cast<std::uint64_t>(t));
        const TrialRun run = run_trial(cfg, rng);
        if (run.report.feasible) ee[t] = run.state.ee;
      });

      SweepCell cell;
      cell.sweep_value = value;
      cell.scheme = scheme.name();
      cell.trials = trials;
      double sum = 0.0, sum2 = 0.0;
      for (int t = 0; t < trials; ++t) {
        if (std::isnan(ee[t])) {
          ++cell.outages;
          continue;
        }
        cell.trial_ee.push_back(ee[t]);
        cell.trial_index.push_back(t);
        sum += ee[t];
        sum2 += ee[t] * ee[t];
      }
      const int n = static_cast<int>(cell.trial_ee.size());
      if (n > 0) {
        cell.mean_ee = sum / n;
        if (n > 1) {
          const double var = (sum2 - sum * sum / n) / (n - 1);
          cell.stderr_ee = std::sqrt(std::max(0.0, var) / n);
        }
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

std::vector<ConvergenceRow> run_convergence(const SystemConfig& base,
                                            const std::vector<int>& ris_sizes,
                                            int trials, std::uint64_t seed,
                                            int threads) {
  std::vector<ConvergenceRow> rows;
  for (int N : ris_sizes) {
    SystemConfig cfg = base;
    cfg.num_ris_elements = N;
    cfg.validate();

    std::vector<std::vector<double>> traces(trials);
    parallel_for(trials, threads, [&](int t) {
      Rng rng = Rng(seed).derive(static_cast<std::uint64_t>(t));
      const TrialRun run = run_trial(cfg, rng);
      if (run.report.feasible) traces[t] = run.report.ee_per_iteration;
    });

    for (int t = 0; t < trials; ++t)
      for (size_t it = 0; it < traces[t].size(); ++it)
        rows.push_back({static_cast<int>(it), traces[t][it], t, N});
  }
  return rows;
}

void emit_sweep_csv(const SweepResult& result, const std::string& path) {
  if (result.cells.empty())
    throw std::runtime_error("emit_sweep_csv: empty result table, no file written");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_sweep_csv: cannot open " + path);
  out << timestamp_line();
  out << "sweep_value,scheme,mean_ee,stderr,outages\n";
  for (const SweepCell& c : result.cells)
    out << format_double(c.sweep_value) << ',' << c.scheme << ','
        << format_double(c.mean_ee) << ',' << format_double(c.stderr_ee) << ','
        << c.outages << '\n';
  if (!out) throw std::runtime_error("emit_sweep_csv: write failed: " + path);
}

void emit_convergence_csv(const std::vector<ConvergenceRow>& rows,
                          const std::string& path) {
  if (rows.empty())
    throw std::runtime_error("emit_convergence_csv: empty table, no file written");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_convergence_csv: cannot open " + path);
  out << timestamp_line();
  out << "iteration,EE,trial,N\n";
  for (const ConvergenceRow& r : rows)
    out << r.iteration << ',' << format_double(r.ee) << ',' << r.trial << ','
        << r.num_ris_elements << '\n';
  if (!out) throw std::runtime_error("emit_convergence_csv: write failed: " + path);
}

void emit_manifest(const SystemConfig& cfg, std::uint64_t seed,
                   const std::string& path) {
  const nlohmann::json doc = to_json(cfg);
  const std::string serialized = doc.dump();
  const std::size_t hash = std::hash<std::string>{}(serialized);

  nlohmann::json manifest{
      {"config", doc},
      {"config_hash", hash},
      {"seed", seed},
      {"version", "0.1.0"},
  };
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_manifest: cannot open " + path);
  out << manifest.dump(2) << '\n';
}

} // namespace meris
