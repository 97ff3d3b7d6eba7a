// Command-line front end: single verbose trials, Monte Carlo sweeps and
// convergence traces, with CSV + manifest output.

#include "meris/bench.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

using namespace meris;

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string scheme;
  int threads = 0;
  std::string profile;  // "", "desk", "paper"
};

void add_common(CLI::App* cmd, CommonOpts& o, bool seed_required) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  auto* seed_opt =
      cmd->add_option("--seed", o.seed, "Base RNG seed")->each([&o](const std::string&) {
        o.seed_set = true;
      });
  if (seed_required) seed_opt->required();
  cmd->add_option("--scheme", o.scheme, "Scheme: ma-me|ma-fe|fa-me|fa-fe");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
  cmd->add_option("--profile", o.profile,
                  "Scale preset: desk (N=16,M=4,K=3) or paper (N=49,M=8,K=4)");
}

SystemConfig build_config(const CommonOpts& o) {
  SystemConfig cfg = o.config_path.empty() ? SystemConfig{} : load_config_file(o.config_path);
  if (o.profile == "desk") {
    cfg.num_ris_elements = 16;
    cfg.num_bs_antennas = 4;
    cfg.num_users = 3;
  } else if (o.profile == "paper") {
    cfg.num_ris_elements = 49;
    cfg.num_bs_antennas = 8;
    cfg.num_users = 4;
  } else if (!o.profile.empty()) {
    throw CLI::ValidationError("--profile must be desk or paper");
  }
  if (!o.scheme.empty()) cfg.scheme = SchemeFlags::parse(o.scheme);
  if (o.seed_set) cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

std::vector<SchemeFlags> parse_schemes(const std::string& csv) {
  std::vector<SchemeFlags> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(SchemeFlags::parse(tok));
  if (out.empty()) throw CLI::ValidationError("--schemes: empty list");
  return out;
}

int cmd_run(const CommonOpts& o) {
  const SystemConfig cfg = build_config(o);
  Rng rng(cfg.seed);
  const TrialRun run = run_trial(cfg, rng);

  std::printf("scheme=%s seed=%llu\n", cfg.scheme.name().c_str(),
              static_cast<unsigned long long>(cfg.seed));
  if (!run.report.feasible) {
    std::printf("trial infeasible after %d channel redraws\n",
                run.report.channel_redraws);
    return 2;
  }
  for (size_t i = 0; i < run.report.ee_per_iteration.size(); ++i)
    std::printf("iter %2zu  EE = %.6f bits/J/Hz\n", i,
                run.report.ee_per_iteration[i]);
  std::printf("terminated: %s after %d iterations (%.2f s)\n",
              run.report.termination.c_str(), run.report.iterations_used,
              run.report.wall_time_s);
  const ConstraintAudit& a = run.report.final_audit;
  std::printf("audit worst residuals: C1=%.2e C2=%.2e C3=%.2e C5=%.2e C6=%.2e "
              "C7=%.2e C8=%.2e\n",
              a.c1_rate_qos, a.c2_power_box, a.c3_postcoder_norm, a.c5_bs_region,
              a.c6_ris_region, a.c7_bs_spacing, a.c8_ris_spacing);
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& sweep_arg,
              const std::string& schemes_arg, int trials,
              const std::string& out_dir) {
  const SystemConfig cfg = build_config(o);

  SweepSpec spec;
  if (sweep_arg.empty()) {
    spec.variable = "none";
  } else {
    const auto eq = sweep_arg.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--sweep expects var=v1,v2,...");
    spec.variable = sweep_arg.substr(0, eq);
    std::stringstream ss(sweep_arg.substr(eq + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) spec.values.push_back(std::stod(tok));
  }

  const auto schemes = parse_schemes(schemes_arg);
  const SweepResult result =
      run_sweep(cfg, spec, schemes, trials, cfg.seed, o.threads);

  std::filesystem::create_directories(out_dir);
  emit_sweep_csv(result, out_dir + "/sweep.csv");
  emit_manifest(cfg, cfg.seed, out_dir + "/manifest.json");
  std::printf("wrote %s/sweep.csv (%zu cells)\n", out_dir.c_str(),
              result.cells.size());
  for (const SweepCell& c : result.cells)
    std::printf("  %-12g %-6s mean EE = %.5f +- %.5f  (outages %d/%d)\n",
                c.sweep_value, c.scheme.c_str(), c.mean_ee, c.stderr_ee,
                c.outages, c.trials);
  return 0;
}

int cmd_convergence(const CommonOpts& o, const std::string& sizes_arg, int trials,
                    const std::string& out_dir) {
  const SystemConfig cfg = build_config(o);
  std::vector<int> sizes;
  std::stringstream ss(sizes_arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) sizes.push_back(std::stoi(tok));
  if (sizes.empty()) sizes.push_back(cfg.num_ris_elements);

  const auto rows = run_convergence(cfg, sizes, trials, cfg.seed, o.threads);
  std::filesystem::create_directories(out_dir);
  emit_convergence_csv(rows, out_dir + "/convergence.csv");
  emit_manifest(cfg, cfg.seed, out_dir + "/manifest.json");
  std::printf("wrote %s/convergence.csv (%zu rows)\n", out_dir.c_str(), rows.size());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink EE simulator: movable-antenna BS + movable-element RIS"};
  app.require_subcommand(1);

  CommonOpts run_o, sweep_o, conv_o;
  std::string sweep_arg, schemes_arg = "ma-me,fa-me,ma-fe,fa-fe";
  std::string conv_sizes = "16";
  int sweep_trials = 20, conv_trials = 5;
  std::string sweep_out = "out", conv_out = "out";

  auto* run_cmd = app.add_subcommand("run", "Single trial with verbose trace");
  add_common(run_cmd, run_o, false);

  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep grid");
  add_common(sweep_cmd, sweep_o, true);
  sweep_cmd->add_option("--sweep", sweep_arg,
                        "Sweep spec, e.g. pmax_dbm=0,4,8,12,16,20");
  sweep_cmd->add_option("--schemes", schemes_arg, "Comma-separated scheme list");
  sweep_cmd->add_option("--trials", sweep_trials, "Trials per cell");
  sweep_cmd->add_option("--out", sweep_out, "Output directory");

  auto* conv_cmd = app.add_subcommand("convergence", "Per-iteration EE traces");
  add_common(conv_cmd, conv_o, true);
  conv_cmd->add_option("--ris-sizes", conv_sizes, "Comma-separated N values");
  conv_cmd->add_option("--trials", conv_trials, "Trials per N");
  conv_cmd->add_option("--out", conv_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run_o);
    if (sweep_cmd->parsed())
      return cmd_sweep(sweep_o, sweep_arg, schemes_arg, sweep_trials, sweep_out);
    if (conv_cmd->parsed())
      return cmd_convergence(conv_o, conv_sizes, conv_trials, conv_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
