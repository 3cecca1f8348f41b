#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "flexsat/config.hpp"
#include "flexsat/runner.hpp"

namespace {

using namespace flexsat;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string schemes;
  int slots = 0;
  std::uint64_t seed = 0;
  double solver_budget_s = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--schemes", args.schemes,
                  "comma-separated subset of ospf,srv6,green,flexalgo");
  cmd->add_option("--slots", args.slots, "number of slots to run")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args.seed, "demand jitter seed (reserved)");
  cmd->add_option("--solver-budget-s", args.solver_budget_s,
                  "per-solve MILP budget in seconds")
      ->check(CLI::PositiveNumber);
}

// Config file first, then flag overrides, then semantic validation.
RunConfig resolve(const CLI::App* cmd, const CommonArgs& args) {
  RunConfig cfg;
  if (cmd->count("--config")) cfg = load_config_file(args.config_path);
  if (cmd->count("--out")) cfg.output_dir = args.out_dir;
  if (cmd->count("--schemes")) cfg.schemes = parse_scheme_list(args.schemes);
  if (cmd->count("--slots")) cfg.total_slots = args.slots;
  if (cmd->count("--seed")) cfg.seed = args.seed;
  if (cmd->count("--solver-budget-s")) cfg.solver_budget_s = args.solver_budget_s;
  validate_config(cfg);
  return cfg;
}

// Persistent breach: solver budget overruns on more than 5% of the
// MILP-solving scheme-slots in the run.
bool persistent_breach(const RunConfig& cfg, const RunSummary& summary) {
  int milp_slots = 0;
  for (Scheme s : cfg.schemes) {
    if (s == Scheme::kGreen || s == Scheme::kFlexAlgo) milp_slots += cfg.total_slots;
  }
  return milp_slots > 0 && summary.budget_breach_slots * 20 > milp_slots;
}

void print_summary(const RunConfig& cfg, const RunSummary& summary) {
  std::printf("%-10s %9s %9s %12s %11s %11s\n", "scheme", "cpu_mean", "pdr_mean",
              "latency_ms", "solve_p50_s", "solve_p95_s");
  for (const auto& [scheme, s] : summary.schemes) {
    std::printf("%-10s %9.2f %9.4f %12.2f %11.3f %11.3f\n", to_string(scheme),
                s.cpu_mean, s.pdr_mean, s.latency_mean, s.solve_time_p50_s,
                s.solve_time_p95_s);
  }
  if (summary.cpu_reduction_vs_ospf) {
    std::printf("cpu reduction vs ospf: %.1f%%\n",
                100.0 * *summary.cpu_reduction_vs_ospf);
  }
  if (summary.min_burst_pdr) {
    std::printf("min burst pdr (flexalgo): %.4f\n", *summary.min_burst_pdr);
  }
  if (summary.urgent_latency_delta_ms) {
    std::printf("urgent latency delta: %.2f ms\n", *summary.urgent_latency_delta_ms);
  }
  std::printf("audit violations: %d;  budget breach slots: %d;  "
              "unrouted-demand slots: %d\n",
              summary.audit_violations, summary.budget_breach_slots,
              summary.unrouted_demand_slots);
  std::printf("outputs written to %s\n", cfg.output_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slice-based traffic engineering over a LEO constellation"};
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* cmd_run = app.add_subcommand("run", "execute the configured scenario");
  add_common(cmd_run, run_args);

  CommonArgs validate_args;
  CLI::App* cmd_validate =
      app.add_subcommand("validate", "schema-check a config and echo it resolved");
  add_common(cmd_validate, validate_args);

  CommonArgs export_args;
  std::string ledger_dir;
  CLI::App* cmd_export =
      app.add_subcommand("export", "re-derive CDFs and the summary from a ledger");
  add_common(cmd_export, export_args);
  cmd_export->add_option("ledger", ledger_dir, "directory holding metrics.csv")
      ->required();

  CommonArgs lp_args;
  int lp_slot = 0;
  int lp_algo = 130;
  CLI::App* cmd_lp =
      app.add_subcommand("lpdump", "write one slot's slice MILP in LP format");
  add_common(cmd_lp, lp_args);
  cmd_lp->add_option("--slot", lp_slot, "slot to replay to")
      ->check(CLI::NonNegativeNumber);
  cmd_lp->add_option("--algo", lp_algo, "slice algorithm id (128, 129 or 130)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      RunConfig cfg = resolve(cmd_run, run_args);
      RunSummary summary = run(cfg);
      print_summary(cfg, summary);
      if (persistent_breach(cfg, summary)) {
        std::cerr << "solver budget breached on " << summary.budget_breach_slots
                  << " slots\n";
        return 3;
      }
      return 0;
    }
    if (cmd_validate->parsed()) {
      RunConfig cfg = resolve(cmd_validate, validate_args);
      std::cout << echo_config(cfg);
      return 0;
    }
    if (cmd_export->parsed()) {
      RunConfig cfg = resolve(cmd_export, export_args);
      std::string out = cmd_export->count("--out") ? export_args.out_dir : ledger_dir;
      export_from_ledger(cfg, ledger_dir, out);
      std::cout << "exported to " << out << '\n';
      return 0;
    }
    if (cmd_lp->parsed()) {
      RunConfig cfg = resolve(cmd_lp, lp_args);
      if (cmd_lp->count("--out")) {
        std::filesystem::create_directories(lp_args.out_dir);
        std::filesystem::path p = std::filesystem::path(lp_args.out_dir) /
                                  ("slice" + std::to_string(lp_algo) + "_slot" +
                                   std::to_string(lp_slot) + ".lp");
        std::ofstream out(p);
        dump_lp(cfg, lp_slot, lp_algo, out);
        std::cout << p.string() << '\n';
      } else {
        dump_lp(cfg, lp_slot, lp_algo, std::cout);
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
