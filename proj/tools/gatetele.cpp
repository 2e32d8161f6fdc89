// gatetele: simulate, reconstruct and report on CNOT gate teleportation.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gatetele/cli.hpp"

namespace {

void add_common(CLI::App* cmd, gatetele::cli::CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Random seed (overrides config)");
  cmd->add_option("--counts", o.counts, "Mean coincidences per analyzer setting");
  cmd->add_option("--out", o.out, "Output directory (default: config, then $GATETELE_OUT_DIR, then ./out)");
  cmd->add_flag("--exact", o.exact, "Use exact probabilities instead of Poisson counts");
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = gatetele::cli;
  CLI::App app{"Teleported CNOT gate: identity check, optics simulation and tomography"};
  app.require_subcommand(1);

  int num_inputs = 100;
  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "Check the gate-teleportation identity on canonical and random inputs");
  verify->add_option("--inputs", num_inputs, "Number of Haar-random inputs")->capture_default_str();
  verify->add_option("--seed", verify_seed, "Seed for the random inputs")->capture_default_str();

  cli::CommonOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Write coincidence tables for the configured input");
  add_common(simulate, sim_opts);

  cli::CommonOptions state_opts;
  std::vector<std::string> count_files;
  auto* tomo_state = app.add_subcommand("tomo-state", "Reconstruct the output state from coincidence tables");
  add_common(tomo_state, state_opts);
  tomo_state->add_option("tables", count_files, "Count or probability tables (CSV/JSON); simulated if omitted");

  cli::CommonOptions proc_opts;
  auto* tomo_process = app.add_subcommand("tomo-process", "Run the 16-input campaign and reconstruct chi");
  add_common(tomo_process, proc_opts);

  std::string artifacts = "out";
  auto* report = app.add_subcommand("report", "Summarize state and process artifacts into summary.json");
  report->add_option("dir", artifacts, "Artifacts directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kUsage;
  }

  if (*verify) return cli::cmd_verify(num_inputs, verify_seed, std::cout, std::cerr);
  if (*simulate) return cli::cmd_simulate(sim_opts, std::cout, std::cerr);
  if (*tomo_state) return cli::cmd_tomo_state(state_opts, count_files, std::cout, std::cerr);
  if (*tomo_process) return cli::cmd_tomo_process(proc_opts, std::cout, std::cerr);
  if (*report) return cli::cmd_report(artifacts, std::cout, std::cerr);
  return cli::kUsage;
}
