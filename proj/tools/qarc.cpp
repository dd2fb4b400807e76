#include <string>

#include <CLI11.hpp>

#include "qarc/experiment.hpp"

namespace qx = qarc::experiment;

int main(int argc, char** argv) {
  CLI::App app{"qarc: trace-driven rate-control experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir, policy, preset, target;
  std::size_t workers = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--seed", seed, "root seed (overrides config)");
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--workers", workers, "training workers (overrides config)");
    cmd->add_option("--policy", policy, "eval policy: all, qarc, fixed:<idx>, loss, delay, offline-optimal");
    cmd->add_option("--preset", preset, "QoE weights preset")
        ->check(CLI::IsMember({"baseline-qoe", "beta10-qoe"}));
    return cmd;
  };

  add_common(app.add_subcommand("gen-data", "generate seeded trace/quality/clip corpora"));
  add_common(app.add_subcommand("train-vqpn", "train the quality prediction network"));
  add_common(app.add_subcommand("train-vqrl", "train the rate-control agent"));
  add_common(app.add_subcommand("eval", "compare policies over a trace corpus"));
  add_common(app.add_subcommand("sweep", "hyperparameter sweeps"))
      ->add_option("--target", target, "vqpn-table1 or vqrl-fig7")
      ->check(CLI::IsMember({"vqpn-table1", "vqrl-fig7"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : qx::kExitConfigError;
  }

  CLI::App* cmd = app.get_subcommands().front();
  qx::ExperimentConfig config;
  try {
    config = qx::load_config(config_path);
  } catch (const qx::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return qx::kExitConfigError;
  }
  // flags win over the config file
  if (cmd->count("--seed") > 0) config.seed = seed;
  if (cmd->count("--out") > 0) config.out_dir = out_dir;
  if (cmd->count("--workers") > 0) config.trainer.workers = workers;
  if (cmd->count("--policy") > 0) config.policy = policy;
  if (cmd->count("--preset") > 0) config.preset = preset;
  if (cmd->get_name() == "sweep" && cmd->count("--target") > 0) {
    config.sweep_target = target;
  }
  return qx::run_command(cmd->get_name(), config);
}
