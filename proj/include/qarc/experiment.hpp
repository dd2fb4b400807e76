#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "qarc/netsim.hpp"
#include "qarc/qoe.hpp"
#include "qarc/vqpn.hpp"
#include "qarc/vqrl.hpp"

namespace qarc::experiment {

// Exit statuses: bad configuration, unreadable or inconsistent input data,
// and everything else that fails at runtime.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;
inline constexpr int kExitRuntimeError = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string data_dir;      // input corpus root; defaults to out_dir
  std::string checkpoint;    // defaults to <out_dir>/<command>.ckpt
  std::string preset = "baseline-qoe";
  std::string policy = "all";  // eval: all | qarc | fixed:<idx> | loss | delay | offline-optimal
  std::string sweep_target = "vqpn-table1";  // or vqrl-fig7

  // gen-data
  std::size_t num_traces = 12;
  std::size_t trace_len = 150;
  std::size_t num_clips = 1;

  double train_fraction = 0.8;

  netsim::SimConfig sim;
  vqpn::VqpnConfig vqpn;
  vqpn::TrainOptions vqpn_train;
  vqrl::TrainerConfig trainer;

  std::string resolved_data_dir() const { return data_dir.empty() ? out_dir : data_dir; }
};

// Parses a JSON config file; unknown keys are config errors. An empty path
// returns the defaults.
ExperimentConfig load_config(const std::string& path);

// Serialized next to each command's outputs so runs are reproducible from the
// manifest alone.
void write_resolved_config(const ExperimentConfig& config, const std::string& path);

qoe::QoeWeights preset_weights(const std::string& name);

int cmd_gen_data(const ExperimentConfig& config);
int cmd_train_vqpn(const ExperimentConfig& config);
int cmd_train_vqrl(const ExperimentConfig& config);
int cmd_eval(const ExperimentConfig& config);
int cmd_sweep(const ExperimentConfig& config);

// Dispatches a subcommand and maps exceptions onto the exit statuses above;
// error text goes to stderr.
int run_command(const std::string& command, const ExperimentConfig& config);

// Combined policy + value checkpoints for the rate-control agent.
void save_agent_checkpoint(const std::string& path, vqrl::CentralStore& store);
void load_agent_checkpoint(const std::string& path, vqrl::PolicyNet& policy);

}  // namespace qarc::experiment
