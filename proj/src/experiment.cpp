#include "qarc/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "qarc/baselines.hpp"
#include "qarc/checkpoint.hpp"
#include "qarc/session.hpp"
#include "qarc/trace.hpp"

namespace qarc::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

qoe::QoeWeights preset_weights(const std::string& name) {
  if (name == "baseline-qoe") return qoe::QoeWeights::baseline();
  if (name == "beta10-qoe") return qoe::QoeWeights::beta10();
  throw ConfigError("unknown preset: " + name);
}

namespace {

void expect_keys(const json& j, std::initializer_list<const char*> allowed,
                 const std::string& scope) {
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError("unknown config key: " + scope + key);
    }
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void parse_sim(const json& j, netsim::SimConfig& sim) {
  expect_keys(j, {"slot_s", "packet_size_bytes", "queue_capacity"}, "sim.");
  get_if(j, "slot_s", sim.slot_s);
  get_if(j, "packet_size_bytes", sim.packet_size_bytes);
  get_if(j, "queue_capacity", sim.queue_capacity);
}

void parse_vqpn(const json& j, vqpn::VqpnConfig& cfg, vqpn::TrainOptions& opts) {
  expect_keys(j, {"mode", "filters", "hidden", "lr", "lambda", "max_epochs", "patience"},
              "vqpn.");
  if (auto it = j.find("mode"); it != j.end()) {
    cfg.mode = vqpn::mode_from_string(it->get<std::string>());
  }
  get_if(j, "filters", cfg.filters);
  get_if(j, "hidden", cfg.hidden);
  get_if(j, "lr", cfg.lr);
  get_if(j, "lambda", cfg.lambda);
  get_if(j, "max_epochs", opts.max_epochs);
  get_if(j, "patience", opts.patience);
}

void parse_trainer(const json& j, vqrl::TrainerConfig& t) {
  expect_keys(j,
              {"backbone", "seq_len", "channels", "merge", "gamma", "entropy_beta_start",
               "entropy_beta_end", "n_step", "lr_actor", "lr_critic", "workers",
               "iterations"},
              "trainer.");
  if (auto it = j.find("backbone"); it != j.end()) {
    t.net.backbone = vqrl::backbone_from_string(it->get<std::string>());
  }
  get_if(j, "seq_len", t.net.seq_len);
  get_if(j, "channels", t.net.channels);
  get_if(j, "merge", t.net.merge);
  get_if(j, "gamma", t.gamma);
  get_if(j, "entropy_beta_start", t.entropy_beta_start);
  get_if(j, "entropy_beta_end", t.entropy_beta_end);
  get_if(j, "n_step", t.n_step);
  get_if(j, "lr_actor", t.lr_actor);
  get_if(j, "lr_critic", t.lr_critic);
  get_if(j, "workers", t.workers);
  get_if(j, "iterations", t.iterations);
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) {
    throw DataError("missing input directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no " + ext + " files in " + dir.string());
  return files;
}

std::vector<trace::BandwidthTrace> load_traces(const fs::path& dir) {
  std::vector<trace::BandwidthTrace> traces;
  for (const fs::path& p : sorted_files(dir, ".txt")) {
    trace::BandwidthTrace tr = trace::parse_bandwidth_trace_file(p.string());
    tr.id = p.stem().string();
    traces.push_back(std::move(tr));
  }
  return traces;
}

std::vector<quality::QualityCurveSeries> load_series(const fs::path& dir) {
  std::vector<quality::QualityCurveSeries> series;
  for (const fs::path& p : sorted_files(dir, ".csv")) {
    quality::QualityCurveSeries s = quality::parse_quality_csv_file(p.string());
    s.id = p.stem().string();
    series.push_back(std::move(s));
  }
  return series;
}

std::string index_name(const char* stem, std::size_t i, const char* ext) {
  std::ostringstream os;
  os << stem << '_';
  os.width(3);
  os.fill('0');
  os << i << ext;
  return os.str();
}

// Piecewise-level Markov bandwidths straddling the candidate bitrates, so the
// best action varies across slots.
trace::MarkovTraceConfig markov_family(std::size_t length, std::uint64_t seed) {
  trace::MarkovTraceConfig cfg;
  cfg.state_mbps = {0.45, 0.7, 1.0, 1.3, 1.7};
  cfg.transition = {
      {0.70, 0.30, 0.00, 0.00, 0.00},
      {0.15, 0.60, 0.25, 0.00, 0.00},
      {0.00, 0.20, 0.60, 0.20, 0.00},
      {0.00, 0.00, 0.25, 0.60, 0.15},
      {0.00, 0.00, 0.00, 0.30, 0.70},
  };
  cfg.noise_std_mbps = 0.05;
  cfg.slot_s = 1.0;
  cfg.length = length;
  cfg.seed = seed;
  return cfg;
}

quality::Profile profile_for(std::size_t i) {
  switch (i % 3) {
    case 0: return quality::Profile::kStatic;
    case 1: return quality::Profile::kDynamic;
    default: return quality::Profile::kHybrid;
  }
}

struct EvalRow {
  std::string policy;
  std::string trace_id;
  double avg_quality = 0.0;
  double avg_send_mbps = 0.0;
  double avg_p95_qdelay_s = 0.0;
  double avg_loss = 0.0;
  double qoe = 0.0;
};

EvalRow summarize(const std::string& policy, const std::string& trace_id,
                  const std::vector<session::SessionStep>& steps,
                  const qoe::QoeWeights& weights) {
  EvalRow row;
  row.policy = policy;
  row.trace_id = trace_id;
  for (const session::SessionStep& s : steps) {
    row.avg_quality += s.quality;
    row.avg_send_mbps += s.report.send_rate_mbps;
    row.avg_p95_qdelay_s += s.report.p95_qdelay_s;
    row.avg_loss += s.report.loss_ratio;
  }
  const double n = static_cast<double>(steps.size());
  row.avg_quality /= n;
  row.avg_send_mbps /= n;
  row.avg_p95_qdelay_s /= n;
  row.avg_loss /= n;
  row.qoe = qoe::qoe_eval(session::to_trajectory(steps), weights);
  return row;
}

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
  out << "policy,trace_id,avg_quality,avg_send_mbps,avg_p95_qdelay_s,avg_loss,qoe\n";
  out.precision(17);
  for (const EvalRow& r : rows) {
    out << r.policy << ',' << r.trace_id << ',' << r.avg_quality << ',' << r.avg_send_mbps
        << ',' << r.avg_p95_qdelay_s << ',' << r.avg_loss << ',' << r.qoe << '\n';
  }
}

fs::path default_checkpoint(const ExperimentConfig& config, const char* name) {
  return config.checkpoint.empty() ? fs::path(config.out_dir) / name
                                   : fs::path(config.checkpoint);
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig config;
  if (path.empty()) return config;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    expect_keys(j,
                {"seed", "out_dir", "data_dir", "checkpoint", "preset", "policy",
                 "sweep_target", "num_traces", "trace_len", "num_clips",
                 "train_fraction", "sim", "vqpn", "trainer"},
                "");
    get_if(j, "seed", config.seed);
    get_if(j, "out_dir", config.out_dir);
    get_if(j, "data_dir", config.data_dir);
    get_if(j, "checkpoint", config.checkpoint);
    get_if(j, "preset", config.preset);
    get_if(j, "policy", config.policy);
    get_if(j, "sweep_target", config.sweep_target);
    get_if(j, "num_traces", config.num_traces);
    get_if(j, "trace_len", config.trace_len);
    get_if(j, "num_clips", config.num_clips);
    get_if(j, "train_fraction", config.train_fraction);
    if (auto it = j.find("sim"); it != j.end()) parse_sim(*it, config.sim);
    if (auto it = j.find("vqpn"); it != j.end()) {
      parse_vqpn(*it, config.vqpn, config.vqpn_train);
    }
    if (auto it = j.find("trainer"); it != j.end()) parse_trainer(*it, config.trainer);
  } catch (const json::exception& e) {
    throw ConfigError("config type error in " + path + ": " + e.what());
  }
  preset_weights(config.preset);
  return config;
}

void write_resolved_config(const ExperimentConfig& config, const std::string& path) {
  json j;
  j["seed"] = config.seed;
  j["out_dir"] = config.out_dir;
  j["data_dir"] = config.data_dir;
  j["checkpoint"] = config.checkpoint;
  j["preset"] = config.preset;
  j["policy"] = config.policy;
  j["sweep_target"] = config.sweep_target;
  j["num_traces"] = config.num_traces;
  j["trace_len"] = config.trace_len;
  j["num_clips"] = config.num_clips;
  j["train_fraction"] = config.train_fraction;
  j["sim"] = {{"slot_s", config.sim.slot_s},
              {"packet_size_bytes", config.sim.packet_size_bytes},
              {"queue_capacity", config.sim.queue_capacity}};
  j["vqpn"] = {{"mode", vqpn::to_string(config.vqpn.mode)},
               {"filters", config.vqpn.filters},
               {"hidden", config.vqpn.hidden},
               {"lr", config.vqpn.lr},
               {"lambda", config.vqpn.lambda},
               {"max_epochs", config.vqpn_train.max_epochs},
               {"patience", config.vqpn_train.patience}};
  j["trainer"] = {{"backbone", vqrl::to_string(config.trainer.net.backbone)},
                  {"seq_len", config.trainer.net.seq_len},
                  {"channels", config.trainer.net.channels},
                  {"merge", config.trainer.net.merge},
                  {"gamma", config.trainer.gamma},
                  {"entropy_beta_start", config.trainer.entropy_beta_start},
                  {"entropy_beta_end", config.trainer.entropy_beta_end},
                  {"n_step", config.trainer.n_step},
                  {"lr_actor", config.trainer.lr_actor},
                  {"lr_critic", config.trainer.lr_critic},
                  {"workers", config.trainer.workers},
                  {"iterations", config.trainer.iterations}};
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

void save_agent_checkpoint(const std::string& path, vqrl::CentralStore& store) {
  std::vector<Parameter> params;
  for (const Parameter& p : store.policy().model().params()) params.push_back(p);
  for (const Parameter& p : store.value_net().model().params()) params.push_back(p);
  fs::create_directories(fs::path(path).parent_path());
  save_checkpoint(path, params);
}

void load_agent_checkpoint(const std::string& path, vqrl::PolicyNet& policy) {
  if (!fs::is_regular_file(path)) {
    throw DataError("missing agent checkpoint: " + path);
  }
  restore_checkpoint(path, policy.model().params());
}

int cmd_gen_data(const ExperimentConfig& config) {
  const fs::path root = config.resolved_data_dir();
  for (std::size_t i = 0; i < config.num_traces; ++i) {
    trace::MarkovTraceConfig mk =
        markov_family(config.trace_len, config.seed * 1000003 + i);
    const std::string id = index_name("trace", i, "");
    trace::BandwidthTrace tr = trace::gen_markov_trace(mk, id);
    std::ofstream out = open_out(root / "traces" / (id + ".txt"));
    trace::serialize_bandwidth_trace(out, tr);
  }
  std::vector<quality::QualityCurveSeries> series;
  for (std::size_t i = 0; i < config.num_traces; ++i) {
    const std::string id = index_name("series", i, "");
    series.push_back(quality::gen_quality_curves(profile_for(i), config.trace_len,
                                                 config.seed * 9176 + i, id));
    std::ofstream out = open_out(root / "quality" / (id + ".csv"));
    quality::write_quality_csv(out, series.back());
  }
  for (std::size_t i = 0; i < config.num_clips && i < series.size(); ++i) {
    quality::FrameClip clip = quality::gen_frame_clip(series[i], config.seed * 31 + i);
    std::ofstream out = open_out(root / "clips" / index_name("clip", i, ".qfrm"));
    quality::write_frame_clip(out, clip);
  }
  write_resolved_config(config, (fs::path(config.out_dir) / "config.gen-data.json").string());
  return kExitOk;
}

int cmd_train_vqpn(const ExperimentConfig& config) {
  const fs::path root = config.resolved_data_dir();
  std::vector<vqpn::QualitySample> samples;
  if (config.vqpn.mode == vqpn::InputMode::kCurves) {
    for (const quality::QualityCurveSeries& s : load_series(root / "quality")) {
      auto more = vqpn::samples_from_series(s);
      samples.insert(samples.end(), more.begin(), more.end());
    }
  } else {
    const auto series = load_series(root / "quality");
    const auto clips = sorted_files(root / "clips", ".qfrm");
    for (std::size_t i = 0; i < clips.size() && i < series.size(); ++i) {
      quality::FrameClip clip = quality::parse_frame_clip_file(clips[i].string());
      auto more = vqpn::samples_from_clip(clip, series[i]);
      samples.insert(samples.end(), more.begin(), more.end());
    }
  }
  if (samples.size() < 4) throw DataError("too few training samples");
  auto [train_set, val_set] =
      trace::split_dataset(samples, config.train_fraction, config.seed);

  vqpn::VqpnConfig model_cfg = config.vqpn;
  model_cfg.seed = config.seed;
  vqpn::VqpnModel model(model_cfg);
  vqpn::TrainOptions opts = config.vqpn_train;
  opts.shuffle_seed = config.seed + 7;
  const vqpn::TrainReport report = vqpn::train(model, train_set, val_set, opts);

  const fs::path out_dir = config.out_dir;
  {
    std::ofstream out = open_out(out_dir / "vqpn_metrics.csv");
    out << "epoch,train_loss,val_loss,best_val_loss\n";
    out.precision(17);
    for (const vqpn::EpochRecord& e : report.epochs) {
      out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ','
          << e.best_val_loss << '\n';
    }
  }
  {
    std::ofstream out = open_out(out_dir / "vqpn_summary.csv");
    out << "best_epoch,best_val_loss,heldout_smape_pct,persistence_smape_pct\n";
    out.precision(17);
    out << report.best_epoch << ',' << report.best_val_loss << ','
        << vqpn::eval_smape(model, val_set) << ',';
    if (config.vqpn.mode == vqpn::InputMode::kCurves) {
      out << vqpn::persistence_smape(val_set);
    } else {
      out << "nan";
    }
    out << '\n';
  }
  save_checkpoint(default_checkpoint(config, "vqpn.ckpt").string(),
                  model.model().params());
  write_resolved_config(config, (out_dir / "config.train-vqpn.json").string());
  return kExitOk;
}

namespace {

std::pair<std::vector<trace::BandwidthTrace>, std::vector<quality::QualityCurveSeries>>
load_paired_corpus(const fs::path& root) {
  auto traces = load_traces(root / "traces");
  auto series = load_series(root / "quality");
  if (traces.size() != series.size()) {
    throw DataError("trace/quality count mismatch: " + std::to_string(traces.size()) +
                    " vs " + std::to_string(series.size()));
  }
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].size() != series[i].size()) {
      throw DataError("length mismatch for " + traces[i].id);
    }
  }
  return {std::move(traces), std::move(series)};
}

}  // namespace

int cmd_train_vqrl(const ExperimentConfig& config) {
  const auto [traces, series] = load_paired_corpus(config.resolved_data_dir());
  vqrl::TrainerConfig trainer = config.trainer;
  trainer.seed = config.seed;
  trainer.net.seed = config.seed + 5;
  vqrl::CentralStore store(trainer.net, trainer.lr_actor, trainer.lr_critic);
  const vqrl::TrainResult result = vqrl::train_agent(store, trainer, traces, series,
                                                     config.sim,
                                                     preset_weights(config.preset));
  const fs::path out_dir = config.out_dir;
  {
    std::ofstream out = open_out(out_dir / "vqrl_log.csv");
    vqrl::write_training_log(out, result.log);
  }
  save_agent_checkpoint(default_checkpoint(config, "vqrl.ckpt").string(), store);
  write_resolved_config(config, (out_dir / "config.train-vqrl.json").string());
  return kExitOk;
}

int cmd_eval(const ExperimentConfig& config) {
  const auto [traces, series] = load_paired_corpus(config.resolved_data_dir());
  const qoe::QoeWeights weights = preset_weights(config.preset);

  std::vector<std::string> names;
  if (config.policy == "all") {
    for (std::size_t i = 0; i < quality::kNumBitrates; ++i) {
      names.push_back("fixed:" + std::to_string(i));
    }
    names.push_back("loss");
    names.push_back("delay");
    names.push_back("offline-optimal");
    if (fs::is_regular_file(default_checkpoint(config, "vqrl.ckpt"))) {
      names.push_back("qarc");
    }
  } else {
    names.push_back(config.policy);
  }

  std::unique_ptr<vqrl::PolicyNet> agent;
  auto make_policy = [&](const std::string& name) -> std::unique_ptr<session::Policy> {
    if (name.rfind("fixed:", 0) == 0) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(name.substr(6));
      } catch (const std::exception&) {
        throw ConfigError("bad fixed policy index: " + name);
      }
      if (idx >= quality::kNumBitrates) {
        throw ConfigError("fixed policy index out of range: " + name);
      }
      return std::make_unique<baselines::FixedBitratePolicy>(idx);
    }
    if (name == "loss") return std::make_unique<baselines::LossBasedPolicy>();
    if (name == "delay") return std::make_unique<baselines::DelayBasedPolicy>();
    if (name == "qarc") {
      if (!agent) {
        agent = std::make_unique<vqrl::PolicyNet>(config.trainer.net);
        load_agent_checkpoint(default_checkpoint(config, "vqrl.ckpt").string(), *agent);
      }
      return std::make_unique<vqrl::NetPolicy>(*agent, vqrl::ActionMode::kGreedy);
    }
    throw ConfigError("unknown policy: " + name);
  };

  std::vector<EvalRow> rows;
  for (const std::string& name : names) {
    for (std::size_t i = 0; i < traces.size(); ++i) {
      netsim::SimConfig sim = config.sim;
      sim.seed = config.seed * 65537 + i;
      std::vector<session::SessionStep> steps;
      if (name == "offline-optimal") {
        steps = baselines::offline_optimal_high_bitrate(traces[i], series[i], sim, weights);
      } else {
        auto policy = make_policy(name);
        steps = session::run_session(*policy, traces[i], series[i], sim, weights);
      }
      rows.push_back(summarize(name, traces[i].id, steps, weights));
    }
  }
  std::ofstream out = open_out(fs::path(config.out_dir) / "eval.csv");
  write_eval_csv(out, rows);
  write_resolved_config(config,
                        (fs::path(config.out_dir) / "config.eval.json").string());
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& config) {
  const fs::path out_dir = config.out_dir;
  if (config.sweep_target == "vqpn-table1") {
    std::vector<vqpn::QualitySample> samples;
    for (const quality::QualityCurveSeries& s :
         load_series(fs::path(config.resolved_data_dir()) / "quality")) {
      auto more = vqpn::samples_from_series(s);
      samples.insert(samples.end(), more.begin(), more.end());
    }
    if (samples.size() < 4) throw DataError("too few sweep samples");
    auto [train_set, val_set] =
        trace::split_dataset(samples, config.train_fraction, config.seed);
    vqpn::VqpnConfig base = config.vqpn;
    base.mode = vqpn::InputMode::kCurves;
    base.seed = config.seed;
    vqpn::TrainOptions opts = config.vqpn_train;
    opts.shuffle_seed = config.seed + 7;
    const auto cells = vqpn::sweep_hyperparams(vqpn::default_sweep_pairs(),
                                               vqpn::default_sweep_lrs(), train_set,
                                               val_set, opts, base);
    std::ofstream out = open_out(out_dir / "sweep_vqpn.csv");
    vqpn::write_sweep_csv(out, cells);
  } else if (config.sweep_target == "vqrl-fig7") {
    const auto [traces, series] = load_paired_corpus(config.resolved_data_dir());
    const std::vector<std::pair<std::size_t, std::size_t>> grid = {
        {5, 64}, {10, 64}, {10, 128}};
    std::ofstream out = open_out(out_dir / "sweep_vqrl.csv");
    out << "k,c,mean_reward,seed\n";
    out.precision(17);
    for (const auto& [k, c] : grid) {
      vqrl::TrainerConfig trainer = config.trainer;
      trainer.seed = config.seed;
      trainer.net.seed = config.seed + 5;
      trainer.net.seq_len = k;
      trainer.net.channels = c;
      vqrl::CentralStore store(trainer.net, trainer.lr_actor, trainer.lr_critic);
      const vqrl::TrainResult result = vqrl::train_agent(
          store, trainer, traces, series, config.sim, preset_weights(config.preset));
      const std::size_t tail = std::max<std::size_t>(1, result.log.size() / 10);
      double mean = 0.0;
      for (std::size_t i = result.log.size() - tail; i < result.log.size(); ++i) {
        mean += result.log[i].mean_reward;
      }
      mean /= static_cast<double>(tail);
      out << k << ',' << c << ',' << mean << ',' << trainer.seed << '\n';
    }
  } else {
    throw ConfigError("unknown sweep target: " + config.sweep_target);
  }
  write_resolved_config(config, (out_dir / "config.sweep.json").string());
  return kExitOk;
}

int run_command(const std::string& command, const ExperimentConfig& config) {
  try {
    if (command == "gen-data") return cmd_gen_data(config);
    if (command == "train-vqpn") return cmd_train_vqpn(config);
    if (command == "train-vqrl") return cmd_train_vqrl(config);
    if (command == "eval") return cmd_eval(config);
    if (command == "sweep") return cmd_sweep(config);
    throw ConfigError("unknown command: " + command);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const trace::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const CheckpointError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace qarc::experiment
