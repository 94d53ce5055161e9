#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcam/evaluator.hpp"
#include "pcam/io.hpp"
#include "pcam/learner.hpp"
#include "pcam/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartial = 3;

// "0..7" or "0,1,5"
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto range_pos = text.find("..");
  if (range_pos != std::string::npos) {
    const std::uint64_t lo = std::stoull(text.substr(0, range_pos));
    const std::uint64_t hi = std::stoull(text.substr(range_pos + 2));
    if (hi < lo) throw CLI::ValidationError("--seeds", "range upper bound below lower bound");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "empty seed list");
  return seeds;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  if (values.empty()) throw CLI::ValidationError("list must not be empty");
  return values;
}

std::vector<pcam::Setting> parse_settings(const std::string& text) {
  std::vector<pcam::Setting> settings;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) settings.push_back(pcam::setting_from_string(item));
  if (settings.empty()) throw CLI::ValidationError("--settings", "empty settings list");
  return settings;
}

std::string default_out() {
  if (const char* env = std::getenv("PCAM_OUT")) return env;
  return "out";
}

int default_jobs() {
  if (const char* env = std::getenv("PCAM_JOBS")) return std::max(1, std::atoi(env));
  return 1;
}

struct CommonOpts {
  std::string config_file;
  std::string out = default_out();
  pcam::SimParams sim;
  pcam::HyperParams hyper;

  void load() {
    if (!config_file.empty()) pcam::apply_config_file(config_file, sim, hyper);
  }
};

int cmd_train(const CommonOpts& common, const std::string& setting_text,
              std::uint64_t seed, double alpha_ped, double alpha_av, int episodes) {
  const pcam::Setting setting = pcam::setting_from_string(setting_text);
  if (setting == pcam::Setting::kSX) {
    std::cerr << "error: setting X has no learning agent; nothing to train\n";
    return kExitUsage;
  }

  pcam::RunSpec spec;
  spec.setting = setting;
  spec.seed = seed;
  spec.episodes = episodes;
  spec.alpha_av = alpha_av;
  spec.alpha_ped = alpha_ped;
  spec.eta_train = common.sim.eta_train;
  spec.eta_eval = common.sim.eta_eval;

  const std::string dir =
      pcam::checkpoint_dir(common.out, setting, alpha_ped, seed);
  pcam::ensure_dir(dir);
  try {
    pcam::TrainResult result = pcam::run_training(spec, common.sim, common.hyper);
    const std::uint64_t hash = pcam::config_hash(common.sim, common.hyper);
    pcam::Checkpoint av{"av", episodes, hash, common.hyper,
                        result.av->decision_net(), result.av->target_net()};
    pcam::save_checkpoint(dir + "/av.ckpt", av);
    if (result.ped) {
      pcam::Checkpoint ped{"ped", episodes, hash, common.hyper,
                           result.ped->decision_net(), result.ped->target_net()};
      pcam::save_checkpoint(dir + "/ped.ckpt", ped);
    }
    pcam::write_trainlog(dir + "/trainlog.jsonl", result.log);
    pcam::write_manifest(dir, common.sim, common.hyper,
                         {{"command", "train"},
                          {"setting", pcam::to_string(setting)},
                          {"seed", seed},
                          {"episodes", episodes},
                          {"alpha_ped", alpha_ped},
                          {"alpha_av", alpha_av}});
  } catch (const pcam::DivergenceError& e) {
    nlohmann::json diag{{"error", "divergence"},
                        {"agent", e.agent},
                        {"learner_step", e.step}};
    std::ofstream out(dir + "/divergence.json", std::ios::trunc);
    out << diag.dump(2) << '\n';
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::cout << "trained setting " << pcam::to_string(setting) << " seed " << seed
            << " alpha_ped " << pcam::fmt_double(alpha_ped) << " -> " << dir << "\n";
  return kExitOk;
}

int cmd_eval(const CommonOpts& common, const std::string& setting_text,
             double alpha_ped, double alpha_av, std::uint64_t seed, int episodes,
             std::uint64_t eval_seed, const std::string& checkpoints) {
  const pcam::Setting setting = pcam::setting_from_string(setting_text);
  std::string ckpt_dir;
  if (setting != pcam::Setting::kSX) {
    if (checkpoints.empty()) {
      std::cerr << "error: --checkpoints is required for learned settings\n";
      return kExitUsage;
    }
    ckpt_dir = pcam::checkpoint_dir(checkpoints, setting, alpha_ped, seed);
  }

  pcam::EvalPolicies policies =
      pcam::make_policies(setting, ckpt_dir, common.sim, common.hyper);
  const pcam::RunMetrics metrics =
      pcam::evaluate(*policies.av, *policies.ped, common.sim, setting, alpha_ped,
                     alpha_av, seed, episodes, eval_seed);

  pcam::ensure_dir(common.out);
  pcam::write_metrics_csv(common.out + "/metrics.csv", {metrics});
  pcam::write_manifest(common.out, common.sim, common.hyper,
                       {{"command", "eval"},
                        {"setting", pcam::to_string(setting)},
                        {"seed", seed},
                        {"alpha_ped", alpha_ped},
                        {"alpha_av", alpha_av},
                        {"episodes", episodes},
                        {"eval_seed", eval_seed},
                        {"checkpoints", checkpoints}});
  std::cout << pcam::metrics_csv_header() << "\n"
            << pcam::metrics_csv_row(metrics) << "\n";
  return kExitOk;
}

int cmd_sweep(const CommonOpts& common, const std::string& settings_text,
              const std::string& seeds_text, const std::string& alphas_text,
              int jobs, int train_episodes, int eval_episodes,
              std::uint64_t eval_seed, double alpha_av, bool no_train) {
  pcam::SweepGrid grid;
  grid.settings = parse_settings(settings_text);
  grid.seeds = parse_seeds(seeds_text);
  grid.alphas = parse_doubles(alphas_text);
  grid.train_episodes = train_episodes;
  grid.eval_episodes = eval_episodes;
  grid.eval_seed = eval_seed;
  grid.alpha_av = alpha_av;
  grid.jobs = jobs;
  grid.train_missing = !no_train;

  const pcam::SweepResult result =
      pcam::run_sweep(grid, common.sim, common.hyper, common.out);
  pcam::write_manifest(common.out, common.sim, common.hyper,
                       {{"command", "sweep"},
                        {"settings", settings_text},
                        {"seeds", seeds_text},
                        {"alphas", alphas_text},
                        {"train_episodes", train_episodes},
                        {"eval_episodes", eval_episodes},
                        {"eval_seed", eval_seed},
                        {"alpha_av", alpha_av},
                        {"jobs", jobs}});
  for (const std::string& gap : result.gaps) std::cerr << "warning: " << gap << "\n";
  std::cout << "sweep complete: " << result.cells.size() << " cells, "
            << result.gaps.size() << " gaps -> " << common.out << "\n";
  return result.all_ok ? kExitOk : kExitPartial;
}

int cmd_replay(const CommonOpts& common, const std::string& setting_text,
               const std::string& checkpoints, std::uint64_t seed,
               double alpha_ped_ckpt, double ttc_init, double v_init,
               double b_street, const std::string& side_text, double v_walk,
               double alpha_ped, double alpha_av, const std::string& out_file) {
  const pcam::Setting setting = pcam::setting_from_string(setting_text);
  std::string ckpt_dir;
  if (setting != pcam::Setting::kSX) {
    if (checkpoints.empty()) {
      std::cerr << "error: --checkpoints is required for learned settings\n";
      return kExitUsage;
    }
    ckpt_dir = pcam::checkpoint_dir(checkpoints, setting, alpha_ped_ckpt, seed);
  }

  pcam::ScenarioConfig cfg;
  cfg.v_av_init = v_init;
  cfg.ttc_init = ttc_init;
  cfg.b_street = b_street;
  cfg.side = side_text == "right" ? pcam::Side::kRight : pcam::Side::kLeft;
  cfg.v_walk = v_walk;
  cfg.dt = common.sim.dt;
  cfg.timeout = common.sim.timeout;
  cfg.zeta_av = common.sim.zeta_av;
  cfg.zeta_ped = common.sim.zeta_ped;
  cfg.v_limit = common.sim.v_limit;
  cfg.eta = common.sim.eta_eval;
  pcam::validate_config(cfg);

  pcam::EvalPolicies policies =
      pcam::make_policies(setting, ckpt_dir, common.sim, common.hyper);

  const std::filesystem::path out_path(out_file);
  if (out_path.has_parent_path()) pcam::ensure_dir(out_path.parent_path().string());
  pcam::TrajectoryWriter writer(out_file);
  pcam::EpisodeOptions options;
  options.alpha_av = alpha_av;
  options.alpha_ped = alpha_ped;
  options.trajectory = [&writer](const pcam::StepRecord& rec) { writer.write(rec); };

  pcam::RandomSource noise_av = pcam::RandomSource::derive(seed, 201);
  pcam::RandomSource noise_ped = pcam::RandomSource::derive(seed, 202);
  const pcam::EpisodeResult ep = pcam::run_episode(
      cfg, *policies.av, *policies.ped, noise_av, noise_ped, options);
  std::cout << "replay: " << ep.steps << " steps, collided=" << ep.collided
            << ", t_end_av=" << pcam::fmt_double(ep.t_end_av)
            << "s, t_end_ped=" << pcam::fmt_double(ep.t_end_ped) << "s -> "
            << out_file << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crosswalk interaction simulator and learning harness"};
  app.require_subcommand(1);

  CommonOpts common;

  // train
  auto* train = app.add_subcommand("train", "Train the learning agents of one setting");
  std::string train_setting;
  std::uint64_t train_seed = 0;
  double train_alpha_ped = 0.0, train_alpha_av = 0.05;
  int train_episodes = 8000;
  train->add_option("--setting", train_setting, "Setting: 1 or 2")->required();
  train->add_option("--seed", train_seed, "Master seed")->required();
  train->add_option("--alpha-ped", train_alpha_ped, "Pedestrian noise level")->required();
  train->add_option("--alpha-av", train_alpha_av, "AV noise level")->capture_default_str();
  train->add_option("--episodes", train_episodes, "Training episodes")->capture_default_str();
  train->add_option("--config", common.config_file, "Config file");
  train->add_option("--out", common.out, "Output root")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate frozen policies");
  std::string eval_setting, eval_ckpts;
  double eval_alpha_ped = 0.0, eval_alpha_av = 0.05;
  std::uint64_t eval_run_seed = 0, eval_seed = 1000;
  int eval_episodes = 2000;
  eval->add_option("--setting", eval_setting, "Setting: 1, 2 or X")->required();
  eval->add_option("--alpha-ped", eval_alpha_ped, "Pedestrian noise level")->required();
  eval->add_option("--alpha-av", eval_alpha_av, "AV noise level")->capture_default_str();
  eval->add_option("--seed", eval_run_seed, "Training seed selecting the checkpoint")->capture_default_str();
  eval->add_option("--episodes", eval_episodes, "Evaluation episodes")->capture_default_str();
  eval->add_option("--eval-seed", eval_seed, "Evaluation seed")->capture_default_str();
  eval->add_option("--checkpoints", eval_ckpts, "Checkpoint root (train output)");
  eval->add_option("--config", common.config_file, "Config file");
  eval->add_option("--out", common.out, "Output root")->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Train and evaluate a settings x seeds x alphas grid");
  std::string sweep_settings = "1,2,X", sweep_seeds = "0..7",
              sweep_alphas = "0,0.1,0.2,0.3,0.4,0.5";
  int sweep_jobs = default_jobs();
  int sweep_train_episodes = 8000, sweep_eval_episodes = 2000;
  std::uint64_t sweep_eval_seed = 1000;
  double sweep_alpha_av = 0.05;
  bool sweep_no_train = false;
  sweep->add_option("--settings", sweep_settings, "Comma list of settings")->capture_default_str();
  sweep->add_option("--seeds", sweep_seeds, "Seed list: 0..7 or 0,1,2")->capture_default_str();
  sweep->add_option("--alphas", sweep_alphas, "Comma list of pedestrian noise levels")->capture_default_str();
  sweep->add_option("--jobs", sweep_jobs, "Parallel cells")->capture_default_str();
  sweep->add_option("--episodes", sweep_train_episodes, "Training episodes per cell")->capture_default_str();
  sweep->add_option("--eval-episodes", sweep_eval_episodes, "Evaluation episodes per cell")->capture_default_str();
  sweep->add_option("--eval-seed", sweep_eval_seed, "Evaluation seed")->capture_default_str();
  sweep->add_option("--alpha-av", sweep_alpha_av, "AV noise level")->capture_default_str();
  sweep->add_flag("--no-train", sweep_no_train, "Skip cells with missing checkpoints");
  sweep->add_option("--config", common.config_file, "Config file");
  sweep->add_option("--out", common.out, "Output root")->capture_default_str();

  // replay
  auto* replay = app.add_subcommand("replay", "Export one episode trajectory for a fixed scenario");
  std::string replay_setting, replay_ckpts, replay_side = "left",
              replay_out = "trajectory.jsonl";
  std::uint64_t replay_seed = 0;
  double replay_alpha_ckpt = 0.0, replay_ttc = 4.5, replay_v_init = 11.111,
         replay_b_street = 6.0, replay_v_walk = 1.47, replay_alpha_ped = 0.0,
         replay_alpha_av = 0.0;
  replay->add_option("--setting", replay_setting, "Setting: 1, 2 or X")->required();
  replay->add_option("--checkpoints", replay_ckpts, "Checkpoint root");
  replay->add_option("--seed", replay_seed, "Training seed selecting the checkpoint")->capture_default_str();
  replay->add_option("--alpha-ped-ckpt", replay_alpha_ckpt,
                     "Noise level the checkpoint was trained at")->capture_default_str();
  replay->add_option("--ttc-init", replay_ttc, "Initial time to collision (s)")->capture_default_str();
  replay->add_option("--v-init", replay_v_init, "Initial AV speed (m/s)")->capture_default_str();
  replay->add_option("--b-street", replay_b_street, "Street width (m)")->capture_default_str();
  replay->add_option("--side", replay_side, "Start side: left or right")->capture_default_str();
  replay->add_option("--v-walk", replay_v_walk, "Walking speed (m/s)")->capture_default_str();
  replay->add_option("--alpha-ped", replay_alpha_ped, "Replay pedestrian noise")->capture_default_str();
  replay->add_option("--alpha-av", replay_alpha_av, "Replay AV noise")->capture_default_str();
  replay->add_option("--config", common.config_file, "Config file");
  replay->add_option("--out", replay_out, "Trajectory file")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    common.load();
    if (train->parsed())
      return cmd_train(common, train_setting, train_seed, train_alpha_ped,
                       train_alpha_av, train_episodes);
    if (eval->parsed())
      return cmd_eval(common, eval_setting, eval_alpha_ped, eval_alpha_av,
                      eval_run_seed, eval_episodes, eval_seed, eval_ckpts);
    if (sweep->parsed())
      return cmd_sweep(common, sweep_settings, sweep_seeds, sweep_alphas,
                       sweep_jobs, sweep_train_episodes, sweep_eval_episodes,
                       sweep_eval_seed, sweep_alpha_av, sweep_no_train);
    if (replay->parsed())
      return cmd_replay(common, replay_setting, replay_ckpts, replay_seed,
                        replay_alpha_ckpt, replay_ttc, replay_v_init,
                        replay_b_street, replay_side, replay_v_walk,
                        replay_alpha_ped, replay_alpha_av, replay_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
